import math
import warnings

import numpy as np
import pytest

from cmldde import (
    ModelParams,
    RootNotFoundError,
    StabilityState,
    VerdictSource,
    b1_coefficient,
    characteristic_residual,
    classify_positive,
    classify_trivial,
    hopf_delay,
    hopf_point,
    leading_roots,
    omega0,
)
from cmldde.linear_analysis import _omega0
from conftest import sample_params
from _oracles import omega0_reference


def params_with_ratio(ratio, n=2.0, beta0=2.0, k=1.5, r=1.0):
    return ModelParams(n=n, beta0=beta0, delta=beta0 * (k - 1.0) / ratio, k=k, r=r)


class TestClassifyTrivial:
    def test_stable_below_one(self):
        v = classify_trivial(params_with_ratio(0.5))
        assert v.state is StabilityState.ASYMPTOTICALLY_STABLE
        assert v.source is VerdictSource.P2_1

    def test_marginal_at_one(self):
        v = classify_trivial(params_with_ratio(1.0))
        assert v.state is StabilityState.MARGINALLY_STABLE
        assert v.source is VerdictSource.P2_2

    def test_unstable_above_one(self):
        v = classify_trivial(params_with_ratio(2.0))
        assert v.state is StabilityState.UNSTABLE
        assert v.source is VerdictSource.P2_3


class TestOmega0:
    def test_quarter_period_when_sum_vanishes(self):
        # delta + b1 = 0 exactly at these dyadic parameters
        p = ModelParams(n=2, beta0=1.0, delta=0.125, k=1.5, r=3.0)
        assert b1_coefficient(p).sum_db1 == 0.0
        assert omega0(p) == pytest.approx(math.pi / (2.0 * 3.0), rel=1e-12)

    def test_reference_point(self, p3):
        w0 = omega0(p3)
        oracle = omega0_reference(b1_coefficient(p3).sum_db1, p3.r)
        assert w0 == pytest.approx(oracle, abs=1e-12)
        assert abs(w0 - 0.0277) < 1e-4
        lin = b1_coefficient(p3)
        assert abs(w0 * math.cos(w0 * p3.r) + lin.sum_db1 * math.sin(w0 * p3.r)) < 1e-12

    def test_large_positive_sum_pushes_root_to_pi(self):
        # w cot(w r) = -s with s -> +inf drives the root toward pi/r from below
        w = _omega0(1000.0, 1.0)
        assert 0.99 * math.pi < w < math.pi

    def test_no_root_when_bracket_misses(self):
        # s < 0 with r > 1/|s| leaves no root in (0, pi/r)
        with pytest.raises(RootNotFoundError):
            _omega0(-5.0, 1.0)

    def test_residual_and_interval_randomized(self):
        rng = np.random.default_rng(6)
        checked = 0
        for _ in range(200):
            s = rng.uniform(-2.0, 3.0)
            r = rng.uniform(0.1, 10.0)
            if s < 0.0 and r >= 1.0 / abs(s):
                continue
            w = _omega0(s, r)
            assert 0.0 < w < math.pi / r
            assert abs(w * math.cos(w * r) + s * math.sin(w * r)) < 1e-12
            checked += 1
        assert checked > 100


class TestClassifyPositive:
    def test_positive_slope_always_stable(self):
        # n = 1 forces b1 > 0
        p = ModelParams(n=1, beta0=2.0, delta=0.1, k=1.5, r=4.0)
        assert b1_coefficient(p).b1 > 0.0
        v = classify_positive(p)
        assert v.state is StabilityState.ASYMPTOTICALLY_STABLE
        assert v.source is VerdictSource.P2_6

    def test_reference_point_window(self, p3):
        v = classify_positive(p3)
        assert v.state is StabilityState.ASYMPTOTICALLY_STABLE
        assert v.source is VerdictSource.P2_4
        assert "omega0" in v.detail

    def test_threshold_crossing(self, hopf_example):
        n, beta0, k, delta = hopf_example
        before = ModelParams(n=n, beta0=beta0, delta=delta, k=k, r=0.3558)
        after = ModelParams(n=n, beta0=beta0, delta=delta, k=k, r=0.36)
        vb = classify_positive(before)
        assert vb.state is StabilityState.ASYMPTOTICALLY_STABLE
        va = classify_positive(after)
        assert va.state is StabilityState.UNSTABLE
        assert va.source is VerdictSource.HOPF_EXCEEDED
        assert va.detail["r_hopf"] == pytest.approx(0.3559114, rel=1e-5)

    def test_delay_independent_branch(self):
        # b1 < 0 but delta + b1 dominates |k b1|: stable for any delay
        p = ModelParams(n=2, beta0=1.0, delta=0.099, k=1.2, r=50.0)
        lin = b1_coefficient(p)
        assert lin.b1 < 0.0 and lin.sum_db1 > abs(lin.k_b1)
        v = classify_positive(p)
        assert v.state is StabilityState.ASYMPTOTICALLY_STABLE
        assert v.source is VerdictSource.P2_5

    def test_short_delay_branch_and_its_loss(self):
        base = dict(n=2, beta0=1.0, delta=0.085, k=1.2)
        lin = b1_coefficient(ModelParams(r=1.0, **base))
        assert lin.b1 < 0.0 and 0.0 < lin.sum_db1 < abs(lin.k_b1)
        r_h = hopf_delay(2, 1.0, 1.2, 0.085)
        v_in = classify_positive(ModelParams(r=0.5 * r_h, **base))
        assert v_in.state is StabilityState.ASYMPTOTICALLY_STABLE
        assert v_in.source is VerdictSource.P2_5
        v_out = classify_positive(ModelParams(r=1.05 * r_h, **base))
        assert v_out.state is StabilityState.UNSTABLE
        assert v_out.source is VerdictSource.HOPF_EXCEEDED

    def test_rescaling_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            p = sample_params(rng)
            v = classify_positive(p)
            for s in (0.5, 2.0):
                q = ModelParams(n=p.n, beta0=p.beta0 * s, delta=p.delta * s, k=p.k, r=p.r / s)
                assert classify_positive(q).state is v.state


class TestLeadingRoots:
    def test_degenerate_slope_collapses(self):
        p = ModelParams(n=3, beta0=3.0, delta=1.0, k=1.5, r=1.0)
        assert b1_coefficient(p).b1 == 0.0
        roots = leading_roots(p, 3)
        assert len(roots) == 1
        assert roots[0].re == pytest.approx(-1.0, rel=1e-14)
        assert roots[0].im == 0.0

    def test_pure_imaginary_pair_at_threshold(self, hopf_example):
        hp = hopf_point(*hopf_example)
        lead = leading_roots(hp.params, 1)[0]
        assert abs(lead.re) < 1e-8
        assert lead.im == pytest.approx(hp.omega_h, abs=1e-8)

    def test_reference_point_pair(self, p3):
        lead = leading_roots(p3, 1)[0]
        assert lead.re < 0.0
        assert lead.im > 0.0
        # consistent with the stability verdict there
        assert classify_positive(p3).state is StabilityState.ASYMPTOTICALLY_STABLE

    def test_residuals_order_and_dedup(self, p3):
        roots = leading_roots(p3, 5)
        assert len(roots) == 5
        res = [characteristic_residual(p3, z.value) for z in roots]
        assert max(res) < 1e-10
        reals = [z.re for z in roots]
        assert reals == sorted(reals, reverse=True)
        assert all(z.im >= 0.0 for z in roots)
        for i, a in enumerate(roots):
            for b in roots[i + 1:]:
                assert abs(a.value - b.value) > 1e-8

    def test_agreement_with_classifier(self):
        # decisive classifier verdicts must match the spectrum sign
        rng = np.random.default_rng(42)
        checked = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for _ in range(200):
                p = sample_params(rng)
                v = classify_positive(p)
                roots = leading_roots(p, 1)
                if not roots:
                    continue
                top = roots[0].re
                checked += 1
                if v.state is StabilityState.ASYMPTOTICALLY_STABLE:
                    assert top < -1e-9, (p, top)
                elif v.state is StabilityState.UNSTABLE:
                    assert top > 1e-9, (p, top)
        assert checked >= 200
