"""Linear stability of both equilibria and roots of the characteristic equation.

The linearization of the resting-cell equation around the positive equilibrium
is z'(t) = -(b1 + delta) z(t) + k b1 z(t - r), so stability is governed by the
transcendental equation lambda + (b1 + delta) - k b1 e^(-lambda r) = 0. The
classifier applies a fixed tree of sufficient conditions plus the known
delay threshold for oscillatory loss of stability; when none of them applies
it reports Undetermined rather than guessing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PreconditionError, RootNotFoundError
from .model import ModelParams, b1_coefficient

#: absolute tolerance for the measure-zero marginal case of the trivial branch
MARGINAL_TOL = 1e-12

#: Newton seed grid density for the root sweep (per axis)
SEED_GRID = 40


class StabilityState(Enum):
    ASYMPTOTICALLY_STABLE = "asymptotically stable"
    MARGINALLY_STABLE = "marginally stable"
    UNSTABLE = "unstable"
    UNDETERMINED = "undetermined"


class VerdictSource(Enum):
    """Which classification case fired (case tags P2.1-P2.6, plus the delay threshold)."""

    P2_1 = "P2.1"
    P2_2 = "P2.2"
    P2_3 = "P2.3"
    P2_4 = "P2.4"
    P2_5 = "P2.5"
    P2_6 = "P2.6"
    HOPF_EXCEEDED = "HopfExceeded"
    NONE = "None"


@dataclass(frozen=True)
class StabilityVerdict:
    state: StabilityState
    source: VerdictSource
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CharacteristicRoot:
    """One root of the characteristic equation; conjugates carry im >= 0."""

    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


def classify_trivial(params: ModelParams) -> StabilityVerdict:
    """Stability of the zero equilibrium from the renewal ratio beta0 (k-1)/delta."""
    ratio = params.renewal_ratio
    if abs(ratio - 1.0) <= MARGINAL_TOL:
        return StabilityVerdict(StabilityState.MARGINALLY_STABLE, VerdictSource.P2_2,
                                {"renewal_ratio": ratio})
    if ratio < 1.0:
        return StabilityVerdict(StabilityState.ASYMPTOTICALLY_STABLE, VerdictSource.P2_1,
                                {"renewal_ratio": ratio})
    return StabilityVerdict(StabilityState.UNSTABLE, VerdictSource.P2_3,
                            {"renewal_ratio": ratio})


def _omega_bracket_fn(s_sum: float, r: float):
    # reformulation of omega cot(omega r) = -(delta + b1) without the cot pole
    def f(w: float) -> float:
        return w * math.cos(w * r) + s_sum * math.sin(w * r)

    return f


def omega0(params: ModelParams) -> float:
    """Root in (0, pi/r) of omega cot(omega r) = -(delta + b1).

    Solved as omega cos(omega r) + (delta + b1) sin(omega r) = 0 by bisection
    on (1e-9, pi/r - 1e-9); raises RootNotFoundError when the bracket shows no
    sign change.
    """
    lin = b1_coefficient(params)
    return _omega0(lin.sum_db1, params.r)


def _omega0(s_sum: float, r: float) -> float:
    f = _omega_bracket_fn(s_sum, r)
    lo, hi = 1e-9, math.pi / r - 1e-9
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise RootNotFoundError(
            f"omega cot(omega r) = {-s_sum} has no root in (0, pi/r) at r = {r}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
        if hi - lo <= 1e-17 * hi:
            break
    return 0.5 * (lo + hi)


def classify_positive(params: ModelParams) -> StabilityVerdict:
    """Stability of the positive equilibrium.

    Applies the sufficient-condition cases P2.4 (b1 < 0, delta + b1 < 0),
    P2.5 (b1 < 0, delta + b1 > 0) and P2.6 (b1 > 0); if b1 < 0 and the delay
    exceeds the oscillatory-instability threshold the verdict is Unstable with
    source HopfExceeded. Anything else is honestly Undetermined.
    """
    lin = b1_coefficient(params)  # raises PreconditionError if y2 absent
    b1, s_sum, k_b1 = lin.b1, lin.sum_db1, lin.k_b1
    r = params.r
    detail = {"b1": b1, "sum_db1": s_sum, "k_b1": k_b1}

    if b1 > 0.0:
        return StabilityVerdict(StabilityState.ASYMPTOTICALLY_STABLE, VerdictSource.P2_6, detail)
    if b1 == 0.0:
        # characteristic equation collapses to lambda = -delta; outside the
        # classified cases, so report it as such
        return StabilityVerdict(StabilityState.UNDETERMINED, VerdictSource.NONE, detail)

    ratio = s_sum / k_b1  # both sides negative when s_sum < 0
    if s_sum < 0.0:
        # here |delta + b1| < |k b1| automatically (k > 1 and delta > 0)
        theta = math.acos(ratio)
        detail["arccos_ratio"] = theta
        if r < 1.0 / abs(s_sum):
            w0 = _omega0(s_sum, r)
            detail["omega0"] = w0
            if theta / w0 < r:
                return StabilityVerdict(
                    StabilityState.ASYMPTOTICALLY_STABLE, VerdictSource.P2_4, detail
                )
        r_h = theta / math.sqrt(k_b1 * k_b1 - s_sum * s_sum)
        detail["r_hopf"] = r_h
        if r > r_h:
            return StabilityVerdict(StabilityState.UNSTABLE, VerdictSource.HOPF_EXCEEDED, detail)
        return StabilityVerdict(StabilityState.UNDETERMINED, VerdictSource.NONE, detail)

    if s_sum > 0.0:
        if s_sum > abs(k_b1):
            return StabilityVerdict(
                StabilityState.ASYMPTOTICALLY_STABLE, VerdictSource.P2_5, detail
            )
        theta = math.acos(max(-1.0, min(1.0, ratio)))
        detail["arccos_ratio"] = theta
        w0 = _omega0(s_sum, r)
        detail["omega0"] = w0
        if r < theta / w0:
            return StabilityVerdict(
                StabilityState.ASYMPTOTICALLY_STABLE, VerdictSource.P2_5, detail
            )
        if s_sum < abs(k_b1):
            r_h = theta / math.sqrt(k_b1 * k_b1 - s_sum * s_sum)
            detail["r_hopf"] = r_h
            if r > r_h:
                return StabilityVerdict(
                    StabilityState.UNSTABLE, VerdictSource.HOPF_EXCEEDED, detail
                )
        return StabilityVerdict(StabilityState.UNDETERMINED, VerdictSource.NONE, detail)

    # s_sum == 0: boundary of the two case trees
    return StabilityVerdict(StabilityState.UNDETERMINED, VerdictSource.NONE, detail)


def characteristic_residual(params: ModelParams, lam: complex) -> float:
    """|lambda + (b1 + delta) - k b1 e^(-lambda r)| for the linearized equation."""
    lin = b1_coefficient(params)
    return abs(lam + lin.sum_db1 - lin.k_b1 * np.exp(-lam * params.r))


def leading_roots(params: ModelParams, count: int) -> list[CharacteristicRoot]:
    """Rightmost characteristic roots, sorted by descending real part.

    Runs damped-free Newton iteration from a SEED_GRID x SEED_GRID grid over
    re in [-5/r, 1/r], im in [0, 20 pi/r], keeps iterates whose residual drops
    below 1e-12, merges duplicates within 1e-8 and reports each conjugate pair
    once (im >= 0). Reliable for count up to about 8; emits a warning when
    fewer than `count` roots are confirmed.
    """
    if count < 1:
        raise PreconditionError("count must be >= 1")
    lin = b1_coefficient(params)
    s_sum, k_b1, r = lin.sum_db1, lin.k_b1, params.r

    if lin.b1 == 0.0:
        # equation degenerates to lambda = -(b1 + delta) = -delta
        return [CharacteristicRoot(-params.delta, 0.0)]

    re = np.linspace(-5.0 / r, 1.0 / r, SEED_GRID)
    im = np.linspace(0.0, 20.0 * math.pi / r, SEED_GRID)
    lam = (re[:, None] + 1j * im[None, :]).ravel()
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(80):
            ez = np.exp(-lam * r)
            g = lam + s_sum - k_b1 * ez
            gp = 1.0 + r * k_b1 * ez
            lam = lam - g / gp
        res = np.abs(lam + s_sum - k_b1 * np.exp(-lam * r))
    good = np.isfinite(lam) & np.isfinite(res) & (res < 1e-12)
    candidates = lam[good]
    candidates = np.where(candidates.imag < 0.0, np.conj(candidates), candidates)

    accepted: list[complex] = []
    for z in sorted(candidates, key=lambda z: -z.real):
        if all(abs(z - w) > 1e-8 for w in accepted):
            accepted.append(z)
    if len(accepted) < count:
        warnings.warn(
            f"root sweep confirmed only {len(accepted)} of {count} requested roots",
            RuntimeWarning,
            stacklevel=2,
        )
    return [CharacteristicRoot(float(z.real), float(z.imag)) for z in accepted[:count]]
