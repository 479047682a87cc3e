"""Acceptance gate: every criterion runs at its stated tolerance and prints a
pass/fail line (use `pytest -s tests/test_acceptance.py` to see them live)."""

import time

import numpy as np

from cmldde import (
    ConstantHistory,
    Criticality,
    ModelParams,
    OrbitKind,
    StabilityState,
    b1_coefficient,
    bistability_scan,
    characteristic_residual,
    classify_orbit,
    classify_positive,
    criticality_probe,
    eigenmode_history,
    equilibria,
    feedback,
    hopf_delay,
    hopf_omega,
    integrate_x,
    integrate_y,
    leading_roots,
    load_bautin_table,
    periodic_response,
    positive_equilibrium,
    verify_table,
)
from conftest import sample_params


def report(num, label, ok, detail, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num} ({label}): {status} — {detail} [{elapsed:.2f} s]")
    assert ok, f"criterion {num} ({label}): {detail}"


def test_criterion_1_golden_tables():
    started = time.perf_counter()
    checks = verify_table(load_bautin_table(), rel_tol=1e-4)
    elapsed = time.perf_counter() - started
    worst = max(c.rel_err for c in checks)
    ok = len(checks) == 36 and all(c.passed for c in checks) and elapsed < 1.0
    report(1, "golden tables", ok, f"36 rows, max rel err {worst:.2e}", elapsed)


def test_criterion_2_threshold_point(hopf_example):
    started = time.perf_counter()
    r_h = hopf_delay(*hopf_example)
    elapsed = time.perf_counter() - started
    err = abs(r_h - 0.3559114) / 0.3559114
    report(2, "threshold delay", err < 1e-5, f"r_H = {r_h:.7f}, rel err {err:.2e}", elapsed)


def test_criterion_3_reference_equilibrium(p3):
    started = time.perf_counter()
    pos = equilibria(p3)[1]
    elapsed = time.perf_counter() - started
    err_y = abs(pos.y_star - 3.95811) / 3.95811
    err_x = abs(pos.x_star - 3.24777) / 3.24777
    ok = err_y < 1e-5 and err_x < 1e-3
    report(3, "reference equilibrium", ok,
           f"y2 err {err_y:.2e} (tol 1e-5), x2 err {err_x:.2e} (tol 1e-3)", elapsed)


def test_criterion_4_threshold_transition(hopf_example):
    started = time.perf_counter()
    n, beta0, k, delta = hopf_example
    results = {}
    for r, horizon in ((0.3558, 6000.0), (0.36, 2000.0)):
        p = ModelParams(n=n, beta0=beta0, delta=delta, k=k, r=r)
        eq = positive_equilibrium(p)
        y_traj = integrate_y(p, ConstantHistory(1.01 * eq.y_star), horizon)
        x_traj = integrate_x(p, y_traj, eq.x_star)
        results[r] = (
            classify_orbit(y_traj, eq.y_star, horizon),
            classify_orbit(x_traj, eq.x_star, horizon),
        )
    elapsed = time.perf_counter() - started

    oy_pre, ox_pre = results[0.3558]
    oy_post, ox_post = results[0.36]
    cyclic = (OrbitKind.APPROACHES_CYCLE, OrbitKind.GROWING_OSCILLATION)
    ok = (
        oy_pre.kind is OrbitKind.CONVERGES_TO_EQUILIBRIUM
        and ox_pre.kind is OrbitKind.CONVERGES_TO_EQUILIBRIUM
        and oy_post.kind in cyclic
        and ox_post.kind in cyclic
        and oy_post.cycle is not None
        and oy_post.cycle.amplitude > 0.0
        and oy_post.cycle.steady
        and ox_post.cycle is not None
        and ox_post.cycle.amplitude > 0.0
        and elapsed < 10.0
    )
    report(4, "threshold transition", ok,
           f"r=0.3558 ({oy_pre.kind.value}/{ox_pre.kind.value}), "
           f"r=0.36 ({oy_post.kind.value} amp {oy_post.cycle.amplitude:.4f} / "
           f"{ox_post.kind.value} amp {ox_post.cycle.amplitude:.4f})", elapsed)


def test_criterion_5_bistable_zone(p3):
    started = time.perf_counter()
    eq = positive_equilibrium(p3)
    horizon = 180000.0

    kinds = {}
    for c in (0.2, 0.41, 0.55):
        y_traj = integrate_y(p3, eigenmode_history(p3, c), horizon)
        x_traj = integrate_x(p3, y_traj, eq.x_star)
        kinds[c] = (
            classify_orbit(y_traj, eq.y_star, horizon).kind,
            classify_orbit(x_traj, eq.x_star, horizon).kind,
        )
    scan = bistability_scan(p3, 0.41, 0.425, 0.002, horizon)
    elapsed = time.perf_counter() - started

    conv = OrbitKind.CONVERGES_TO_EQUILIBRIUM
    ok = (
        kinds[0.2] == (conv, conv)
        and kinds[0.41] == (conv, conv)
        and kinds[0.55] == (OrbitKind.APPROACHES_CYCLE, OrbitKind.APPROACHES_CYCLE)
        and 0.41 <= scan.c_converge < scan.c_escape <= 0.425
        and scan.c_escape - scan.c_converge <= 0.002
        and elapsed < 300.0
    )
    report(5, "bistable zone", ok,
           f"probes {{0.2: {kinds[0.2][0].value}, 0.41: {kinds[0.41][0].value}, "
           f"0.55: {kinds[0.55][0].value}}}, bracket "
           f"({scan.c_converge:.6f}, {scan.c_escape:.6f})", elapsed)


def test_criterion_6_supercritical_onset(hopf_example):
    started = time.perf_counter()
    n, beta0, k, delta = hopf_example
    rep = criticality_probe(n, beta0, k, delta, [-0.0001, 0.0004, 0.0008, 0.0012], 5000.0)
    elapsed = time.perf_counter() - started
    ok = (
        rep.verdict is Criticality.SUPERCRITICAL
        and rep.r_squared is not None
        and rep.r_squared >= 0.9
        and rep.slope > 0.0
        and elapsed < 60.0
    )
    report(6, "supercritical onset", ok,
           f"verdict {rep.verdict.value}, R^2 {rep.r_squared:.5f}, slope {rep.slope:.4f}",
           elapsed)


def test_criterion_7_characteristic_residuals():
    started = time.perf_counter()
    worst = 0.0
    for row in load_bautin_table():
        r_h = hopf_delay(row.n, row.beta0, row.k, row.delta)
        w_h = hopf_omega(row.n, row.beta0, row.k, row.delta)
        params = ModelParams(n=row.n, beta0=row.beta0, delta=row.delta, k=row.k, r=r_h)
        worst = max(worst, characteristic_residual(params, 1j * w_h))
    elapsed = time.perf_counter() - started
    report(7, "characteristic residuals", worst < 1e-10,
           f"max residual {worst:.2e} over 36 points", elapsed)


def test_criterion_8_property_suites(p3):
    started = time.perf_counter()
    failures = []

    # RK4 self-convergence factor >= 12 under dt halving
    hist = eigenmode_history(p3, 0.3)
    ends = {div: integrate_y(p3, hist, p3.r, dt=p3.r / div).value_at(p3.r) for div in (8, 16, 64)}
    factor = abs(ends[8] - ends[64]) / abs(ends[16] - ends[64])
    if factor < 12.0:
        failures.append(f"convergence factor {factor:.1f}")

    # positivity on 50 random runs
    rng = np.random.default_rng(8)
    for _ in range(50):
        p = sample_params(rng, r_range=(0.2, 10.0))
        y2 = positive_equilibrium(p).y_star
        traj = integrate_y(p, ConstantHistory(rng.uniform(0.0, 3.0) * y2), 60.0 * p.r, dt=p.r / 32)
        if traj.values.min() < -1e-9:
            failures.append(f"positivity {traj.values.min():.2e} at {p}")
            break

    # contraction identity to 1e-10
    y_traj = integrate_y(p3, eigenmode_history(p3, 0.4), 600.0)
    xa = integrate_x(p3, y_traj, 1.0)
    xb = integrate_x(p3, y_traj, 4.0)
    dev = np.abs((xa.values - xb.values) - (1.0 - 4.0) * np.exp(-p3.gamma * xa.times)).max()
    if dev > 1e-10 * 3.0:
        failures.append(f"contraction deviation {dev:.2e}")

    # periodic fixed point matches the closed-form sinusoidal response to 1e-8
    T = 40.0
    w = 2.0 * np.pi / T
    t = np.linspace(0.0, T, 4097)
    got = periodic_response(p3.gamma, t, np.cos(w * t)).x0
    closed = p3.gamma / (p3.gamma**2 + w**2)
    if abs(got - closed) > 1e-8:
        failures.append(f"periodic response error {abs(got - closed):.2e}")

    # b1 formula vs centered finite difference to 1e-8 relative
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = sample_params(rng)
        y2 = positive_equilibrium(p).y_star
        h = 1e-6 * (1.0 + y2)
        fd = (feedback(y2 + h, p.beta0, p.n) - feedback(y2 - h, p.beta0, p.n)) / (2.0 * h)
        b1 = b1_coefficient(p).b1
        if abs(b1 - fd) > 1e-8 * max(1e-30, abs(fd)):
            failures.append(f"b1 finite difference mismatch at {p}")
            break

    # classifier agrees with the spectrum on 200 random parameter sets
    import warnings

    rng = np.random.default_rng(42)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(200):
            p = sample_params(rng)
            v = classify_positive(p)
            roots = leading_roots(p, 1)
            if not roots:
                continue
            top = roots[0].re
            if v.state is StabilityState.ASYMPTOTICALLY_STABLE and not top < -1e-9:
                failures.append(f"classifier/spectrum mismatch (stable) at {p}")
                break
            if v.state is StabilityState.UNSTABLE and not top > 1e-9:
                failures.append(f"classifier/spectrum mismatch (unstable) at {p}")
                break

    elapsed = time.perf_counter() - started
    ok = not failures and elapsed < 120.0
    report(8, "property suites", ok, "; ".join(failures) or "all properties hold", elapsed)
