"""Hot inner loops of the integrators.

Compiled with numba when available (the default install); the plain-Python
definitions below are the reference semantics and serve as a fallback, so the
package stays usable without a working JIT at a large speed penalty.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    USING_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None
    USING_NUMBA = False


def _jit(fn):
    return njit(cache=True)(fn) if USING_NUMBA else fn


@_jit
def _pow_pos(v, n):
    # y**n with the y <= 0 limit taken as 0; keeps the flux linear across a
    # microscopic negative overshoot instead of raising or going complex
    if v <= 0.0:
        return 0.0
    return np.exp(n * np.log(v))


def _rk4_delay_impl(y, f, hist_half, m, nsteps, dt, n, beta0, delta, k):
    # Classical RK4 on y'(t) = -(beta0/(1+y^n) + delta) y + k beta0 yd/(1+yd^n),
    # with the delayed value yd read from the stored grid: exact nodes at full
    # steps, cubic Hermite at half steps. dt divides the delay exactly (m steps
    # per delay), so derivative-jump points always land on nodes.
    # y, f have length m + nsteps + 1; indices 0..m hold the history segment.
    # Returns the index of the first non-finite node, or -1 on success.
    half = 0.5 * dt
    for i in range(nsteps):
        j = m + i
        yj = y[j]
        d0 = y[i]
        if i < m:
            dh = hist_half[i]
        else:
            dh = 0.5 * (y[i] + y[i + 1]) + 0.125 * dt * (f[i] - f[i + 1])
        d1 = y[i + 1]
        fb0 = k * beta0 * d0 / (1.0 + _pow_pos(d0, n))
        fbh = k * beta0 * dh / (1.0 + _pow_pos(dh, n))
        fb1 = k * beta0 * d1 / (1.0 + _pow_pos(d1, n))
        k1 = -(beta0 / (1.0 + _pow_pos(yj, n)) + delta) * yj + fb0
        ya = yj + half * k1
        k2 = -(beta0 / (1.0 + _pow_pos(ya, n)) + delta) * ya + fbh
        yb = yj + half * k2
        k3 = -(beta0 / (1.0 + _pow_pos(yb, n)) + delta) * yb + fbh
        yc = yj + dt * k3
        k4 = -(beta0 / (1.0 + _pow_pos(yc, n)) + delta) * yc + fb1
        ynew = yj + dt * (k1 + 2.0 * (k2 + k3) + k4) / 6.0
        if not np.isfinite(ynew):
            return j
        y[j + 1] = ynew
        f[j + 1] = -(beta0 / (1.0 + _pow_pos(ynew, n)) + delta) * ynew + fb1
    return -1


def _exp_scan_impl(x, incr, decay):
    # x[i+1] = decay * x[i] + incr[i]; the exact one-step variation-of-constants
    # recursion with a precomputed quadrature increment.
    for i in range(incr.shape[0]):
        xn = decay * x[i] + incr[i]
        if not np.isfinite(xn):
            return i
        x[i + 1] = xn
    return -1


rk4_delay = _jit(_rk4_delay_impl)
exp_scan = _jit(_exp_scan_impl)


def warmup():
    """Trigger JIT compilation on tiny inputs (no-op without numba)."""
    y = np.zeros(8)
    f = np.zeros(8)
    rk4_delay(y, f, np.zeros(2), 2, 5, 0.5, 2.0, 1.0, 0.1, 1.5)
    exp_scan(np.zeros(4), np.zeros(3), 0.9)
