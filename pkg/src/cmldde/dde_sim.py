"""Fixed-step method-of-steps integration of the delayed resting-cell equation.

The step size is snapped to an exact divisor of the delay r, so delayed
lookups at full steps land on stored nodes and the points t = m r, where the
solution loses one order of smoothness, always coincide with grid nodes. That
preserves the classical 4th-order accuracy of RK4 without event detection.
Delayed values needed at half steps come from cubic Hermite interpolation of
the stored (value, derivative) pairs; history times (t <= 0) are evaluated
directly from the initial function, which keeps the derivative jump at t = 0
out of the interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DomainError, IntegrationError, PreconditionError
from .model import ModelParams, positive_equilibrium, rhs_y
from .linear_analysis import leading_roots

#: default steps per delay interval
STEPS_PER_DELAY = 64


class History:
    """Initial function on [-r, 0]; subclasses give values and derivatives."""

    def value(self, s):
        raise NotImplementedError

    def derivative(self, s):
        raise NotImplementedError

    def __call__(self, s):
        return self.value(s)


@dataclass(frozen=True)
class ConstantHistory(History):
    level: float

    def __post_init__(self):
        if self.level < 0.0:
            raise DomainError(f"constant history must be >= 0, got {self.level}")

    def value(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.level) if np.ndim(s) else self.level

    def derivative(self, s):
        return np.zeros_like(np.asarray(s, dtype=float)) if np.ndim(s) else 0.0


@dataclass(frozen=True)
class EigenmodeHistory(History):
    """phi(s) = y_base + c e^(mu s) cos(omega s); equals y_base + c at s = 0."""

    y_base: float
    c: float
    mu: float
    omega: float

    def value(self, s):
        s = np.asarray(s, dtype=float) if np.ndim(s) else s
        return self.y_base + self.c * np.exp(self.mu * s) * np.cos(self.omega * s)

    def derivative(self, s):
        s = np.asarray(s, dtype=float) if np.ndim(s) else s
        return self.c * np.exp(self.mu * s) * (
            self.mu * np.cos(self.omega * s) - self.omega * np.sin(self.omega * s)
        )


class SampledHistory(History):
    """History given by samples; evaluated by cubic Hermite interpolation.

    Derivatives may be supplied; otherwise they are estimated by centered
    differences (one-sided at the ends).
    """

    def __init__(self, times, values, derivatives=None):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.size < 2 or np.any(np.diff(self.times) <= 0):
            raise DomainError("sampled history needs >= 2 strictly increasing times")
        if derivatives is not None:
            self.derivatives = np.asarray(derivatives, dtype=float)
        else:
            self.derivatives = np.gradient(self.values, self.times)

    def _eval(self, s, deriv):
        s = np.clip(np.asarray(s, dtype=float), self.times[0], self.times[-1])
        idx = np.clip(np.searchsorted(self.times, s, side="right") - 1, 0, self.times.size - 2)
        h = self.times[idx + 1] - self.times[idx]
        th = (s - self.times[idx]) / h
        y0, y1 = self.values[idx], self.values[idx + 1]
        f0, f1 = self.derivatives[idx], self.derivatives[idx + 1]
        if not deriv:
            return (
                (1.0 + th * th * (2.0 * th - 3.0)) * y0
                + th * (th - 1.0) ** 2 * h * f0
                + th * th * (3.0 - 2.0 * th) * y1
                + th * th * (th - 1.0) * h * f1
            )
        return (
            6.0 * th * (th - 1.0) * (y0 - y1) / h
            + (3.0 * th * th - 4.0 * th + 1.0) * f0
            + th * (3.0 * th - 2.0) * f1
        )

    def value(self, s):
        out = self._eval(s, deriv=False)
        return out if np.ndim(s) else float(out)

    def derivative(self, s):
        out = self._eval(s, deriv=True)
        return out if np.ndim(s) else float(out)


@dataclass(frozen=True)
class Trajectory:
    """Dense output on a uniform grid: node values plus node derivatives.

    Evaluation anywhere in [t0, t_end] uses cubic Hermite interpolation of the
    stored pairs; times at or before 0 defer to the exact history function
    when one is attached. Immutable after construction and safe to share.
    """

    t0: float
    dt: float
    values: np.ndarray
    derivs: np.ndarray
    params: ModelParams
    history: Optional[History] = None
    delay_steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    def _hermite(self, t, deriv):
        t = np.asarray(t, dtype=float)
        pos = (t - self.t0) / self.dt
        idx = np.clip(np.floor(pos).astype(int), 0, self.values.size - 2)
        th = pos - idx
        y0, y1 = self.values[idx], self.values[idx + 1]
        f0, f1 = self.derivs[idx], self.derivs[idx + 1]
        if not deriv:
            return (
                (1.0 + th * th * (2.0 * th - 3.0)) * y0
                + th * (th - 1.0) ** 2 * self.dt * f0
                + th * th * (3.0 - 2.0 * th) * y1
                + th * th * (th - 1.0) * self.dt * f1
            )
        return (
            6.0 * th * (th - 1.0) * (y0 - y1) / self.dt
            + (3.0 * th * th - 4.0 * th + 1.0) * f0
            + th * (3.0 * th - 2.0) * f1
        )

    def value_at(self, t):
        """Value at arbitrary times inside the covered span (vectorized)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        slack = 1e-9 * max(1.0, abs(self.t_end))  # roundoff from t0 + dt*i sums
        if np.any(t_arr < self.t0 - slack) or np.any(t_arr > self.t_end + slack):
            raise DomainError("evaluation outside the covered span")
        out = np.empty_like(t_arr)
        past = t_arr <= 0.0
        if self.history is not None and np.any(past):
            out[past] = self.history.value(t_arr[past])
            if np.any(~past):
                out[~past] = self._hermite(t_arr[~past], deriv=False)
        else:
            out[:] = self._hermite(t_arr, deriv=False)
        return out.reshape(np.shape(t)) if np.ndim(t) else float(out[0])

    def derivative_at(self, t):
        """Derivative at arbitrary times inside the covered span (vectorized)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        slack = 1e-9 * max(1.0, abs(self.t_end))
        if np.any(t_arr < self.t0 - slack) or np.any(t_arr > self.t_end + slack):
            raise DomainError("evaluation outside the covered span")
        out = np.empty_like(t_arr)
        past = t_arr < 0.0
        if self.history is not None and np.any(past):
            out[past] = self.history.derivative(t_arr[past])
            if np.any(~past):
                out[~past] = self._hermite(t_arr[~past], deriv=True)
        else:
            out[:] = self._hermite(t_arr, deriv=True)
        return out.reshape(np.shape(t)) if np.ndim(t) else float(out[0])

    def window(self, t_lo: float, t_hi: float):
        """(times, values) of stored nodes with t_lo <= t <= t_hi."""
        t = self.times
        sel = (t >= t_lo) & (t <= t_hi)
        return t[sel], self.values[sel]

    def write_csv(self, path, labels=("t", "y", "ydot"), stride: int = 1):
        """Dump stored nodes as CSV (LF endings, '.' decimals, header row)."""
        if stride < 1:
            raise DomainError("stride must be >= 1")
        t = self.times[::stride]
        v = self.values[::stride]
        d = self.derivs[::stride]
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(labels) + "\n")
            for row in zip(t, v, d):
                fh.write("%.17g,%.17g,%.17g\n" % row)


def _resolve_steps(r: float, dt: float) -> int:
    # adjust dt downward so that r/dt is a positive integer
    return max(1, int(math.ceil(r / dt - 1e-12)))


def _count_steps(t_end: float, dt: float) -> int:
    # smallest step count covering t_end, tolerant of t_end values assembled
    # as t0 + dt*i sums (slightly above an exact multiple of dt)
    q = t_end / dt
    return max(1, int(math.ceil(q - 1e-9 - 1e-12 * q)))


def integrate_y(
    params: ModelParams,
    history: History,
    t_end: float,
    dt: float | None = None,
) -> Trajectory:
    """Integrate the resting-cell equation from the given initial function.

    Returns a trajectory covering [-r, t_end] (history prepended). Raises
    IntegrationError with the last valid time if the run goes non-finite.
    """
    if t_end <= 0.0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    if dt is None:
        dt = params.r / STEPS_PER_DELAY
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    m = _resolve_steps(params.r, dt)
    dt = params.r / m
    nsteps = _count_steps(t_end, dt)

    n_nodes = m + nsteps + 1
    y = np.empty(n_nodes)
    f = np.empty(n_nodes)
    s_nodes = -params.r + dt * np.arange(m + 1)
    y[: m + 1] = history.value(s_nodes)
    f[: m + 1] = history.derivative(s_nodes)
    hist_half = np.asarray(history.value(s_nodes[:-1] + 0.5 * dt), dtype=float)
    # node at t = 0 carries the right-hand derivative of the solution
    f[m] = rhs_y(y[m], y[0], params)

    bad = _kernels.rk4_delay(
        y, f, hist_half, m, nsteps, dt,
        float(params.n), params.beta0, params.delta, params.k,
    )
    if bad >= 0:
        raise IntegrationError(
            "integration produced a non-finite value",
            last_valid_time=-params.r + dt * bad,
        )
    return Trajectory(
        t0=-params.r, dt=dt, values=y, derivs=f,
        params=params, history=history, delay_steps=m,
    )


def eigenmode_history(params: ModelParams, c: float) -> History:
    """Initial family y2 + c e^(mu s) cos(omega s) built from the leading root pair.

    (mu, omega) are the real/imaginary parts of the characteristic root with
    greatest real part; raises PreconditionError when that root is real, since
    the family is undefined then.
    """
    eq = positive_equilibrium(params)
    if c == 0.0:
        return ConstantHistory(eq.y_star)
    lead = leading_roots(params, 1)[0]
    if lead.im == 0.0:
        raise PreconditionError("leading characteristic root is real: eigenmode family undefined")
    return EigenmodeHistory(y_base=eq.y_star, c=c, mu=lead.re, omega=lead.im)


def derivative_series(traj: Trajectory):
    """(t, dy/dt) on the stored grid: the trajectory's phase-portrait export."""
    return traj.times, traj.derivs.copy()
