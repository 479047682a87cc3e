"""Core two-compartment delay model: parameters, feedback, right-hand sides.

The resting-cell density y obeys a scalar delay equation driven by a
Hill-type re-entry flux; the proliferating-cell density x is forced linearly
by y and does not feed back. Everything downstream (stability classification,
bifurcation boundaries, simulation) builds on the functions here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, PreconditionError


def gamma_of(k: float, r: float) -> float:
    """Apoptosis rate implied by amplification k and delay r.

    The amplification of one division cycle is k = 2 e^(-gamma r), so
    gamma = ln(2/k)/r. Exactly zero when k = 2.
    """
    if not (0.0 < k <= 2.0):
        raise DomainError(f"amplification k must be in (0, 2], got {k}")
    if r <= 0.0:
        raise DomainError(f"delay r must be positive, got {r}")
    return math.log(2.0 / k) / r


def hill_pow(y, n: float):
    """y**n for y >= 0 via exp(n ln y), with the y = 0 limit set to 0.

    Accepts scalars or arrays; avoids complex promotion for fractional n and
    is well defined at 0 for every n > 0.
    """
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros_like(arr)
    pos = arr > 0.0
    out[pos] = np.exp(n * np.log(arr[pos]))
    return out.reshape(np.shape(y)) if np.ndim(y) else float(out[0])


@dataclass(frozen=True, kw_only=True)
class ModelParams:
    """Validated parameter set of the model.

    gamma is never free: it is derived from (k, r) through k = 2 e^(-gamma r)
    at construction and satisfies the relation to machine precision.
    """

    n: float
    beta0: float
    delta: float
    k: float
    r: float
    gamma: float = field(init=False)

    def __post_init__(self):
        if self.n <= 0.0:
            raise DomainError(f"Hill exponent n must be positive, got {self.n}")
        if self.beta0 <= 0.0:
            raise DomainError(f"beta0 must be positive, got {self.beta0}")
        if self.delta <= 0.0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        object.__setattr__(self, "gamma", gamma_of(self.k, self.r))

    @property
    def renewal_ratio(self) -> float:
        """beta0 (k - 1) / delta; a positive equilibrium exists iff > 1."""
        return self.beta0 * (self.k - 1.0) / self.delta

    @property
    def has_positive_equilibrium(self) -> bool:
        return self.renewal_ratio > 1.0


class EquilibriumKind(Enum):
    TRIVIAL = "trivial"
    POSITIVE = "positive"


@dataclass(frozen=True)
class Equilibrium:
    x_star: float
    y_star: float
    kind: EquilibriumKind


@dataclass(frozen=True)
class LinearizationData:
    """Slope of the feedback flux at the positive equilibrium and derived sums."""

    b1: float
    sum_db1: float  # delta + b1
    k_b1: float  # k * b1


def feedback(y, beta0: float, n: float):
    """Re-entry flux beta0 y / (1 + y^n). Vectorized over y."""
    if np.any(np.asarray(y) < 0.0):
        raise DomainError("feedback requires y >= 0")
    return beta0 * y / (1.0 + hill_pow(y, n))


def rhs_y(y_now, y_delayed, params: ModelParams):
    """Right-hand side of the resting-cell equation."""
    loss = (params.beta0 / (1.0 + hill_pow(y_now, params.n)) + params.delta) * y_now
    return -loss + params.k * feedback(y_delayed, params.beta0, params.n)


def rhs_x(x_now, y_now, y_delayed, params: ModelParams):
    """Right-hand side of the proliferating-cell equation (forced, linear in x)."""
    return (
        -params.gamma * x_now
        + feedback(y_now, params.beta0, params.n)
        - 0.5 * params.k * feedback(y_delayed, params.beta0, params.n)
    )


def forcing(y_now, y_delayed, params: ModelParams):
    """The y-dependent forcing of the x equation: feedback(y) - (k/2) feedback(y_delayed)."""
    return feedback(y_now, params.beta0, params.n) - 0.5 * params.k * feedback(
        y_delayed, params.beta0, params.n
    )


def equilibria(params: ModelParams) -> list[Equilibrium]:
    """All equilibria: the trivial one, plus the positive one when it exists.

    The positive branch requires beta0 (k - 1)/delta > 1 (strict); its resting
    level is y2 = (beta0 (k-1)/delta - 1)^(1/n) and the proliferating level is
    x2 = (2 - k)/(2 gamma) * feedback(y2).
    """
    out = [Equilibrium(0.0, 0.0, EquilibriumKind.TRIVIAL)]
    if params.has_positive_equilibrium:
        if params.gamma == 0.0:
            raise PreconditionError(
                "degenerate positive equilibrium: k = 2 gives gamma = 0 and an "
                "undefined proliferating level"
            )
        y2 = hill_pow(params.renewal_ratio - 1.0, 1.0 / params.n)
        x2 = (2.0 - params.k) / (2.0 * params.gamma) * feedback(y2, params.beta0, params.n)
        out.append(Equilibrium(x2, y2, EquilibriumKind.POSITIVE))
    return out


def positive_equilibrium(params: ModelParams) -> Equilibrium:
    """The positive equilibrium, or PreconditionError if it does not exist."""
    for eq in equilibria(params):
        if eq.kind is EquilibriumKind.POSITIVE:
            return eq
    raise PreconditionError(
        f"no positive equilibrium: beta0 (k-1)/delta = {params.renewal_ratio:.6g} <= 1"
    )


def b1_value(n: float, beta0: float, k: float, delta: float) -> float:
    """Feedback slope at the positive equilibrium, in closed form.

    b1 = (delta/(k-1)) [n delta / (beta0 (k-1)) - n + 1]; valid whenever the
    positive equilibrium exists.
    """
    if beta0 * (k - 1.0) / delta <= 1.0:
        raise PreconditionError("b1 is defined only when the positive equilibrium exists")
    return (delta / (k - 1.0)) * (n * delta / (beta0 * (k - 1.0)) - n + 1.0)


def b1_coefficient(params: ModelParams) -> LinearizationData:
    """Linearization data at the positive equilibrium."""
    b1 = b1_value(params.n, params.beta0, params.k, params.delta)
    return LinearizationData(b1=b1, sum_db1=params.delta + b1, k_b1=params.k * b1)
