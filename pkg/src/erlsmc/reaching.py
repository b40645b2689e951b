"""Reaching laws for the sliding-mode loops.

Two laws are supported behind one interface:

* ``ConstantRate``: ``dS/dt = -k sat(S)``
* ``Erl`` (exponential reaching law): ``dS/dt = -(k / N(S)) sat(S)`` with
  ``N(S) = delta0 + (1 - delta0) exp(-alpha |S|**p_exp)``.

``N`` falls from 1 at the surface to ``delta0`` far from it, so the ERL pushes
up to ``1/delta0`` times harder during reaching while keeping the gain ``k``
near ``S = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from scipy import integrate

# exp(-x) underflows relative to 1 well before x = 800
_EXP_CUTOFF = 800.0


@dataclass(frozen=True)
class ErlParams:
    k: float = 1.0
    delta0: float = 0.2
    alpha: float = 10.0
    p_exp: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"k must be > 0, got {self.k!r}")
        if not 0.0 < self.delta0 < 1.0:
            raise ValueError(f"delta0 must lie in (0, 1), got {self.delta0!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if int(self.p_exp) != self.p_exp or self.p_exp < 1:
            raise ValueError(f"p_exp must be an integer >= 1, got {self.p_exp!r}")


@dataclass(frozen=True)
class ConstantRate:
    k: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k!r}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon!r}")

    def n(self, S: float) -> float:
        return 1.0


@dataclass(frozen=True)
class Erl:
    params: ErlParams = ErlParams()
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon!r}")

    @property
    def k(self) -> float:
        return self.params.k

    def n(self, S: float) -> float:
        return n_of_s(S, self.params)


ReachingLawKind = Union[ConstantRate, Erl]


def n_of_s(S: float, e: ErlParams) -> float:
    x = e.alpha * abs(S) ** e.p_exp
    if x > _EXP_CUTOFF:
        return e.delta0
    return e.delta0 + (1.0 - e.delta0) * math.exp(-x)


def sat(S: float, epsilon: float) -> float:
    """Boundary-layer saturation; plain signum (with sat(0) = 0) when epsilon is 0."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")
    if abs(S) > epsilon:
        return 1.0 if S > 0 else -1.0
    if epsilon == 0.0:
        return 0.0
    return S / epsilon


def switching_term(S: float, gain: float, law: ReachingLawKind) -> float:
    """Magnitude-and-sign of a loop's discontinuous action, ``gain/N(S) * sat(S)``."""
    return gain / law.n(S) * sat(S, law.epsilon)


def reaching_rate(S: float, kind: ReachingLawKind) -> float:
    """Demanded dS/dt under ``kind``."""
    return -switching_term(S, kind.k, kind)


def reaching_time_constant(S0: float, k: float) -> float:
    if not k > 0:
        raise ValueError(f"k must be > 0, got {k!r}")
    return abs(S0) / k


def _exp_integral(S0: float, e: ErlParams, method: str = "auto") -> float:
    """``int_0^|S0| exp(-alpha s**p) ds``; closed form only exists for p = 1."""
    s0 = abs(S0)
    if method not in ("auto", "closed", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed" and e.p_exp != 1:
        raise ValueError("closed form is only available for p_exp == 1")
    if e.p_exp == 1 and method != "quad":
        return -math.expm1(-e.alpha * s0) / e.alpha
    return _exp_integral_quad(s0, e.alpha, e.p_exp)


def _quad(f, upper: float) -> float:
    value, abserr, info = integrate.quad(
        f, 0.0, upper, epsabs=0.0, epsrel=1e-10, limit=200, full_output=True
    )[:3]
    if abserr > 1e-9 * abs(value) and info["last"] >= 200:
        raise ArithmeticError(f"quadrature did not converge (abserr={abserr})")
    return value


def _upper_limit(s0: float, alpha: float, p_exp: int) -> float:
    # past this point exp(-alpha s**p) is below double precision
    return min(s0, (_EXP_CUTOFF / alpha) ** (1.0 / p_exp))


def _exp_integral_quad(s0: float, alpha: float, p_exp: int) -> float:
    if s0 == 0.0:
        return 0.0
    return _quad(lambda s: math.exp(-alpha * s**p_exp), _upper_limit(s0, alpha, p_exp))


def reaching_time_erl(S0: float, e: ErlParams, method: str = "auto") -> float:
    """Analytic reaching time of the ERL from ``S0``.

    ``method`` selects the exponential integral: ``"closed"`` (p_exp == 1
    only), ``"quad"`` (adaptive quadrature) or ``"auto"`` (closed when
    available).
    """
    s0 = abs(S0)
    return (e.delta0 * s0 + (1.0 - e.delta0) * _exp_integral(s0, e, method)) / e.k


def reaching_time_advantage(S0: float, e: ErlParams) -> float:
    """ERL reaching time minus the constant-rate reaching time at the same ``k``.

    Evaluated from the integral of ``exp(-alpha s**p) - 1``, which is never
    positive, rather than as a difference of two large numbers.
    """
    s0 = abs(S0)
    if s0 == 0.0:
        return 0.0
    if e.p_exp == 1:
        deficit = s0 + math.expm1(-e.alpha * s0) / e.alpha
    else:
        upper = _upper_limit(s0, e.alpha, e.p_exp)
        deficit = _quad(lambda s: -math.expm1(-e.alpha * s**e.p_exp), upper) + (s0 - upper)
    return -(1.0 - e.delta0) * max(deficit, 0.0) / e.k


def matched_erl_gain(S0: float, k_base: float, e: ErlParams) -> float:
    """ERL gain whose reaching time from ``S0`` equals the constant-rate time at ``k_base``.

    The ERL reaching time is proportional to ``1/k``, so the match is the
    unit-gain reaching time divided by the target.
    """
    target = reaching_time_constant(S0, k_base)
    if target == 0.0:
        return k_base
    return reaching_time_erl(S0, ErlParams(1.0, e.delta0, e.alpha, e.p_exp)) / target
