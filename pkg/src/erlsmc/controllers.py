"""Sliding-mode speed, current and position loops.

Each loop's discontinuous action comes from a pluggable reaching law
(:mod:`erlsmc.reaching`). Error conventions: the outer loops use
``e = measured - reference``; the current surfaces use
``S = reference - measured``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .motor import MotorParams, MotorState, leakage_factor
from .reaching import ConstantRate, ReachingLawKind, switching_term


def clamp(x: float, limit: float) -> float:
    return max(-limit, min(limit, x))


@dataclass(frozen=True)
class MechanicalModel:
    """Nominal first-order mechanical model used inside the outer loops.

    ``f1`` is the load term the controller assumes; the drive normally
    leaves it at zero and lets the switching gain absorb the true load.
    """

    a: float
    b: float
    Kt: float
    f1: float = 0.0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be > 0, got {self.b!r}")

    @classmethod
    def from_params(cls, params: MotorParams, psi_ref: float, load_torque: float = 0.0):
        kt = params.p * 1.5 * (params.Lm / params.Lr) * psi_ref
        return cls(a=params.fv / params.J, b=kt / params.J, Kt=kt, f1=load_torque / params.J)


@dataclass(frozen=True)
class SpeedLoopGains:
    k_omega: float = -50.0
    beta: float = 1000.0
    law: ReachingLawKind = ConstantRate()
    isq_clamp: float = 7.0

    def __post_init__(self):
        if not self.k_omega < 0:
            raise ValueError(f"k_omega must be negative, got {self.k_omega!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta!r}")
        if not self.isq_clamp > 0:
            raise ValueError(f"isq_clamp must be > 0, got {self.isq_clamp!r}")


@dataclass(frozen=True)
class SpeedLoopState:
    integral_accum: float = 0.0
    last_ref: float | None = None
    last_error: float | None = None


@dataclass(frozen=True)
class CurrentLoopGains:
    k_id: float = 150.0
    k_iq: float = 150.0
    law: ReachingLawKind = ConstantRate(epsilon=0.5)

    def __post_init__(self):
        if not (self.k_id > 0 and self.k_iq > 0):
            raise ValueError("k_id and k_iq must be > 0")

    @property
    def epsilon(self) -> float:
        return self.law.epsilon


@dataclass(frozen=True)
class PositionLoopGains:
    lam: float = 13.85
    k_theta: float = 20.0
    law: ReachingLawKind = ConstantRate(epsilon=0.5)
    isq_clamp: float = 7.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam!r}")
        if not self.k_theta > 0:
            raise ValueError(f"k_theta must be > 0, got {self.k_theta!r}")
        if not self.isq_clamp > 0:
            raise ValueError(f"isq_clamp must be > 0, got {self.isq_clamp!r}")


@dataclass(frozen=True)
class PositionLoopState:
    last_ref: float | None = None
    last_ref_rate: float | None = None


class CurrentRefs(NamedTuple):
    isd: float
    isq: float
    disd: float = 0.0
    disq: float = 0.0
    psird: float = 0.0


# --- speed loop -------------------------------------------------------------

def integrate_speed_error(st: SpeedLoopState, e: float, k_omega: float, a: float,
                          dt: float) -> float:
    """Trapezoid update of the integral term of the speed surface."""
    if st.last_error is None:
        return st.integral_accum
    return st.integral_accum + 0.5 * dt * (k_omega - a) * (e + st.last_error)


def speed_surface(e: float, st: SpeedLoopState) -> float:
    return e - st.integral_accum


def speed_control(omega_ref: float, omega: float, st: SpeedLoopState, g: SpeedLoopGains,
                  m: MechanicalModel, dt: float):
    """One speed-loop tick.

    Returns ``(isq_ref, new_state, surface)``. The reference derivative is a
    backward difference of successive reference samples (zero on the first
    tick).
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    e = omega - omega_ref
    ref_rate = 0.0 if st.last_ref is None else (omega_ref - st.last_ref) / dt
    accum = integrate_speed_error(st, e, g.k_omega, m.a, dt)
    new = SpeedLoopState(accum, omega_ref, e)
    s = speed_surface(e, new)
    raw = (
        g.k_omega * e - switching_term(s, g.beta, g.law)
        + m.a * omega_ref + ref_rate + m.f1
    ) / m.b
    return clamp(raw, g.isq_clamp), new, s


# --- current loops ----------------------------------------------------------

def current_surfaces(isd_ref: float, isq_ref: float, isd: float, isq: float):
    return isd_ref - isd, isq_ref - isq


def _r_eq(params: MotorParams) -> float:
    return params.Rs + params.Rr * params.Lm**2 / params.Lr**2


def equivalent_voltage_d(state: MotorState, refs: CurrentRefs, omega_s: float,
                         params: MotorParams) -> float:
    sigma_ls = leakage_factor(params) * params.Ls
    return (
        sigma_ls * (refs.disd - omega_s * state.isq)
        + _r_eq(params) * state.isd
        - params.Lm * params.Rr / params.Lr**2 * refs.psird
    )


def equivalent_voltage_q(state: MotorState, refs: CurrentRefs, omega_s: float,
                         omega_mech: float, params: MotorParams) -> float:
    # back-EMF feedforward carries the sign that cancels the plant's -(Lm/Lr)*w*psird term
    sigma_ls = leakage_factor(params) * params.Ls
    return (
        sigma_ls * (refs.disq + omega_s * state.isd)
        + _r_eq(params) * state.isq
        + params.Lm / params.Lr * params.p * omega_mech * refs.psird
    )


def current_control(state: MotorState, refs: CurrentRefs, omega_s: float, omega_mech: float,
                    g: CurrentLoopGains, params: MotorParams):
    """Return ``(vsd_ref, vsq_ref, Sd, Sq)`` before inverter limiting."""
    sd, sq = current_surfaces(refs.isd, refs.isq, state.isd, state.isq)
    vsd = equivalent_voltage_d(state, refs, omega_s, params) + switching_term(sd, g.k_id, g.law)
    vsq = (
        equivalent_voltage_q(state, refs, omega_s, omega_mech, params)
        + switching_term(sq, g.k_iq, g.law)
    )
    return vsd, vsq, sd, sq


# --- position loop ----------------------------------------------------------

def position_surface(e_theta: float, e_theta_rate: float, lam: float) -> float:
    return lam * e_theta + e_theta_rate


def position_control(theta_ref: float, theta: float, omega_mech: float, st: PositionLoopState,
                     g: PositionLoopGains, m: MechanicalModel, dt: float):
    """One position-loop tick.

    Returns ``(isq_ref, new_state, surface)``. Reference velocity and
    acceleration are backward differences of the reference samples.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    ref_rate = 0.0 if st.last_ref is None else (theta_ref - st.last_ref) / dt
    ref_accel = 0.0 if st.last_ref_rate is None else (ref_rate - st.last_ref_rate) / dt
    new = PositionLoopState(theta_ref, ref_rate)

    e = theta - theta_ref
    s = position_surface(e, omega_mech - ref_rate, g.lam)
    isq_eq = (g.lam * ref_rate + ref_accel + (m.a - g.lam) * omega_mech + m.f1) / m.b
    # dS/dt = ... + b*isq, so the attracting action enters with a minus sign
    raw = isq_eq - switching_term(s, g.k_theta, g.law)
    return clamp(raw, g.isq_clamp), new, s
