"""Induction-motor plant in the synchronously rotating d-q frame.

The plant is integrated with a fixed-step classical RK4 scheme; inputs are
zero-order held across each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple


class ParameterError(ValueError):
    """Raised when a parameter set violates its physical invariants."""


class SimulationDivergence(RuntimeError):
    """Raised when a plant state leaves the configured blow-up envelope."""

    def __init__(self, name: str, value: float, t: float | None, state=None):
        self.name = name
        self.value = value
        self.t = t
        self.state = state
        when = "" if t is None else f" at t={t:.6f} s"
        super().__init__(f"simulation diverged{when}: {name}={value!r}")


@dataclass(frozen=True)
class MotorParams:
    """Electrical and mechanical constants of the machine.

    Defaults are the 3 kW, 4-pole machine used throughout the experiments;
    ``fv`` is not a nameplate value and is kept small but nonzero.
    """

    Rs: float = 1.84
    Rr: float = 1.84
    Ls: float = 0.17
    Lr: float = 0.17
    Lm: float = 0.16
    J: float = 0.0154
    fv: float = 0.001
    p: int = 2

    def __post_init__(self):
        for name in ("Rs", "Rr", "Ls", "Lr", "J"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
        if not (math.isfinite(self.Lm) and self.Lm >= 0):
            raise ParameterError(f"Lm must be finite and >= 0, got {self.Lm!r}")
        if not (math.isfinite(self.fv) and self.fv >= 0):
            raise ParameterError(f"fv must be finite and >= 0, got {self.fv!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ParameterError(f"p must be an integer >= 1, got {self.p!r}")
        if self.Lm**2 >= self.Ls * self.Lr:
            raise ParameterError("Lm**2 must be smaller than Ls*Lr")

    @property
    def Tr(self) -> float:
        """Rotor time constant Lr/Rr."""
        return self.Lr / self.Rr

    def scaled(self, **multipliers: float) -> "MotorParams":
        """Return a copy with the named fields multiplied."""
        return replace(self, **{k: getattr(self, k) * m for k, m in multipliers.items()})


class MotorState(NamedTuple):
    isd: float = 0.0
    isq: float = 0.0
    psird: float = 0.0
    psirq: float = 0.0
    omega_mech: float = 0.0
    theta_mech: float = 0.0


class PlantInputs(NamedTuple):
    vsd: float = 0.0
    vsq: float = 0.0
    omega_s: float = 0.0
    TL: float = 0.0


def leakage_factor(params: MotorParams) -> float:
    """Total leakage factor ``1 - Lm**2 / (Ls*Lr)``."""
    sigma = 1.0 - params.Lm**2 / (params.Ls * params.Lr)
    if not 0.0 < sigma <= 1.0:
        raise ParameterError(f"leakage factor out of range: {sigma!r}")
    return sigma


def electromagnetic_torque(state: MotorState, params: MotorParams) -> float:
    return (
        params.p * 1.5 * (params.Lm / params.Lr)
        * (state.psird * state.isq - state.psirq * state.isd)
    )


def derivatives(state: MotorState, u: PlantInputs, params: MotorParams) -> MotorState:
    """Time derivative of every plant state (returned as a ``MotorState``)."""
    for value in (*state, *u):
        if not math.isfinite(value):
            raise ValueError(f"non-finite plant input or state: {state}, {u}")
    isd, isq, psird, psirq, omega_mech, _ = state
    Rs, Rr, Ls, Lr, Lm = params.Rs, params.Rr, params.Ls, params.Lr, params.Lm

    sigma_ls = leakage_factor(params) * Ls
    r_eq = Rs + Rr * Lm * Lm / (Lr * Lr)
    k_flux = Rr * Lm / (Lr * Lr)
    omega = params.p * omega_mech
    omega_sl = u.omega_s - omega

    disd = (
        -r_eq * isd + k_flux * psird + (Lm / Lr) * omega * psirq + u.vsd
    ) / sigma_ls + u.omega_s * isq
    disq = (
        -r_eq * isq - (Lm / Lr) * omega * psird + k_flux * psirq + u.vsq
    ) / sigma_ls - u.omega_s * isd
    dpsird = (Rr * Lm / Lr) * isd - (Rr / Lr) * psird + omega_sl * psirq
    dpsirq = (Rr * Lm / Lr) * isq - omega_sl * psird - (Rr / Lr) * psirq

    te = electromagnetic_torque(state, params)
    domega = (te - u.TL - params.fv * omega_mech) / params.J
    return MotorState(disd, disq, dpsird, dpsirq, domega, omega_mech)


def _axpy(x: MotorState, h: float, k: MotorState) -> MotorState:
    return MotorState(*(xi + h * ki for xi, ki in zip(x, k)))


def step_rk4(
    state: MotorState,
    u: PlantInputs,
    params: MotorParams,
    dt: float,
    *,
    current_limit: float | None = None,
    speed_limit: float | None = None,
    t: float | None = None,
) -> MotorState:
    """Advance the plant by one classical RK4 step of length ``dt``.

    ``current_limit`` and ``speed_limit`` form the blow-up guard; exceeding
    either raises :class:`SimulationDivergence`.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    k1 = derivatives(state, u, params)
    k2 = derivatives(_axpy(state, 0.5 * dt, k1), u, params)
    k3 = derivatives(_axpy(state, 0.5 * dt, k2), u, params)
    k4 = derivatives(_axpy(state, dt, k3), u, params)
    h6 = dt / 6.0
    new = MotorState(
        *(
            x + h6 * (a + 2.0 * b + 2.0 * c + d)
            for x, a, b, c, d in zip(state, k1, k2, k3, k4)
        )
    )
    check_guard(new, current_limit, speed_limit, None if t is None else t + dt)
    return new


def check_guard(
    state: MotorState,
    current_limit: float | None,
    speed_limit: float | None,
    t: float | None = None,
) -> None:
    for name, value in zip(MotorState._fields, state):
        if not math.isfinite(value):
            raise SimulationDivergence(name, value, t, state)
    if current_limit is not None:
        for name in ("isd", "isq"):
            value = getattr(state, name)
            if abs(value) > current_limit:
                raise SimulationDivergence(name, value, t, state)
    if speed_limit is not None and abs(state.omega_mech) > speed_limit:
        raise SimulationDivergence("omega_mech", state.omega_mech, t, state)
