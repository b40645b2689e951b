"""Indirect rotor-flux orientation: slip, synchronous angle, flux current.

The slip law uses the commanded flux rather than a measured one, which is
what makes the scheme indirect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .motor import MotorParams

TWO_PI = 2.0 * math.pi
DEFAULT_FLUX_FLOOR = 0.05


class FluxFloorError(ValueError):
    """The flux reference is too small to compute a meaningful slip."""


@dataclass(frozen=True)
class OrientationState:
    theta_s: float = 0.0
    omega_s: float = 0.0


def slip_frequency(isq: float, psird_ref: float, params: MotorParams,
                   floor: float = DEFAULT_FLUX_FLOOR) -> float:
    if not psird_ref > floor:
        raise FluxFloorError(
            f"flux reference {psird_ref!r} Wb is not above the floor {floor} Wb"
        )
    return (params.Lm / params.Tr) * isq / psird_ref


def synchronous_speed(omega_mech: float, isq: float, psird_ref: float,
                      params: MotorParams, floor: float = DEFAULT_FLUX_FLOOR) -> float:
    return params.p * omega_mech + slip_frequency(isq, psird_ref, params, floor)


def wrap_angle(theta: float) -> float:
    """Wrap to [0, 2*pi)."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative value can round back up to exactly 2*pi
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def advance_theta_s(os: OrientationState, omega_s: float, dt: float) -> OrientationState:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    return OrientationState(wrap_angle(os.theta_s + omega_s * dt), omega_s)


def flux_current_reference(psi_ref: float, params: MotorParams) -> float:
    """Steady-state d-axis current that sustains ``psi_ref``."""
    if not psi_ref > 0:
        raise ValueError(f"flux reference must be > 0, got {psi_ref!r}")
    return psi_ref / params.Lm


def dq_to_abc(vd: float, vq: float, theta_s: float) -> tuple[float, float, float]:
    """Amplitude-invariant inverse Park + Clarke transform."""
    a = vd * math.cos(theta_s) - vq * math.sin(theta_s)
    b = vd * math.cos(theta_s - TWO_PI / 3) - vq * math.sin(theta_s - TWO_PI / 3)
    c = -a - b
    return a, b, c


def abc_to_dq(a: float, b: float, c: float, theta_s: float) -> tuple[float, float]:
    """Amplitude-invariant Clarke + Park transform (2/3 scaling)."""
    alpha = (2.0 / 3.0) * (a - 0.5 * b - 0.5 * c)
    beta = (b - c) / math.sqrt(3.0)
    cos_t, sin_t = math.cos(theta_s), math.sin(theta_s)
    return alpha * cos_t + beta * sin_t, -alpha * sin_t + beta * cos_t
