import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from erlsmc.motor import (MotorParams, MotorState, ParameterError, PlantInputs,
                          SimulationDivergence, check_guard, derivatives,
                          electromagnetic_torque, leakage_factor, step_rk4)

P = MotorParams()
ZERO_U = PlantInputs(0.0, 0.0, 0.0, 0.0)


def test_nominal_parameters():
    assert (P.Rs, P.Rr, P.Ls, P.Lr, P.Lm, P.J, P.p) == (1.84, 1.84, 0.17, 0.17, 0.16, 0.0154, 2)
    assert P.Tr == pytest.approx(0.17 / 1.84)


def test_leakage_factor_values():
    assert leakage_factor(P) == pytest.approx(1 - 0.16**2 / (0.17 * 0.17), rel=1e-15)
    assert leakage_factor(P) == pytest.approx(0.114187, abs=1e-6)
    assert leakage_factor(MotorParams(Lm=0.0)) == 1.0
    tight = MotorParams(Lm=math.sqrt(0.17 * 0.17) * (1 - 1e-9))
    assert 0 < leakage_factor(tight) < 1e-8


@pytest.mark.parametrize("field,value", [
    ("Rs", 0.0), ("Rr", -1.0), ("J", 0.0), ("Lm", 0.17), ("fv", -0.1), ("p", 0), ("Ls", math.nan),
])
def test_invalid_parameters_rejected(field, value):
    with pytest.raises(ParameterError):
        MotorParams(**{field: value})


def test_scaled_touches_only_named_field():
    q = P.scaled(Rr=1.7, J=2.0)
    assert q.Rr == pytest.approx(1.84 * 1.7) and q.J == pytest.approx(0.0308)
    assert (q.Rs, q.Lm, q.p) == (P.Rs, P.Lm, P.p)


def test_torque_examples():
    assert electromagnetic_torque(MotorState(isq=7.0, psird=0.99), P) == pytest.approx(
        2 * 1.5 * 0.16 / 0.17 * 0.99 * 7, rel=1e-15)
    assert electromagnetic_torque(MotorState(isq=7.0, psird=0.99), P) == pytest.approx(19.57, abs=5e-3)
    assert electromagnetic_torque(MotorState(psird=0.5, psirq=0.1), P) == 0.0
    assert electromagnetic_torque(MotorState(isd=2.0, isq=2.0, psird=0.3, psirq=0.3), P) == 0.0


def test_derivative_examples():
    assert derivatives(MotorState(), ZERO_U, P) == MotorState()
    d = derivatives(MotorState(isd=1.0), ZERO_U, P)
    assert d.psird == pytest.approx(1.84 * 0.16 / 0.17, rel=1e-15)
    assert d.psird == pytest.approx(1.7318, abs=1e-4)
    d = derivatives(MotorState(omega_mech=10.0), ZERO_U, P)
    assert d.omega_mech == pytest.approx(-P.fv * 10 / P.J, rel=1e-15)
    assert d.theta_mech == 10.0


def test_derivatives_reject_nan():
    with pytest.raises(ValueError):
        derivatives(MotorState(isd=math.nan), ZERO_U, P)


def test_rk4_fixed_point_and_friction_decay():
    assert step_rk4(MotorState(), ZERO_U, P, 1e-3) == MotorState()
    for dt in (1e-3, 1e-2):
        w = step_rk4(MotorState(omega_mech=100.0), ZERO_U, P, dt).omega_mech
        exact = 100.0 * math.exp(-P.fv * dt / P.J)
        # local error of RK4 on a linear ODE is (h*lam)^5/120 relative
        assert abs(w - exact) <= 100.0 * (P.fv * dt / P.J) ** 5 / 120 * 1.01 + 1e-13


def _run(dt, t_end=0.02):
    x = MotorState(isd=6.1875, psird=0.99)
    u = PlantInputs(30.0, 120.0, 40.0, 2.0)
    for _ in range(round(t_end / dt)):
        x = step_rk4(x, u, P, dt)
    return np.array(x)


def test_rk4_fourth_order_against_fine_oracle():
    dt = 2e-4
    ref = _run(dt / 8)
    e1 = np.linalg.norm(_run(dt) - ref)
    e2 = np.linalg.norm(_run(dt / 2) - ref)
    assert e1 / e2 == pytest.approx(16.0, rel=0.15)


def test_guard_raises_with_context():
    with pytest.raises(SimulationDivergence) as info:
        check_guard(MotorState(isq=80.0), 70.0, None, t=0.1)
    assert info.value.name == "isq" and info.value.t == 0.1 and info.value.state.isq == 80.0
    with pytest.raises(SimulationDivergence):
        check_guard(MotorState(omega_mech=math.inf), None, None)
    with pytest.raises(ValueError):
        step_rk4(MotorState(), ZERO_U, P, 0.0)


finite = st.floats(-50, 50, allow_nan=False)


@given(finite, finite, finite, finite)
def test_torque_is_antisymmetric_cross_product(isd, isq, pd, pq):
    a = electromagnetic_torque(MotorState(isd, isq, pd, pq), P)
    b = electromagnetic_torque(MotorState(pd, pq, isd, isq), P)
    assert a == pytest.approx(-b, abs=1e-9)


@given(st.floats(-200, 200), st.floats(1e-6, 1e-3))
def test_rk4_friction_matches_exponential(w0, dt):
    w = step_rk4(MotorState(omega_mech=w0), ZERO_U, P, dt).omega_mech
    assert w == pytest.approx(w0 * math.exp(-P.fv * dt / P.J), rel=1e-12, abs=1e-12)
