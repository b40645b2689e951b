"""Closed-loop co-simulation: plant + IRFOC + sliding-mode loops + inverter."""

from __future__ import annotations

import hashlib
import logging
import math
from ..controllers import (CurrentRefs, PositionLoopState, SpeedLoopState, clamp,
                           current_control, position_control, speed_control)
from ..inverter import limit_voltage
from ..motor import MotorState, PlantInputs, check_guard, electromagnetic_torque, step_rk4
from ..orientation import (OrientationState, advance_theta_s, flux_current_reference,
                           synchronous_speed)
from .scenario import Scenario
from .trace import Trace

log = logging.getLogger(__name__)


class ReferenceShaper:
    """Rate- and acceleration-limited tracking of a piecewise-constant target.

    With no limits the target passes straight through. With a rate limit
    only, the output slews at most ``rate * ts`` per tick. With both limits
    the output follows a trapezoidal velocity profile that brakes in time to
    stop on the target.
    """

    def __init__(self, rate: float | None, accel: float | None, ts: float, x0: float = 0.0):
        self.rate, self.accel, self.ts = rate, accel, ts
        self.x, self.v = x0, 0.0

    def step(self, target: float) -> float:
        ts = self.ts
        if self.rate is None:
            self.x = target
            return self.x
        d = target - self.x
        if self.accel is None:
            self.x = target if abs(d) <= self.rate * ts else self.x + math.copysign(self.rate * ts, d)
            return self.x

        a = self.accel
        if abs(d) <= 0.5 * a * ts * ts and abs(self.v) <= a * ts:
            self.x, self.v = target, 0.0
            return self.x
        # fastest speed from which the discrete braking sequence still stops on the target
        half = 0.5 * a * ts
        v_stop = -half + math.sqrt(half * half + 2.0 * a * abs(d))
        v_des = math.copysign(min(self.rate, v_stop), d)
        v_new = self.v + clamp(v_des - self.v, a * ts)
        step = v_new * ts
        if step * d > 0 and abs(step) >= abs(d):
            self.x, self.v = target, 0.0
        else:
            self.x += step
            self.v = v_new
        return self.x


def _fingerprint(*objs) -> str:
    return hashlib.sha256(repr(objs).encode()).hexdigest()


def _segment(t: float, schedule, default: float = 0.0) -> float:
    value = default
    for t_event, v in schedule:
        if t >= t_event:
            value = v
    return value


def run_scenario(s: Scenario) -> Trace:
    """Simulate ``s`` and return the controller-rate trace.

    Controllers always see ``s.motor`` (nominal values); uncertainty events
    only touch the plant parameter set. Raises
    :class:`~erlsmc.motor.SimulationDivergence` if the plant leaves the
    blow-up envelope.
    """
    ts, dt, n_sub = s.control_period, s.dt, s.substeps
    nominal = s.motor
    mech = s.mechanical_model()
    law_gains = (s.speed, s.current, s.position)
    fp0 = _fingerprint(nominal, mech, law_gains, s.psi_ref)
    fingerprints = [(0.0, fp0)]

    plant = s.plant
    pending_events = list(s.uncertainty)
    isd_ref = flux_current_reference(s.psi_ref, nominal)
    if s.premagnetize:
        state = MotorState(isd=isd_ref, psird=plant.Lm * isd_ref)
    else:
        state = MotorState()

    ref = s.reference
    shaper = ReferenceShaper(ref.rate_limit, ref.accel_limit, ts)
    speed_st = SpeedLoopState()
    pos_st = PositionLoopState()
    orient = OrientationState()
    last_isq_ref: float | None = None
    last_ref = 0.0
    theta_ref_acc = 0.0
    rows = []

    for k in range(s.n_ticks):
        t = k * ts
        target = ref.target(t)
        r = shaper.step(target)
        omega = state.omega_mech

        if s.mode == "speed":
            isq_ref, speed_st, s_outer = speed_control(r, omega, speed_st, s.speed, mech, ts)
            omega_ref_log = r
            theta_ref_acc += r * ts if k else 0.0
            theta_ref_log = theta_ref_acc
        else:
            isq_ref, pos_st, s_outer = position_control(
                r, state.theta_mech, omega, pos_st, s.position, mech, ts)
            omega_ref_log = 0.0 if k == 0 else (r - last_ref) / ts
            theta_ref_log = r
        last_ref = r

        disq = 0.0
        if s.current_ref_derivative and last_isq_ref is not None:
            disq = (isq_ref - last_isq_ref) / ts
        last_isq_ref = isq_ref
        omega_s = synchronous_speed(omega, isq_ref, s.psi_ref, nominal, s.flux_floor)
        refs = CurrentRefs(isd_ref, isq_ref, 0.0, disq, s.psi_ref)
        vsd_c, vsq_c, sd, sq = current_control(state, refs, omega_s, omega, s.current, nominal)
        vsd, vsq = limit_voltage(vsd_c, vsq_c, s.inverter)

        tl_now = _segment(t, s.loads)
        rows.append((
            t, omega, omega_ref_log, state.theta_mech, theta_ref_log,
            state.isd, state.isq, isd_ref, isq_ref, state.psird, state.psirq,
            vsd, vsq, electromagnetic_torque(state, plant), tl_now, s_outer, sd, sq,
        ))

        for j in range(n_sub):
            t_sub = (k * n_sub + j) * dt
            while pending_events and pending_events[0].time <= t_sub + 1e-12:
                ev = pending_events.pop(0)
                plant = plant.scaled(**{ev.parameter: ev.multiplier})
                log.info("t=%.4f s: plant %s x %.3f", t_sub, ev.parameter, ev.multiplier)
                fp = _fingerprint(nominal, mech, law_gains, s.psi_ref)
                if fp != fp0:
                    raise RuntimeError("controller constants changed by an uncertainty event")
                fingerprints.append((t_sub, fp))
            u = PlantInputs(vsd, vsq, omega_s, _segment(t_sub + 1e-12, s.loads))
            state = step_rk4(state, u, plant, dt, current_limit=s.current_guard,
                             speed_limit=s.speed_guard, t=t_sub)
        orient = advance_theta_s(orient, omega_s, ts)

    check_guard(state, s.current_guard, s.speed_guard, s.n_ticks * ts)
    meta = {
        "name": s.name,
        "mode": s.mode,
        "control_period": ts,
        "edges": ref.edges(s.duration),
        "events": [(e.time, e.parameter, e.multiplier) for e in s.uncertainty],
        "loads": list(s.loads),
        "controller_fingerprints": fingerprints,
        "final_state": state,
        "final_theta_s": orient.theta_s,
        "outer_epsilon": (s.speed if s.mode == "speed" else s.position).law.epsilon,
        "current_epsilon": s.current.law.epsilon,
    }
    return Trace.from_rows(rows, meta)
