"""Scenario files: a YAML schema describing one closed-loop experiment.

Top-level keys (all optional except ``mode`` and ``duration``)::

    name: speed_nominal
    mode: speed | position
    duration: 1.0                 # s
    simulation: {dt, control_period, premagnetize, current_guard, speed_guard}
    motor: {Rs, Rr, Ls, Lr, Lm, J, fv, p}       # nominal values, seen by controllers
    plant_scale: {J: 2.0, ...}    # plant-only multipliers from t = 0
    inverter: {vdc}
    flux: {psi_ref, floor}
    reference: {shape: step | square, value, start, steps: [[t, v], ...],
                amplitude, period, rate_limit, accel_limit}
    load: [[t, TL], ...]
    uncertainty: [[t, parameter, multiplier], ...]   # plant only
    reaching_law: {kind: erl | constant, delta0, alpha, p_exp,
                   match_reaching_time, s0_outer, s0_current}
    speed_loop: {k_omega, beta: <float> | auto, epsilon, isq_clamp}
    current_loop: {k_id, k_iq, epsilon, ref_derivative}
    position_loop: {lambda, k_theta, epsilon, isq_clamp}
    feed_load: false              # give controllers the true load torque
    robust_envelope: {J_min, J_max, beta_margin}

Loop gains (``speed_loop.beta``, ``current_loop.k_id``/``k_iq``,
``position_loop.k_theta``) are the constant-rate design gains. With
``reaching_law.kind: erl`` and ``match_reaching_time: true`` each loop runs
the ERL at the gain whose analytic reaching time from that loop's ``s0``
equals the constant-rate reaching time at the configured gain.

Angles in ``reference`` for position mode are given in degrees.
"""

from __future__ import annotations

import copy
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..controllers import (CurrentLoopGains, MechanicalModel, PositionLoopGains,
                           SpeedLoopGains)
from ..inverter import InverterParams
from ..motor import MotorParams, ParameterError
from ..reaching import ConstantRate, Erl, ErlParams, matched_erl_gain

log = logging.getLogger(__name__)

PLANT_PARAMETERS = ("Rs", "Rr", "Ls", "Lr", "Lm", "J", "fv")


class ConfigError(ValueError):
    """The scenario description is invalid."""


DEFAULTS: dict[str, Any] = {
    "name": "scenario",
    "simulation": {
        "dt": 20e-6,
        "control_period": 200e-6,
        "premagnetize": True,
        "current_guard": 70.0,
        "speed_guard": 1482.0,
    },
    "motor": dataclasses.asdict(MotorParams()),
    "plant_scale": {},
    # 537 V (peak of 380 V line) leaves no headroom for the back-EMF at rated speed
    "inverter": {"vdc": 700.0},
    "flux": {"psi_ref": 0.99, "floor": 0.05},
    "reference": {
        "shape": "step",
        "value": 0.0,
        "start": 0.0,
        "steps": None,
        "amplitude": 0.0,
        "period": 1.0,
        "rate_limit": None,
        "accel_limit": None,
    },
    "load": [],
    "uncertainty": [],
    "reaching_law": {
        "kind": "erl", "delta0": 0.2, "alpha": 1.0, "p_exp": 1,
        "match_reaching_time": True, "s0_outer": None, "s0_current": None,
    },
    "speed_loop": {"k_omega": -50.0, "beta": 1100.0, "epsilon": 0.0, "isq_clamp": 7.0},
    "current_loop": {"k_id": 150.0, "k_iq": 150.0, "epsilon": 3.0, "ref_derivative": True},
    "position_loop": {"lambda": 13.85, "k_theta": 20.0, "epsilon": 0.25, "isq_clamp": 7.0},
    "feed_load": False,
    "robust_envelope": {"J_min": 0.5, "J_max": 2.0, "beta_margin": 1.5},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base and path:
            raise ConfigError(f"unknown key {path}{key}")
        if isinstance(base.get(key), dict) and base[key] and isinstance(value, dict):
            out[key] = _merge(base[key], value, f"{path}{key}.")
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass(frozen=True)
class Reference:
    shape: str
    steps: tuple[tuple[float, float], ...] = ()
    amplitude: float = 0.0
    period: float = 1.0
    start: float = 0.0
    rate_limit: float | None = None
    accel_limit: float | None = None

    def target(self, t: float) -> float:
        """Unshaped target value at time ``t``."""
        if self.shape == "square":
            if t < self.start:
                return 0.0
            phase = math.fmod(t - self.start, self.period)
            return self.amplitude if phase < 0.5 * self.period else -self.amplitude
        value = 0.0
        for t_step, v in self.steps:
            if t >= t_step:
                value = v
        return value

    def edges(self, duration: float) -> list[tuple[float, float]]:
        """``(time, new_target)`` for every target change within ``[0, duration]``."""
        if self.shape == "square":
            out = []
            n = 0
            while True:
                t = self.start + 0.5 * n * self.period
                if t > duration:
                    break
                out.append((t, self.amplitude if n % 2 == 0 else -self.amplitude))
                n += 1
            return out
        out, prev = [], 0.0
        for t, v in self.steps:
            if t <= duration and v != prev:
                out.append((t, v))
            prev = v
        return out


@dataclass(frozen=True)
class TimedEvent:
    time: float
    parameter: str
    multiplier: float


@dataclass
class Scenario:
    name: str
    mode: str
    duration: float
    dt: float
    control_period: float
    motor: MotorParams
    plant: MotorParams
    inverter: InverterParams
    psi_ref: float
    flux_floor: float
    premagnetize: bool
    reference: Reference
    loads: tuple[tuple[float, float], ...]
    uncertainty: tuple[TimedEvent, ...]
    speed: SpeedLoopGains
    current: CurrentLoopGains
    position: PositionLoopGains
    feed_load: bool
    current_guard: float
    speed_guard: float
    s0_outer: float
    s0_current: float
    base_gains: dict = field(default_factory=dict)
    current_ref_derivative: bool = True
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def substeps(self) -> int:
        return int(round(self.control_period / self.dt))

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.control_period))

    def mechanical_model(self) -> MechanicalModel:
        load = self.loads[-1][1] if (self.feed_load and self.loads) else 0.0
        return MechanicalModel.from_params(self.motor, self.psi_ref, load)

    def with_overrides(self, overrides: dict) -> "Scenario":
        """Rebuild from the raw config with dotted-path overrides applied."""
        raw = copy.deepcopy(self.raw)
        for path, value in overrides.items():
            set_path(raw, path, value)
        return build_scenario(raw)


def set_path(raw: dict, path: str, value: Any) -> None:
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        if isinstance(node, list):
            key = int(key)
        elif key not in node:
            node[key] = {}
        node = node[key]
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def get_path(raw: dict, path: str) -> Any:
    node: Any = raw
    for key in path.split("."):
        node = node[int(key)] if isinstance(node, list) else node[key]
    return node


def _law(cfg: dict, epsilon: float, gain: float):
    kind = str(cfg["kind"]).lower()
    if kind in ("constant", "constant_rate", "constantrate"):
        return ConstantRate(gain, epsilon)
    if kind == "erl":
        return Erl(ErlParams(gain, cfg["delta0"], cfg["alpha"], cfg["p_exp"]), epsilon)
    raise ConfigError(f"unknown reaching law kind {cfg['kind']!r}")


def _law_gain(cfg: dict, k_base: float, s0: float) -> float:
    kind = str(cfg["kind"]).lower()
    if kind != "erl" or not cfg["match_reaching_time"]:
        return k_base
    return matched_erl_gain(s0, k_base, ErlParams(1.0, cfg["delta0"], cfg["alpha"], cfg["p_exp"]))


def worst_case_disturbance(motor: MotorParams, psi_ref: float, omega_max: float,
                           load_max: float, isq_clamp: float, j_min: float, j_max: float,
                           f1_assumed: float = 0.0) -> float:
    """Bound on the lumped mechanical disturbance over the inertia envelope."""
    nominal = MechanicalModel.from_params(motor, psi_ref)
    worst = 0.0
    for scale in (j_min, j_max):
        j = motor.J * scale
        da = motor.fv / j - nominal.a
        db = nominal.Kt / j - nominal.b
        worst = max(worst, abs(da) * omega_max + abs(load_max / j - f1_assumed)
                    + abs(db) * isq_clamp)
    return worst


def build_scenario(raw: dict) -> Scenario:
    if "mode" not in raw or "duration" not in raw:
        raise ConfigError("scenario needs 'mode' and 'duration'")
    cfg = _merge(DEFAULTS, raw)
    unknown = set(raw) - set(DEFAULTS) - {"mode", "duration"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    mode = str(cfg["mode"]).lower()
    if mode not in ("speed", "position"):
        raise ConfigError(f"mode must be 'speed' or 'position', got {cfg['mode']!r}")
    duration = float(cfg["duration"])
    sim = cfg["simulation"]
    dt, ts = float(sim["dt"]), float(sim["control_period"])
    if not (duration >= 0 and dt > 0 and ts > 0):
        raise ConfigError("duration must be >= 0; dt and control_period must be > 0")
    if abs(ts / dt - round(ts / dt)) > 1e-9 or round(ts / dt) < 1:
        raise ConfigError("control_period must be an integer multiple of dt")

    try:
        motor = MotorParams(**cfg["motor"])
        scale = cfg["plant_scale"] or {}
        bad = set(scale) - set(PLANT_PARAMETERS)
        if bad:
            raise ConfigError(f"plant_scale has unknown parameters {sorted(bad)}")
        if any(not float(m) > 0 for m in scale.values()):
            raise ConfigError("plant_scale multipliers must be > 0")
        plant = motor.scaled(**{k: float(v) for k, v in scale.items()})
        inverter = InverterParams(float(cfg["inverter"]["vdc"]), ts)
    except (ParameterError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    psi_ref = float(cfg["flux"]["psi_ref"])
    floor = float(cfg["flux"]["floor"])
    if not psi_ref > floor:
        raise ConfigError("flux.psi_ref must exceed flux.floor")

    reference = _reference(cfg["reference"], mode, duration)
    loads = tuple(sorted((float(t), float(v)) for t, v in cfg["load"]))
    events = []
    for item in cfg["uncertainty"]:
        t, name, mult = item
        if name not in PLANT_PARAMETERS:
            raise ConfigError(f"uncertainty parameter must be one of {PLANT_PARAMETERS}")
        if not float(mult) > 0:
            raise ConfigError("uncertainty multipliers must be > 0")
        events.append(TimedEvent(float(t), name, float(mult)))
    for t in [t for t, _ in loads] + [e.time for e in events]:
        if not 0 <= t <= duration:
            raise ConfigError(f"event time {t} outside [0, {duration}]")
    if [e.time for e in events] != sorted(e.time for e in events):
        raise ConfigError("uncertainty events must be time-ordered")

    law_cfg = cfg["reaching_law"]
    sp, cu, po = cfg["speed_loop"], cfg["current_loop"], cfg["position_loop"]
    env = cfg["robust_envelope"]
    load_max = max((abs(v) for _, v in loads), default=0.0)
    target_max = max((abs(v) for _, v in reference.edges(duration)), default=0.0)
    try:
        if sp["beta"] == "auto":
            omega_max = target_max if mode == "speed" else 0.0
            f1_assumed = load_max / motor.J if cfg["feed_load"] else 0.0
            d_max = worst_case_disturbance(motor, psi_ref, omega_max, load_max,
                                           float(sp["isq_clamp"]), env["J_min"], env["J_max"],
                                           f1_assumed)
            beta = env["beta_margin"] * d_max
            log.info("auto beta: worst-case |d| = %.3f rad/s^2, beta = %.3f", d_max, beta)
        else:
            beta = float(sp["beta"])
        lam = float(po["lambda"])

        s0_outer = law_cfg["s0_outer"]
        if s0_outer is None:
            # surface excursion an unshaped reference step would produce
            s0_outer = target_max if mode == "speed" else lam * 2.0 * target_max
        s0_current = law_cfg["s0_current"]
        if s0_current is None:
            s0_current = psi_ref / motor.Lm
        s0_outer, s0_current = float(s0_outer), float(s0_current)

        base = {"beta": beta, "k_id": float(cu["k_id"]), "k_iq": float(cu["k_iq"]),
                "k_theta": float(po["k_theta"])}
        s0 = {"beta": s0_outer, "k_id": s0_current, "k_iq": s0_current, "k_theta": s0_outer}
        gains = {name: _law_gain(law_cfg, k, s0[name]) for name, k in base.items()}

        speed = SpeedLoopGains(float(sp["k_omega"]), gains["beta"],
                               _law(law_cfg, float(sp["epsilon"]), gains["beta"]),
                               float(sp["isq_clamp"]))
        current = CurrentLoopGains(gains["k_id"], gains["k_iq"],
                                   _law(law_cfg, float(cu["epsilon"]), gains["k_id"]))
        position = PositionLoopGains(lam, gains["k_theta"],
                                     _law(law_cfg, float(po["epsilon"]), gains["k_theta"]),
                                     float(po["isq_clamp"]))
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc

    return Scenario(
        name=str(cfg["name"]), mode=mode, duration=duration, dt=dt, control_period=ts,
        motor=motor, plant=plant, inverter=inverter, psi_ref=psi_ref, flux_floor=floor,
        premagnetize=bool(sim["premagnetize"]), reference=reference, loads=loads,
        uncertainty=tuple(events), speed=speed, current=current, position=position,
        feed_load=bool(cfg["feed_load"]), current_guard=float(sim["current_guard"]),
        speed_guard=float(sim["speed_guard"]), s0_outer=s0_outer, s0_current=s0_current,
        base_gains=base, current_ref_derivative=bool(cu["ref_derivative"]),
        raw=copy.deepcopy(raw),
    )


def _reference(cfg: dict, mode: str, duration: float) -> Reference:
    unit = math.radians(1.0) if mode == "position" else 1.0
    shape = str(cfg["shape"]).lower()
    rate = cfg["rate_limit"]
    accel = cfg["accel_limit"]
    rate = None if rate is None else float(rate) * unit
    accel = None if accel is None else float(accel) * unit
    if (rate is not None and rate <= 0) or (accel is not None and accel <= 0):
        raise ConfigError("reference rate/accel limits must be > 0")
    if accel is not None and rate is None:
        raise ConfigError("reference.accel_limit needs reference.rate_limit")
    if shape == "step":
        steps = cfg["steps"]
        if steps is None:
            steps = [[cfg["start"], cfg["value"]]]
        steps = tuple((float(t), float(v) * unit) for t, v in steps)
        times = [t for t, _ in steps]
        if times != sorted(times) or any(not 0 <= t <= duration for t in times):
            raise ConfigError("reference step times must be non-decreasing and within the run")
        return Reference("step", steps, rate_limit=rate, accel_limit=accel)
    if shape == "square":
        period = float(cfg["period"])
        start = float(cfg["start"])
        if not period > 0 or not 0 <= start <= duration:
            raise ConfigError("square reference needs period > 0 and start within the run")
        return Reference("square", (), float(cfg["amplitude"]) * unit, period, start, rate, accel)
    raise ConfigError(f"unknown reference shape {cfg['shape']!r}")


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file. A missing or unreadable file raises ``OSError``."""
    path = Path(path)
    text = path.read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return build_scenario(raw)
