"""Figures of merit, law comparison and parameter sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..motor import SimulationDivergence
from ..reaching import ErlParams, reaching_time_constant, reaching_time_erl
from .engine import run_scenario
from .scenario import DEFAULTS, ConfigError, Scenario
from .trace import Trace

log = logging.getLogger(__name__)

SETTLING_BAND = 0.02
FINAL_WINDOW = 0.2
REACH_DEBOUNCE = 10


@dataclass
class SegmentMetrics:
    start: float
    target: float
    step: float
    overshoot: float
    settling_time: float
    steady_state_error: float
    settled: bool


@dataclass
class Metrics:
    """Step-response and chattering figures for one run.

    ``overshoot`` is in percent of the step; ``settling_time`` is measured
    from the reference edge into a +/-2 % band; errors are in units of the
    controlled variable (rad/s or rad). With several reference edges the
    worst segment is reported and each one is kept in ``segments``.
    """

    overshoot: float
    settling_time: float
    steady_state_error: float
    iae: float
    chattering_index: float
    chattering_index_current: float
    reaching_time: float | None
    settled: bool
    segments: list[SegmentMetrics] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def chattering_index(u: np.ndarray, window: float = FINAL_WINDOW) -> float:
    """Mean absolute per-tick increment of ``u`` over the final ``window`` fraction."""
    u = np.asarray(u, dtype=float)
    if len(u) < 2:
        return 0.0
    start = min(int(np.floor((1.0 - window) * len(u))), len(u) - 2)
    return float(np.mean(np.abs(np.diff(u[start:]))))


def reaching_time_from_trace(t: np.ndarray, s: np.ndarray, epsilon: float, t0: float = 0.0,
                             debounce: int = REACH_DEBOUNCE) -> float | None:
    """Time from ``t0`` until ``|S|`` first enters the epsilon band and stays ``debounce`` ticks.

    With ``epsilon == 0`` there is no band; the first sign change of ``S`` counts.
    """
    if epsilon == 0.0:
        idx = np.flatnonzero(t >= t0)
        flips = np.flatnonzero(np.sign(s[idx][1:]) != np.sign(s[idx][:-1]))
        return float(t[idx][flips[0] + 1] - t0) if len(flips) else None
    inside = np.abs(s) <= epsilon
    run = 0
    for i in np.flatnonzero(t >= t0):
        run = run + 1 if inside[i] else 0
        if run == debounce:
            return float(t[i - debounce + 1] - t0)
    return None


def _edges(tr: Trace, signal_ref: np.ndarray) -> list[tuple[float, float]]:
    edges = tr.meta.get("edges")
    if edges:
        return [(float(a), float(b)) for a, b in edges]
    # no schedule recorded: one segment towards the final reference value
    moved = np.flatnonzero(signal_ref != signal_ref[0])
    start = float(tr["t"][moved[0]]) if len(moved) else float(tr["t"][0])
    return [(start, float(signal_ref[-1]))]


def compute_metrics(tr: Trace, mode: str | None = None) -> Metrics:
    if len(tr) == 0:
        raise ValueError("cannot compute metrics of an empty trace")
    mode = mode or tr.meta.get("mode", "speed")
    t = tr["t"]
    y, ref = (tr["omega"], tr["omega_ref"]) if mode == "speed" else (tr["theta"], tr["theta_ref"])
    ts = float(t[1] - t[0]) if len(t) > 1 else float(tr.meta.get("control_period", 1.0))

    segments = []
    edges = _edges(tr, ref)
    previous = 0.0
    for i, (t_edge, target) in enumerate(edges):
        t_end = edges[i + 1][0] if i + 1 < len(edges) else t[-1] + ts
        mask = (t >= t_edge) & (t < t_end)
        if not mask.any():
            continue
        seg_t, seg_y = t[mask], y[mask]
        step = target - previous
        size = abs(step)
        if size == 0.0:
            previous = target
            continue
        direction = np.sign(step)
        overshoot = max(0.0, float(np.max((seg_y - target) * direction))) / size * 100.0
        outside = np.flatnonzero(np.abs(seg_y - target) > SETTLING_BAND * size)
        settled = not (len(outside) and outside[-1] == len(seg_y) - 1)
        settling = 0.0 if not len(outside) else float(seg_t[outside[-1]] - t_edge + ts)
        tail = max(1, int(np.ceil(FINAL_WINDOW * len(seg_y))))
        sse = float(np.mean(np.abs(seg_y[-tail:] - target)))
        segments.append(SegmentMetrics(t_edge, target, step, overshoot, settling, sse, settled))
        previous = target

    iae = float(np.sum(np.abs(y - ref)) * ts)
    v_mag = np.hypot(tr["vsd"], tr["vsq"])
    s_outer = tr["S_outer"]
    eps = tr.meta.get("outer_epsilon")
    t0 = edges[0][0] if edges else 0.0
    reach = None if eps is None else reaching_time_from_trace(t, s_outer, eps, t0)

    if not segments:
        log.warning("no reference edge found; step metrics are zero")
    return Metrics(
        overshoot=max((s.overshoot for s in segments), default=0.0),
        settling_time=max((s.settling_time for s in segments), default=0.0),
        steady_state_error=max((s.steady_state_error for s in segments), default=0.0),
        iae=iae,
        chattering_index=chattering_index(tr["isq_ref"]),
        chattering_index_current=chattering_index(v_mag),
        reaching_time=reach,
        settled=all(s.settled for s in segments),
        segments=segments,
    )


@dataclass
class LawComparison:
    constant: Metrics
    erl: Metrics
    base_gains: dict
    matched_gains: dict
    analytic_reaching_time: dict
    s0: dict

    @property
    def chattering_ratio(self) -> float:
        """ERL chattering index divided by the constant-rate one."""
        if self.constant.chattering_index == 0.0:
            return 1.0 if self.erl.chattering_index == 0.0 else float("inf")
        return self.erl.chattering_index / self.constant.chattering_index


def _law_arms(s: Scenario) -> tuple[Scenario, Scenario]:
    constant = s.with_overrides({"reaching_law.kind": "constant"})
    erl = s.with_overrides({"reaching_law.kind": "erl", "reaching_law.match_reaching_time": True})
    return constant, erl


def compare_laws(s: Scenario, workers: int = 1) -> LawComparison:
    """Run the scenario under both laws with gains matched for equal reaching time.

    The constant-rate arm uses the configured gains; the ERL arm uses the
    matched gains, which are smaller near the surface.
    """
    constant, erl = _law_arms(s)
    traces = _map(run_scenario, [constant, erl], workers)
    m_const, m_erl = (compute_metrics(tr, s.mode) for tr in traces)

    outer = "beta" if s.mode == "speed" else "k_theta"
    base = {outer: s.base_gains[outer], "k_id": s.base_gains["k_id"], "k_iq": s.base_gains["k_iq"]}
    matched = {
        outer: erl.speed.beta if s.mode == "speed" else erl.position.k_theta,
        "k_id": erl.current.k_id,
        "k_iq": erl.current.k_iq,
    }
    s0 = {outer: s.s0_outer, "k_id": s.s0_current, "k_iq": s.s0_current}
    shape = erl.current.law.params
    analytic = {
        name: (
            reaching_time_constant(s0[name], base[name]),
            reaching_time_erl(s0[name], ErlParams(matched[name], shape.delta0, shape.alpha,
                                                  shape.p_exp)),
        )
        for name in base
    }
    return LawComparison(m_const, m_erl, base, matched, analytic, s0)


def _run_and_measure(s: Scenario) -> Metrics:
    return compute_metrics(run_scenario(s), s.mode)


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _safe_cell(s: Scenario):
    try:
        return _run_and_measure(s)
    except SimulationDivergence as exc:
        return f"diverged: {exc}"


def sweep(s: Scenario, axis: str, values, workers: int = 1) -> dict:
    """One run per value of the dotted config path ``axis``.

    Returns ``{value: Metrics}``; a diverged cell holds an error string
    instead of aborting the sweep.
    """
    if axis.split(".")[0] not in set(DEFAULTS) | {"mode", "duration"}:
        raise ConfigError(f"sweep axis {axis!r} is not a scenario config path")
    scenarios = [s.with_overrides({axis: v}) for v in values]
    results = _map(_safe_cell, scenarios, workers)
    return dict(zip(values, results))
