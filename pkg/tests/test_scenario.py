import math

import pytest

from erlsmc.harness.scenario import ConfigError, build_scenario, load_scenario
from erlsmc.reaching import ConstantRate, Erl, reaching_time_constant, reaching_time_erl


def speed(**extra):
    raw = {"mode": "speed", "duration": 0.1}
    raw.update(extra)
    return raw


def test_defaults_build():
    s = build_scenario(speed())
    assert s.substeps == 10 and s.n_ticks == 500
    assert s.motor == s.plant
    assert isinstance(s.speed.law, Erl)
    assert s.current.law.epsilon == 3.0


@pytest.mark.parametrize("raw", [
    {"duration": 1.0},
    {"mode": "torque", "duration": 1.0},
    speed(bogus=1),
    speed(motor={"Rz": 1.0}),
    speed(motor={"Rs": -1.0}),
    speed(simulation={"dt": 3e-5}),
    speed(load=[[0.5, 1.0]]),
    speed(uncertainty=[[0.05, "Rr", 0.0]]),
    speed(uncertainty=[[0.05, "p", 2.0]]),
    speed(uncertainty=[[0.06, "Rr", 1.1], [0.05, "Rs", 1.1]]),
    speed(plant_scale={"J": -2.0}),
    speed(reference={"shape": "ramp"}),
    speed(reference={"accel_limit": 10.0}),
    speed(flux={"psi_ref": 0.01}),
    speed(reaching_law={"kind": "erl", "delta0": 1.0}),
    speed(speed_loop={"k_omega": 3.0}),
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        build_scenario(raw)


def test_plant_scale_and_events_only_touch_plant():
    s = build_scenario(speed(plant_scale={"J": 2.0}, uncertainty=[[0.05, "Rr", 1.7]]))
    assert s.plant.J == pytest.approx(2 * s.motor.J)
    assert s.motor.J == 0.0154 and s.motor.Rr == 1.84
    assert s.uncertainty[0].multiplier == 1.7


def test_position_reference_in_degrees():
    s = build_scenario({"mode": "position", "duration": 1.5,
                        "reference": {"shape": "square", "amplitude": 240, "period": 1.0,
                                      "start": 0.5}})
    r = s.reference
    assert r.target(0.4) == 0.0
    assert r.target(0.6) == pytest.approx(math.radians(240))
    assert r.target(1.1) == pytest.approx(-math.radians(240))
    assert [t for t, _ in r.edges(1.5)] == [0.5, 1.0, 1.5]


def test_gain_matching():
    s = build_scenario(speed(reference={"value": 148.2}))
    assert s.s0_outer == 148.2 and s.s0_current == pytest.approx(6.1875)
    t_c = reaching_time_constant(148.2, s.base_gains["beta"])
    assert reaching_time_erl(148.2, s.speed.law.params) == pytest.approx(t_c, rel=1e-9)
    t_c = reaching_time_constant(s.s0_current, 150.0)
    assert reaching_time_erl(s.s0_current, s.current.law.params) == pytest.approx(t_c, rel=1e-9)

    unmatched = build_scenario(speed(reaching_law={"match_reaching_time": False}))
    assert unmatched.speed.beta == unmatched.base_gains["beta"]
    const = build_scenario(speed(reaching_law={"kind": "constant"}))
    assert isinstance(const.speed.law, ConstantRate) and const.current.k_id == 150.0


def test_auto_beta_covers_envelope():
    s = build_scenario(speed(speed_loop={"beta": "auto"}, reference={"value": 148.2},
                             load=[[0.05, 10.0]]))
    # the worst case is at least the load torque on half the inertia
    assert s.base_gains["beta"] >= 1.5 * 10.0 / (0.5 * 0.0154)


def test_with_overrides_rebuilds():
    s = build_scenario(speed())
    t = s.with_overrides({"reaching_law.delta0": 0.5, "plant_scale.J": 2.0})
    assert t.speed.law.params.delta0 == 0.5 and t.plant.J == pytest.approx(0.0308)
    assert s.speed.law.params.delta0 == 0.2


def test_shipped_scenarios_validate(scenario_dir):
    files = sorted(scenario_dir.glob("*.yaml"))
    assert len(files) >= 4
    for f in files:
        assert load_scenario(f).name == f.stem


def test_load_scenario_errors(tmp_path):
    with pytest.raises(OSError):
        load_scenario(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("mode: [unclosed\n")
    with pytest.raises(ConfigError):
        load_scenario(bad)
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_scenario(bad)
