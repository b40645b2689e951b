"""Induction-motor drive simulator with sliding-mode loops on an exponential reaching law."""

from .controllers import (CurrentLoopGains, CurrentRefs, MechanicalModel, PositionLoopGains,
                          SpeedLoopGains, current_control, position_control, speed_control)
from .inverter import InverterParams, limit_voltage
from .motor import (MotorParams, MotorState, ParameterError, PlantInputs, SimulationDivergence,
                    derivatives, electromagnetic_torque, step_rk4)
from .orientation import (FluxFloorError, OrientationState, abc_to_dq, dq_to_abc,
                          slip_frequency, synchronous_speed)
from .reaching import (ConstantRate, Erl, ErlParams, matched_erl_gain, n_of_s,
                       reaching_time_advantage, reaching_time_constant, reaching_time_erl,
                       switching_term)

__version__ = "0.1.0"

__all__ = [
    "ConstantRate", "CurrentLoopGains", "CurrentRefs", "Erl", "ErlParams", "FluxFloorError",
    "InverterParams", "MechanicalModel", "MotorParams", "MotorState", "OrientationState",
    "ParameterError", "PlantInputs", "PositionLoopGains", "SimulationDivergence",
    "SpeedLoopGains", "abc_to_dq", "current_control", "derivatives", "dq_to_abc",
    "electromagnetic_torque", "limit_voltage", "matched_erl_gain", "n_of_s",
    "position_control", "reaching_time_advantage", "reaching_time_constant",
    "reaching_time_erl", "slip_frequency", "speed_control", "step_rk4", "switching_term",
    "synchronous_speed",
]
