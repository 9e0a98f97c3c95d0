"""
Sim - 고정 스텝 폐루프 시뮬레이션
"""

from .closed_loop import (
    check_step,
    max_switching_gain,
    nominal_step,
    simulate_nominal,
    simulate_practical,
    simulate_sliding_motion,
    stable_step,
)
from .controller import AugmentedState, ControlLaw, controller_derivative, sign_sigma, surface_value
from .integrate import RK4_STABILITY_LIMIT, rk4_step
from .reaching import ReachReport, reaching_test
from .trajectory import Trajectory, write_plot_script

__all__ = [
    "RK4_STABILITY_LIMIT",
    "AugmentedState",
    "ControlLaw",
    "ReachReport",
    "Trajectory",
    "check_step",
    "controller_derivative",
    "max_switching_gain",
    "nominal_step",
    "reaching_test",
    "rk4_step",
    "sign_sigma",
    "simulate_nominal",
    "simulate_practical",
    "simulate_sliding_motion",
    "stable_step",
    "surface_value",
    "write_plot_script",
]
