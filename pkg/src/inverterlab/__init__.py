"""Simulation toolkit for a single-phase LC-filtered voltage-source inverter.

Three output-voltage controllers (backstepping, sliding mode, Mamdani
fuzzy) drive an averaged or PWM-switched plant; output quality is scored
by THD and tracking error.
"""

from .analysis import Spectrum, dft_harmonics, rms, thd, tracking_metrics
from .config import build_config, load_scenario
from .exceptions import AnalysisError, ConfigError, InverterLabError, SimulationFault
from .fuzzy import FuzzyConfig, RuleTable, default_rule_table, flc_command
from .nlctrl import ControllerGains, backstep_command, smc_command
from .plant import LoadModel, PlantParams, PlantState
from .pwm import PwmConfig
from .reference import ReferenceSpec, reference_eval
from .sim import SimConfig, SimResult, TraceRecord, rk4_step, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "ConfigError",
    "ControllerGains",
    "FuzzyConfig",
    "InverterLabError",
    "LoadModel",
    "PlantParams",
    "PlantState",
    "PwmConfig",
    "ReferenceSpec",
    "RuleTable",
    "SimConfig",
    "SimResult",
    "SimulationFault",
    "Spectrum",
    "TraceRecord",
    "backstep_command",
    "build_config",
    "default_rule_table",
    "dft_harmonics",
    "flc_command",
    "load_scenario",
    "reference_eval",
    "rk4_step",
    "rms",
    "run_scenario",
    "smc_command",
    "thd",
    "tracking_metrics",
]
