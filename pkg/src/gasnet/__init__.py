"""Finite-volume simulation of isentropic gas flow on networks with jump junction conditions."""

from .model import PressureLaw, State
from .network import Config, ConfigError, load_config, parse_config
from .simulator import Simulator, run

__all__ = ["Config", "ConfigError", "PressureLaw", "Simulator", "State", "load_config", "parse_config", "run"]
__version__ = "0.1.0"
