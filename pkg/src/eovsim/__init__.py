"""Deterministic simulator of the execute-order-validate pipeline under
injected network delays."""

__version__ = "0.1.0"

from .config import RunConfig, parse_config_file, parse_config_text, resolve_config
from .simulation import RunResult, Simulation, run_simulation

__all__ = [
    "RunConfig",
    "RunResult",
    "Simulation",
    "parse_config_file",
    "parse_config_text",
    "resolve_config",
    "run_simulation",
]
