"""Sweep harness: configuration, presets, execution and the verify suite."""
from .config import SCHEMA_VERSION, ConfigError, RunConfig
from .presets import PRESETS, TASKS
from .runner import SweepResult, run
from .verify import VerifyReport, verify

__all__ = ["SCHEMA_VERSION", "ConfigError", "RunConfig", "PRESETS", "TASKS", "SweepResult", "run",
           "VerifyReport", "verify"]
