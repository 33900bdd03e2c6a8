"""Experiment configuration, CSV and report output, verification suites and command tools."""
from .experiment import ExperimentConfig, default_config, dump_config, load_config, parse_config
from .reporting import CheckResult, VerificationReport, emit_csv
from .suites import KNOWN_SUITES, run_suite

__all__ = [
    "CheckResult",
    "ExperimentConfig",
    "KNOWN_SUITES",
    "VerificationReport",
    "default_config",
    "dump_config",
    "emit_csv",
    "load_config",
    "parse_config",
    "run_suite",
]
