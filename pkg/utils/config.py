"""
Configuration module for the GCP toolkit.
Provides centralized numerical and runtime settings with environment variable support.
"""
import os
from dotenv import load_dotenv
from dataclasses import dataclass

from .error_handler import ValidationError

# Load environment variables from .env file
load_dotenv()


def _env_float(name, default):
    return float(os.environ.get(name, default))


def _env_int(name, default):
    return int(os.environ.get(name, default))


def _env_bool(name, default):
    return os.environ.get(name, str(default)).lower() == "true"


@dataclass(frozen=True)
class SeriesConfig:
    """Power-series evaluation settings"""
    x_switch: float = 30.0
    term_budget: int = 10000
    alternating_term_budget: int = 2000
    rel_eps: float = 1e-15
    # log of the largest term below which plain float summation is accurate
    float_peak_limit: float = 3.0

    @classmethod
    def from_env(cls):
        """Create from environment variables"""
        return cls(
            x_switch=_env_float("GCP_SERIES_X_SWITCH", 30.0),
            term_budget=_env_int("GCP_SERIES_TERM_BUDGET", 10000),
            alternating_term_budget=_env_int("GCP_SERIES_ALT_TERM_BUDGET", 2000),
            rel_eps=_env_float("GCP_SERIES_REL_EPS", 1e-15),
            float_peak_limit=_env_float("GCP_SERIES_FLOAT_PEAK_LIMIT", 3.0)
        )


@dataclass(frozen=True)
class EnumerationConfig:
    """Index-set enumeration settings"""
    cap: int = 10_000_000
    strict_positive_rates: bool = False

    @classmethod
    def from_env(cls):
        """Create from environment variables"""
        return cls(
            cap=_env_int("GCP_ENUMERATION_CAP", 10_000_000),
            strict_positive_rates=_env_bool("GCP_STRICT_POSITIVE_RATES", False)
        )


@dataclass(frozen=True)
class SamplingConfig:
    """Random generation settings"""
    default_seed: int = 42
    poisson_inversion_threshold: float = 30.0
    poisson_normal_threshold: float = 1e15
    workers: int = 1

    @classmethod
    def from_env(cls):
        """Create from environment variables"""
        return cls(
            default_seed=_env_int("GCP_DEFAULT_SEED", 42),
            poisson_inversion_threshold=_env_float("GCP_POISSON_INVERSION_THRESHOLD", 30.0),
            poisson_normal_threshold=_env_float("GCP_POISSON_NORMAL_THRESHOLD", 1e15),
            workers=_env_int("GCP_WORKERS", 1)
        )


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature and finite-difference settings"""
    caputo_nodes: int = 2000
    rl_nodes: int = 2000
    fd_step: float = 1e-4

    @classmethod
    def from_env(cls):
        """Create from environment variables"""
        return cls(
            caputo_nodes=_env_int("GCP_CAPUTO_NODES", 2000),
            rl_nodes=_env_int("GCP_RL_NODES", 2000),
            fd_step=_env_float("GCP_FD_STEP", 1e-4)
        )


@dataclass(frozen=True)
class LoggingConfig:
    """Logging settings"""
    level: str = "INFO"

    @classmethod
    def from_env(cls):
        """Create from environment variables"""
        return cls(level=os.environ.get("GCP_LOG_LEVEL", "INFO"))


@dataclass(frozen=True)
class AppConfig:
    """Main application configuration"""
    series: SeriesConfig
    enumeration: EnumerationConfig
    sampling: SamplingConfig
    quadrature: QuadratureConfig
    logging: LoggingConfig

    @classmethod
    def from_env(cls):
        """Create from environment variables"""
        return cls(
            series=SeriesConfig.from_env(),
            enumeration=EnumerationConfig.from_env(),
            sampling=SamplingConfig.from_env(),
            quadrature=QuadratureConfig.from_env(),
            logging=LoggingConfig.from_env()
        )

    def validate(self):
        """
        Check the environment settings before any command runs.

        Raises:
            ValidationError: a setting is out of range
        """
        problems = []

        if self.series.x_switch <= 0:
            problems.append("GCP_SERIES_X_SWITCH must be positive")
        if self.series.term_budget < 2 or self.series.alternating_term_budget < 2:
            problems.append("series term budgets must be at least 2")
        if self.enumeration.cap < 1:
            problems.append("GCP_ENUMERATION_CAP must be positive")
        if self.quadrature.caputo_nodes < 2 or self.quadrature.rl_nodes < 2:
            problems.append("quadrature node counts must be at least 2")
        if self.sampling.workers < 1:
            problems.append("GCP_WORKERS must be at least 1")
        if not 0 < self.sampling.poisson_inversion_threshold <= self.sampling.poisson_normal_threshold:
            problems.append("Poisson thresholds must satisfy 0 < inversion <= normal")
        if self.quadrature.fd_step <= 0:
            problems.append("GCP_FD_STEP must be positive")

        if problems:
            raise ValidationError(f"Invalid environment configuration: {'; '.join(problems)}", field="environment")

        return True


# Global config instance
config = AppConfig.from_env()
