"""
Experiment configuration: JSON files validated into an ExperimentConfig.

Minimal file:
    {"k": 1, "d": 1, "rates": [[1.0]], "variant": "base", "t": [1.0]}
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mgcp.fractional_variants import FractionalOrders, VariantKind
from mgcp.gcp_core import MultiTime, RateMatrix
from mgcp.integrals import IntegralSpec
from utils import logger
from utils.config import config
from utils.error_handler import (
    DomainError,
    MissingFieldError,
    NegativeRateError,
    ShapeError,
    ValidationError,
)

log = logger.get_logger(__name__)

REQUIRED_FIELDS = ("k", "d", "rates", "variant", "t")


class ExperimentConfig(BaseModel):
    """One parameter set of the process plus Monte-Carlo settings"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    k: int = Field(..., description="Number of jump sizes.")
    d: int = Field(..., description="Number of time parameters.")
    rates: list[list[float]] = Field(..., description="k x d matrix of lambda_ji >= 0.")
    variant: VariantKind = Field(..., description="Process variant.")
    t: Union[float, list[float]] = Field(
        ..., description="Length-d time vector; a scalar for multivariate variants."
    )
    alpha: Optional[list[float]] = Field(None, description="Subordinator indices in (0, 1], length d.")
    n_max: Optional[int] = Field(None, description="Largest n of pmf tables; defaults to N*.")
    replicates: int = Field(100_000, description="Monte-Carlo replicates per check.")
    seed: int = Field(default_factory=lambda: config.sampling.default_seed, description="Base RNG seed.")
    integral_alpha: Optional[list[float]] = Field(None, description="RL orders of the integral, length d.")
    quadrature_nodes: Optional[int] = Field(None, description="Mesh intervals per axis.")
    tolerances: dict[str, float] = Field(default_factory=dict, description="Per-check tolerance overrides.")

    @model_validator(mode="before")
    @classmethod
    def _parse_variant(cls, data):
        if isinstance(data, dict) and "variant" in data:
            data = dict(data)
            data["variant"] = VariantKind.parse(data["variant"])
        return data

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.k < 1 or self.d < 1:
            raise DomainError("k and d must be positive", "k" if self.k < 1 else "d")
        if len(self.rates) != self.k or any(len(row) != self.d for row in self.rates):
            shape = f"{len(self.rates)}x{len(self.rates[0]) if self.rates else 0}"
            raise ShapeError(f"rates is {shape}, declared k x d = {self.k}x{self.d}", "rates")
        for j, row in enumerate(self.rates):
            for i, value in enumerate(row):
                if value < 0:
                    raise NegativeRateError(f"rates[{j}][{i}] = {value} is negative")
        if self.alpha is not None:
            if len(self.alpha) != self.d:
                raise ShapeError(f"alpha has {len(self.alpha)} entries, expected d={self.d}", "alpha")
            FractionalOrders(alpha=tuple(self.alpha))
        if self.variant.is_multivariate:
            if not isinstance(self.t, float):
                raise ShapeError("multivariate variants take a scalar time t", "t")
        elif isinstance(self.t, list) and len(self.t) != self.d:
            raise ShapeError(f"t has {len(self.t)} entries, expected d={self.d}", "t")
        if self.integral_alpha is not None:
            if len(self.integral_alpha) != self.d:
                raise ShapeError(f"integral_alpha has {len(self.integral_alpha)} entries, expected d={self.d}",
                                 "integral_alpha")
            if any(not math.isfinite(a) or a <= 0 for a in self.integral_alpha):
                raise DomainError("integral_alpha entries must be positive", "integral_alpha")
        if self.n_max is not None and self.n_max < 0:
            raise DomainError("n_max must be non-negative", "n_max")
        if self.replicates < 1:
            raise DomainError("replicates must be positive", "replicates")
        if self.seed < 0:
            raise DomainError("seed must be non-negative", "seed")
        # rows, column sums and time domain
        RateMatrix.from_array(self.rates)
        self.time_point()
        return self

    def rate_matrix(self) -> RateMatrix:
        return RateMatrix.from_array(self.rates)

    def orders(self) -> FractionalOrders:
        if self.alpha is None:
            return FractionalOrders.uniform(1.0, self.d)
        return FractionalOrders(alpha=tuple(self.alpha))

    def time_point(self) -> MultiTime:
        """The multiparameter point at which the variant's law is evaluated"""
        if isinstance(self.t, float):
            return MultiTime.diagonal(self.t, self.d)
        return MultiTime(t=tuple(self.t))

    def variant_time(self):
        """Time argument in the variant's own shape (scalar for multivariate)"""
        return self.t if self.variant.is_multivariate else self.time_point()

    def integral_spec(self) -> IntegralSpec:
        orders = tuple(self.integral_alpha) if self.integral_alpha else (1.0,) * self.d
        extra = {"quadrature_nodes": self.quadrature_nodes} if self.quadrature_nodes else {}
        return IntegralSpec(orders=orders, t=self.time_point().t, **extra)

    def tolerance(self, name, default) -> float:
        return float(self.tolerances.get(name, default))

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Validated copy with some fields replaced"""
        data = self.model_dump(mode="json")
        data.update({key: value for key, value in changes.items() if value is not None})
        return ExperimentConfig.model_validate(data)


def _field_error(error: pydantic.ValidationError) -> ValidationError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first.get("loc", ())) or None
    if first.get("type") == "missing":
        return MissingFieldError(field)
    return ValidationError(f"Invalid value for '{field}': {first.get('msg')}", field=field)


def parse_config(data) -> ExperimentConfig:
    """Validate an already-decoded JSON object"""
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    for name in REQUIRED_FIELDS:
        if name not in data:
            raise MissingFieldError(name)
    try:
        return ExperimentConfig.model_validate(data)
    except pydantic.ValidationError as e:
        raise _field_error(e) from e


def load_config(path) -> ExperimentConfig:
    """
    Read and validate a JSON experiment file.

    Raises:
        MissingFieldError, ShapeError, DomainError, NegativeRateError: field-level problems
        ValidationError: unreadable file or malformed JSON
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"Cannot read config {path}: {e.strerror or e}", field="config") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Config {path} is not valid JSON: {e.msg} (line {e.lineno})", field="config") from e
    cfg = parse_config(data)
    log.info("config loaded", extra={"path": str(path), "variant": cfg.variant.value, "k": cfg.k, "d": cfg.d})
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical JSON form; load(dump(x)) == x"""
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, indent=2)


def default_config() -> ExperimentConfig:
    """Desk-scale base instance used when no config file is given"""
    return ExperimentConfig(k=2, d=2, rates=[[1.0, 2.0], [3.0, 4.0]], variant=VariantKind.BASE, t=[1.0, 1.0],
                            alpha=[0.5, 0.8], replicates=100_000)
