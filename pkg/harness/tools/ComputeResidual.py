from __future__ import annotations

from typing import Optional

from pydantic import Field

from harness.reporting import emit_csv
from harness.tools.base import ConfiguredTool
from mgcp.fractional_variants import governing_system_residual
from utils import logger

log = logger.get_logger(__name__)


class ComputeResidual(ConfiguredTool):
    """
    Residual of the configured variant's governing equation, one row per (n, axis).
    Space-fractional variants are checked in pgf form, so their rows do not depend on n.
    """

    n: list[int] = Field(default_factory=lambda: [0, 1, 2], description="States n to check.")
    coordinate: Optional[int] = Field(None, description="Single axis (0-based); all axes when omitted.")

    def run(self):
        cfg = self.config
        rates, orders = cfg.rate_matrix(), cfg.orders()
        axes = [self.coordinate] if self.coordinate is not None else list(range(cfg.d))
        rows = []
        for n in self.n:
            for i in axes:
                residual = governing_system_residual(rates, cfg.variant_time(), orders, n, cfg.variant, i)
                rows.append([cfg.variant.value, n, i, residual])
        emit_csv(("variant", "n", "coordinate", "residual"), rows, self.out)
        worst = max(row[-1] for row in rows)
        log.info("governing residuals written", extra={"variant": cfg.variant.value, "worst": worst})
        return self.summary(variant=cfg.variant.value, rows=len(rows), worst=worst)


if __name__ == "__main__":
    from harness.experiment import default_config

    print(ComputeResidual(config=default_config(), n=[0, 1]).run())
