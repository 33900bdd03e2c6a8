from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import Field

from harness.reporting import emit_csv
from harness.tools.base import ConfiguredTool
from mgcp import fractional_variants as fv
from mgcp import gcp_core
from mgcp.fractional_variants import VariantKind
from mgcp.gcp_core import PmfTable
from utils import logger

log = logger.get_logger(__name__)

PMF_HEADER = ("n", "p", "cumulative")


class ComputePmf(ConfiguredTool):
    """
    Writes the pmf table of the configured variant for n = 0..n_max.
    For the base process the evaluator can be chosen; all three give the same table.
    """

    n_max: Optional[int] = Field(None, description="Largest n; defaults to the config value or N*.")
    method: Literal["direct", "conv", "sumgcp"] = Field(
        "conv", description="Base-process evaluator: Omega-sum, Poisson convolution or sum of one-parameter GCPs."
    )

    def default_n_max(self) -> int:
        cfg = self.config
        if self.n_max is not None:
            return self.n_max
        if cfg.n_max is not None:
            return cfg.n_max
        rates, point = cfg.rate_matrix(), cfg.time_point()
        if cfg.variant.is_time:
            m = fv.time_frac_mean(rates, point, cfg.orders())
            v = fv.time_frac_variance(rates, point, cfg.orders())
            return int(math.ceil(m + 12.0 * math.sqrt(v) + 20.0))
        return gcp_core.truncation_index(rates, point)

    def table(self) -> PmfTable:
        cfg = self.config
        rates, n_max = cfg.rate_matrix(), self.default_n_max()
        if cfg.variant is not VariantKind.BASE:
            return fv.variant_pmf_table(rates, cfg.variant_time(), cfg.orders(), cfg.variant, n_max)
        point = cfg.time_point()
        if self.method == "direct":
            return PmfTable.from_probs([gcp_core.pmf_direct(rates, point, n) for n in range(n_max + 1)])
        if self.method == "sumgcp":
            return gcp_core.pmf_sum_of_gcps(rates, point, n_max)
        return gcp_core.pmf_convolution(rates, point, n_max)

    def run(self):
        table = self.table()
        emit_csv(PMF_HEADER, table.rows(), self.out)
        log.info("pmf table written", extra={"variant": self.config.variant.value, "n_max": table.n_max,
                                             "method": self.method})
        return self.summary(variant=self.config.variant.value, n_max=table.n_max,
                            mass=table.mass_accounted, method=self.method)


if __name__ == "__main__":
    from harness.experiment import default_config

    print(ComputePmf(config=default_config(), n_max=8).run())
