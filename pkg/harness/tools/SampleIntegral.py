from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import Field

from harness.reporting import emit_csv
from harness.tools.base import ConfiguredTool
from mgcp.integrals import IntegralSpec, integral_mean, integral_sample_compound, integral_sample_quadrature
from mgcp.samplers import RngStream
from utils import logger

log = logger.get_logger(__name__)


class SampleIntegral(ConfiguredTool):
    """
    Draws replicates of the Riemann or Riemann-Liouville integral of the base field
    over [0, t]. The compound mode is exact and only defined for alpha = 1.
    """

    mode: Literal["compound", "quadrature"] = Field("compound", description="Sampler to use.")
    alpha: Optional[list[float]] = Field(None, description="RL orders; defaults to the config's integral_alpha.")
    paths: Optional[int] = Field(None, description="Replicates; defaults to the config's replicates.")

    def spec(self) -> IntegralSpec:
        cfg = self.config
        spec = cfg.integral_spec()
        if self.alpha is not None:
            return IntegralSpec(orders=tuple(self.alpha), t=spec.t, quadrature_nodes=spec.quadrature_nodes)
        return spec

    def run(self):
        cfg = self.config
        spec = self.spec()
        rates = cfg.rate_matrix()
        reps = self.paths or cfg.replicates
        rng = RngStream(cfg.seed)
        if self.mode == "compound":
            draws = integral_sample_compound(rates, spec.t, rng, reps, orders=spec.orders)
        else:
            draws = integral_sample_quadrature(rates, spec, rng, reps)
        emit_csv(("replicate", "value"), [[i, float(v)] for i, v in enumerate(draws)], self.out)
        log.info("integral sample written", extra={"mode": self.mode, "replicates": reps,
                                                   "orders": list(spec.orders)})
        return self.summary(mode=self.mode, replicates=reps, sample_mean=float(np.mean(draws)),
                            exact_mean=integral_mean(rates, spec))


if __name__ == "__main__":
    from harness.experiment import default_config

    print(SampleIntegral(config=default_config(), paths=1000).run())
