from __future__ import annotations

from typing import Optional

import numpy as np
from pydantic import Field

from harness.reporting import emit_csv
from harness.tools.base import ConfiguredTool
from mgcp.gcp_core import MultiTime, as_multitime
from mgcp.samplers import RngStream, sample_variant_paths
from utils import logger
from utils.error_handler import ShapeError

log = logger.get_logger(__name__)


def parse_grid(text: str, d: int) -> list[MultiTime]:
    """
    "0.5,1,1.5" gives diagonal points; "0.5:1,1:2" gives d-vectors.
    Entries are separated by ',' and vector components by ':'.
    """
    points = []
    for entry in (part.strip() for part in text.split(",")):
        if not entry:
            continue
        try:
            values = [float(v) for v in entry.split(":")]
        except ValueError as e:
            raise ShapeError(f"grid entry '{entry}' is not a number or ':'-separated vector", "grid") from e
        points.append(MultiTime.diagonal(values[0], d) if len(values) == 1 else as_multitime(values, d))
    if not points:
        raise ShapeError("grid is empty", "grid")
    return points


class SamplePaths(ConfiguredTool):
    """
    Simulates paths of the configured variant on an increasing grid and writes
    one CSV row per (path, grid point).
    """

    paths: int = Field(10, description="Number of independent paths.")
    grid: Optional[list[MultiTime]] = Field(None, description="Increasing grid; defaults to steps points up to t.")
    steps: int = Field(10, description="Points of the default grid.")

    def default_grid(self) -> list[MultiTime]:
        if self.grid:
            return self.grid
        corner = self.config.time_point().array
        return [MultiTime(t=tuple(corner * (s / self.steps))) for s in range(1, self.steps + 1)]

    def run(self):
        cfg = self.config
        grid = self.default_grid()
        rng = RngStream(cfg.seed)
        values = sample_variant_paths(cfg.rate_matrix(), grid, cfg.orders(), cfg.variant, rng, self.paths)
        header = ["path_id", "grid_index"] + [f"t_{i + 1}" for i in range(cfg.d)] + ["value"]
        rows = [
            [path_id, idx, *point.t, int(values[path_id, idx])]
            for path_id in range(values.shape[0])
            for idx, point in enumerate(grid)
        ]
        emit_csv(header, rows, self.out)
        log.info("sample paths written", extra={"variant": cfg.variant.value, "paths": self.paths,
                                                "grid_points": len(grid), "seed": cfg.seed})
        return self.summary(variant=cfg.variant.value, paths=self.paths, grid_points=len(grid),
                            mean_final=float(np.mean(values[:, -1])))


if __name__ == "__main__":
    from harness.experiment import default_config

    print(SamplePaths(config=default_config(), paths=3, steps=4).run())
