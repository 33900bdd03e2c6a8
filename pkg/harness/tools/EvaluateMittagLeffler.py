from __future__ import annotations

from pydantic import Field

from harness.reporting import emit_csv
from harness.tools.base import CommandTool
from mgcp.special_functions import MlfParams, mlf3
from utils import logger

log = logger.get_logger(__name__)

MLF_COLUMNS = ("value", "terms_used", "tail_bound")


class EvaluateMittagLeffler(CommandTool):
    """
    Evaluates E^gamma_{alpha,beta}(x) with its truncation bound.
    Prints one bare 'value,terms_used,tail_bound' row per x; table mode adds
    a header and a leading x column.
    """

    alpha: float = Field(..., description="Index alpha > 0.")
    beta: float = Field(1.0, description="Index beta > 0.")
    gamma: float = Field(1.0, description="Index gamma > 0.")
    x: list[float] = Field(..., description="Arguments.")
    table: bool = Field(False, description="Write a header row and an x column.")

    def run(self):
        params = MlfParams(alpha=self.alpha, beta=self.beta, gamma=self.gamma)
        results = [mlf3(params, x) for x in self.x]
        if self.table:
            emit_csv(("x",) + MLF_COLUMNS, [[x, *r.as_row()] for x, r in zip(self.x, results)], self.out)
        else:
            emit_csv(None, [r.as_row() for r in results], self.out)
        log.debug("Mittag-Leffler values written", extra={"points": len(results), "table": self.table})
        return self.summary(alpha=self.alpha, beta=self.beta, gamma=self.gamma, points=len(results))


if __name__ == "__main__":
    print(EvaluateMittagLeffler(alpha=0.5, x=[-1.0, 0.0, 1.0], table=True).run())
