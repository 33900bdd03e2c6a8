"""
CSV emission and verification reports.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

from pydantic import BaseModel, Field, computed_field

from utils import logger
from utils.error_handler import OutputError

log = logger.get_logger(__name__)


def format_cell(value) -> str:
    """ASCII cell text; reals with 17 significant digits"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


def render_csv(header, rows) -> str:
    """CSV text; header None writes bare rows, which must then share one width"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    rows = list(rows)
    if header is not None:
        writer.writerow(header)
    width = len(header) if header is not None else (len(rows[0]) if rows else 0)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} cells, expected {width}")
        writer.writerow([format_cell(cell) for cell in row])
    return buffer.getvalue()


def write_text(text: str, path=None):
    """Write to path, or stdout when path is None or '-'"""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    try:
        with open(path, "w", encoding="ascii", newline="") as handle:
            handle.write(text)
    except (OSError, UnicodeEncodeError) as e:
        raise OutputError(getattr(e, "strerror", None) or str(e), path, e) from e
    log.info("output written", extra={"path": str(path), "bytes": len(text)})


def emit_csv(header, rows, path=None):
    """
    Write a table as RFC-4180 CSV with a header row (also when rows is empty).

    Raises:
        OutputError: the file cannot be written
    """
    write_text(render_csv(None if header is None else list(header), rows), path)


class CheckResult(BaseModel):
    """One named check: statistic against tolerance"""
    name: str
    statistic: float
    tolerance: float
    passed: bool
    gating: bool = True
    detail: str = ""

    @classmethod
    def at_most(cls, name, statistic, tolerance, detail="", gating=True) -> "CheckResult":
        statistic = float(statistic)
        passed = math.isfinite(statistic) and statistic <= tolerance
        return cls(name=name, statistic=statistic, tolerance=float(tolerance), passed=passed,
                   gating=gating, detail=detail)

    @classmethod
    def at_least(cls, name, statistic, tolerance, detail="", gating=True) -> "CheckResult":
        statistic = float(statistic)
        passed = math.isfinite(statistic) and statistic >= tolerance
        return cls(name=name, statistic=statistic, tolerance=float(tolerance), passed=passed,
                   gating=gating, detail=detail)


class VerificationReport(BaseModel):
    """Checks of one suite run; overall is the conjunction of the gating checks"""
    suite: str
    seed: int
    checks: list[CheckResult] = Field(default_factory=list)

    @computed_field
    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if c.gating and not c.passed]

    def to_json(self) -> str:
        """Deterministic rendering: sorted keys, no timestamps"""
        data = self.model_dump()
        return json.dumps(data, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_report(report: VerificationReport, path=None):
    write_text(report.to_json(), path)
