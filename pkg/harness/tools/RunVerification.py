from __future__ import annotations

from typing import Optional

from pydantic import Field, field_validator

from harness.reporting import VerificationReport, write_report
from harness.suites import KNOWN_SUITES, run_suite
from harness.tools.base import ConfiguredTool
from utils import logger
from utils.error_handler import UnknownSuiteError

log = logger.get_logger(__name__)


class RunVerification(ConfiguredTool):
    """
    Runs a verification suite and writes its JSON report.
    The caller turns a failed report into a non-zero exit code.
    """

    suite: str = Field("all", description="Suite name or 'all'.")
    workers: Optional[int] = Field(None, description="Concurrent checks; defaults to GCP_WORKERS.")

    @field_validator("suite")
    @classmethod
    def _known_suite(cls, value):
        if value not in KNOWN_SUITES:
            raise UnknownSuiteError(value, KNOWN_SUITES)
        return value

    def report(self) -> VerificationReport:
        return run_suite(self.config, self.suite, self.workers)

    def run(self):
        report = self.report()
        write_report(report, self.out)
        failed = [c.name for c in report.failed()]
        return self.summary(suite=self.suite, overall=report.overall, checks=len(report.checks), failed=failed)


if __name__ == "__main__":
    from harness.experiment import default_config

    print(RunVerification(config=default_config().with_overrides(replicates=2000), suite="kernels").run())
