import json
import logging

from utils import logger


def _format(msg, level=logging.INFO, **extra):
    record = logging.makeLogRecord({"name": "gcp.test", "levelno": level, "levelname": logging.getLevelName(level),
                                    "msg": msg, **extra})
    logger.RunContextFilter().filter(record)
    return json.loads(logger.JSONFormatter().format(record))


def test_record_carries_run_and_check():
    logger.set_run_context("run-1")
    with logger.check_context("moments.base"):
        entry = _format("draws done", replicates=10)
    assert entry["run_id"] == "run-1"
    assert entry["suite"] == "moments"
    assert entry["check"] == "moments.base"
    assert entry["replicates"] == 10
    assert entry["msg"] == "draws done"


def test_check_context_is_reset():
    with logger.check_context("kernels.stable"):
        pass
    entry = _format("outside")
    assert "check" not in entry
    assert "suite" not in entry


def test_explicit_check_extra_wins():
    with logger.check_context("kernels.stable"):
        entry = _format("failed", check="kernels.caputo")
    assert entry["check"] == "kernels.caputo"


def test_warnings_name_their_location():
    entry = _format("careful", level=logging.WARNING)
    assert "at" in entry
    assert "at" not in _format("fine")


def test_set_level_applies_to_existing_loggers():
    log = logger.get_logger("gcp.test.level")
    logger.set_level("warning")
    try:
        assert log.level == logging.WARNING
    finally:
        logger.set_level("INFO")
