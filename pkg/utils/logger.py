"""
JSON-lines logging for the GCP toolkit.

Every record is one JSON object on stderr (stdout is reserved for CSV and reports)
carrying the run id of the CLI invocation and, inside a verification suite, the
suite and check that emitted it.
"""
import json
import logging
import sys
import traceback
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime, timezone

run_id_var = ContextVar("run_id", default=None)
check_var = ContextVar("check", default=None)

# LogRecord attributes that are not user-supplied extras
_RECORD_ATTRS = set(vars(logging.makeLogRecord({}))) | {"message", "asctime", "run_id", "check", "taskName"}

_configured_level = logging.INFO
_loggers = {}


class RunContextFilter(logging.Filter):
    """Stamps run id and check name onto records; an explicit extra wins"""
    def filter(self, record):
        record.run_id = run_id_var.get() or "-"
        if getattr(record, "check", None) is None:
            record.check = check_var.get()
        return True


class JSONFormatter(logging.Formatter):
    def format(self, record):
        entry = {
            "ts": datetime.fromtimestamp(record.created, timezone.utc).isoformat(timespec="milliseconds"),
            "level": record.levelname,
            "logger": record.name,
            "run_id": getattr(record, "run_id", "-"),
            "msg": record.getMessage(),
        }
        check = getattr(record, "check", None)
        if check:
            entry["suite"], _, _ = check.partition(".")
            entry["check"] = check
        if record.levelno >= logging.WARNING:
            entry["at"] = f"{record.module}:{record.lineno}"
        if record.exc_info and record.exc_info[0] is not None:
            entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": traceback.format_exception(*record.exc_info),
            }
        for key, value in record.__dict__.items():
            if key not in _RECORD_ATTRS and key not in entry:
                entry[key] = value
        return json.dumps(entry, default=str)


def get_logger(name):
    """Logger writing JSON lines to stderr at the level chosen by set_level"""
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(JSONFormatter())
        logger.addHandler(handler)
        logger.addFilter(RunContextFilter())
        logger.setLevel(_configured_level)
        logger.propagate = False
        _loggers[name] = logger
    return logger


def set_level(level):
    """Level of every toolkit logger, existing and future"""
    global _configured_level
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    _configured_level = level
    for logger in _loggers.values():
        logger.setLevel(level)


def set_run_context(run_id=None):
    run_id = run_id or uuid.uuid4().hex[:12]
    run_id_var.set(run_id)
    return run_id


def get_run_id():
    return run_id_var.get()


@contextmanager
def check_context(name):
    """Tag records emitted inside the block with a check name such as 'moments.base'"""
    token = check_var.set(name)
    try:
        yield name
    finally:
        check_var.reset(token)
