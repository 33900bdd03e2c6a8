"""
Error handling module for the GCP toolkit.
Provides the application error hierarchy and standardized reporting functions.
"""
import sys
import traceback
import uuid
import time
from functools import wraps
from . import logger

log = logger.get_logger(__name__)

EXIT_VERIFICATION_FAILED = 1


class AppError(Exception):
    """Base exception class for application errors"""
    def __init__(self, message, error_code=None, exit_code=1):
        self.message = message
        self.error_id = str(uuid.uuid4())
        self.error_code = error_code
        self.exit_code = exit_code
        self.timestamp = time.time()
        super().__init__(self.message)


class ValidationError(AppError):
    """Error raised when input validation fails"""
    def __init__(self, message, error_code="validation_error", field=None):
        self.field = field
        super().__init__(message, error_code, exit_code=2)


class MissingFieldError(ValidationError):
    """A required configuration field is absent"""
    def __init__(self, field):
        super().__init__(f"Missing required field: {field}", "missing_field", field)


class ShapeError(ValidationError):
    """Array-valued inputs have inconsistent shapes"""
    def __init__(self, message, field):
        super().__init__(message, "shape_mismatch", field)


class DomainError(ValidationError):
    """A parameter lies outside its mathematical domain"""
    def __init__(self, message, field=None):
        super().__init__(message, "out_of_domain", field)


class NegativeRateError(ValidationError):
    """A transition rate is negative"""
    def __init__(self, message, field="rates"):
        super().__init__(message, "negative_rate", field)


class UnknownSuiteError(ValidationError):
    """The requested verification suite does not exist"""
    def __init__(self, suite, known):
        self.suite = suite
        super().__init__(
            f"Unknown suite '{suite}'. Known suites: {', '.join(known)}",
            "unknown_suite",
            "suite"
        )


class NumericalError(AppError):
    """Error raised when a numerical method cannot deliver its guarantee"""
    def __init__(self, message, error_code="numerical_error"):
        super().__init__(message, error_code, exit_code=3)


class SeriesConvergenceError(NumericalError):
    """A series did not meet its stopping rule within the term budget"""
    def __init__(self, message, terms_used=None, last_term=None):
        self.terms_used = terms_used
        self.last_term = last_term
        super().__init__(message, "series_not_converged")


class EnumerationLimitError(NumericalError):
    """An index-set enumeration would exceed the configured cap"""
    def __init__(self, what, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(
            f"Enumerating {what} needs {count} elements, above the cap of {cap}",
            "enumeration_cap_exceeded"
        )


class QuadratureError(NumericalError):
    """A quadrature produced a non-finite value or was under-resolved"""
    def __init__(self, message):
        super().__init__(message, "quadrature_failed")


class ContractViolationError(AppError):
    """An operation was called outside its contract"""
    def __init__(self, message):
        super().__init__(message, "contract_violation", exit_code=4)


class OutputError(AppError):
    """Error raised when writing results fails"""
    def __init__(self, message, path, original_error=None):
        self.path = str(path)
        self.original_error = original_error
        super().__init__(
            f"Cannot write {self.path}: {message}",
            error_code="output_error",
            exit_code=5
        )


def generate_error_id():
    """Generate a unique error ID for tracking"""
    return str(uuid.uuid4())


def format_error_for_user(error, include_details=True):
    """
    Format an error message suitable for the terminal.

    Args:
        error: The exception to format
        include_details: Whether to include the error message

    Returns:
        An ASCII error message string
    """
    if isinstance(error, AppError):
        error_id = error.error_id
        if include_details:
            return f"error [{error.error_code}] (ID: {error_id}): {error.message}"
        return f"error (ID: {error_id})"
    error_id = generate_error_id()
    if include_details:
        return f"error [unexpected] (ID: {error_id}): {str(error)}"
    return f"error (ID: {error_id})"


def report_error(error_id, error, stack_trace=None, context=None):
    """
    Log an error with its tracking ID.

    Args:
        error_id: Unique ID for the error
        error: The exception object
        stack_trace: Optional stack trace as string
        context: Optional dictionary of context information
    """
    error_type = type(error).__name__
    error_message = str(error)

    if stack_trace is None and hasattr(error, '__traceback__'):
        stack_trace = ''.join(traceback.format_tb(error.__traceback__))

    log.error(
        f"Error ID: {error_id}, Type: {error_type}, Message: {error_message}",
        extra={
            "error_id": error_id,
            "error_type": error_type,
            "stack_trace": stack_trace,
            "context": context or {}
        }
    )


def exit_code_for(error):
    """Process exit code for an exception"""
    if isinstance(error, AppError):
        return error.exit_code
    return 70


def handle_errors(func):
    """
    Decorator for CLI command functions.
    Catches exceptions, logs details, prints a message to stderr and
    returns the process exit code instead of raising.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except AppError as e:
            report_error(e.error_id, e)
            print(format_error_for_user(e), file=sys.stderr)
            return e.exit_code
        except Exception as e:
            error_id = generate_error_id()
            report_error(error_id, e, traceback.format_exc())
            print(format_error_for_user(e), file=sys.stderr)
            return exit_code_for(e)
    return wrapper
