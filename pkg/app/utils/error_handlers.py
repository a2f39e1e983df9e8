"""
Error handling utilities for the sconv toolkit.

This module provides the exception hierarchy raised by the services and
the handler that turns any of them into a CLI exit code plus a one-line
diagnostic.
"""

import functools
import logging
from typing import Any, Dict, Optional

import click
from pydantic import ValidationError as PydanticValidationError

from app.utils.validators import format_validation_error

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class SConvError(Exception):
    """Base exception class for toolkit errors"""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_RUNTIME,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(SConvError):
    """Raised when an argument or a config value is out of its domain"""

    def __init__(self, message: str, field: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_VALIDATION,
            error_code="VALIDATION_ERROR",
            details=details or {},
        )
        self.field = field
        if field:
            self.details["field"] = field


class ConfigError(SConvError):
    """Raised when the run config cannot be read or parsed"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_VALIDATION,
            error_code="CONFIG_ERROR",
            details={"path": path} if path else {},
        )


class GridMismatchError(SConvError):
    """Raised when two objects that must share a grid do not"""

    def __init__(self, left: Any, right: Any):
        super().__init__(
            message=f"grid mismatch: {left} vs {right}",
            exit_code=EXIT_VALIDATION,
            error_code="GRID_MISMATCH",
            details={"left": str(left), "right": str(right)},
        )


class SchemeError(SConvError):
    """Raised when the finite-volume solver cannot complete a step"""

    def __init__(self, message: str, member: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_RUNTIME,
            error_code="SCHEME_ERROR",
            details=details or {},
        )
        if member is not None:
            self.details["member"] = member


class CFLViolationError(SchemeError):
    """Raised when the wave speed grew past the stability bound during a step"""

    def __init__(self, courant: float, limit: float = 1.0, member: Optional[int] = None):
        super().__init__(
            message=f"CFL violated: Courant number {courant:.6g} exceeds {limit:g}",
            member=member,
            details={"courant": courant, "limit": limit},
        )
        self.error_code = "CFL_VIOLATION"


class InadmissibleMemberError(SConvError):
    """Raised when a member carries infinite energy (vacuum with momentum)"""

    def __init__(self, member: Optional[int] = None, cells: int = 0):
        super().__init__(
            message=f"member {member} is inadmissible: {cells} cells with infinite energy",
            exit_code=EXIT_RUNTIME,
            error_code="INADMISSIBLE_MEMBER",
            details={"member": member, "cells": cells},
        )


class SnapshotError(SConvError):
    """Base class for snapshot decoding failures"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, exit_code=EXIT_RUNTIME, details=details)


class SnapshotVersionError(SnapshotError):
    """Raised on an unknown magic tag or format version"""


class SnapshotLengthError(SnapshotError):
    """Raised when the payload is shorter or longer than the header announces"""


class SnapshotChecksumError(SnapshotError):
    """Raised when the trailing digest does not match the content"""


def handle_cli_error(error: BaseException) -> int:
    """
    Translate an exception into an exit code and print a one-line diagnostic

    Args:
        error: Exception raised while running a command

    Returns:
        Process exit code (1 validation, 2 runtime)
    """
    if isinstance(error, PydanticValidationError):
        formatted = format_validation_error(error)
        first = formatted["details"][0] if formatted["details"] else {"field": "config", "message": str(error)}
        click.echo(f"error: {first['field']}: {first['message']}", err=True)
        return EXIT_VALIDATION

    if isinstance(error, SConvError):
        field = error.details.get("field")
        prefix = f"{field}: " if field else ""
        click.echo(f"error: {prefix}{error.message}", err=True)
        if error.exit_code == EXIT_RUNTIME:
            logger.error("%s: %s %s", error.error_code, error.message, error.details)
        return error.exit_code

    if isinstance(error, click.UsageError):
        click.echo(f"error: {error.format_message()}", err=True)
        return EXIT_VALIDATION

    logger.exception(f"Unexpected error: {str(error)}")
    click.echo(f"error: unexpected {type(error).__name__}: {error}", err=True)
    return EXIT_RUNTIME


def wrap_service_errors(func):
    """
    Decorator to wrap service functions and convert exceptions to toolkit errors

    Args:
        func: Service function to wrap

    Returns:
        Wrapped function that raises SConvError subclasses
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SConvError:
            raise
        except ValueError as e:
            raise ValidationError(str(e))
        except FloatingPointError as e:
            logger.exception(f"Service error in {func.__name__}: {str(e)}")
            raise SchemeError(f"floating point failure in {func.__name__}: {e}")

    return wrapper
