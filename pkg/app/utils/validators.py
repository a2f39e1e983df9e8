"""
Validation utilities for the sconv toolkit.

This module contains the central error messages, argument validators
shared by the services, and the formatter that flattens pydantic errors
into messages naming the offending field.
"""

from typing import Any, Iterable, List, Sequence

from pydantic import ValidationError


class ErrorMessages:
    """Centralized error messages for consistent diagnostics"""

    # Counts and indices
    POSITIVE_INTEGER = "{name} must be a positive integer, got {value}"
    INDEX_OUT_OF_RANGE = "{name} = {value} exceeds the available range 1..{limit}"
    SEQUENCE_TOO_SHORT = "sequence has {length} members but {required} are required"

    # Schedules and tolerances
    SCHEDULE_EMPTY = "checkpoint schedule must not be empty"
    SCHEDULE_NOT_INCREASING = "checkpoint schedule must be strictly increasing, got {schedule}"
    TOLERANCE_NOT_POSITIVE = "{name} must be > 0, got {value}"
    ORDER_BELOW_ONE = "Wasserstein order s must be >= 1, got {value}"
    WINDOW_INVALID = "window must satisfy 0 <= alpha < beta <= 1, got ({alpha}, {beta})"
    WINDOW_EMPTY = "window ({alpha}, {beta}) holds no index at N = {N}"

    # Observables and weights
    DICTIONARY_EMPTY = "dictionary must contain at least one observable"
    WEIGHTS_EMPTY = "weight list must not be empty"
    WEIGHT_VANISHES = "weight {weight} vanishes on every node n/N for N = {N}"
    TENT_OUTSIDE_UNIT = "tent weight support [{low}, {high}] must lie inside [0, 1]"
    RADIUS_NOT_POSITIVE = "observable radius must be > 0, got {value}"

    # Fields and grids
    NON_FINITE_VALUES = "field values must be finite"
    SHAPE_MISMATCH = "values have shape {shape}, expected {expected}"
    STATE_DIMENSION = "state dimension {D} does not match the required {expected}"

    # Euler
    NEGATIVE_DENSITY = "density must be non-negative"
    GAMMA_RANGE = "adiabatic exponent gamma must be > 1, got {value}"
    CFL_RANGE = "cfl number must lie in (0, 1), got {value}"
    VACUUM_INITIAL_DATA = "initial density minimum {value:.3g} is below the vacuum floor {floor:g}"
    UNKNOWN_PRESET = "unknown initial-data preset '{preset}'"
    CELLS_NOT_MULTIPLE = "member cells {cells} are not a multiple of the analysis cells {analysis}"
    BOUNDARY_WIDTH = "neighborhood width {width} must be smaller than half the box {half}"


class Validators:
    """Collection of argument validators with meaningful error messages"""

    @staticmethod
    def validate_positive_int(value: int, name: str = "N") -> int:
        """
        Validate a strictly positive integer count

        Raises:
            ValueError: If value is not an integer >= 1
        """
        if isinstance(value, bool) or int(value) != value or value < 1:
            raise ValueError(ErrorMessages.POSITIVE_INTEGER.format(name=name, value=value))
        return int(value)

    @staticmethod
    def validate_index(value: int, limit: int, name: str = "N") -> int:
        """Validate 1 <= value <= limit"""
        value = Validators.validate_positive_int(value, name)
        if value > limit:
            raise ValueError(ErrorMessages.INDEX_OUT_OF_RANGE.format(name=name, value=value, limit=limit))
        return value

    @staticmethod
    def validate_schedule(schedule: Iterable[int], limit: int = None) -> List[int]:
        """
        Validate a checkpoint schedule

        Args:
            schedule: Checkpoint values N
            limit: Largest admissible checkpoint (sequence length)

        Returns:
            The schedule as a list of ints

        Raises:
            ValueError: If the schedule is empty, not strictly increasing or out of range
        """
        values = [int(v) for v in schedule]
        if not values:
            raise ValueError(ErrorMessages.SCHEDULE_EMPTY)
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(ErrorMessages.SCHEDULE_NOT_INCREASING.format(schedule=values))
        Validators.validate_positive_int(values[0], "checkpoint")
        if limit is not None and values[-1] > limit:
            raise ValueError(ErrorMessages.INDEX_OUT_OF_RANGE.format(name="checkpoint", value=values[-1], limit=limit))
        return values

    @staticmethod
    def validate_tolerance(value: float, name: str = "tol") -> float:
        """Validate a strictly positive tolerance"""
        if not value > 0:
            raise ValueError(ErrorMessages.TOLERANCE_NOT_POSITIVE.format(name=name, value=value))
        return float(value)

    @staticmethod
    def validate_order(s: float) -> float:
        """Validate a Wasserstein order s >= 1"""
        if not s >= 1:
            raise ValueError(ErrorMessages.ORDER_BELOW_ONE.format(value=s))
        return float(s)

    @staticmethod
    def validate_window(alpha: float, beta: float) -> tuple[float, float]:
        """Validate 0 <= alpha < beta <= 1"""
        if not (0.0 <= alpha < beta <= 1.0):
            raise ValueError(ErrorMessages.WINDOW_INVALID.format(alpha=alpha, beta=beta))
        return float(alpha), float(beta)

    @staticmethod
    def validate_non_empty(items: Sequence[Any], message: str) -> Sequence[Any]:
        """Reject an empty collection with the given message"""
        if len(items) == 0:
            raise ValueError(message)
        return items


def format_validation_error(exc: ValidationError) -> dict:
    """
    Format pydantic validation errors into messages naming the field

    Args:
        exc: pydantic ValidationError

    Returns:
        Formatted error summary
    """
    errors = []

    for error in exc.errors():
        field = " -> ".join(str(loc) for loc in error["loc"]) or "config"
        message = error["msg"]
        error_type = error["type"]

        if error_type == "missing":
            message = f"{field.split(' -> ')[-1].replace('_', ' ')} is required"
        elif error_type.startswith("value_error"):
            message = message.removeprefix("Value error, ")

        errors.append({
            "field": field,
            "message": message,
            "type": error_type,
        })

    return {
        "error": "Validation failed",
        "details": errors,
        "message": "Please check the run config and try again",
    }
