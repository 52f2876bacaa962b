"""Error hierarchy and small argument checks shared across modules."""

from __future__ import annotations

import math

import numpy as np


class RelaxationError(Exception):
    """Base class for numeric failures raised by the package."""


class DomainError(RelaxationError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidDensityError(RelaxationError, ValueError):
    """The energy density violates convexity or positivity requirements."""


class ConstructionError(RelaxationError):
    """A constructive routine could not meet its own acceptance checks."""


class GeometryError(RelaxationError):
    """A polygon is degenerate, self-intersecting, or otherwise unusable."""


class FrequencyError(RelaxationError):
    """No oscillation frequency reaches the requested length factor."""


class ResolutionError(RelaxationError):
    """The requested refinement level underflows floating point."""


class FrameError(RelaxationError):
    """A measure is supported outside the comparison frame."""


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise DomainError(f"{name} must be a nonnegative finite number, got {value!r}")
    return value


def check_dimension(n: int) -> int:
    if int(n) != n or n < 2:
        raise DomainError(f"dimension n must be an integer >= 2, got {n!r}")
    return int(n)


def as_points(name: str, array, min_rows: int = 1) -> np.ndarray:
    pts = np.asarray(array, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError(f"{name} must have shape (N, 2), got {pts.shape}")
    if pts.shape[0] < min_rows:
        raise DomainError(f"{name} needs at least {min_rows} rows, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise DomainError(f"{name} contains non-finite coordinates")
    return pts


def as_vector(name: str, array, length: int | None = None) -> np.ndarray:
    vec = np.asarray(array, dtype=float).reshape(-1)
    if length is not None and vec.shape[0] != length:
        raise DomainError(f"{name} must have length {length}, got {vec.shape[0]}")
    if not np.all(np.isfinite(vec)):
        raise DomainError(f"{name} contains non-finite values")
    return vec
