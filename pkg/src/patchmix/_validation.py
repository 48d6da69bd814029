"""Parameter checks shared by configs, estimators, and the CLI."""

from __future__ import annotations


def check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return value


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_int_at_least(name: str, value: int, minimum: int) -> int:
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return value


def check_band_fraction(name: str, value: float) -> float:
    """Smoothing-band fractions live in (0, 0.5]; 0.5 already covers the whole patch."""
    value = float(value)
    if not 0.0 < value <= 0.5:
        raise ValueError(f"{name} must be in (0, 0.5], got {value}")
    return value
