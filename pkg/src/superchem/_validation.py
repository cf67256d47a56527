"""Small argument checks shared across modules."""

import math


def check_finite(value, name):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def check_positive(value, name):
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def check_nonnegative(value, name):
    if not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value
