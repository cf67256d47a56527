"""Order-of-magnitude check that vacuum noise, not collisions, starts the reaction."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from ._validation import check_nonnegative, check_positive
from .noise import effective_gain

CM3_PER_M3 = 10 ** 6


@dataclass(frozen=True)
class FeasibilityReport:
    gain_physical: float
    max_permissible_rate: float
    inelastic_rate: float

    @property
    def dominated_by_fluctuations(self):
        return self.inelastic_rate < self.max_permissible_rate


def _exact_product(x, y):
    # decimal product of the shortest reprs, rounded once: 1e-17 * 1e20 -> 1000.0
    return float(Decimal(repr(float(x))) * Decimal(repr(float(y))))


def density_from_cm3(density_cm3):
    """Number density in m^-3 from a value in cm^-3."""
    return _exact_product(density_cm3, CM3_PER_M3)


def density_to_cm3(density):
    return float(Decimal(repr(float(density))) / CM3_PER_M3)


def assess(params, f_a, f_b2, density, rate_coeff):
    """Compare the pair gain with the inelastic collision rate.

    The noise-dominated window lasts while ``|G t| < 1``, so collisions must
    be slower than ``G`` itself. ``density`` is in m^-3 and ``rate_coeff``
    in m^3/s; the gain uses the peak Rabi rate.
    """
    check_positive(density, "density")
    check_nonnegative(rate_coeff, "rate_coeff")
    gain = effective_gain(params.lam, params.omega0, params.delta, f_a, f_b2)
    gain_si = gain * params.lambda_si
    gain_si = float(gain_si)
    return FeasibilityReport(gain_physical=gain_si, max_permissible_rate=gain_si,
                             inelastic_rate=_exact_product(rate_coeff, density))
