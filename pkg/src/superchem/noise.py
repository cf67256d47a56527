"""Linearized quantum stage: closed-form pair statistics and the seed sampler.

While the reactant condensates are undepleted, AB molecules and B atoms
are created in pairs by a parametric gain. Bosonic products grow as
``sinh^2``; fermionic ones oscillate as ``sin^2`` and stay below one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import check_nonnegative, check_positive


class PairStatistics(str, enum.Enum):
    BOSONIC = "boson"
    FERMIONIC = "fermion"


@dataclass(frozen=True)
class NoiseModel:
    """Parametric-gain model for the product pair modes.

    ``omega1`` and ``omega2`` are the effective self-interaction rates; they
    are kept for reference only and never enter the linearized formulas.
    """

    G: float
    N_a: float = 1.0
    N_b2: float = 1.0
    omega1: float = 0.0
    omega2: float = 0.0
    statistics: PairStatistics = PairStatistics.BOSONIC

    def __post_init__(self):
        check_nonnegative(self.N_a, "N_a")
        check_nonnegative(self.N_b2, "N_b2")
        check_nonnegative(self.G, "G")
        object.__setattr__(self, "statistics", PairStatistics(self.statistics))

    @property
    def gain(self):
        return self.G * np.sqrt(self.N_a * self.N_b2)

    @classmethod
    def from_gain(cls, gain, statistics=PairStatistics.BOSONIC):
        return cls(G=gain, statistics=statistics)

    @classmethod
    def from_couplings(cls, lam, omega, delta, N_a, N_b2, statistics=PairStatistics.BOSONIC):
        """Couplings after adiabatic elimination of the trimer, unit mode overlaps."""
        if delta == 0:
            raise ValueError("delta must be nonzero to eliminate the trimer")
        return cls(G=lam * omega / abs(delta), N_a=N_a, N_b2=N_b2,
                   omega1=lam ** 2 / delta, omega2=omega ** 2 / delta,
                   statistics=statistics)


@dataclass(frozen=True)
class SeedSample:
    seed_ab: complex
    seed_b: complex
    rng_seed: int


def effective_gain(lam, omega, delta, f_a, f_b2, n_total=1.0):
    """Pair-creation gain ``(lam * omega / |delta|) * sqrt(f_a * f_b2)``.

    Single-mode reduction in amplitude-fraction units, so ``n_total`` drops
    out: ``G = lam*omega/(n*|delta|)`` per pair and ``N_i = n f_i``. Pass a
    physical ``lam`` to get the gain in s^-1.
    """
    if delta == 0:
        raise ValueError("delta must be nonzero: adiabatic elimination is invalid at resonance")
    check_nonnegative(f_a, "f_a")
    check_nonnegative(f_b2, "f_b2")
    check_positive(n_total, "n_total")
    G = lam * omega / (abs(delta) * n_total)
    return G * np.sqrt((n_total * f_a) * (n_total * f_b2))


def _gt(model, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    return model.gain * t


def pair_population(model, t):
    """Mean number of products per mode."""
    x = _gt(model, t)
    if model.statistics is PairStatistics.FERMIONIC:
        return np.sin(x) ** 2
    return np.sinh(x) ** 2


def pair_correlation(model, t):
    """Normalized AB-B number covariance ``<dN_ab dN_b> / sqrt(N_ab N_b)``."""
    x = _gt(model, t)
    if model.statistics is PairStatistics.FERMIONIC:
        return 1.0 - np.sin(x) ** 2
    return 1.0 + np.sinh(x) ** 2


def mandel_q(model, t):
    """Mandel Q of one product mode: super-Poissonian bosons, sub-Poissonian fermions."""
    x = _gt(model, t)
    if model.statistics is PairStatistics.FERMIONIC:
        return np.cos(x) ** 2
    return np.cosh(x) ** 2


def cauchy_schwarz_excess(model, t):
    """``[g2_cross]^2 - g2_ab g2_b = 1/sinh^2(Gt) + 4/sinh(Gt)``; positive means violation."""
    if model.statistics is not PairStatistics.BOSONIC:
        raise ValueError("Cauchy-Schwarz excess is defined for bosonic pairs only")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be > 0: the excess diverges at t = 0")
    s = np.sinh(model.gain * t)
    return 1.0 / s ** 2 + 4.0 / s


def sample_seed(variance, rng_seed, size=None):
    """Draw vacuum-noise seeds for the AB and B modes.

    Each seed is a circular complex Gaussian with ``E|s|^2 = variance``, so
    ``|s|^2`` is exponential and ``<|s|^4>/<|s|^2>^2 = 2`` (chaotic light).
    With ``size`` given, returns arrays ``(seed_ab, seed_b)`` of that shape
    instead of a :class:`SeedSample`.
    """
    check_positive(variance, "variance")
    rng = np.random.default_rng(rng_seed)
    scale = np.sqrt(variance / 2.0)
    shape = (2,) if size is None else (2, size)
    z = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    if size is not None:
        return z[0], z[1]
    return SeedSample(seed_ab=complex(z[0]), seed_b=complex(z[1]), rng_seed=int(rng_seed))


def default_seed_variance(n_total):
    """Half a particle of vacuum noise per product mode, in fraction units."""
    check_positive(n_total, "n_total")
    return 1.0 / (2.0 * n_total)


def classical_seeded_population(gain, t, variance):
    """Mean ``|psi|^2`` of one product mode amplified from classical seeds.

    Solving the linear pair equations with both modes seeded at ``variance``
    gives ``variance * (1 + 2 sinh^2(Gt))``; with ``variance`` equal to half
    a particle this is the symmetric-ordered ``sinh^2(Gt) + 1/2``.
    """
    return variance * (1.0 + 2.0 * np.sinh(gain * np.asarray(t, dtype=float)) ** 2)
