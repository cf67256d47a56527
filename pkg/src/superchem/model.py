"""Single-mode mean-field model of the abstraction reaction A + B2 -> AB + B.

All quantities are in reduced units: rates in units of the atom-dimer
coupling lambda, time in units of 1/lambda, and populations as fractions of
the total number of constituent atoms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from ._validation import check_finite, check_positive, check_nonnegative

SPECIES = ("a", "b", "b2", "ab", "t")
IDX = {name: i for i, name in enumerate(SPECIES)}
FERMIONIC = ("b", "ab")

#: atoms of kind A and B carried by one particle of each species
A_CONTENT = np.array([1, 0, 0, 1, 1])
B_CONTENT = np.array([0, 1, 2, 1, 2])

LAMBDA_RB_K = 4.718e4  # s^-1


class Statistics(str, enum.Enum):
    ALL_BOSONIC = "boson"
    BOSE_FERMI = "bose_fermi"


class PulseShape(str, enum.Enum):
    SECH = "sech"
    CONSTANT = "constant"


def collision_matrix(aa=0.5303, bb=0.3214, ab=0.8731, other=0.0938, **pairs):
    """Symmetric 5x5 collision matrix in species order (a, b, b2, ab, t).

    ``aa``, ``bb`` and ``ab`` are the A-A, B-B and A-B atomic entries; every
    other pair gets ``other`` unless given as a keyword like ``b2_t=0.1``.
    The defaults are the Rb-K values.
    """
    chi = np.full((5, 5), float(other))
    entries = {("a", "a"): aa, ("b", "b"): bb, ("a", "b"): ab}
    for key, value in pairs.items():
        i, j = _split_pair(key)
        entries[(i, j)] = value
    for (i, j), value in entries.items():
        chi[IDX[i], IDX[j]] = chi[IDX[j], IDX[i]] = float(value)
    return chi


def _split_pair(key):
    for i in SPECIES:
        for j in SPECIES:
            if key == f"{i}_{j}":
                return i, j
    raise ValueError(f"unknown species pair {key!r}")


@dataclass(frozen=True)
class ModelParams:
    """Reduced-unit parameters of the mean-field equations.

    ``Delta`` defaults to ``-delta`` (two-photon resonance). ``lambda_si``
    is the physical coupling rate in s^-1 and only enters unit conversion;
    the dynamics use ``lam`` (1 in reduced units).
    """

    delta: float = 3.0
    gamma: float = 1.0
    omega0: float = 20.0
    tau: float = 20.0
    Delta: float | None = None
    t0: float = 0.0
    lam: float = 1.0
    lambda_si: float = LAMBDA_RB_K
    chi: np.ndarray = field(default_factory=collision_matrix)
    statistics: Statistics = Statistics.ALL_BOSONIC
    kinetic_coeff: tuple[float, float] | None = None  # (A_ab, A_b)
    n_total: float = 1e5
    pulse: PulseShape = PulseShape.SECH

    def __post_init__(self):
        chi = np.array(self.chi, dtype=float)
        if chi.shape != (5, 5):
            raise ValueError(f"chi must be 5x5, got shape {chi.shape}")
        if not np.allclose(chi, chi.T, rtol=0, atol=0):
            raise ValueError("chi must be symmetric")
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        object.__setattr__(self, "pulse", PulseShape(self.pulse))
        if self.Delta is None:
            object.__setattr__(self, "Delta", -float(self.delta))
        for name in ("delta", "Delta", "t0", "lam", "omega0", "gamma", "tau"):
            check_finite(getattr(self, name), name)
        check_nonnegative(self.gamma, "gamma")
        check_positive(self.tau, "tau")
        check_nonnegative(self.omega0, "omega0")
        check_positive(self.lambda_si, "lambda_si")
        if not self.n_total >= 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")
        if self.statistics is Statistics.BOSE_FERMI:
            if self.kinetic_coeff is None or len(self.kinetic_coeff) != 2:
                raise ValueError("bose_fermi statistics requires kinetic_coeff=(A_ab, A_b)")
            a_ab, a_b = (float(v) for v in self.kinetic_coeff)
            if a_ab <= 0 or a_b <= 0:
                raise ValueError("kinetic_coeff values must be > 0")
            object.__setattr__(self, "kinetic_coeff", (a_ab, a_b))

    def replace(self, **changes):
        """Copy with changes; ``Delta`` follows ``delta`` unless given."""
        if "delta" in changes and "Delta" not in changes and self.Delta == -self.delta:
            changes["Delta"] = None
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.delta, self.gamma, self.omega0, self.tau, self.Delta, self.t0,
                self.lam, self.lambda_si, self.chi.tobytes(), self.statistics,
                self.kinetic_coeff, self.n_total, self.pulse)

    def packed(self):
        """Flat arrays ``(prm, chi, kin)`` consumed by the compiled kernels."""
        prm = np.zeros(_kernels.N_PARAMS)
        prm[_kernels.P_LAM] = self.lam
        prm[_kernels.P_OMEGA0] = self.omega0
        prm[_kernels.P_TAU] = self.tau
        prm[_kernels.P_T0] = self.t0
        prm[_kernels.P_DELTA] = self.delta
        prm[_kernels.P_DDELTA] = self.Delta
        prm[_kernels.P_GAMMA] = self.gamma
        prm[_kernels.P_PULSE] = 1.0 if self.pulse is PulseShape.CONSTANT else 0.0
        chi = np.array(self.chi)
        kin = np.zeros(5)
        if self.statistics is Statistics.BOSE_FERMI:
            # fermions: no s-wave collisions, kinetic term instead
            for name in FERMIONIC:
                chi[IDX[name], :] = 0.0
                chi[:, IDX[name]] = 0.0
            kin[IDX["ab"]], kin[IDX["b"]] = self.kinetic_coeff
        return prm, chi, kin


@dataclass(frozen=True)
class FieldState:
    """Five complex mean-field amplitudes at reduced time ``t``.

    The same type carries time derivatives returned by the right-hand sides.
    """

    psi_a: complex = 0j
    psi_b: complex = 0j
    psi_b2: complex = 0j
    psi_ab: complex = 0j
    psi_t: complex = 0j
    t: float = 0.0

    def __post_init__(self):
        for name in SPECIES:
            value = complex(getattr(self, "psi_" + name))
            if not np.isfinite(value):
                raise ValueError(f"psi_{name} is not finite: {value}")
            object.__setattr__(self, "psi_" + name, value)
        object.__setattr__(self, "t", float(self.t))

    @property
    def amplitudes(self):
        return np.array([getattr(self, "psi_" + name) for name in SPECIES])

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    def to_real(self):
        amp = self.amplitudes
        return np.concatenate([amp.real, amp.imag])

    @classmethod
    def from_real(cls, y, t=0.0):
        y = np.asarray(y, dtype=float)
        amp = y[:5] + 1j * y[5:]
        return cls(*amp, t=t)

    @classmethod
    def from_amplitudes(cls, amp, t=0.0):
        return cls(*np.asarray(amp, dtype=complex), t=t)


@dataclass(frozen=True)
class ConservedCharges:
    q_A: float
    q_B: float

    @property
    def q_tot(self):
        return self.q_A + self.q_B


def rabi_pulse(params, t):
    """Rabi rate ``omega0 * sech((t - t0) / tau)`` (or ``omega0`` for a constant pulse)."""
    if params.pulse is PulseShape.CONSTANT:
        return float(params.omega0)
    with np.errstate(over="ignore"):
        return float(params.omega0 / np.cosh((t - params.t0) / params.tau))


def _evaluate(state, params, t):
    prm, chi, kin = params.packed()
    out = np.empty(10)
    _kernels.rhs(float(t), state.to_real(), prm, chi, kin, out)
    return FieldState.from_real(out, t=t)


def rhs_bosonic(state, params, t=None):
    """Time derivative of every amplitude for an all-bosonic system.

    ``t`` defaults to ``state.t``; it only matters through the pulse.
    """
    t = state.t if t is None else t
    if params.statistics is not Statistics.ALL_BOSONIC:
        params = params.replace(statistics=Statistics.ALL_BOSONIC, kinetic_coeff=None)
    return _evaluate(state, params, t)


def rhs_bose_fermi(state, params, t=None):
    """Time derivative with fermionic B atoms and AB molecules.

    The self-collision term of each fermionic species is replaced by its
    degeneracy-pressure term ``A_j |psi_j|^(4/3)``; their s-wave cross
    collisions are dropped.
    """
    if params.statistics is not Statistics.BOSE_FERMI:
        raise ValueError("rhs_bose_fermi requires statistics=bose_fermi")
    t = state.t if t is None else t
    return _evaluate(state, params, t)


def rhs(state, params, t=None):
    """Dispatch to the right-hand side matching ``params.statistics``."""
    if params.statistics is Statistics.BOSE_FERMI:
        return rhs_bose_fermi(state, params, t)
    return rhs_bosonic(state, params, t)


def conserved_charges(state):
    n = state.populations if isinstance(state, FieldState) else np.asarray(state)
    return ConservedCharges(q_A=float(A_CONTENT @ n), q_B=float(B_CONTENT @ n))


def reactant_fractions(R):
    """Populations ``(f_a, f_b2)`` with ``f_a / (2 f_b2) = R`` and ``f_a + 2 f_b2 = 1``."""
    check_positive(R, "R")
    f_a = R / (1.0 + R)
    f_b2 = 1.0 / (2.0 * (1.0 + R))
    return f_a, f_b2


def initial_state(R, seed_ab=0j, seed_b=0j, t=0.0):
    """Reactant condensates at ratio ``R`` plus small product seeds; no trimers."""
    f_a, f_b2 = reactant_fractions(R)
    return FieldState(psi_a=np.sqrt(f_a), psi_b=seed_b, psi_b2=np.sqrt(f_b2),
                      psi_ab=seed_ab, psi_t=0j, t=t)
