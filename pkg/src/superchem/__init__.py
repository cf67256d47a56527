"""Stochastic simulation of the collective abstraction reaction A + B2 -> AB + B."""

from .cpt import adiabaticity_monitor, cpt_steady_state, optimal_ratio
from .ensemble import EnsembleConfig, EnsembleStats, corr_ab_b, run_ensemble, short_time_check
from .feasibility import FeasibilityReport, assess
from .integrator import (IntegratorConfig, NonFiniteState, StepSizeUnderflow, TrajectoryResult,
                         convergence_probe, integrate)
from .model import (ConservedCharges, FieldState, ModelParams, Statistics, collision_matrix,
                    conserved_charges, initial_state, rabi_pulse, rhs_bose_fermi, rhs_bosonic)
from .noise import (NoiseModel, PairStatistics, SeedSample, cauchy_schwarz_excess,
                    effective_gain, mandel_q, pair_correlation, pair_population, sample_seed)

__version__ = "0.1.0"
