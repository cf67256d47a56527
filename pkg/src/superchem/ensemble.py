"""Noise-seeded trajectory ensembles and their population statistics."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .integrator import IntegrationError, IntegratorConfig, integrate
from .model import IDX, SPECIES, ModelParams, initial_state, rabi_pulse, reactant_fractions
from .noise import classical_seeded_population, default_seed_variance, effective_gain, sample_seed

WORKERS_ENV = "SUPERCHEM_WORKERS"
MAX_FAILURE_FRACTION = 0.01


class EnsembleFailure(RuntimeError):
    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures  # {trajectory index: exception}


def derive_seed(master_seed, index):
    """64-bit RNG token for trajectory ``index``; independent of execution order."""
    words = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)).generate_state(2)
    return int(words[0]) | (int(words[1]) << 32)


def default_workers():
    value = os.environ.get(WORKERS_ENV)
    if value:
        workers = int(value)
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {value!r}")
        return workers
    return os.cpu_count() or 1


@dataclass(frozen=True)
class EnsembleConfig:
    params: ModelParams = field(default_factory=ModelParams)
    n_traj: int = 300
    master_seed: int = 0
    seed_variance: float | None = None  # None -> 1 / (2 n_total)
    R: float = 0.5
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if int(self.n_traj) != self.n_traj or self.n_traj < 2:
            raise ValueError("n_traj must be an integer >= 2")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if self.seed_variance is not None and not self.seed_variance > 0:
            raise ValueError("seed_variance must be > 0")
        if not self.R > 0:
            raise ValueError("R must be > 0")

    @property
    def variance(self):
        if self.seed_variance is None:
            return default_seed_variance(self.params.n_total)
        return self.seed_variance

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time ensemble statistics.

    ``mean`` and ``std`` have shape ``(5, n_times)`` in species order.
    ``std`` uses the unbiased estimator. ``cov_ab_b`` is the sample covariance
    of the AB and B populations and ``corr_ab_b`` that covariance over
    ``sqrt(mean_ab * mean_b)`` (NaN where either mean vanishes).
    ``imbalance_sem`` is the standard error of ``N_ab - N_b``.
    Populations are fractions; ``corr_ab_b_particles`` rescales the
    correlation to particle numbers, the units of the linearized theory.
    """

    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    cov_ab_b: np.ndarray
    corr_ab_b: np.ndarray
    imbalance_sem: np.ndarray
    n_traj: int
    n_failed: int = 0
    n_total: float = 1.0
    samples: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_samples(cls, times, samples, n_failed=0, n_total=1.0, keep_samples=False):
        """Aggregate ``samples`` of shape ``(n_traj, 5, n_times)``."""
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        if n < 2:
            raise ValueError("need at least two trajectories")
        mean = samples.mean(axis=0)
        std = samples.std(axis=0, ddof=1)
        n_ab = samples[:, IDX["ab"]]
        n_b = samples[:, IDX["b"]]
        cov = ((n_ab - mean[IDX["ab"]]) * (n_b - mean[IDX["b"]])).sum(axis=0) / (n - 1)
        denom = np.sqrt(mean[IDX["ab"]] * mean[IDX["b"]])
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(denom > 0, cov / denom, np.nan)
        sem = (n_ab - n_b).std(axis=0, ddof=1) / np.sqrt(n)
        return cls(times=np.asarray(times, dtype=float), mean=mean, std=std, cov_ab_b=cov,
                   corr_ab_b=corr, imbalance_sem=sem, n_traj=n, n_failed=n_failed,
                   n_total=float(n_total),
                   samples=samples if keep_samples else None)

    @property
    def corr_ab_b_particles(self):
        return self.corr_ab_b * self.n_total

    def mean_of(self, species):
        return self.mean[IDX[species]]

    def std_of(self, species):
        return self.std[IDX[species]]


def corr_ab_b(stats, index):
    """AB-B pair correlation at grid ``index``."""
    m_ab = stats.mean[IDX["ab"], index]
    m_b = stats.mean[IDX["b"], index]
    if not m_ab * m_b > 0:
        raise ValueError(f"pair correlation undefined at index {index}: a mean population is zero")
    return float(stats.cov_ab_b[index] / np.sqrt(m_ab * m_b))


def _run_one(cfg, index):
    token = derive_seed(cfg.master_seed, index)
    seed = sample_seed(cfg.variance, token)
    state = initial_state(cfg.R, seed.seed_ab, seed.seed_b)
    try:
        return integrate(state, cfg.params, cfg.integrator).populations, None
    except IntegrationError:
        try:
            return integrate(state, cfg.params, cfg.integrator.tightened()).populations, None
        except IntegrationError as exc:
            return None, exc


def run_ensemble(cfg, workers=None, keep_samples=False, order=None):
    """Integrate ``cfg.n_traj`` seeded trajectories and aggregate them.

    Trajectory ``k`` draws its seeds from ``derive_seed(cfg.master_seed, k)``
    and results are reduced in index order, so the output does not depend on
    ``workers`` or on the evaluation ``order`` (a permutation of indices).
    A failed trajectory is retried once at 10x tighter tolerance; the run
    aborts if more than 1% still fail.
    """
    workers = default_workers() if workers is None else int(workers)
    indices = list(range(cfg.n_traj)) if order is None else [int(k) for k in order]
    if sorted(indices) != list(range(cfg.n_traj)):
        raise ValueError("order must be a permutation of range(n_traj)")

    if workers <= 1:
        results = [_run_one(cfg, k) for k in indices]
    else:
        # the compiled stepper releases the GIL, so threads scale
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: _run_one(cfg, k), indices))
    by_index = dict(zip(indices, results))

    failures = {k: exc for k, (_, exc) in by_index.items() if exc is not None}
    if len(failures) > MAX_FAILURE_FRACTION * cfg.n_traj:
        first = min(failures)
        raise EnsembleFailure(f"{len(failures)} of {cfg.n_traj} trajectories failed; "
                              f"first at index {first}: {failures[first]}", failures)
    samples = np.stack([by_index[k][0] for k in range(cfg.n_traj) if k not in failures])
    times = np.linspace(0.0, cfg.integrator.t_end, int(cfg.integrator.report_points))
    return EnsembleStats.from_samples(times, samples, n_failed=len(failures),
                                      n_total=cfg.params.n_total, keep_samples=keep_samples)


def short_time_check(cfg, t_probe, workers=None):
    """Ensemble-mean product population at ``t_probe`` over its linearized prediction.

    The prediction amplifies classical seeds of variance ``v`` with the
    linearized pair gain, ``v (1 + 2 sinh^2(G t))``. Only valid while
    ``G t_probe < 0.3``.
    """
    f_a, f_b2 = reactant_fractions(cfg.R)
    p = cfg.params
    gain = effective_gain(p.lam, rabi_pulse(p, 0.0), p.delta, f_a, f_b2)
    if t_probe < 0 or gain * t_probe >= 0.3:
        raise ValueError(f"t_probe={t_probe} is outside the linear regime "
                         f"(G t = {gain * t_probe:.3g}, need < 0.3)")
    if t_probe == 0:
        return 1.0
    probe = cfg.replace(integrator=replace(cfg.integrator, t_end=float(t_probe), report_points=2))
    stats = run_ensemble(probe, workers=workers)
    observed = 0.5 * (stats.mean[IDX["ab"], -1] + stats.mean[IDX["b"], -1])
    return float(observed / classical_seeded_population(gain, t_probe, cfg.variance))


__all__ = ["EnsembleConfig", "EnsembleStats", "EnsembleFailure", "run_ensemble",
           "short_time_check", "corr_ab_b", "derive_seed", "SPECIES"]
