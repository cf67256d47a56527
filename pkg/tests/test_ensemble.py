import numpy as np
import pytest

import superchem.ensemble as ens_mod
from conftest import small_ensemble
from superchem.ensemble import (EnsembleConfig, EnsembleFailure, EnsembleStats, corr_ab_b,
                                derive_seed, run_ensemble, short_time_check)
from superchem.integrator import IntegratorConfig, NonFiniteState
from superchem.model import IDX, ModelParams, PulseShape

COLLISIONLESS = ModelParams(chi=np.zeros((5, 5)), pulse=PulseShape.CONSTANT)


def fields_equal(a, b):
    return all(np.array_equal(getattr(a, f), getattr(b, f), equal_nan=True)
               for f in ("times", "mean", "std", "cov_ab_b", "corr_ab_b", "imbalance_sem"))


class TestSeeding:
    def test_derive_seed_distinct(self):
        tokens = {derive_seed(5, k) for k in range(1000)}
        assert len(tokens) == 1000
        assert derive_seed(5, 3) == derive_seed(5, 3)
        assert derive_seed(5, 3) != derive_seed(6, 3)
        assert all(0 <= t < 2 ** 64 for t in tokens)

    def test_config_validation(self):
        for kw in ({"n_traj": 1}, {"seed_variance": 0.0}, {"R": 0.0}, {"master_seed": -1}):
            with pytest.raises(ValueError):
                EnsembleConfig(**kw)

    def test_default_variance(self):
        assert EnsembleConfig().variance == 1 / (2 * 1e5)
        assert EnsembleConfig(seed_variance=1e-3).variance == 1e-3


class TestRunEnsemble:
    def test_reproducible(self):
        cfg = small_ensemble()
        assert fields_equal(run_ensemble(cfg), run_ensemble(cfg))

    def test_order_and_worker_independent(self):
        cfg = small_ensemble()
        base = run_ensemble(cfg, workers=1)
        order = np.random.default_rng(0).permutation(cfg.n_traj)
        assert fields_equal(base, run_ensemble(cfg, workers=1, order=order))
        assert fields_equal(base, run_ensemble(cfg, workers=4, order=order[::-1]))

    def test_bad_order(self):
        with pytest.raises(ValueError):
            run_ensemble(small_ensemble(n_traj=3), order=[0, 0, 1])

    def test_vanishing_seeds(self):
        # parametric gain amplifies even 1e-30 seeds, but only to ~1e-10 by t = 20
        stats = run_ensemble(small_ensemble(seed_variance=1e-30))
        for name in ("ab", "b"):
            assert stats.mean_of(name).max() < 1e-9
            assert stats.std_of(name).max() < 1e-9

    def test_stats_invariants(self):
        stats = run_ensemble(small_ensemble(), keep_samples=True)
        assert np.all(stats.std >= 0)
        lo, hi = stats.samples.min(axis=0), stats.samples.max(axis=0)
        assert np.all((stats.mean >= lo - 1e-15) & (stats.mean <= hi + 1e-15))
        defined = stats.mean[IDX["ab"]] * stats.mean[IDX["b"]] > 0
        assert np.all(np.isfinite(stats.corr_ab_b[defined]))
        assert stats.n_traj == 40 and stats.n_failed == 0

    def test_pairing_symmetry_collisionless(self):
        cfg = small_ensemble(params=COLLISIONLESS.replace(omega0=2.0), n_traj=200)
        stats = run_ensemble(cfg)
        gap = np.abs(stats.mean_of("ab") - stats.mean_of("b"))
        assert np.all(gap <= 3 * stats.imbalance_sem)

    def test_retry_then_fail(self, monkeypatch):
        real = ens_mod.integrate
        calls = []

        def flaky(state, params, cfg):
            calls.append(cfg.rel_tol)
            if abs(state.psi_ab - bad_seed) < 1e-300:
                raise NonFiniteState("forced", t_reached=0.0)
            return real(state, params, cfg)

        cfg = small_ensemble(n_traj=50)
        bad_seed = ens_mod.sample_seed(cfg.variance, derive_seed(cfg.master_seed, 7)).seed_ab
        monkeypatch.setattr(ens_mod, "integrate", flaky)
        with pytest.raises(EnsembleFailure) as info:
            run_ensemble(cfg, workers=1)
        assert list(info.value.failures) == [7]
        assert "index 7" in str(info.value)
        # the tighter-tolerance retry happened
        assert cfg.integrator.rel_tol / 10 in calls

    def test_tolerates_one_percent(self, monkeypatch):
        real = ens_mod.integrate
        cfg = small_ensemble(n_traj=100, integrator=IntegratorConfig(t_end=2.0, report_points=3))
        bad_seed = ens_mod.sample_seed(cfg.variance, derive_seed(cfg.master_seed, 42)).seed_ab

        def flaky(state, params, icfg):
            if state.psi_ab == bad_seed:
                raise NonFiniteState("forced", t_reached=0.0)
            return real(state, params, icfg)

        monkeypatch.setattr(ens_mod, "integrate", flaky)
        stats = run_ensemble(cfg, workers=1)
        assert stats.n_traj == 99 and stats.n_failed == 1


class TestCorrelation:
    def synthetic(self, n_ab, n_b):
        samples = np.zeros((len(n_ab), 5, 1))
        samples[:, IDX["ab"], 0] = n_ab
        samples[:, IDX["b"], 0] = n_b
        return EnsembleStats.from_samples([0.0], samples)

    def test_identical_trajectories(self):
        assert corr_ab_b(self.synthetic([0.2] * 5, [0.2] * 5), 0) == 0

    def test_equal_pairs(self, rng):
        n = rng.exponential(0.1, 500)
        stats = self.synthetic(n, n)
        assert corr_ab_b(stats, 0) == pytest.approx(np.var(n, ddof=1) / n.mean(), rel=1e-12)
        assert corr_ab_b(stats, 0) >= 0

    def test_undefined(self):
        with pytest.raises(ValueError):
            corr_ab_b(self.synthetic([0.0, 0.0], [0.1, 0.2]), 0)
        assert np.isnan(self.synthetic([0.0, 0.0], [0.1, 0.2]).corr_ab_b[0])

    def test_bosonic_growth_is_superclassical(self):
        cfg = EnsembleConfig(params=COLLISIONLESS, n_traj=300, master_seed=3,
                             integrator=IntegratorConfig(t_end=1.0, report_points=11))
        stats = run_ensemble(cfg, keep_samples=True)
        c = stats.corr_ab_b_particles[-1]
        # bootstrap error of the correlation estimate
        boot = []
        rng = np.random.default_rng(1)
        for _ in range(200):
            pick = rng.integers(0, stats.n_traj, stats.n_traj)
            boot.append(EnsembleStats.from_samples(stats.times, stats.samples[pick],
                                                   n_total=stats.n_total).corr_ab_b_particles[-1])
        assert c - 2 * np.std(boot) > 1


class TestShortTime:
    CFG = EnsembleConfig(params=COLLISIONLESS, n_traj=300, master_seed=5)

    def gain(self):
        return 20.0 / 3.0 / 3.0

    def test_zero(self):
        assert short_time_check(self.CFG, 0.0) == 1.0

    def test_ratio(self):
        ratio = short_time_check(self.CFG, 0.2 / self.gain())
        assert 0.5 <= ratio <= 2.0

    def test_linear_in_variance(self):
        t = 0.1 / self.gain()
        a = short_time_check(self.CFG.replace(seed_variance=1e-6), t)
        b = short_time_check(self.CFG.replace(seed_variance=2e-6), t)
        assert a == pytest.approx(b, rel=1e-5)  # ratio is variance-normalized

    def test_mean_doubles(self):
        t = 0.1 / self.gain()
        icfg = IntegratorConfig(t_end=t, report_points=2)
        a = run_ensemble(self.CFG.replace(seed_variance=1e-6, integrator=icfg))
        b = run_ensemble(self.CFG.replace(seed_variance=2e-6, integrator=icfg))
        assert b.mean_of("ab")[-1] / a.mean_of("ab")[-1] == pytest.approx(2.0, rel=1e-5)

    def test_outside_linear_regime(self):
        with pytest.raises(ValueError):
            short_time_check(self.CFG, 1.0)
