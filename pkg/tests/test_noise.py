import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from oracles import cs_excess, sinh2
from superchem.noise import (NoiseModel, PairStatistics, cauchy_schwarz_excess,
                             classical_seeded_population, default_seed_variance, effective_gain,
                             mandel_q, pair_correlation, pair_population, sample_seed)

BOSE = NoiseModel.from_gain(1.0)
FERMI = NoiseModel.from_gain(1.0, "fermion")


class TestGain:
    def test_dark_laser(self):
        assert effective_gain(1.0, 0.0, 3.0, 0.3, 0.2) == 0

    def test_rb_k(self):
        # 4.718e4 * (20/3) * (1/3)
        assert effective_gain(4.718e4, 20 * 4.718e4 / 4.718e4, 3.0, 1 / 3, 1 / 3) == pytest.approx(
            4.718e4 * 20 / 9, rel=1e-14)
        assert effective_gain(4.718e4, 20.0, 3.0, 1 / 3, 1 / 3) == pytest.approx(1.05e5, rel=0.01)

    def test_unit(self):
        assert effective_gain(1.0, 1.0, 1.0, 1.0, 1.0) == 1.0

    @given(st.floats(1, 1e6))
    def test_particle_number_cancels(self, n):
        assert effective_gain(1.0, 2.0, -4.0, 0.25, 0.5, n) == pytest.approx(
            effective_gain(1.0, 2.0, 4.0, 0.25, 0.5), rel=1e-12)

    def test_resonance_rejected(self):
        with pytest.raises(ValueError):
            effective_gain(1.0, 1.0, 0.0, 0.5, 0.5)

    def test_model_gain(self):
        m = NoiseModel(G=0.5, N_a=4.0, N_b2=9.0)
        assert m.gain == 3.0
        m = NoiseModel.from_couplings(1.0, 20.0, 3.0, 1 / 3, 1 / 3)
        assert m.gain == pytest.approx(effective_gain(1.0, 20.0, 3.0, 1 / 3, 1 / 3), rel=1e-14)
        assert m.omega1 == pytest.approx(1 / 3) and m.omega2 == pytest.approx(400 / 3)
        with pytest.raises(ValueError):
            NoiseModel(G=1.0, N_a=-1.0)


class TestClosedForms:
    def test_origin(self):
        for m in (BOSE, FERMI):
            assert pair_population(m, 0.0) == 0
            assert pair_correlation(m, 0.0) == 1
            assert mandel_q(m, 0.0) == 1

    def test_unit_gain_time(self):
        assert pair_population(BOSE, 1.0) == pytest.approx(sinh2(1.0), rel=1e-14)
        assert pair_population(BOSE, 1.0) == pytest.approx(1.38110, abs=1e-5)
        assert pair_correlation(BOSE, 1.0) == pytest.approx(1 + sinh2(1.0), rel=1e-14)
        assert mandel_q(BOSE, 1.0) == pytest.approx(2.38110, abs=1e-5)

    def test_fermion_quarter_period(self):
        assert pair_correlation(FERMI, math.pi / 2) == pytest.approx(0, abs=1e-15)
        assert mandel_q(FERMI, math.pi / 2) == pytest.approx(0, abs=1e-15)
        assert pair_population(FERMI, math.pi / 2) == pytest.approx(1, abs=1e-15)

    def test_small_time_quadratic(self):
        m = NoiseModel(G=0.01, N_a=300.0, N_b2=200.0)
        t = 1e-5
        assert pair_population(m, t) == pytest.approx(m.N_a * m.N_b2 * m.G ** 2 * t ** 2, rel=1e-5)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            pair_population(BOSE, -1.0)

    @given(st.floats(1e-3, 50))
    def test_identities(self, x):
        assert pair_correlation(BOSE, x) - 1 == pytest.approx(pair_population(BOSE, x), rel=1e-12)
        assert mandel_q(BOSE, x) == pytest.approx(1 + pair_population(BOSE, x), rel=1e-12)
        assert 0 <= pair_population(FERMI, x) <= 1
        assert pair_correlation(FERMI, x) <= 1
        assert mandel_q(FERMI, x) <= 1 < mandel_q(BOSE, x)

    def test_short_time_law(self):
        x = np.geomspace(1e-9, 9.99e-4, 500)
        rel = np.abs(pair_population(BOSE, x) - x ** 2) / x ** 2
        assert rel.max() < 1e-5


class TestCauchySchwarz:
    def test_unit(self):
        assert cauchy_schwarz_excess(BOSE, 1.0) == pytest.approx(cs_excess(1.0), rel=1e-13)
        assert cauchy_schwarz_excess(BOSE, 1.0) == pytest.approx(4.12773, abs=1e-5)

    def test_large_time_positive(self):
        assert 0 < cauchy_schwarz_excess(BOSE, 50.0) < 1e-20

    @given(st.floats(1e-6, 50))
    def test_positive(self, x):
        assert cauchy_schwarz_excess(BOSE, x) > 0

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_rejects_nonpositive_time(self, t):
        with pytest.raises(ValueError):
            cauchy_schwarz_excess(BOSE, t)

    def test_rejects_fermions(self):
        with pytest.raises(ValueError):
            cauchy_schwarz_excess(FERMI, 1.0)


class TestSeeds:
    def test_deterministic(self):
        assert sample_seed(0.1, 42) == sample_seed(0.1, 42)
        assert sample_seed(0.1, 42) != sample_seed(0.1, 43)

    def test_scalar_and_batch_agree(self):
        ab, b = sample_seed(0.3, 9, size=1)
        s = sample_seed(0.3, 9)
        assert s.seed_ab == ab[0] and s.seed_b == b[0]

    def test_rejects_nonpositive_variance(self):
        for v in (0.0, -1.0):
            with pytest.raises(ValueError):
                sample_seed(v, 1)

    def test_moments(self):
        v = 2.5e-6
        ab, b = sample_seed(v, 1234, size=100_000)
        for s in (ab, b):
            p = np.abs(s) ** 2
            assert abs(p.mean() / v - 1) < 0.03
            assert abs(np.mean(p ** 2) / p.mean() ** 2 - 2) < 0.05
            assert abs(s.mean()) < 5 * np.sqrt(v / 100_000)
        assert abs(np.corrcoef(np.abs(ab) ** 2, np.abs(b) ** 2)[0, 1]) < 0.02

    def test_phase_uniform(self):
        ab, _ = sample_seed(1.0, 77, size=100_000)
        result = stats.kstest(np.angle(ab), stats.uniform(loc=-np.pi, scale=2 * np.pi).cdf)
        assert result.pvalue > 0.01

    def test_default_variance(self):
        assert default_seed_variance(1e5) == 5e-6

    def test_classical_amplification(self):
        # at half a particle the symmetric-ordered mean is sinh^2 + 1/2
        assert classical_seeded_population(1.0, 1.0, 0.5) == pytest.approx(sinh2(1.0) + 0.5)
        assert classical_seeded_population(1.0, 0.0, 0.2) == pytest.approx(0.2)

    def test_statistics_enum(self):
        assert NoiseModel(G=1.0, statistics="fermion").statistics is PairStatistics.FERMIONIC
