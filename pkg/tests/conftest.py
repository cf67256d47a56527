import numpy as np
import pytest

from superchem import EnsembleConfig, IntegratorConfig, ModelParams

ACCEPTANCE_LINES = []


@pytest.fixture
def fig3a_params():
    return ModelParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def small_ensemble(**changes):
    base = dict(n_traj=40, master_seed=11, integrator=IntegratorConfig(t_end=20.0, report_points=201))
    base.update(changes)
    return EnsembleConfig(**base)
