import numpy as np
import pytest

from core.config import ScenarioConfig
from core.malaria import default_initial_state, default_params
from core.sweep import SweepConfig


@pytest.fixture
def params():
    return default_params()


@pytest.fixture
def x0():
    return np.asarray(default_initial_state(), dtype=float)


@pytest.fixture
def rng():
    return np.random.default_rng(20160701)


@pytest.fixture
def small_config(tmp_path):
    """Two alphas, one strategy, short horizon: fast enough for every test run."""
    return ScenarioConfig(
        horizon=20.0,
        n_steps=200,
        alphas=(1.0, 0.9),
        strategies=("all_controls",),
        sweep=SweepConfig(tolerance=1e-3, max_iterations=300),
        output_dir=tmp_path / "out",
    )
