import numpy as np
import pytest

from jumplab.simulate import DgpConfig, initial_state, simulate_day
from jumplab.rng import stream, PATH


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def null_days(n_days: int, seed: int = 0, **cfg_kw) -> np.ndarray:
    """Independent pure-diffusion days started at the long-run variance."""
    cfg = DgpConfig(**cfg_kw)
    state0 = initial_state(cfg)
    rows = np.empty((n_days, cfg.m_per_day))
    for i in range(n_days):
        day, _ = simulate_day(cfg, state0, stream(seed, 900, i, PATH), forced_jumps=(0.0, 0.0))
        rows[i] = day.returns
    return rows


@pytest.fixture(scope="session")
def null_panel_72():
    """500 independent no-jump days at the 5-minute grid."""
    return null_days(500, seed=7)
