import warnings

import pytest

from delayphase import SystemConfig

HEADLINE = dict(
    f_c=300e9,
    bandwidth=30e9,
    n_subcarriers=129,
    n_tx=256,
    n_rx=4,
    n_rf=4,
    n_streams=4,
    ttds_per_rf=16,
    ps_per_ttd=16,
    t_max=340e-12,
    rho=10 ** 0.3,  # 3 dB
    seed=20260811,
)


def make_config(**overrides) -> SystemConfig:
    """Headline system config with overrides; small-array warnings silenced."""
    params = dict(HEADLINE)
    params.update(overrides)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SystemConfig(**params)


@pytest.fixture
def cfg() -> SystemConfig:
    return make_config()
