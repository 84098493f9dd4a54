import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def asym_config(n, psi_db=10.0, rho=0.9):
    """A deliberately asymmetric config used across tests."""
    from relaysel import NetworkConfig

    base = np.linspace(0.5, 2.5, 2 * n).reshape(2, n)
    psi = 10.0 ** (psi_db / 10.0)
    return NetworkConfig(
        n_relays=n,
        sigma2=tuple(tuple(row) for row in base),
        rho=tuple(tuple(min(rho + 0.02 * i, 1.0) for i in range(n)) for _ in range(2)),
        psi_s=psi, psi_r=psi,
    )
