import numpy as np
import pytest

from blockade import HilbertSpace, from_ghz, resonant_preset, two_level_config

G = from_ghz(3.0)


@pytest.fixture
def space44():
    return HilbertSpace(4, 4)


@pytest.fixture
def benchmark_config():
    """Resonant four-level system at the strong-coupling onset (kappa = 2g)."""
    return resonant_preset(kappa=2 * G)


@pytest.fixture
def twolevel_config():
    return two_level_config(
        g_eg=G, kappa=G / 5, gamma_eg=from_ghz(0.01), eps=from_ghz(0.1)
    )


def random_fourlevel(rng: np.random.Generator, n_fock: int = 4):
    """Well-damped random config: every level decays at >= 0.1 g and the drive
    stays weak, keeping the relaxation gap above ~0.35 kappa so the steady
    state is reached well within 50/kappa."""
    from blockade import SystemConfig

    g = from_ghz(rng.uniform(0.5, 1.5))
    return SystemConfig(
        g_eg=g,
        g_fs=g * rng.uniform(0.5, 1.5),
        omega_rabi=g * rng.uniform(0.5, 1.0),
        eps=g * rng.uniform(0.01, 0.05),
        kappa=g * rng.uniform(0.5, 1.2),
        gamma_sg=g * rng.uniform(0.1, 0.3),
        gamma_eg=g * rng.uniform(0.1, 0.3),
        gamma_es=g * rng.uniform(0.1, 0.3),
        gamma_fg=g * rng.uniform(0.1, 0.3),
        gamma_fs=g * rng.uniform(0.1, 0.3),
        delta_c=g * rng.uniform(-0.3, 0.3),
        delta_sg=g * rng.uniform(-0.3, 0.3),
        delta_eg=g * rng.uniform(-0.3, 0.3),
        delta_fg=g * rng.uniform(-0.3, 0.3),
        n_fock=n_fock,
    )
