import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockade.hilbert import DensityMatrix, HilbertSpace, pure_state
from blockade.model import (
    SystemConfig,
    build_collapse_ops,
    build_hamiltonian,
    build_liouvillian,
    from_ghz,
    liouvillian_for,
    resonant_preset,
    two_level_config,
)
from blockade.solvers import (
    ConvergenceError,
    InstabilityError,
    SteadyStateError,
    UndefinedObservableError,
    dressed_energies,
    eig_complex,
    fock_convergence,
    g2_zero,
    ground_state,
    manifold_matrix,
    mean_photon,
    photon_statistics,
    steady_state,
    steady_state_of,
    time_evolve,
    trace_distance,
)
from conftest import G, random_fourlevel


def empty_cavity(kappa=from_ghz(3.0), eps=from_ghz(0.1), delta_c=0.0, n_fock=4):
    return SystemConfig(g_eg=0.0, kappa=kappa, eps=eps, delta_c=delta_c, n_fock=n_fock)


# --- steady state -------------------------------------------------------------


def test_undriven_steady_state_is_ground():
    cfg = resonant_preset(kappa=G, eps=0.0, n_fock=4)
    rho = steady_state_of(cfg)
    assert trace_distance(rho, ground_state(cfg.space)) <= 1e-9


def test_driven_cavity_photon_number():
    cfg = empty_cavity()
    rho = steady_state_of(cfg)
    assert mean_photon(rho) == pytest.approx((0.1 / 3.0) ** 2, rel=1e-9)
    detuned = empty_cavity(delta_c=from_ghz(1.7))
    expected = abs(complex(detuned.eps)) ** 2 / (detuned.kappa**2 + detuned.delta_c**2)
    assert mean_photon(steady_state_of(detuned)) == pytest.approx(expected, rel=1e-9)


def test_steady_state_requires_kappa():
    cfg = resonant_preset(kappa=G, n_fock=3)
    with pytest.raises(SteadyStateError):
        steady_state_of(replace(cfg, kappa=0.0))


def test_steady_state_singular_reported():
    # decoupled undamped cavity: every Fock population is stationary, so the
    # null space is multi-dimensional and must be reported, not regularized
    cfg = SystemConfig(g_eg=0.0, kappa=G, eps=0.0, gamma_eg=0.1, n_fock=3, n_atom=2)
    L = liouvillian_for(replace(cfg, kappa=0.0))
    with pytest.raises(SteadyStateError):
        steady_state(L)


def test_steady_state_matches_time_evolution():
    # independent-oracle check; the benchmark config relaxes at ~0.12 kappa,
    # so the horizon is stretched to damp the transient below the tolerance
    cfg = resonant_preset(kappa=2 * G, n_fock=4)
    L = liouvillian_for(cfg)
    rho_direct = steady_state(L)
    rho_evolved = time_evolve(L, ground_state(cfg.space), t_final=150.0 / cfg.kappa)
    assert trace_distance(rho_direct, rho_evolved) <= 1e-6


def test_steady_state_invariants_random_configs():
    rng = np.random.default_rng(11)
    for _ in range(100):
        cfg = random_fourlevel(rng)
        rho = steady_state_of(cfg)  # DensityMatrix construction validates
        assert abs(np.trace(rho.matrix) - 1.0) <= 1e-9


# --- time evolution ------------------------------------------------------------


def test_evolve_zero_generator_is_identity():
    space = HilbertSpace(2, 3)
    L = build_liouvillian(
        build_hamiltonian(two_level_config(g_eg=0.0, kappa=0.0, gamma_eg=0.0, eps=0.0, n_fock=3)),
        [],
    )
    rho0 = pure_state(space, "e", 1)
    rho = time_evolve(L, rho0, t_final=3.0)
    assert np.array_equal(rho.matrix, rho0.matrix)


def test_photon_decay_exponential():
    kappa = 0.8
    cfg = two_level_config(g_eg=0.0, kappa=kappa, gamma_eg=0.0, eps=0.0, n_fock=3)
    L = liouvillian_for(cfg)
    rho0 = pure_state(cfg.space, "g", 1)
    for t in (0.3 / kappa, 1.0 / kappa):
        rho_t = time_evolve(L, rho0, t_final=t)
        assert mean_photon(rho_t) == pytest.approx(math.exp(-2 * kappa * t), rel=1e-6)


def test_driven_cavity_evolves_to_steady_state():
    cfg = empty_cavity(n_fock=4)
    L = liouvillian_for(cfg)
    rho_evolved = time_evolve(L, ground_state(cfg.space), t_final=50.0 / cfg.kappa)
    assert trace_distance(rho_evolved, steady_state(L)) <= 1e-6


def test_evolve_instability_detected():
    cfg = empty_cavity(n_fock=4)
    L = liouvillian_for(cfg)
    with pytest.raises(InstabilityError):
        time_evolve(L, ground_state(cfg.space), t_final=10.0, dt=1.0)


# --- photon statistics ----------------------------------------------------------


def test_g2_coherent_state():
    g2, n = photon_statistics(empty_cavity(n_fock=6))
    assert g2 == pytest.approx(1.0, abs=1e-6)


def test_g2_fock_states():
    space = HilbertSpace(4, 4)
    assert g2_zero(pure_state(space, "g", 1)) == pytest.approx(0.0, abs=1e-12)
    assert g2_zero(pure_state(space, "g", 2)) == pytest.approx(0.5)
    with pytest.raises(UndefinedObservableError):
        g2_zero(pure_state(space, "g", 0))


def test_mean_photon_trivials():
    space = HilbertSpace(2, 4)
    assert mean_photon(pure_state(space, "g", 0)) == 0.0
    assert mean_photon(pure_state(space, "g", 2)) == pytest.approx(2.0)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6))
@settings(max_examples=30, deadline=None)
def test_g2_diagonal_mixture_matches_direct_sum(weights):
    probs = np.array(weights) / sum(weights)
    n_fock = len(probs)
    space = HilbertSpace(2, n_fock)
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for n, p in enumerate(probs):
        rho[space.basis_index("g", n), space.basis_index("g", n)] = p
    state = DensityMatrix(space, rho)
    mean = sum(n * p for n, p in enumerate(probs))
    pairs = sum(n * (n - 1) * p for n, p in enumerate(probs))
    if mean <= 1e-12:
        return
    assert g2_zero(state) == pytest.approx(pairs / mean**2, rel=1e-9)


# --- manifold matrices -----------------------------------------------------------


def test_manifold_one_entries():
    cfg = SystemConfig(
        g_eg=2.0,
        g_fs=1.5,
        omega_rabi=0.7 + 0.1j,
        kappa=0.3,
        gamma_sg=0.01,
        gamma_eg=0.04,
        gamma_es=0.02,
        gamma_fg=0.05,
        gamma_fs=0.03,
        delta_c=0.5,
        delta_sg=-0.2,
        delta_eg=0.8,
        delta_fg=-0.4,
        n_fock=3,
    )
    mm = manifold_matrix(cfg, 1)
    assert mm.basis_labels == ("g,1", "e,0", "s,0")
    expected = np.array(
        [
            [-(0.5 + 0.3j), 2.0, 0.0],
            [2.0, -(0.8 + 0.06j), 0.7 + 0.1j],
            [0.0, 0.7 - 0.1j, -(-0.2 + 0.01j)],
        ]
    )
    assert np.allclose(mm.matrix, expected)
    literal = manifold_matrix(cfg, 1, literal_widths=True).matrix
    assert literal[1, 1] == pytest.approx(-(0.8 + 0.04j))


def test_manifold_two_entries():
    cfg = SystemConfig(
        g_eg=2.0,
        g_fs=1.5,
        omega_rabi=0.7,
        kappa=0.3,
        gamma_sg=0.01,
        gamma_eg=0.04,
        gamma_es=0.02,
        gamma_fg=0.05,
        gamma_fs=0.03,
        delta_c=0.5,
        delta_sg=-0.2,
        delta_eg=0.8,
        delta_fg=-0.4,
        n_fock=3,
    )
    mm = manifold_matrix(cfg, 2)
    assert mm.basis_labels == ("g,2", "e,1", "s,1", "f,0")
    zc = 0.5 + 0.3j
    expected = np.array(
        [
            [-2 * zc, math.sqrt(2) * 2.0, 0.0, 0.0],
            [math.sqrt(2) * 2.0, -(0.8 + 0.06j) - zc, 0.7, 0.0],
            [0.0, 0.7, -(-0.2 + 0.01j) - zc, 1.5],
            [0.0, 0.0, 1.5, -(-0.4 + 0.08j)],
        ]
    )
    assert np.allclose(mm.matrix, expected)
    literal = manifold_matrix(cfg, 2, literal_widths=True).matrix
    assert literal[3, 3] == pytest.approx(-(-0.4 + 0.03j))


def test_manifold_index_validation():
    with pytest.raises(ValueError):
        manifold_matrix(resonant_preset(kappa=G), 3)


def test_manifold_two_level_blocks():
    cfg = two_level_config(g_eg=1.2, kappa=0.4, gamma_eg=0.05, eps=0.1, delta_c=0.3)
    m1 = manifold_matrix(cfg, 1)
    assert m1.basis_labels == ("g,1", "e,0")
    assert np.allclose(
        m1.matrix, [[-(0.3 + 0.4j), 1.2], [1.2, -(0.3 + 0.05j)]]
    )
    m2 = manifold_matrix(cfg, 2)
    assert m2.basis_labels == ("g,2", "e,1")
    assert m2.matrix[0, 1] == pytest.approx(math.sqrt(2) * 1.2)


# --- eigenvalues -----------------------------------------------------------------


def test_eig_complex_diagonal_and_swap():
    diag = np.diag([1.0 + 2.0j, -0.5, 3.0])
    assert np.allclose(sorted(eig_complex(diag), key=lambda z: z.real), sorted(diag.diagonal(), key=lambda z: z.real))
    g = 1.7
    values = np.sort(eig_complex(np.array([[0.0, g], [g, 0.0]])).real)
    assert np.allclose(values, [-g, g])


def test_eig_complex_trace_identity():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    values = eig_complex(m)
    assert np.sum(values) == pytest.approx(np.trace(m), rel=1e-9)


def test_eig_complex_dimension_cap():
    with pytest.raises(ValueError):
        eig_complex(np.eye(9))


def test_dressed_energies_resonant_analytic():
    # kappa -> 0 with the tiny benchmark widths: +-sqrt(1.25) and 0
    g = G
    cfg = replace(
        resonant_preset(kappa=1e-9 * g, omega_rabi=0.5 * g),
        gamma_eg=3e-3 * g,
        gamma_es=0.0,
        gamma_fg=0.0,
        gamma_fs=3e-3 * g,
        gamma_sg=3e-4 * g,
    )
    res = dressed_energies(cfg, 1)
    assert len(res.eigenvalues) == 3
    assert np.allclose(res.energies_over_g, [-math.sqrt(1.25), 0.0, math.sqrt(1.25)], atol=1e-4)


def test_dressed_energies_quartic():
    cfg = replace(
        resonant_preset(kappa=1e-12),
        gamma_sg=0.0,
        gamma_eg=0.0,
        gamma_es=0.0,
        gamma_fg=0.0,
        gamma_fs=0.0,
    )
    cfg = replace(cfg, kappa=0.0)
    res = dressed_energies(cfg, 2)
    expected = sorted(
        s1 * math.sqrt(2 + s2 * math.sqrt(2)) for s1 in (-1, 1) for s2 in (-1, 1)
    )
    assert len(res.eigenvalues) == 4
    assert np.allclose(res.energies_over_g, expected, rtol=1e-9)


def test_dressed_energies_jc_decoupling():
    # W = 0, g_fs = 0: Jaynes-Cummings doublet plus the bare |s,0> level
    cfg = replace(
        resonant_preset(kappa=1e-12, omega_rabi=0.0, g_fs=0.0),
        gamma_sg=0.0,
        gamma_eg=0.0,
        gamma_es=0.0,
        gamma_fg=0.0,
        gamma_fs=0.0,
        kappa=0.0,
    )
    res = dressed_energies(cfg, 1)
    assert np.allclose(res.energies_over_g, [-1.0, 0.0, 1.0], atol=1e-12)


def test_dressed_energies_vacuum_rabi_threshold():
    # two-level reduction: real splitting vanishes exactly for g <= |kappa - gamma_e|/2
    g = 1.0
    for kappa, expect_split in ((0.5 * g, True), (2.5 * g, False), (4.0 * g, False)):
        cfg = replace(
            resonant_preset(kappa=kappa, omega_rabi=0.0, g_fs=0.0, n_fock=3),
            g_eg=g,
            gamma_sg=1e-6,
            gamma_eg=0.0,
            gamma_es=0.0,
            gamma_fg=0.0,
            gamma_fs=0.0,
        )
        res = dressed_energies(cfg, 1)
        jc = [e for e, w in zip(res.energies_over_g, res.widths) if w > 1e-3]
        analytic = math.sqrt(max(g**2 - (kappa / 2) ** 2, 0.0))
        spread = max(jc) - min(jc)
        if expect_split:
            assert spread == pytest.approx(2 * analytic, rel=1e-9)
        else:
            assert spread <= 1e-12


def test_dressed_energies_large_kappa_collapse():
    for kappa_over_g in (100.0, 1000.0):
        cfg = replace(
            resonant_preset(kappa=kappa_over_g * G, omega_rabi=0.0, g_fs=0.0),
            gamma_sg=1e-6 * G,
        )
        res = dressed_energies(cfg, 1)
        spread = max(res.energies_over_g) - min(res.energies_over_g)
        assert spread < 1e-3


# --- Fock convergence -------------------------------------------------------------


def test_fock_convergence_empty_cavity():
    cfg = empty_cavity(n_fock=7)
    n_req, value = fock_convergence(cfg, observable="n_photon", tol=1e-6)
    assert n_req == 4
    assert value == pytest.approx((0.1 / 3.0) ** 2, rel=1e-6)


def test_fock_convergence_infinite_tol():
    cfg = empty_cavity()
    n_req, value = fock_convergence(cfg, observable="g2", tol=math.inf)
    assert n_req == 4


def test_fock_convergence_failure():
    cfg = resonant_preset(kappa=2 * G)
    with pytest.raises(ConvergenceError):
        fock_convergence(cfg, observable="g2", tol=1e-300, cap=6)
    with pytest.raises(ValueError):
        fock_convergence(cfg, observable="g2", tol=0.0)
