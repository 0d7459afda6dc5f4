"""Photon-blockade simulations for a four-level emitter in a single-mode nanocavity.

Steady-state photon statistics (g2(0)) of the driven emitter-cavity master
equation, dressed-state spectra of the excitation manifolds, closed-form
first/second-photon transmission estimators, and a preset sweep engine that
regenerates the benchmark figure set (fig2a-fig5, int1, int2) as CSV tables.
"""

from ._version import __version__
from .hilbert import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    SpaceMismatchError,
    annihilation,
    atomic_transition,
    commutator,
    compose,
    expectation,
)
from .model import (
    CESIUM_SPLITTING,
    ConfigError,
    FrequencySpec,
    Liouvillian,
    SystemConfig,
    build_collapse_ops,
    build_hamiltonian,
    build_liouvillian,
    cesium_preset,
    detunings_from_frequencies,
    from_ghz,
    load_config,
    resonant_preset,
    to_ghz,
    two_level_config,
)
from .solvers import (
    ManifoldMatrix,
    SpectrumResult,
    dressed_energies,
    eig_complex,
    fock_convergence,
    g2_zero,
    manifold_matrix,
    mean_photon,
    photon_statistics,
    steady_state,
    steady_state_of,
    time_evolve,
)
from .sweep import (
    FIGURE_IDS,
    SweepResult,
    SweepSpec,
    figure_preset,
    optimize_probe_detuning,
    run_figure,
    run_sweep,
    write_result,
)
from .transmission import TransmissionPoint, t1, t2, transmission_map

__all__ = [
    "__version__",
    "CESIUM_SPLITTING",
    "ConfigError",
    "DensityMatrix",
    "FIGURE_IDS",
    "FrequencySpec",
    "HilbertSpace",
    "Liouvillian",
    "ManifoldMatrix",
    "Operator",
    "SpaceMismatchError",
    "SpectrumResult",
    "SweepResult",
    "SweepSpec",
    "SystemConfig",
    "TransmissionPoint",
    "annihilation",
    "atomic_transition",
    "build_collapse_ops",
    "build_hamiltonian",
    "build_liouvillian",
    "cesium_preset",
    "commutator",
    "compose",
    "detunings_from_frequencies",
    "dressed_energies",
    "eig_complex",
    "expectation",
    "figure_preset",
    "fock_convergence",
    "from_ghz",
    "g2_zero",
    "load_config",
    "manifold_matrix",
    "mean_photon",
    "optimize_probe_detuning",
    "photon_statistics",
    "resonant_preset",
    "run_figure",
    "run_sweep",
    "steady_state",
    "steady_state_of",
    "t1",
    "t2",
    "time_evolve",
    "to_ghz",
    "transmission_map",
    "two_level_config",
    "write_result",
]
