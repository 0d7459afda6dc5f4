"""Steady-state and time-domain master-equation solvers, photon statistics,
and complex dressed-state spectra of the excitation manifolds.

The steady state solves the dim^2 x dim^2 linear system L vec(rho) = 0 with
the redundant rho_00 balance equation replaced by the trace constraint
tr(rho) = 1.  That row is always safe to drop: trace preservation makes the
diagonal-balance rows of L linearly dependent, so the replacement never
discards information.

Manifold spectra follow the complex-detuning picture: the Hamiltonian
restricted to an excitation manifold, with each bare level's total width
folded into its diagonal as -i*Gamma.  Widths default to the summed decay of
each level (gamma_e = gamma_eg + gamma_es, gamma_f = gamma_fg + gamma_fs);
``literal_widths=True`` keeps only the ground-connected channel widths
(gamma_eg for |e>, gamma_fs for |f>) for sensitivity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .hilbert import DensityMatrix, HilbertSpace, annihilation, basis_ket
from .model import (
    Liouvillian,
    SystemConfig,
    build_collapse_ops,
    build_hamiltonian,
    build_liouvillian,
    unvectorize,
    vectorize,
)

STEADY_RESIDUAL_TOL = 1e-8
PHOTON_NUMBER_FLOOR = 1e-12


class SolverError(RuntimeError):
    """Base class for solver failures."""


class SteadyStateError(SolverError):
    """Steady-state system singular or residual above tolerance."""


class InstabilityError(SolverError):
    """Time propagation lost the trace beyond the abort threshold."""


class UndefinedObservableError(SolverError):
    """Observable undefined for this state (vanishing photon number)."""


class ConvergenceError(SolverError):
    """Iteration cap reached without meeting the tolerance."""


def _trace_indices(dim: int) -> np.ndarray:
    # positions of the diagonal entries in the column-stacked vector
    return np.arange(dim) * dim + np.arange(dim)


def steady_state(L: Liouvillian) -> DensityMatrix:
    """Unique steady state of the dissipative evolution generated by ``L``.

    Raises SteadyStateError if the trace-replaced system is singular (null
    space larger than the expected one dimension, e.g. kappa = 0) or if the
    residual ||L vec(rho)|| exceeds 1e-8 ||L|| ||vec(rho)||.
    """
    dim = L.space.dim
    a = np.array(L.matrix)
    b = np.zeros(dim * dim, dtype=complex)
    a[0, :] = 0.0
    a[0, _trace_indices(dim)] = 1.0
    b[0] = 1.0
    try:
        v = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SteadyStateError(
            f"steady-state system singular beyond the one-dimensional null space ({exc})"
        ) from None
    residual = np.linalg.norm(L.matrix @ v)
    bound = STEADY_RESIDUAL_TOL * np.linalg.norm(L.matrix) * np.linalg.norm(v)
    if not np.isfinite(residual) or residual > bound:
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} above tolerance {bound:.3e}"
        )
    rho = unvectorize(v, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(L.space, rho)


def steady_state_of(config: SystemConfig) -> DensityMatrix:
    """Build the Liouvillian for ``config`` and solve for its steady state."""
    if config.kappa <= 0:
        raise SteadyStateError("steady state requires kappa > 0")
    L = build_liouvillian(build_hamiltonian(config), build_collapse_ops(config))
    return steady_state(L)


def steady_residual(L: Liouvillian, rho: DensityMatrix) -> float:
    """||L vec(rho)|| / (||L|| ||vec(rho)||), the relative stationarity defect."""
    v = vectorize(rho.matrix)
    return float(
        np.linalg.norm(L.matrix @ v) / (np.linalg.norm(L.matrix) * np.linalg.norm(v))
    )


def time_evolve(
    L: Liouvillian,
    rho0: DensityMatrix,
    t_final: float,
    dt: Optional[float] = None,
) -> DensityMatrix:
    """Fixed-step classical 4th-order propagation of vec(rho) to ``t_final``.

    The default step honours the stability heuristic dt <= 0.05 / ||L||_inf.
    The trace is monitored every step; drift beyond 1e-4 aborts with a
    diagnostic.  The returned state is re-Hermitized as (rho + rho+)/2 and
    trace-renormalized (drift is bounded by the monitor, < 1e-7 in practice).
    """
    if L.space != rho0.space:
        raise ValueError(f"spaces differ: {L.space} != {rho0.space}")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    m = L.matrix
    norm_inf = float(np.abs(m).sum(axis=1).max()) if m.size else 0.0
    if dt is None:
        dt = 0.05 / norm_inf if norm_inf > 0 else t_final
    if t_final == 0 or norm_inf == 0:
        return rho0
    nsteps = max(1, math.ceil(t_final / dt))
    h = t_final / nsteps
    v = vectorize(rho0.matrix)
    diag = _trace_indices(L.space.dim)
    for step in range(nsteps):
        k1 = m @ v
        k2 = m @ (v + 0.5 * h * k1)
        k3 = m @ (v + 0.5 * h * k2)
        k4 = m @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(v[diag].sum() - 1.0)
        if drift > 1e-4:
            raise InstabilityError(
                f"trace drift {drift:.3e} at step {step + 1}/{nsteps} "
                f"(dt={h:.3e}, ||L||_inf={norm_inf:.3e}); reduce dt"
            )
    rho = unvectorize(v, L.space.dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityMatrix(L.space, rho)


def mean_photon(rho: DensityMatrix, space: Optional[HilbertSpace] = None) -> float:
    """<a+a>; the imaginary part (roundoff only) is checked and dropped."""
    space = space or rho.space
    if space != rho.space:
        raise ValueError(f"spaces differ: {space} != {rho.space}")
    a = annihilation(space).matrix
    value = complex(np.trace(a.conj().T @ a @ rho.matrix))
    if abs(value.imag) > 1e-9:
        raise SolverError(f"<a+a> has non-negligible imaginary part {value.imag}")
    return value.real


def g2_zero(rho: DensityMatrix, space: Optional[HilbertSpace] = None) -> float:
    """Zero-delay intensity autocorrelation <a+a+aa> / <a+a>^2."""
    space = space or rho.space
    if space != rho.space:
        raise ValueError(f"spaces differ: {space} != {rho.space}")
    n = mean_photon(rho, space)
    if n <= PHOTON_NUMBER_FLOOR:
        raise UndefinedObservableError(
            f"g2(0) undefined: <a+a> = {n:.3e} below {PHOTON_NUMBER_FLOOR}"
        )
    a = annihilation(space).matrix
    ad = a.conj().T
    num = complex(np.trace(ad @ ad @ a @ a @ rho.matrix))
    if abs(num.imag) > 1e-9:
        raise SolverError(f"<a+a+aa> has non-negligible imaginary part {num.imag}")
    return num.real / n**2


def photon_statistics(config: SystemConfig) -> Tuple[float, float]:
    """(g2(0), <a+a>) of the steady state; one solve for both observables."""
    rho = steady_state_of(config)
    return g2_zero(rho), mean_photon(rho)


@dataclass(frozen=True)
class ManifoldMatrix:
    """Non-Hermitian Hamiltonian restricted to one excitation manifold."""

    manifold_index: int
    basis_labels: Tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        n = len(self.basis_labels)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} != ({n}, {n})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class SpectrumResult:
    """Complex manifold eigenvalues, sorted ascending by (real, imag)."""

    eigenvalues: Tuple[complex, ...]
    energies_over_g: Tuple[float, ...]
    widths: Tuple[float, ...]


def manifold_matrix(
    config: SystemConfig, n: int, literal_widths: bool = False
) -> ManifoldMatrix:
    """Complex-detuning Hamiltonian of manifold ``n`` (1 or 2).

    Four-level bases: (|g,1>, |e,0>, |s,0>) and (|g,2>, |e,1>, |s,1>, |f,0>).
    Two-level bases: (|g,1>, |e,0>) and (|g,2>, |e,1>).  The probe drive is
    excluded (weak-probe limit).
    """
    if n not in (1, 2):
        raise ValueError(f"manifold index must be 1 or 2, got {n}")
    kappa = config.kappa
    gamma_e = config.gamma_eg if literal_widths else config.gamma_e
    zc = config.delta_c + 1j * kappa
    ze = config.delta_eg + 1j * gamma_e
    if config.n_atom == 2:
        if n == 1:
            m = np.array([[-zc, config.g_eg], [config.g_eg, -ze]], dtype=complex)
            return ManifoldMatrix(1, ("g,1", "e,0"), m)
        m = np.array(
            [
                [-2 * zc, math.sqrt(2) * config.g_eg],
                [math.sqrt(2) * config.g_eg, -ze - zc],
            ],
            dtype=complex,
        )
        return ManifoldMatrix(2, ("g,2", "e,1"), m)
    gamma_s = config.gamma_s
    gamma_f = config.gamma_fs if literal_widths else config.gamma_f
    zs = config.delta_sg + 1j * gamma_s
    zf = config.delta_fg + 1j * gamma_f
    omega = config.omega_rabi
    if n == 1:
        m = np.array(
            [
                [-zc, config.g_eg, 0.0],
                [config.g_eg, -ze, omega],
                [0.0, np.conj(omega), -zs],
            ],
            dtype=complex,
        )
        return ManifoldMatrix(1, ("g,1", "e,0", "s,0"), m)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = -2 * zc
    m[1, 1] = -ze - zc
    m[2, 2] = -zs - zc
    m[3, 3] = -zf
    m[0, 1] = m[1, 0] = math.sqrt(2) * config.g_eg
    m[1, 2] = omega
    m[2, 1] = np.conj(omega)
    m[2, 3] = m[3, 2] = config.g_fs
    return ManifoldMatrix(2, ("g,2", "e,1", "s,1", "f,0"), m)


def eig_complex(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a small dense complex matrix, residual-validated.

    Each eigenpair must satisfy ||m v - lambda v|| <= 1e-9 ||m||; LAPACK
    non-convergence surfaces as ConvergenceError.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > 8:
        raise ValueError(f"eig_complex is for small matrices (dim <= 8), got {m.shape[0]}")
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from None
    scale = np.linalg.norm(m, ord=2)
    if scale > 0:
        residual = np.abs(m @ vectors - vectors * values).max()
        if residual > 1e-9 * scale:
            raise ConvergenceError(
                f"eigenpair residual {residual:.3e} above 1e-9 * ||m|| = {1e-9 * scale:.3e}"
            )
    return values


def dressed_energies(
    config: SystemConfig, n: int, literal_widths: bool = False
) -> SpectrumResult:
    """Sorted complex eigenvalues of manifold ``n``; energies normalized by g_eg,
    widths reported as -2 Im(lambda) (decay full-widths)."""
    mm = manifold_matrix(config, n, literal_widths=literal_widths)
    values = eig_complex(mm.matrix)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    return SpectrumResult(
        eigenvalues=tuple(complex(v) for v in values),
        energies_over_g=tuple(float(v.real / config.g_eg) for v in values),
        widths=tuple(float(-2.0 * v.imag) for v in values),
    )


_OBSERVABLES = ("g2", "n_photon")


def fock_convergence(
    config: SystemConfig,
    observable: str = "g2",
    tol: float = 0.01,
    start: int = 4,
    cap: int = 16,
) -> Tuple[int, float]:
    """Smallest truncation at which the observable is stable.

    Grows n_fock from ``start`` and returns the first size whose value changes
    by less than ``tol`` (relative) when one more Fock state is added, along
    with the value at that size.  ``tol=inf`` returns the starting truncation.
    """
    if observable not in _OBSERVABLES:
        raise ValueError(f"observable must be one of {_OBSERVABLES}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def value_at(n: int) -> float:
        g2, n_photon = photon_statistics(replace(config, n_fock=n))
        return g2 if observable == "g2" else n_photon

    previous = value_at(start)
    if math.isinf(tol):
        return start, previous
    for n in range(start, cap):
        current = value_at(n + 1)
        scale = max(abs(previous), PHOTON_NUMBER_FLOOR)
        if abs(current - previous) / scale < tol:
            return n, previous
        previous = current
    raise ConvergenceError(
        f"{observable} not converged to {tol} relative by n_fock = {cap}"
    )


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) ||rho - sigma||_1."""
    diff = rho.matrix - sigma.matrix
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def ground_state(space: HilbertSpace) -> DensityMatrix:
    ket = basis_ket(space, "g", 0)
    return DensityMatrix(space, np.outer(ket, ket.conj()))
