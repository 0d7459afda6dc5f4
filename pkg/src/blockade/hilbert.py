"""Truncated composite Hilbert space (atomic levels x Fock ladder) and dense operators.

The composite basis is atom-major: the state with the atom in level ``k`` and
``n`` photons in the cavity sits at index ``k * n_fock + n``.  Levels are
ordered g=0, s=1, e=2, f=3 for the four-level emitter and g=0, e=1 for the
two-level reduction.  All matrices are dense complex and frozen after
construction; truncation artifacts at the top Fock level are kept as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

FOUR_LEVELS: Tuple[str, ...] = ("g", "s", "e", "f")
TWO_LEVELS: Tuple[str, ...] = ("g", "e")

TRACE_TOL = 1e-9
HERMITICITY_TOL = 1e-9
POSITIVITY_TOL = -1e-8


class SpaceMismatchError(ValueError):
    """Raised when operators or states living on different spaces are combined."""


@dataclass(frozen=True)
class HilbertSpace:
    """Composite space of ``n_atom`` atomic levels and ``n_fock`` Fock states."""

    n_atom: int
    n_fock: int

    def __post_init__(self) -> None:
        if self.n_atom not in (2, 4):
            raise ValueError(f"n_atom must be 2 or 4, got {self.n_atom}")
        if self.n_fock < 1:
            raise ValueError(f"n_fock must be positive, got {self.n_fock}")

    @property
    def dim(self) -> int:
        return self.n_atom * self.n_fock

    @property
    def levels(self) -> Tuple[str, ...]:
        return FOUR_LEVELS if self.n_atom == 4 else TWO_LEVELS

    def level_index(self, label: str) -> int:
        try:
            return self.levels.index(label)
        except ValueError:
            raise ValueError(
                f"level {label!r} not in {self.levels} for n_atom={self.n_atom}"
            ) from None

    def basis_index(self, label: str, n: int) -> int:
        """Composite index of the bare state |label, n>."""
        if not 0 <= n < self.n_fock:
            raise ValueError(f"photon number {n} outside truncation [0, {self.n_fock})")
        return self.level_index(label) * self.n_fock + n


def _freeze(matrix: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(matrix, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Operator:
    """Dense operator tagged with its space; arithmetic checks the space, never coerces."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _freeze(self.matrix)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "matrix", m)

    def _check(self, other: "Operator") -> None:
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space} != {other.space}")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, scalar * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(np.abs(self.matrix).max(), 1.0)
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol * scale)


@dataclass(frozen=True)
class DensityMatrix:
    """System state rho: trace one, Hermitian, positive semidefinite (validated)."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _freeze(self.matrix)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "matrix", m)
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 by more than {TRACE_TOL}")
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        lowest = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
        if lowest < POSITIVITY_TOL:
            raise ValueError(f"negative eigenvalue {lowest} below {POSITIVITY_TOL}")


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def annihilation(space: HilbertSpace) -> Operator:
    """Cavity annihilation operator: identity on the atom, truncated ladder on the Fock factor."""
    ladder = np.diag(np.sqrt(np.arange(1, space.n_fock, dtype=float)), 1).astype(complex)
    return Operator(space, np.kron(np.eye(space.n_atom), ladder))


def creation(space: HilbertSpace) -> Operator:
    return annihilation(space).dag()


def number_operator(space: HilbertSpace) -> Operator:
    a = annihilation(space)
    return a.dag() @ a


def atomic_transition(space: HilbertSpace, i: str, j: str) -> Operator:
    """sigma_ij = |j><i| (tensored with the Fock identity): sends level i to level j."""
    m = np.zeros((space.n_atom, space.n_atom), dtype=complex)
    m[space.level_index(j), space.level_index(i)] = 1.0
    return Operator(space, np.kron(m, np.eye(space.n_fock)))


def level_projector(space: HilbertSpace, label: str) -> Operator:
    return atomic_transition(space, label, label)


def basis_ket(space: HilbertSpace, label: str, n: int) -> np.ndarray:
    ket = np.zeros(space.dim, dtype=complex)
    ket[space.basis_index(label, n)] = 1.0
    return ket


def pure_state(space: HilbertSpace, label: str, n: int) -> DensityMatrix:
    ket = basis_ket(space, label, n)
    return DensityMatrix(space, np.outer(ket, ket.conj()))


def compose(terms: Iterable[Tuple[complex, Operator]]) -> Operator:
    """Linear combination sum_i c_i Op_i over a shared space."""
    terms = list(terms)
    if not terms:
        raise ValueError("compose needs at least one term")
    space = terms[0][1].space
    acc = np.zeros((space.dim, space.dim), dtype=complex)
    for coeff, op in terms:
        if op.space != space:
            raise SpaceMismatchError(f"{op.space} != {space}")
        acc += coeff * op.matrix
    return Operator(space, acc)


def product(a: Operator, b: Operator) -> Operator:
    return a @ b


def adjoint(a: Operator) -> Operator:
    return a.dag()


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def expectation(op: Operator, rho: DensityMatrix) -> complex:
    """tr(op . rho)."""
    if op.space != rho.space:
        raise SpaceMismatchError(f"{op.space} != {rho.space}")
    return complex(np.trace(op.matrix @ rho.matrix))
