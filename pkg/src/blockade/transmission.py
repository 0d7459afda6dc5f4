"""Closed-form estimators for the transmission of the first and second photon.

The estimate treats each manifold separately: with the system holding the
lower state (amplitude 1) and the probe's only retained action being the
drive into the manifold's cavity-excited member, the manifold amplitudes
solve a small linear steady-state system

    M1 (c_g1, c_e0, c_s0)        = -(E, 0, 0)          first photon,
    M2 (c_g2, c_e1, c_s1, c_f0)  = -(sqrt(2) E, 0, ..) second photon,

where M_n is the complex-detuning manifold Hamiltonian and the sqrt(2) is the
bosonic enhancement of the |g,1> -> |g,2> drive.  Transmissions are
normalized to the resonant empty cavity:

    t1 = |c_g1|^2 kappa^2 / |E|^2,     t2 = 2 |c_g2|^2 kappa^2 / |E|^2.

Both are independent of the probe amplitude (the systems are linear in E).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from .model import SystemConfig, set_emitter_detuning, set_probe_detuning
from .solvers import manifold_matrix


class TransmissionError(RuntimeError):
    """Manifold system singular (all widths vanish at an exact crossing)."""


@dataclass(frozen=True)
class TransmissionPoint:
    """First- and second-photon transmission at one detuning pair (angular units)."""

    delta_c: float
    delta_eg: float
    t1: float
    t2: float


def _solve_manifold(config: SystemConfig, n: int, literal_widths: bool) -> np.ndarray:
    if config.kappa <= 0:
        raise TransmissionError("transmission estimate requires kappa > 0")
    eps = complex(config.eps)
    if abs(eps) == 0:
        raise TransmissionError("transmission estimate requires a nonzero probe eps")
    m = manifold_matrix(config, n, literal_widths=literal_widths).matrix
    drive = np.zeros(m.shape[0], dtype=complex)
    drive[0] = eps if n == 1 else np.sqrt(2.0) * eps
    try:
        return np.linalg.solve(m, -drive)
    except np.linalg.LinAlgError as exc:
        raise TransmissionError(f"manifold-{n} system singular: {exc}") from None


def t1(config: SystemConfig, literal_widths: bool = False) -> float:
    """First-photon transmission, 1.0 for the resonant empty cavity."""
    c = _solve_manifold(config, 1, literal_widths)
    return float(abs(c[0]) ** 2 * config.kappa**2 / abs(complex(config.eps)) ** 2)


def t2(config: SystemConfig, literal_widths: bool = False) -> float:
    """Second-photon transmission (system already holding one photon), same
    normalization as t1."""
    c = _solve_manifold(config, 2, literal_widths)
    return float(2.0 * abs(c[0]) ** 2 * config.kappa**2 / abs(complex(config.eps)) ** 2)


_AXIS_NAMES = ("delta_c", "delta_eg", "kappa")


def _apply_axis(config: SystemConfig, name: str, value: float, drive: str) -> SystemConfig:
    if name == "delta_c":
        return set_probe_detuning(config, value, drive=drive)
    if name == "delta_eg":
        return set_emitter_detuning(config, value)
    if name == "kappa":
        return replace(config, kappa=value)
    raise ValueError(f"unknown axis {name!r}; valid axes are {_AXIS_NAMES}")


def transmission_map(
    config_template: SystemConfig,
    axis1: Tuple[str, Sequence[float]],
    axis2: Tuple[str, Sequence[float]],
    drive: str = "fixed",
) -> List[TransmissionPoint]:
    """t1 and t2 over the Cartesian grid of two axes, axis1-major row order.

    Axis values are angular; ``delta_c`` scans the probe (detuning ties per
    the drive convention), ``delta_eg`` retunes the emitter with the
    delta_fg - delta_eg offset preserved, ``kappa`` sets the cavity decay.
    """
    name1, grid1 = axis1
    name2, grid2 = axis2
    for name, grid in ((name1, grid1), (name2, grid2)):
        if name not in _AXIS_NAMES:
            raise ValueError(f"unknown axis {name!r}; valid axes are {_AXIS_NAMES}")
        values = np.asarray(grid, dtype=float)
        if values.size == 0 or not np.all(np.isfinite(values)):
            raise ValueError(f"axis {name!r} grid must be finite and non-empty")
        if values.size > 1:
            steps = np.diff(values)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError(f"axis {name!r} grid must be monotone")
    points: List[TransmissionPoint] = []
    for x1 in grid1:
        outer = _apply_axis(config_template, name1, float(x1), drive)
        for x2 in grid2:
            cfg = _apply_axis(outer, name2, float(x2), drive)
            points.append(
                TransmissionPoint(
                    delta_c=cfg.delta_c,
                    delta_eg=cfg.delta_eg,
                    t1=t1(cfg),
                    t2=t2(cfg),
                )
            )
    return points
