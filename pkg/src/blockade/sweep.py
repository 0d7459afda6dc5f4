"""Parameter-sweep engine, probe-detuning optimizer, figure presets, writers.

Grid evaluation is point-independent and deterministic: rows come out in
axis1-major order whatever the execution mode, and every numerical evaluation
runs under a single BLAS thread so serial and parallel runs produce
byte-identical CSV files.

Axis-value units follow the user-facing convention: names ending in
``_over_g`` (and ``gfs_over_geg``) are dimensionless multiples of g_eg; bare
config-field names (``kappa``, ``eps``, ``delta_c``, ``delta_eg``, ...) are
linear GHz.  Detuning axes apply the physical scan semantics from ``model``:
``delta_c`` scans the probe frequency (ties per the drive convention) and
``delta_eg`` retunes the emitter preserving delta_fg - delta_eg.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from threadpoolctl import threadpool_limits

from ._version import __version__
from .model import (
    CESIUM_SPLITTING,
    SystemConfig,
    build_collapse_ops,
    build_hamiltonian,
    build_liouvillian,
    cesium_preset,
    config_to_ghz,
    from_ghz,
    parse_config,
    resonant_preset,
    set_emitter_detuning,
    set_probe_detuning,
    two_level_config,
)
from .solvers import (
    STEADY_RESIDUAL_TOL,
    SolverError,
    dressed_energies,
    g2_zero,
    mean_photon,
    steady_residual,
    steady_state,
)
from .transmission import TransmissionError, t1 as transmission_t1, t2 as transmission_t2

OBSERVABLES = ("g2", "n_photon", "t1", "t2", "dressed_energies")

#: Row keys carried in JSON output but never written to CSV columns.
_BOOKKEEPING = ("residual", "failed", "error")

_GHZ_FIELDS = (
    "kappa",
    "eps",
    "delta_c",
    "delta_eg",
    "g_eg",
    "g_fs",
    "omega_rabi",
    "gamma_sg",
    "gamma_eg",
    "gamma_es",
    "gamma_fg",
    "gamma_fs",
)


class SweepError(ValueError):
    """Invalid sweep specification."""


@dataclass(frozen=True)
class SweepSpec:
    """One labelled sweep: a base config, 1-2 axes, observables, optional reduction.

    ``post="min_over_axis2"`` minimizes g2(0) over axis2 at every axis1 point
    (via the probe-detuning optimizer, axis2 doubling as the coarse scan) and
    reports the argmin in a ``<name>_opt`` column.
    """

    base: SystemConfig
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...]
    observables: Tuple[str, ...] = ("g2",)
    post: str = "none"
    label: str = ""
    opt_suffix: Optional[str] = None
    drive: str = "fixed"


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: Tuple[Dict[str, float], ...]
    metadata: Dict[str, object]


class OptimizeResult(NamedTuple):
    detuning: float
    g2_min: float
    at_boundary: bool


def apply_axis(config: SystemConfig, name: str, value: float, drive: str = "fixed") -> SystemConfig:
    """Return ``config`` with one named parameter set to ``value`` (axis units)."""
    if name == "kappa_over_g":
        return replace(config, kappa=value * config.g_eg)
    if name == "omega_over_g":
        return replace(config, omega_rabi=value * config.g_eg)
    if name == "gfs_over_geg":
        return replace(config, g_fs=value * config.g_eg)
    if name == "delta_c_over_g":
        return set_probe_detuning(config, value * config.g_eg, drive=drive)
    if name == "delta_eg_over_g":
        return set_emitter_detuning(config, value * config.g_eg)
    if name == "delta_c":
        return set_probe_detuning(config, from_ghz(value), drive=drive)
    if name == "delta_eg":
        return set_emitter_detuning(config, from_ghz(value))
    if name in _GHZ_FIELDS:
        return replace(config, **{name: from_ghz(value)})
    raise SweepError(f"unknown axis parameter {name!r}")


def _axis_scale(name: str, config: SystemConfig) -> float:
    """Angular value of one axis unit (for converting optimizer output back)."""
    if name.endswith("_over_g") or name == "gfs_over_geg":
        return config.g_eg
    return from_ghz(1.0)


def _validate_spec(spec: SweepSpec) -> None:
    if not 1 <= len(spec.axes) <= 2:
        raise SweepError(f"need 1 or 2 axes, got {len(spec.axes)}")
    for name, grid in spec.axes:
        apply_axis(spec.base, name, float(np.asarray(grid).flat[0]), spec.drive)
        values = np.asarray(grid, dtype=float)
        if values.size == 0 or not np.all(np.isfinite(values)):
            raise SweepError(f"axis {name!r} grid must be finite and non-empty")
    unknown = set(spec.observables) - set(OBSERVABLES)
    if unknown:
        raise SweepError(f"unknown observables {sorted(unknown)}")
    if spec.post not in ("none", "min_over_axis2"):
        raise SweepError(f"unknown post-processing {spec.post!r}")
    if spec.post == "min_over_axis2":
        if len(spec.axes) != 2:
            raise SweepError("min_over_axis2 needs two axes")
        if spec.observables != ("g2",):
            raise SweepError("min_over_axis2 reduces the g2 observable only")
        if not spec.axes[1][0].startswith(("delta_c", "delta_eg")):
            raise SweepError("min_over_axis2 expects a detuning on axis2")


def optimize_probe_detuning(
    config_template: SystemConfig,
    vary: str,
    bracket: Optional[Tuple[float, float]] = None,
    coarse_points: int = 61,
    resolution: Optional[float] = None,
    drive: str = "fixed",
) -> OptimizeResult:
    """Minimize steady-state g2(0) over one detuning (angular units).

    ``vary="delta_c_tied"`` scans the probe (for the two-level system this
    moves cavity and emitter detuning together); ``vary="delta_eg"`` retunes
    the emitter.  A coarse scan (>= 61 points) brackets the minimum, then
    golden-section refinement localizes it to ``resolution`` (default
    1e-3 g_eg).  A minimum on the bracket boundary is flagged.
    """
    g = config_template.g_eg
    if vary == "delta_c_tied":
        setter: Callable[[float], SystemConfig] = lambda x: set_probe_detuning(
            config_template, x, drive=drive
        )
        lo, hi = bracket if bracket is not None else (0.0, 3.0 * g)
    elif vary == "delta_eg":
        setter = lambda x: set_emitter_detuning(config_template, x)
        lo, hi = bracket if bracket is not None else (-3.0 * g, 3.0 * g)
    else:
        raise SweepError(f"unknown vary mode {vary!r}")
    if not hi > lo:
        raise SweepError(f"empty bracket ({lo}, {hi})")
    resolution = 1e-3 * g if resolution is None else resolution

    def objective(x: float) -> float:
        cfg = setter(float(x))
        L = build_liouvillian(build_hamiltonian(cfg), build_collapse_ops(cfg))
        return g2_zero(steady_state(L))

    grid = np.linspace(lo, hi, max(int(coarse_points), 2))
    values = [objective(x) for x in grid]
    i = int(np.argmin(values))
    best_x, best_val = float(grid[i]), float(values[i])
    at_boundary = i == 0 or i == len(grid) - 1

    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, len(grid) - 1)])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = objective(x1), objective(x2)
    while b - a > resolution:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = objective(x2)
        for x, f in ((x1, f1), (x2, f2)):
            if f < best_val:
                best_x, best_val = float(x), float(f)
    return OptimizeResult(best_x, best_val, at_boundary)


def _steady_for(config: SystemConfig):
    L = build_liouvillian(build_hamiltonian(config), build_collapse_ops(config))
    rho = steady_state(L)
    return rho, steady_residual(L, rho)


def _observable_columns(spec: SweepSpec) -> List[str]:
    suffix = f"_{spec.label}" if spec.label else ""
    cols: List[str] = []
    for obs in spec.observables:
        if obs == "dressed_energies":
            cols += [f"m1_e{k}{suffix}" for k in (1, 2, 3)]
            cols += [f"m2_e{k}{suffix}" for k in (1, 2, 3, 4)]
            cols += [f"m1_w{k}{suffix}" for k in (1, 2, 3)]
            cols += [f"m2_w{k}{suffix}" for k in (1, 2, 3, 4)]
        else:
            cols.append(f"{obs}{suffix}")
    if spec.post == "min_over_axis2":
        cols.append(_opt_column(spec))
    return cols


def _opt_column(spec: SweepSpec) -> str:
    name = spec.axes[1][0]
    base = name[: -len("_over_g")] if name.endswith("_over_g") else name
    suffix = spec.label if spec.opt_suffix is None else spec.opt_suffix
    return f"{base}_opt" + (f"_{suffix}" if suffix else "")


def _eval_point(spec: SweepSpec, values: Tuple[float, ...]) -> Dict[str, float]:
    row: Dict[str, float] = {}
    cfg = spec.base
    for (name, _), value in zip(spec.axes, values):
        cfg = apply_axis(cfg, name, value, spec.drive)
        row[name] = float(value)
    suffix = f"_{spec.label}" if spec.label else ""
    try:
        with threadpool_limits(limits=1):
            rho = None
            residual = None
            for obs in spec.observables:
                if obs in ("g2", "n_photon") and rho is None:
                    rho, residual = _steady_for(cfg)
                if obs == "g2":
                    row[f"g2{suffix}"] = g2_zero(rho)
                elif obs == "n_photon":
                    row[f"n_photon{suffix}"] = mean_photon(rho)
                elif obs == "t1":
                    row[f"t1{suffix}"] = transmission_t1(cfg)
                elif obs == "t2":
                    row[f"t2{suffix}"] = transmission_t2(cfg)
                elif obs == "dressed_energies":
                    for n in (1, 2):
                        res = dressed_energies(cfg, n)
                        for k, (e, w) in enumerate(zip(res.energies_over_g, res.widths), 1):
                            row[f"m{n}_e{k}{suffix}"] = e
                            row[f"m{n}_w{k}{suffix}"] = w
            if residual is not None:
                row["residual"] = residual
        row["failed"] = 0
    except (SolverError, TransmissionError) as exc:
        for col in _observable_columns(spec):
            row.setdefault(col, math.nan)
        row["failed"] = 1
        row["error"] = str(exc)
    return row


def _eval_reduced_point(spec: SweepSpec, value: float) -> Dict[str, float]:
    name1 = spec.axes[0][0]
    name2, grid2 = spec.axes[1]
    row: Dict[str, float] = {name1: float(value)}
    cfg = apply_axis(spec.base, name1, float(value), spec.drive)
    scale = _axis_scale(name2, cfg)
    bracket = (min(grid2) * scale, max(grid2) * scale)
    vary = "delta_c_tied" if name2.startswith("delta_c") else "delta_eg"
    suffix = f"_{spec.label}" if spec.label else ""
    try:
        with threadpool_limits(limits=1):
            result = optimize_probe_detuning(
                cfg,
                vary,
                bracket=bracket,
                coarse_points=max(61, len(grid2)),
                drive=spec.drive,
            )
        row[f"g2{suffix}"] = result.g2_min
        row[_opt_column(spec)] = result.detuning / scale
        row["failed"] = 0
        if result.at_boundary:
            row["_boundary"] = 1
    except (SolverError, TransmissionError) as exc:
        row[f"g2{suffix}"] = math.nan
        row[_opt_column(spec)] = math.nan
        row["failed"] = 1
        row["error"] = str(exc)
    return row


def _grid_points(spec: SweepSpec) -> List[Tuple[float, ...]]:
    if len(spec.axes) == 1:
        return [(x,) for x in spec.axes[0][1]]
    return [(x1, x2) for x1 in spec.axes[0][1] for x2 in spec.axes[1][1]]


def _run_map(worker: Callable, points: Sequence, parallel: bool, max_workers: Optional[int]) -> List:
    if not parallel or len(points) < 2:
        return [worker(p) for p in points]
    workers = max_workers or min(2, os.cpu_count() or 1)
    chunk = max(1, len(points) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, points, chunksize=chunk))


def run_sweep(
    spec: SweepSpec, parallel: bool = False, max_workers: Optional[int] = None
) -> SweepResult:
    """Evaluate the sweep; rows in axis1-major order, identical for any execution mode."""
    _validate_spec(spec)
    start = time.perf_counter()
    if spec.post == "min_over_axis2":
        points: Sequence = list(spec.axes[0][1])
        rows = _run_map(partial(_eval_reduced_point, spec), points, parallel, max_workers)
    else:
        rows = _run_map(partial(_eval_point, spec), _grid_points(spec), parallel, max_workers)
    boundary_hits = sum(int(r.pop("_boundary", 0)) for r in rows)
    residuals = [r["residual"] for r in rows if "residual" in r]
    metadata: Dict[str, object] = {
        "library_version": __version__,
        "n_fock": spec.base.n_fock,
        "observables": list(spec.observables),
        "post": spec.post,
        "drive": spec.drive,
        "steady_residual_tol": STEADY_RESIDUAL_TOL,
        "failures": sum(int(r.get("failed", 0)) for r in rows),
        "boundary_hits": boundary_hits,
        "max_residual": max(residuals) if residuals else None,
        "base_config_ghz": config_to_ghz(spec.base),
        "wall_time_s": time.perf_counter() - start,
    }
    return SweepResult(spec=spec, rows=tuple(rows), metadata=metadata)


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

FIGURE_IDS = (
    "fig2a",
    "fig2b",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig4a",
    "fig4b",
    "fig4c",
    "fig5",
    "int1",
    "int2",
)

_KAPPA_CURVES = ((1.0, "k1"), (2.0, "k2"), (3.0, "k3"))


def _grid(values: np.ndarray) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _two_level_base(kappa: float) -> SystemConfig:
    return two_level_config(
        g_eg=from_ghz(3.0),
        kappa=kappa,
        gamma_eg=from_ghz(1e-2),
        eps=from_ghz(0.1),
    )


def _fabry_perot_base(kappa_over_g: float) -> SystemConfig:
    # Cesium-like emitter at Fabry-Perot-scale coupling: same absolute level
    # mismatch, g_eg = 2pi x 120 MHz, probe scaled to keep eps = g/30.
    g = from_ghz(0.12)
    return SystemConfig(
        g_eg=g,
        g_fs=1.5 * g,
        omega_rabi=g,
        eps=g / 30.0,
        kappa=kappa_over_g * g,
        gamma_sg=from_ghz(1e-3),
        gamma_eg=from_ghz(1e-2),
        gamma_es=from_ghz(1e-2),
        gamma_fg=from_ghz(1e-2),
        gamma_fs=from_ghz(1e-2),
        delta_fg=CESIUM_SPLITTING,
        n_fock=7,
    )


def figure_preset(
    preset_id: str, points: Optional[int] = None
) -> Union[SweepSpec, List[SweepSpec]]:
    """Fully populated spec(s) for one benchmark figure.

    ``points`` overrides the default grid density (61 per 1-D axis, 61x61 for
    the maps) for quick runs; the published defaults are used when None.
    """
    p = 61 if points is None else max(int(points), 2)
    g = from_ghz(3.0)
    kappa_log = _grid(np.geomspace(0.1, 5.0, p))
    delta_c_scan = _grid(np.linspace(0.0, 3.0, 61))
    delta_eg_scan = _grid(np.linspace(-3.0, 3.0, 61))

    if preset_id == "fig2a":
        base = replace(
            resonant_preset(kappa=g),
            gamma_eg=3e-3 * g,
            gamma_es=0.0,
            gamma_fg=0.0,
            gamma_fs=3e-3 * g,
            gamma_sg=3e-4 * g,
        )
        return SweepSpec(
            base=base,
            axes=(
                ("kappa_over_g", _grid(np.geomspace(0.1, 10.0, p))),
                ("omega_over_g", (0.5, 1.0)),
            ),
            observables=("dressed_energies",),
        )

    if preset_id == "fig2b":
        return [
            SweepSpec(
                base=resonant_preset(kappa=2 * g),
                axes=(("kappa_over_g", kappa_log),),
                label="fourlevel",
            ),
            SweepSpec(
                base=_two_level_base(2 * g),
                axes=(("kappa_over_g", kappa_log), ("delta_c_over_g", delta_c_scan)),
                post="min_over_axis2",
                label="twolevel",
                opt_suffix="",
            ),
        ]

    if preset_id == "fig3a":
        omega_grid = _grid(np.linspace(0.05, 2.0, p))
        specs = []
        for k_f, k_label in _KAPPA_CURVES:
            for gfs_f, f_label in ((1.0, "gfs1"), (0.5, "gfs05")):
                specs.append(
                    SweepSpec(
                        base=resonant_preset(kappa=k_f * g, g_fs=gfs_f * g),
                        axes=(("omega_over_g", omega_grid),),
                        label=f"{k_label}_{f_label}",
                    )
                )
        return specs

    if preset_id == "fig3b":
        gfs_grid = _grid(np.linspace(0.0, 2.0, p))
        return [
            SweepSpec(
                base=resonant_preset(kappa=k_f * g, omega_rabi=0.5 * g),
                axes=(("gfs_over_geg", gfs_grid),),
                label=k_label,
            )
            for k_f, k_label in _KAPPA_CURVES
        ]

    if preset_id == "fig3c":
        eps_grid = _grid(np.geomspace(0.01, 2.0, p))
        specs = [
            SweepSpec(
                base=resonant_preset(kappa=k_f * g),
                axes=(("eps", eps_grid),),
                label=k_label,
            )
            for k_f, k_label in reversed(_KAPPA_CURVES)
        ]
        specs.append(
            SweepSpec(
                base=_two_level_base(g),
                axes=(("eps", eps_grid), ("delta_c_over_g", delta_c_scan)),
                post="min_over_axis2",
                label="twolevel",
                opt_suffix="",
            )
        )
        return specs

    if preset_id == "fig4a":
        return SweepSpec(
            base=cesium_preset(kappa=from_ghz(1.0)),
            axes=(
                ("kappa", _grid(np.linspace(1.0, 10.0, p))),
                ("delta_eg_over_g", _grid(np.linspace(-3.0, 3.0, p))),
            ),
            drive="tracking",
        )

    if preset_id in ("fig4b", "fig4c"):
        if preset_id == "fig4b":
            axis1 = ("omega_over_g", _grid(np.linspace(0.05, 2.0, p)))
        else:
            axis1 = ("eps", _grid(np.geomspace(0.01, 1.0, p)))
        return [
            SweepSpec(
                base=cesium_preset(kappa=k_f * g),
                axes=(axis1, ("delta_eg_over_g", delta_eg_scan)),
                post="min_over_axis2",
                label=k_label,
                drive="tracking",
            )
            for k_f, k_label in _KAPPA_CURVES
        ]

    if preset_id == "fig5":
        return [
            SweepSpec(
                base=cesium_preset(kappa=g),
                axes=(("kappa_over_g", kappa_log), ("delta_eg_over_g", delta_eg_scan)),
                post="min_over_axis2",
                label="cesium",
                opt_suffix="",
                drive="tracking",
            ),
            SweepSpec(
                base=resonant_preset(kappa=g),
                axes=(("kappa_over_g", kappa_log),),
                label="resonant",
            ),
            SweepSpec(
                base=_two_level_base(g),
                axes=(("kappa_over_g", kappa_log), ("delta_c_over_g", delta_c_scan)),
                post="min_over_axis2",
                label="twolevel",
                opt_suffix="",
            ),
            SweepSpec(
                base=_fabry_perot_base(1.0 / 3.0),
                axes=(("kappa_over_g", (1.0 / 3.0,)), ("delta_eg_over_g", delta_eg_scan)),
                post="min_over_axis2",
                label="cs_fp40",
                drive="tracking",
            ),
            SweepSpec(
                base=_fabry_perot_base(1.0 / 30.0),
                axes=(("kappa_over_g", (1.0 / 30.0,)), ("delta_eg_over_g", delta_eg_scan)),
                post="min_over_axis2",
                label="cs_fp4",
                drive="tracking",
            ),
        ]

    if preset_id == "int1":
        axes = (
            ("delta_c_over_g", _grid(np.linspace(-4.0, 4.0, p))),
            ("kappa_over_g", _grid(np.geomspace(0.1, 4.0, p))),
        )
        return [
            SweepSpec(
                base=_two_level_base(g / 3.0),
                axes=axes,
                observables=("t1", "t2"),
                label="twolevel",
            ),
            SweepSpec(
                base=resonant_preset(kappa=g / 3.0),
                axes=axes,
                observables=("t1", "t2"),
                label="fourlevel",
            ),
        ]

    if preset_id == "int2":
        axes = (
            ("delta_c_over_g", _grid(np.linspace(-4.0, 4.0, p))),
            ("delta_eg_over_g", _grid(np.linspace(-3.0, 3.0, p))),
        )
        return [
            SweepSpec(
                base=cesium_preset(kappa=g / 3.0),
                axes=axes,
                observables=("t1", "t2"),
                label="strong",
                drive="tracking",
            ),
            SweepSpec(
                base=cesium_preset(kappa=2.0 * g),
                axes=axes,
                observables=("t1", "t2"),
                label="weak",
                drive="tracking",
            ),
        ]

    raise SweepError(f"unknown figure id {preset_id!r}; known ids: {', '.join(FIGURE_IDS)}")


def _merge_results(preset_id: str, results: List[SweepResult]) -> SweepResult:
    """Join sub-sweeps on their shared axes; single-row sweeps broadcast as constants."""
    primary = results[0]
    axis_names = [name for name, _ in primary.spec.axes]
    merged: List[Dict[str, float]] = []
    for row in primary.rows:
        merged.append(dict(row))
    for result in results[1:]:
        if len(result.rows) == 1 and len(primary.rows) != 1:
            constants = {
                k: v
                for k, v in result.rows[0].items()
                if k not in _BOOKKEEPING and k not in [n for n, _ in result.spec.axes]
            }
            for row in merged:
                row.update(constants)
            continue
        if len(result.rows) != len(merged):
            raise SweepError(
                f"{preset_id}: cannot merge sweep of {len(result.rows)} rows with "
                f"{len(merged)}"
            )
        for row, other in zip(merged, result.rows):
            for name in axis_names:
                if name in other and other[name] != row[name]:
                    raise SweepError(f"{preset_id}: axis misalignment on {name}")
            for key, value in other.items():
                if key in axis_names:
                    continue
                if key == "failed":
                    row["failed"] = max(row.get("failed", 0), value)
                elif key == "residual":
                    row["residual"] = max(row.get("residual", 0.0), value)
                elif key == "error":
                    row["error"] = "; ".join(filter(None, [str(row.get("error", "")), str(value)]))
                else:
                    row[key] = value
    metadata: Dict[str, object] = {
        "preset": preset_id,
        "library_version": __version__,
        "curves": [
            {
                "label": r.spec.label,
                "post": r.spec.post,
                "drive": r.spec.drive,
                "n_fock": r.spec.base.n_fock,
                "base_config_ghz": config_to_ghz(r.spec.base),
            }
            for r in results
        ],
        "steady_residual_tol": STEADY_RESIDUAL_TOL,
        "failures": sum(r.metadata["failures"] for r in results),
        "boundary_hits": sum(r.metadata["boundary_hits"] for r in results),
        "max_residual": max(
            (r.metadata["max_residual"] for r in results if r.metadata["max_residual"] is not None),
            default=None,
        ),
        "wall_time_s": sum(r.metadata["wall_time_s"] for r in results),
    }
    return SweepResult(spec=primary.spec, rows=tuple(merged), metadata=metadata)


def _override_base(base: SystemConfig, overrides: Dict[str, object]) -> SystemConfig:
    document = config_to_ghz(base)
    document.update(overrides)
    return parse_config(document)


def run_figure(
    preset_id: str,
    parallel: bool = False,
    points: Optional[int] = None,
    max_workers: Optional[int] = None,
    overrides: Optional[Dict[str, object]] = None,
) -> SweepResult:
    """Run one figure preset (all its curves) and merge into a single table.

    ``overrides`` is a GHz-valued mapping applied on top of every curve's base
    config (command line --set semantics)."""
    specs = figure_preset(preset_id, points=points)
    if isinstance(specs, SweepSpec):
        specs = [specs]
    if overrides:
        specs = [replace(s, base=_override_base(s.base, overrides)) for s in specs]
    results = [run_sweep(s, parallel=parallel, max_workers=max_workers) for s in specs]
    return _merge_results(preset_id, results)


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------


def _csv_columns(result: SweepResult) -> List[str]:
    if result.rows:
        return [k for k in result.rows[0] if k not in _BOOKKEEPING]
    cols = [name for name, _ in result.spec.axes]
    return cols + _observable_columns(result.spec)


def _format_value(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.11e}"


def _spec_summary(spec: SweepSpec) -> Dict[str, object]:
    return {
        "base_config_ghz": config_to_ghz(spec.base),
        "axes": [[name, list(grid)] for name, grid in spec.axes],
        "observables": list(spec.observables),
        "post": spec.post,
        "label": spec.label,
        "drive": spec.drive,
    }


def write_result(result: SweepResult, format: str, path: Union[str, Path]) -> Path:
    """Serialize a sweep result.

    ``csv``: header of axes then observables, 12 significant digits, plus a
    deterministic ``<stem>.meta.json`` sidecar.  ``json``: full rows including
    the bookkeeping fields, plus metadata.  Wall time stays in the in-memory
    metadata only, so identical invocations write byte-identical files.
    """
    path = Path(path)
    file_metadata = {k: v for k, v in result.metadata.items() if k != "wall_time_s"}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if format == "csv":
            columns = _csv_columns(result)
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(columns)
            for row in result.rows:
                writer.writerow(_format_value(row.get(c, math.nan)) for c in columns)
            path.write_text(buffer.getvalue())
            sidecar = dict(file_metadata)
            sidecar["spec"] = _spec_summary(result.spec)
            sidecar_path = path.with_suffix(".meta.json")
            sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        elif format == "json":
            document = {
                "spec": _spec_summary(result.spec),
                "metadata": file_metadata,
                "rows": list(result.rows),
            }
            path.write_text(json.dumps(document, indent=2) + "\n")
        else:
            raise SweepError(f"unknown output format {format!r}")
        return path
    except OSError as exc:
        raise SweepError(f"cannot write {path}: {exc}") from None


def read_result_json(path: Union[str, Path]) -> Dict[str, object]:
    return json.loads(Path(path).read_text())


def spec_from_json(path: Union[str, Path]) -> SweepSpec:
    """Load a sweep specification from a JSON document.

    Schema: {"base": {config in GHz}, "axes": [[name, [values]], ...],
    "observables": [...], "post": "...", "drive": "..."}.
    """
    document = json.loads(Path(path).read_text())
    if not isinstance(document, dict) or "base" not in document or "axes" not in document:
        raise SweepError(f"{path}: sweep spec needs 'base' and 'axes' entries")
    known = {"base", "axes", "observables", "post", "label", "drive"}
    unknown = sorted(set(document) - known)
    if unknown:
        raise SweepError(f"{path}: unknown sweep spec keys {unknown}")
    axes = tuple((str(name), tuple(float(v) for v in grid)) for name, grid in document["axes"])
    return SweepSpec(
        base=parse_config(document["base"]),
        axes=axes,
        observables=tuple(document.get("observables", ("g2",))),
        post=document.get("post", "none"),
        label=document.get("label", ""),
        drive=document.get("drive", "fixed"),
    )
