"""Rotating-frame model of the driven four-level emitter in a single-mode cavity.

Builds the time-independent Hamiltonian

    H = -Dc a+a - Dsg |s><s| - Deg |e><e| - Dfg |f><f|
        + g_eg (a+|g><e| + a|e><g|) + g_fs (a+|s><f| + a|f><s|)
        + W |e><s| + W* |s><e| + E a+ + E* a

together with the collapse-operator set and the Liouvillian superoperator

    drho/dt = -i[H, rho] + 2 kappa L[a] + 2 sum_ij gamma_ij L[sigma_ij],

with L[D]rho = D rho D+ - (D+D rho + rho D+D)/2.  The factor 2 on every rate
is part of the model definition: kappa and the gammas are amplitude (field)
decay rates, so energy decays at 2*kappa.

Unit convention: the internal unit is angular frequency.  Config files and
user-facing values are linear frequencies in GHz; ``from_ghz``/``to_ghz``
convert.  Vectorization is column-major: vec(A rho B) = (B^T kron A) vec(rho).

Detunings are defined from the lab frequencies as Dc = wp - wc,
Dsg = wp - wd - wsg, Deg = wp - weg, Dfg = 2wp - wd - wfg.  Two consequences
used by the sweep axes:

* probe scan, fixed drive frequency: shifting wp by s moves the detunings by
  (s, s, s, 2s); with the drive tracking the probe (wd = wp - wsg, which pins
  Dsg = 0) the shift is (s, 0, s, s);
* emitter scan at fixed probe: Dfg - Deg = wsg + weg - wfg is a constant of
  the emitter, so retuning Deg carries Dfg along with the offset preserved.

For the cesium-like emitter that offset is wsg - wfe = 2pi x 8.941 GHz, so
Dfg = Deg + CESIUM_SPLITTING when the probe is cavity-resonant and the drive
tracks the probe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from .hilbert import HilbertSpace, Operator, annihilation, atomic_transition

TWO_PI = 2.0 * math.pi

#: Frequency mismatch wsg - wfe of the cesium-based emitter (angular units).
CESIUM_SPLITTING = TWO_PI * 8.941


def from_ghz(value: float) -> float:
    """Linear frequency in GHz -> internal angular units."""
    return TWO_PI * value


def to_ghz(value: float) -> float:
    return value / TWO_PI


class ConfigError(ValueError):
    """Invalid physical configuration or config file."""


_FOUR_LEVEL_ONLY = (
    "g_fs",
    "omega_rabi",
    "gamma_sg",
    "gamma_es",
    "gamma_fg",
    "gamma_fs",
    "delta_sg",
    "delta_fg",
)

#: Config fields scaled by 2*pi when read from / written to GHz documents.
_FREQUENCY_FIELDS = (
    "g_eg",
    "g_fs",
    "omega_rabi",
    "eps",
    "kappa",
    "gamma_sg",
    "gamma_eg",
    "gamma_es",
    "gamma_fg",
    "gamma_fs",
    "delta_c",
    "delta_sg",
    "delta_eg",
    "delta_fg",
)


@dataclass(frozen=True)
class SystemConfig:
    """All rates and detunings of the emitter-cavity system, in angular units.

    ``n_atom=4`` is the full emitter; ``n_atom=2`` is the two-level reduction,
    in which the eight four-level-only fields are structurally absent (None).
    """

    g_eg: float
    kappa: float
    eps: complex = 0.0
    delta_c: float = 0.0
    delta_eg: float = 0.0
    gamma_eg: float = 0.0
    n_fock: int = 7
    n_atom: int = 4
    g_fs: Optional[float] = None
    omega_rabi: Optional[complex] = None
    gamma_sg: Optional[float] = None
    gamma_es: Optional[float] = None
    gamma_fg: Optional[float] = None
    gamma_fs: Optional[float] = None
    delta_sg: Optional[float] = None
    delta_fg: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n_atom not in (2, 4):
            raise ConfigError(f"n_atom must be 2 or 4, got {self.n_atom}")
        if self.n_fock < 2:
            raise ConfigError(f"n_fock must be at least 2, got {self.n_fock}")
        if self.n_atom == 4:
            for name in _FOUR_LEVEL_ONLY:
                if getattr(self, name) is None:
                    object.__setattr__(self, name, 0.0)
        else:
            present = [n for n in _FOUR_LEVEL_ONLY if getattr(self, n) is not None]
            if present:
                raise ConfigError(
                    f"fields {present} do not exist in the two-level model"
                )
        rates = {
            "g_eg": self.g_eg,
            "kappa": self.kappa,
            "gamma_eg": self.gamma_eg,
        }
        if self.n_atom == 4:
            rates.update(
                g_fs=self.g_fs,
                gamma_sg=self.gamma_sg,
                gamma_es=self.gamma_es,
                gamma_fg=self.gamma_fg,
                gamma_fs=self.gamma_fs,
            )
        for name, value in rates.items():
            if not np.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a finite non-negative rate, got {value}")
        for name in ("eps", "omega_rabi", "delta_c", "delta_eg", "delta_sg", "delta_fg"):
            value = getattr(self, name)
            if value is not None and not np.isfinite(complex(value)):
                raise ConfigError(f"{name} must be finite, got {value}")

    @property
    def gamma_s(self) -> float:
        return self.gamma_sg or 0.0

    @property
    def gamma_e(self) -> float:
        """Total |e> width: gamma_eg + gamma_es."""
        return self.gamma_eg + (self.gamma_es or 0.0)

    @property
    def gamma_f(self) -> float:
        """Total |f> width: gamma_fg + gamma_fs."""
        return (self.gamma_fg or 0.0) + (self.gamma_fs or 0.0)

    @property
    def delta_fs(self) -> float:
        """Two-photon detuning from |s>: delta_fg - delta_sg."""
        return (self.delta_fg or 0.0) - (self.delta_sg or 0.0)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n_atom, self.n_fock)


@dataclass(frozen=True)
class FrequencySpec:
    """Lab-frame transition, cavity, probe and drive angular frequencies."""

    omega_c: float
    omega_sg: float
    omega_eg: float
    omega_fg: float
    omega_p: float
    omega_d: float

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ConfigError(f"{f.name} must be non-negative")
        if not (self.omega_fg > self.omega_eg > self.omega_sg > 0):
            raise ConfigError("level ordering requires omega_fg > omega_eg > omega_sg > 0")


def detunings_from_frequencies(freqs: FrequencySpec) -> Tuple[float, float, float, float]:
    """(Dc, Dsg, Deg, Dfg) for given lab frequencies."""
    delta_c = freqs.omega_p - freqs.omega_c
    delta_sg = freqs.omega_p - freqs.omega_sg - freqs.omega_d
    delta_eg = freqs.omega_p - freqs.omega_eg
    delta_fg = 2 * freqs.omega_p - freqs.omega_d - freqs.omega_fg
    return delta_c, delta_sg, delta_eg, delta_fg


@dataclass(frozen=True)
class Liouvillian:
    """Linear map on column-vectorized density matrices (dim^2 x dim^2)."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        d2 = self.space.dim ** 2
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        if m.shape != (d2, d2):
            raise ValueError(f"matrix shape {m.shape}, expected {(d2, d2)}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def vectorize(matrix: np.ndarray) -> np.ndarray:
    """Column-major (Fortran) stacking, matching vec(A rho B) = (B^T kron A) vec(rho)."""
    return np.asarray(matrix, dtype=complex).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")


def _check_space(config: SystemConfig, space: Optional[HilbertSpace]) -> HilbertSpace:
    if space is None:
        return config.space
    if space != config.space:
        raise ConfigError(f"space {space} does not match config space {config.space}")
    return space


def build_hamiltonian(config: SystemConfig, space: Optional[HilbertSpace] = None) -> Operator:
    """Rotating-frame Hamiltonian of the driven system (Hermitian for valid configs)."""
    space = _check_space(config, space)
    a = annihilation(space).matrix
    ad = a.conj().T
    h = -config.delta_c * (ad @ a)
    h += config.eps * ad + np.conj(config.eps) * a
    sig_ge = atomic_transition(space, "e", "g").matrix  # |g><e|
    h += config.g_eg * (ad @ sig_ge + a @ sig_ge.conj().T)
    h -= config.delta_eg * atomic_transition(space, "e", "e").matrix
    if config.n_atom == 4:
        h -= config.delta_sg * atomic_transition(space, "s", "s").matrix
        h -= config.delta_fg * atomic_transition(space, "f", "f").matrix
        sig_sf = atomic_transition(space, "f", "s").matrix  # |s><f|
        h += config.g_fs * (ad @ sig_sf + a @ sig_sf.conj().T)
        sig_se = atomic_transition(space, "e", "s").matrix  # |s><e|
        h += config.omega_rabi * sig_se.conj().T + np.conj(config.omega_rabi) * sig_se
    return Operator(space, h)


def build_collapse_ops(
    config: SystemConfig, space: Optional[HilbertSpace] = None
) -> List[Tuple[float, Operator]]:
    """[(rate, operator)] for the cavity and every nonzero spontaneous decay channel."""
    space = _check_space(config, space)
    out: List[Tuple[float, Operator]] = []
    if config.kappa > 0:
        out.append((config.kappa, annihilation(space)))
    if config.n_atom == 4:
        channels = [
            (config.gamma_sg, ("s", "g")),
            (config.gamma_eg, ("e", "g")),
            (config.gamma_es, ("e", "s")),
            (config.gamma_fg, ("f", "g")),
            (config.gamma_fs, ("f", "s")),
        ]
    else:
        channels = [(config.gamma_eg, ("e", "g"))]
    for rate, (i, j) in channels:
        if rate > 0:
            out.append((rate, atomic_transition(space, i, j)))
    return out


def _kron_add(out: np.ndarray, left: np.ndarray, right: np.ndarray, scale: complex) -> None:
    """out += scale * kron(left, right), exploiting sparsity of the left factor."""
    n = right.shape[0]
    for i, j in zip(*np.nonzero(left)):
        out[i * n : (i + 1) * n, j * n : (j + 1) * n] += (scale * left[i, j]) * right


def build_liouvillian(H: Operator, collapses: List[Tuple[float, Operator]]) -> Liouvillian:
    """L with L vec(rho) = vec(-i[H, rho] + sum_c 2 r_c (D rho D+ - {D+D, rho}/2))."""
    space = H.space
    for _, op in collapses:
        if op.space != space:
            raise ConfigError(f"collapse operator space {op.space} != {space}")
    d = space.dim
    eye = np.eye(d, dtype=complex)
    out = np.zeros((d * d, d * d), dtype=complex)
    _kron_add(out, eye, H.matrix, -1j)
    _kron_add(out, H.matrix.T, eye, 1j)
    for rate, op in collapses:
        dmat = op.matrix
        dd = dmat.conj().T @ dmat
        _kron_add(out, dmat.conj(), dmat, 2.0 * rate)
        _kron_add(out, eye, dd, -rate)
        _kron_add(out, dd.T, eye, -rate)
    return Liouvillian(space, out)


def liouvillian_for(config: SystemConfig) -> Liouvillian:
    """Hamiltonian + collapse set + superoperator in one call."""
    h = build_hamiltonian(config)
    return build_liouvillian(h, build_collapse_ops(config))


def resonant_preset(
    kappa: float,
    omega_rabi: Optional[complex] = None,
    g_fs: Optional[float] = None,
    eps: Optional[complex] = None,
    n_fock: int = 7,
) -> SystemConfig:
    """Fully resonant benchmark system: g_eg = 2pi x 3 GHz, W = g_fs = g_eg,
    E = 2pi x 0.1 GHz, excited-state decays 2pi x 10 MHz, gamma_sg = 2pi x 1 MHz."""
    g = from_ghz(3.0)
    return SystemConfig(
        g_eg=g,
        g_fs=g if g_fs is None else g_fs,
        omega_rabi=g if omega_rabi is None else omega_rabi,
        eps=from_ghz(0.1) if eps is None else eps,
        kappa=kappa,
        gamma_sg=from_ghz(1e-3),
        gamma_eg=from_ghz(1e-2),
        gamma_es=from_ghz(1e-2),
        gamma_fg=from_ghz(1e-2),
        gamma_fs=from_ghz(1e-2),
        n_fock=n_fock,
    )


def cesium_preset(
    kappa: float,
    delta_eg: float = 0.0,
    n_fock: int = 7,
    mismatch_sign: int = 1,
) -> SystemConfig:
    """Cesium-based emitter, probe resonant with the cavity and drive tracking
    the probe (Dc = Dsg = 0); Dfg = Deg + 2pi x 8.941 GHz and g_fs = 1.5 g_eg.

    ``mismatch_sign=-1`` flips the sign of the frequency mismatch (mirror
    system, for sensitivity checks)."""
    if kappa <= 0:
        raise ConfigError(f"kappa must be positive, got {kappa}")
    if mismatch_sign not in (1, -1):
        raise ConfigError("mismatch_sign must be +1 or -1")
    g = from_ghz(3.0)
    return SystemConfig(
        g_eg=g,
        g_fs=1.5 * g,
        omega_rabi=g,
        eps=from_ghz(0.1),
        kappa=kappa,
        gamma_sg=from_ghz(1e-3),
        gamma_eg=from_ghz(1e-2),
        gamma_es=from_ghz(1e-2),
        gamma_fg=from_ghz(1e-2),
        gamma_fs=from_ghz(1e-2),
        delta_c=0.0,
        delta_sg=0.0,
        delta_eg=delta_eg,
        delta_fg=delta_eg + mismatch_sign * CESIUM_SPLITTING,
        n_fock=n_fock,
    )


def two_level_config(
    g_eg: float,
    kappa: float,
    gamma_eg: float,
    eps: complex,
    delta_c: float = 0.0,
    n_fock: int = 7,
) -> SystemConfig:
    """Two-level emitter resonant with the cavity; the probe detuning applies
    identically to cavity and emitter (delta_eg tied to delta_c)."""
    return SystemConfig(
        g_eg=g_eg,
        kappa=kappa,
        eps=eps,
        gamma_eg=gamma_eg,
        delta_c=delta_c,
        delta_eg=delta_c,
        n_fock=n_fock,
        n_atom=2,
    )


def scale_config(config: SystemConfig, factor: float) -> SystemConfig:
    """Multiply every rate and detuning by ``factor`` (dimensional rescaling)."""
    changes = {}
    for name in _FREQUENCY_FIELDS:
        value = getattr(config, name)
        if value is not None:
            changes[name] = value * factor
    return replace(config, **changes)


def set_probe_detuning(config: SystemConfig, value: float, drive: str = "fixed") -> SystemConfig:
    """Scan the probe frequency so that delta_c becomes ``value``.

    ``drive="fixed"`` keeps the drive frequency constant (detunings shift by
    (s, s, s, 2s)); ``drive="tracking"`` re-pins the drive to the probe so
    delta_sg is untouched (shift (s, 0, s, s))."""
    s = value - config.delta_c
    if config.n_atom == 2:
        return replace(config, delta_c=value, delta_eg=config.delta_eg + s)
    if drive == "fixed":
        return replace(
            config,
            delta_c=value,
            delta_sg=config.delta_sg + s,
            delta_eg=config.delta_eg + s,
            delta_fg=config.delta_fg + 2 * s,
        )
    if drive == "tracking":
        return replace(
            config,
            delta_c=value,
            delta_eg=config.delta_eg + s,
            delta_fg=config.delta_fg + s,
        )
    raise ConfigError(f"unknown drive convention {drive!r}")


def set_emitter_detuning(config: SystemConfig, value: float) -> SystemConfig:
    """Retune the emitter against the probe: set delta_eg, preserving the
    emitter constant delta_fg - delta_eg.  Four-level configs only."""
    if config.n_atom != 4:
        raise ConfigError("emitter detuning scan requires the four-level model")
    offset = config.delta_fg - config.delta_eg
    return replace(config, delta_eg=value, delta_fg=value + offset)


def parse_config(document: dict) -> SystemConfig:
    """Build a SystemConfig from a flat GHz-valued mapping (config file contents)."""
    valid = {f.name for f in fields(SystemConfig)}
    unknown = sorted(set(document) - valid)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; valid keys are {sorted(valid)}")
    kwargs = {}
    for key, raw in document.items():
        if key in ("n_fock", "n_atom"):
            kwargs[key] = int(raw)
        else:
            if isinstance(raw, (list, tuple)):
                if len(raw) != 2:
                    raise ConfigError(f"{key}: complex values are [re, im] pairs, got {raw}")
                raw = complex(raw[0], raw[1])
            kwargs[key] = from_ghz(raw)
    missing = {"g_eg", "kappa"} - set(kwargs)
    if missing:
        raise ConfigError(f"config must provide {sorted(missing)}")
    return SystemConfig(**kwargs)


def load_config(path: Union[str, Path]) -> SystemConfig:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: config must be a flat JSON object")
    return parse_config(document)


def config_to_ghz(config: SystemConfig) -> dict:
    """Flat GHz-valued mapping mirroring the config-file format."""
    out: dict = {}
    for f in fields(SystemConfig):
        value = getattr(config, f.name)
        if value is None:
            continue
        if f.name in ("n_fock", "n_atom"):
            out[f.name] = value
        else:
            value = to_ghz(value)
            if isinstance(value, complex):
                out[f.name] = value.real if value.imag == 0 else [value.real, value.imag]
            else:
                out[f.name] = value
    return out
