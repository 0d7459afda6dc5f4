"""Command-line interface: steady-state observables, dressed spectra,
transmission estimators, sweeps and figure presets.

All user-facing rates and detunings are linear frequencies in GHz; they are
converted to angular units internally and the interpreted values are echoed
to stderr.  Exit status: 0 success, 1 configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ._version import __version__
from .model import (
    ConfigError,
    SystemConfig,
    config_to_ghz,
    parse_config,
)
from .solvers import (
    SolverError,
    UndefinedObservableError,
    dressed_energies,
    fock_convergence,
    g2_zero,
    mean_photon,
    photon_statistics,
    steady_state_of,
)
from .sweep import (
    FIGURE_IDS,
    SweepError,
    run_figure,
    run_sweep,
    spec_from_json,
    write_result,
)
from .transmission import TransmissionError, t1, t2

#: Base configuration used when no --config file is given: the fully resonant
#: benchmark system at the strong-coupling onset (kappa = 2 g_eg).
DEFAULT_CONFIG_GHZ: Dict[str, object] = {
    "g_eg": 3.0,
    "g_fs": 3.0,
    "omega_rabi": 3.0,
    "eps": 0.1,
    "kappa": 6.0,
    "gamma_sg": 0.001,
    "gamma_eg": 0.01,
    "gamma_es": 0.01,
    "gamma_fg": 0.01,
    "gamma_fs": 0.01,
    "n_fock": 7,
}

_INT_KEYS = ("n_fock", "n_atom")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 reserved for solver failures
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_set(pairs: Sequence[str]) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        if key in _INT_KEYS:
            out[key] = int(value)
        else:
            try:
                out[key] = float(value)
            except ValueError:
                raise ConfigError(f"--set {key}: not a number: {value!r}") from None
    return out


def _load_base(args: argparse.Namespace) -> SystemConfig:
    """Layer: built-in default < config file < --set overrides < --n-fock."""
    document = dict(DEFAULT_CONFIG_GHZ)
    if args.config:
        path = Path(args.config)
        try:
            file_doc = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from None
        if not isinstance(file_doc, dict):
            raise ConfigError(f"{path}: config must be a flat JSON object")
        if file_doc.get("n_atom") == 2:
            document = {}
        document.update(file_doc)
    document.update(_parse_set(args.set or []))
    if args.n_fock is not None:
        document["n_fock"] = args.n_fock
    config = parse_config(document)
    print(f"interpreted config (angular units): {_angular_echo(config)}", file=sys.stderr)
    return config


def _angular_echo(config: SystemConfig) -> str:
    parts = []
    for f in fields(SystemConfig):
        value = getattr(config, f.name)
        if value is None or f.name in _INT_KEYS:
            continue
        if isinstance(value, complex) and value.imag == 0:
            value = value.real
        parts.append(f"{f.name}={value:.6g}" if isinstance(value, float) else f"{f.name}={value}")
    return " ".join(parts)


def _emit(payload: str, out: Optional[str]) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(payload + "\n")
    else:
        print(payload)


def _cmd_steady(args: argparse.Namespace) -> int:
    config = _load_base(args)
    rho = steady_state_of(config)
    n = mean_photon(rho)
    try:
        g2 = g2_zero(rho)
    except UndefinedObservableError:
        g2 = None
        print("g2(0) undefined at vanishing photon number", file=sys.stderr)
    _emit(json.dumps({"n_photon": n, "g2": g2}), args.out)
    return 0


def _cmd_g2(args: argparse.Namespace) -> int:
    config = _load_base(args)
    g2, _ = photon_statistics(config)
    _emit(repr(g2), args.out)
    return 0


def _cmd_dressed(args: argparse.Namespace) -> int:
    config = _load_base(args)
    spectrum = dressed_energies(config, args.manifold)
    payload = {
        "manifold": args.manifold,
        "energies_over_g": list(spectrum.energies_over_g),
        "widths_over_g": [w / config.g_eg for w in spectrum.widths],
    }
    _emit(json.dumps(payload), args.out)
    return 0


def _cmd_transmission(args: argparse.Namespace) -> int:
    config = _load_base(args)
    _emit(json.dumps({"t1": t1(config), "t2": t2(config)}), args.out)
    return 0


def _cmd_convergence(args: argparse.Namespace) -> int:
    config = _load_base(args)
    n_fock, value = fock_convergence(config, observable=args.observable, tol=args.tol)
    _emit(json.dumps({"n_fock": n_fock, "value": value, "observable": args.observable}), args.out)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = spec_from_json(args.spec)
    result = run_sweep(spec, parallel=not args.no_parallel)
    if args.out:
        path = write_result(result, args.format, args.out)
        print(f"wrote {path}", file=sys.stderr)
    else:
        print(json.dumps({"rows": list(result.rows)}))
    return 0


def _cmd_figure(args: argparse.Namespace) -> int:
    ids: List[str] = list(FIGURE_IDS) if args.id == "all" else [args.id]
    for preset_id in ids:
        if preset_id not in FIGURE_IDS:
            raise SweepError(
                f"unknown figure id {preset_id!r}; known ids: {', '.join(FIGURE_IDS)} or 'all'"
            )
    out_dir = Path(args.out or "results")
    overrides = _parse_set(args.set or [])
    if args.n_fock is not None:
        overrides["n_fock"] = args.n_fock
    for preset_id in ids:
        result = run_figure(
            preset_id,
            parallel=not args.no_parallel,
            points=args.points,
            overrides=overrides or None,
        )
        extension = "csv" if args.format == "csv" else "json"
        path = write_result(result, args.format, out_dir / f"{preset_id}.{extension}")
        print(
            f"{preset_id}: {len(result.rows)} rows -> {path} "
            f"({result.metadata['wall_time_s']:.1f}s)",
            file=sys.stderr,
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockade", description=__doc__)
    parser.add_argument("--version", action="version", version=f"blockade {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file (GHz values)")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config field (GHz; repeatable)",
        )
        p.add_argument("--n-fock", type=int, dest="n_fock", help="Fock truncation override")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("steady", help="steady-state <a+a> and g2(0)")
    add_common(p)
    p.set_defaults(func=_cmd_steady)

    p = sub.add_parser("g2", help="steady-state g2(0) only")
    add_common(p)
    p.set_defaults(func=_cmd_g2)

    p = sub.add_parser("dressed", help="normalized dressed energies and widths")
    add_common(p)
    p.add_argument("--manifold", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=_cmd_dressed)

    p = sub.add_parser("transmission", help="first/second-photon transmission estimators")
    add_common(p)
    p.set_defaults(func=_cmd_transmission)

    p = sub.add_parser("convergence", help="smallest stable Fock truncation")
    add_common(p)
    p.add_argument("--observable", choices=("g2", "n_photon"), default="g2")
    p.add_argument("--tol", type=float, default=0.01)
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("sweep", help="run a sweep specification file")
    p.add_argument("--spec", required=True, help="sweep spec JSON file")
    p.add_argument("--out", help="output path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-parallel", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="run a figure preset (or 'all')")
    p.add_argument("id", help=f"one of {', '.join(FIGURE_IDS)} or 'all'")
    p.add_argument("--out", help="output directory (default ./results)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--points", type=int, help="override grid density")
    p.add_argument("--no-parallel", action="store_true")
    p.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config field on every curve (GHz; repeatable)",
    )
    p.add_argument("--n-fock", type=int, dest="n_fock")
    p.set_defaults(func=_cmd_figure)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SweepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, TransmissionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
