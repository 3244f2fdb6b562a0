"""Command-line entry point.

Verbs:
    run         --config FILE --out DIR
    sweep-omega --config FILE --grid lo:hi:steps --out DIR
    stability   --config FILE --deltas v1,v2,... --out DIR
    preset      NAME --out DIR   (or --list)

Exit codes: 0 success, 2 config error, 3 convergence failure.
Figures render by default; pass --no-figures for CSV-only output.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from .errors import CONFIG_ERRORS, NUMERICAL_ERRORS, ConfigError


def _parse_grid(text: str):
    """'lo:hi:steps' -> frequency grid (same units as the config parameters)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--grid: expected lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--grid: could not parse {text!r}")
    if steps < 1 or hi < lo:
        raise ConfigError("--grid: need hi >= lo and steps >= 1")
    return np.linspace(lo, hi, steps)


def _parse_deltas(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--deltas: could not parse {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqsim",
        description="Driven-lattice resonance simulations (integer and "
        "fractional drive frequencies).",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--no-figures",
            action="store_true",
            help="write CSV and manifest only",
        )

    p_run = sub.add_parser("run", help="single run from a config file")
    p_run.add_argument("--config", required=True)
    common(p_run)

    p_sweep = sub.add_parser(
        "sweep-omega", help="resonance-weight sweep over drive frequencies"
    )
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument(
        "--grid",
        required=True,
        help="lo:hi:steps, frequencies in config units (grid must lie in (0, 2U])",
    )
    common(p_sweep)

    p_stab = sub.add_parser(
        "stability", help="entropy stability scan over drive detunings"
    )
    p_stab.add_argument("--config", required=True)
    p_stab.add_argument(
        "--deltas", required=True, help="comma-separated relative detunings"
    )
    common(p_stab)

    p_preset = sub.add_parser("preset", help="run a shipped named preset")
    p_preset.add_argument("name", nargs="?", help="preset name")
    p_preset.add_argument("--list", action="store_true", help="list presets")
    p_preset.add_argument("--out", help="output directory")
    p_preset.add_argument("--no-figures", action="store_true")
    return parser


def _dispatch(args) -> int:
    figures = not getattr(args, "no_figures", False)
    if args.verb == "preset":
        if args.list:
            for name in experiments.list_presets():
                print(name)
            return 0
        if not args.name or not args.out:
            raise ConfigError("preset: NAME and --out required (or --list)")
        manifest = experiments.run_preset(args.name, args.out, figures=figures)
        print(f"preset {manifest['preset']}: variants {manifest['variants']}")
        return 0
    cfg = experiments.config_from_toml(args.config)
    if args.verb == "run":
        manifest = experiments.run(cfg, args.out, figures=figures)
        print(
            f"run {manifest['label']}: dim {manifest['dimension']}, "
            f"{manifest['periods']} periods -> {args.out}"
        )
    elif args.verb == "sweep-omega":
        grid = _parse_grid(args.grid)
        manifest = experiments.sweep_omega(cfg, grid, args.out, figures=figures)
        print(f"sweep {manifest['label']}: {manifest['points']} points -> {args.out}")
    elif args.verb == "stability":
        deltas = _parse_deltas(args.deltas)
        manifest = experiments.stability_scan(cfg, deltas, args.out, figures=figures)
        print(
            f"stability {manifest['label']}: deltas {manifest['deltas']} -> {args.out}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
