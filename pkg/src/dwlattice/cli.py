"""Command line entry point.

    dwlattice {spectrum,potential,evolve,ensemble,preset}
              [--config PATH] [--preset ID] [--seed INT] [--out DIR]
              [--rate-unit {hz,dimensionless}] [--t-final T] [--workers N]
              [--kick-log]
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import errors
from .config import RunConfig, load_config, validate
from .io import write_kick_log, write_potential, write_series, write_spectrum
from .presets import PRESET_IDS, expand_preset
from .runner import header_lines, potential_table, prepare, run_evolve, run_monte_carlo, spectrum_lines

log = logging.getLogger("dwlattice")

COMMANDS = ("spectrum", "potential", "evolve", "ensemble", "preset")

_MODULE_OF = {
    errors.DegenerateWell: "lattice-model",
    errors.ConvergenceFailure: "spectral",
    errors.PoorOverlap: "spectral",
    errors.BadDomain: "dynamics",
    errors.NonHermitianResidual: "dynamics",
    errors.ParseError: "config",
    errors.ValidationError: "config",
    errors.UnknownPreset: "presets",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dwlattice",
        description="Double-well lattice tunnelling and phase-kick decoherence.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="run configuration file")
    p.add_argument("--preset", choices=PRESET_IDS, help="figure preset")
    p.add_argument("--seed", type=int, default=None, help="base seed (default: config value, 0)")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--rate-unit", choices=("hz", "dimensionless"), default="hz", help="unit used to report kick rates")
    p.add_argument("--t-final", type=float, default=None, help="override the run length (1/E_R)")
    p.add_argument("--workers", type=int, default=None, help="worker processes for ensembles")
    p.add_argument("--kick-log", action="store_true", help="also write per-trajectory kick events")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _runs(args) -> tuple[str, str, dict[str, RunConfig]]:
    """(stem, action, {label: config}) for the requested source."""
    if args.preset and args.config:
        raise errors.ValidationError("arguments", "--preset and --config are mutually exclusive")
    if args.preset:
        preset = expand_preset(args.preset)
        return preset.id, preset.action, dict(preset.runs)
    if args.command == "preset":
        raise errors.ValidationError("arguments", "the preset command needs --preset ID")
    cfg = load_config(args.config) if args.config else RunConfig()
    return "run", "ensemble", {"": cfg}


def _override(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = cfg.with_updates("ensemble", base_seed=args.seed)
    if args.workers is not None:
        cfg = cfg.with_updates("ensemble", workers=args.workers)
    if args.t_final is not None:
        cfg = cfg.with_updates("propagation", t_final=args.t_final)
    return validate(cfg)


def run(args) -> list[Path]:
    stem, action, runs = _runs(args)
    command = action if args.command == "preset" else args.command
    written = []
    for label, cfg in runs.items():
        cfg = _override(cfg, args)
        out_dir = args.out if args.out is not None else Path(cfg.output.directory)
        name = f"{stem}_{label}" if label else stem
        title = f"{command} {stem}" + (f" [{label}]" if label else "")
        log.info("%s -> %s", title, out_dir)
        if command == "potential":
            x, v = potential_table(cfg)
            written.append(write_potential(x, v, out_dir / f"potential_{name}.csv", header_lines(cfg, title, args.rate_unit)))
            continue
        setup = prepare(cfg)
        extra = spectrum_lines(setup)
        if command == "spectrum":
            lines = header_lines(cfg, title, args.rate_unit, extra)
            written.append(write_spectrum(setup.spectrum, out_dir / f"spectrum_{name}.csv", lines))
            continue
        if command == "evolve":
            series = run_evolve(setup)
            with_errors = False
        else:
            series = run_monte_carlo(setup, keep_kicks=args.kick_log)
            with_errors = True
        if "alpha" in series.metadata:
            extra.append(f"L-state relative phase alpha = {series.metadata['alpha']:.12g}")
        lines = header_lines(cfg, title, args.rate_unit, extra)
        written.append(write_series(series, out_dir / f"{command}_{name}.csv", lines, with_errors=with_errors))
        if args.kick_log and "kicks" in series.metadata:
            written.append(write_kick_log(series.metadata["kicks"], out_dir / f"kicks_{name}.csv", lines))
    return written


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        print("dwlattice: error: a command is required", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        for path in run(args):
            print(path)
    except errors.DwLatticeError as exc:
        module = next((m for t, m in _MODULE_OF.items() if isinstance(exc, t)), "dwlattice")
        print(f"dwlattice: error in {module}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"dwlattice: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
