"""Command-line entry point.

Subcommands:
    sweep        fidelity curves over the (beta, k, kappa/alpha0) grid
    validate     run both engines and compare (nonzero exit on any breach)
    paths        phase-space path CSVs for the C / C-bar circuits
    show-config  print the effective configuration as key=value lines
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .experiments import (
    DEFAULT_VALIDATE_CONFIG,
    SweepConfig,
    config_text,
    cross_validate,
    emit_paths,
    parse_config,
    run_sweep,
)


def _load_config(path: str | None, default: SweepConfig) -> SweepConfig:
    if path is None:
        return default
    return parse_config(Path(path).read_text())


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="plain-text key=value configuration file")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--engine", choices=("analytic", "oracle", "both"),
                   help="override the configured engine")
    p.add_argument("--fock-margin", type=int, help="override the Fock truncation margin")
    p.add_argument("--workers", type=int, default=2, help="bounded worker pool size")


def _apply_overrides(cfg: SweepConfig, args) -> SweepConfig:
    from dataclasses import replace

    if getattr(args, "engine", None):
        cfg = replace(cfg, engine=args.engine)
    if getattr(args, "fock_margin", None) is not None:
        cfg = replace(cfg, fock_margin=args.fock_margin)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="geomgate",
        description="Oscillator-assisted geometric two-qubit gates under dissipation: "
                    "fidelity sweeps, engine cross-validation, phase-space paths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="fidelity sweep over kappa/alpha0, k, beta")
    _add_common(p_sweep)

    p_val = sub.add_parser("validate", help="cross-validate the two engines")
    _add_common(p_val)

    p_paths = sub.add_parser("paths", help="emit phase-space path CSVs")
    p_paths.add_argument("--circuit", choices=("step", "circular"), default="step")
    p_paths.add_argument("--alpha0", type=float, default=1.0)
    p_paths.add_argument("--tau", type=float, default=math.sqrt(math.pi / 16.0))
    p_paths.add_argument("--kappa", type=float, default=0.0)
    p_paths.add_argument("--samples", type=int, default=401)
    p_paths.add_argument("--out", default="out")

    p_show = sub.add_parser("show-config", help="print the effective configuration")
    p_show.add_argument("--config", help="plain-text key=value configuration file")

    args = parser.parse_args(argv)

    if args.command == "show-config":
        cfg = _load_config(args.config, SweepConfig())
        sys.stdout.write(config_text(cfg))
        return 0

    if args.command == "paths":
        written = emit_paths(args.circuit, args.alpha0, args.tau, args.kappa,
                             args.out, samples=args.samples)
        for path in written:
            print(f"wrote {path}")
        return 0

    if args.command == "sweep":
        cfg = _apply_overrides(_load_config(args.config, SweepConfig()), args)
        result = run_sweep(cfg, max_workers=args.workers)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        out = out_dir / "fidelity_curves.csv"
        out.write_text(result.to_csv())
        failures = [r for r in result.rows if r.error is not None]
        print(f"wrote {out} ({len(result.rows)} points, {len(failures)} failed)")
        for row in failures:
            print(f"  point kappa={row.kappa_ratio:g} k={row.k} beta={row.beta:g}: {row.error}")
        return 0

    if args.command == "validate":
        cfg = _apply_overrides(_load_config(args.config, DEFAULT_VALIDATE_CONFIG), args)
        report = cross_validate(cfg, max_workers=args.workers)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        out = out_dir / "cross_validation.csv"
        out.write_text(report.to_csv())
        print(report.summary())
        print(f"wrote {out}")
        return 0 if report.ok else 1

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
