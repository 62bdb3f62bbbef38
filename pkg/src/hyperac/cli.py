"""Command-line front end: ``hyperac {example,run,sweep,verify}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .errors import BlowUpError, ConfigError
from .experiments import ExperimentConfig, example_config, run_experiment, sweep_metastability
from .output import RunManifest, config_hash, output_root, write_diagnostics, write_rows, write_snapshot

log = logging.getLogger("hyperac")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output root (default: $HYPERAC_OUT or ./runs)")
    p.add_argument("--cells", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperac", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("example", help="run one of the preset examples 1-4")
    p.add_argument("n", type=int, choices=[1, 2, 3, 4])
    _common(p)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("sweep", help="epsilon sweep of metastable persistence")
    p.add_argument("config")
    p.add_argument("--epsilons", type=float, nargs="+", required=True)
    p.add_argument("--k", type=float, help="horizon exponent (default: config k_exponent)")
    p.add_argument("--m", type=float, help="horizon prefactor (default: config m)")
    p.add_argument("--workers", type=int)
    _common(p)

    p = sub.add_parser("verify", help="run the built-in oracle and property checks")
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    return parser


def load_config(path: str) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return ExperimentConfig.from_dict(data)


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    return cfg.with_overrides(epsilon=args.epsilon, tau=args.tau, horizon=args.horizon, cells=args.cells)


def _run_dir(root: Path, kind: str, payload) -> tuple[Path, str]:
    h = config_hash(payload)
    d = root / f"{kind}-{h}"
    d.mkdir(parents=True, exist_ok=True)
    return d, h


def _write_config(run_dir: Path, payload) -> str:
    (run_dir / "config.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return "config.json"


def do_experiment(cfg: ExperimentConfig, run_dir: Path, manifest: RunManifest) -> None:
    report = run_experiment(cfg)
    write_diagnostics(run_dir / "diagnostics.csv", report.rows)
    manifest.outputs.append("diagnostics.csv")
    pot = cfg.pot()
    for i, snap in enumerate(report.snapshots):
        name = f"snapshot_{i:03d}.csv"
        write_snapshot(run_dir / name, snap, report.params, pot)
        manifest.outputs.append(name)
    (run_dir / "report.json").write_text(json.dumps(report.summary(), indent=2) + "\n", encoding="utf-8")
    manifest.outputs.append("report.json")
    log.info("compatibility residual %.3e", report.compat_residual)
    e = report.initial_energy
    log.info("E(0)=%.10g (kinetic %.6g, gradient %.6g, potential %.6g)", e.total_scaled, e.kinetic, e.gradient, e.potential)
    for row in report.rows:
        log.info("t=%-12.6g E=%-14.8g transitions=%d", row.t, row.energy.total_scaled, row.n_transitions)


def sweep_payload(cfg: ExperimentConfig, args) -> dict:
    k = args.k if args.k is not None else cfg.k_exponent
    m = args.m if args.m is not None else cfg.m
    return {"base": cfg.to_dict(), "epsilons": sorted(args.epsilons, reverse=True), "k": k, "m": m}


def do_sweep(cfg: ExperimentConfig, args, run_dir: Path, manifest: RunManifest) -> None:
    payload = sweep_payload(cfg, args)
    k, m = payload["k"], payload["m"]
    rows = sweep_metastability(cfg, args.epsilons, k=k, m=m, workers=args.workers)
    header = ["epsilon", "cells", "horizon", "steps", "capped", "l1_initial", "sup_l1", "exit_time"]
    write_rows(
        run_dir / "sweep.csv",
        header,
        ([r.epsilon, r.cells, r.horizon, r.steps, r.capped, r.l1_initial, r.sup_l1, r.exit_time] for r in rows),
    )
    manifest.outputs.append("sweep.csv")
    for r in rows:
        log.info(
            "eps=%-8g horizon=%-10g sup L1=%.6g exit=%s%s",
            r.epsilon, r.horizon, r.sup_l1, "never" if math.isinf(r.exit_time) else f"{r.exit_time:g}",
            " (capped)" if r.capped else "",
        )


def do_verify(run_dir: Path, manifest: RunManifest, quiet: bool = False) -> bool:
    from .verify import run_all

    checks = run_all()
    write_rows(
        run_dir / "verify.csv",
        ["check", "value", "threshold", "passed"],
        ([c.name, c.value, c.threshold, c.passed] for c in checks),
    )
    manifest.outputs.append("verify.csv")
    for c in checks:
        if not quiet or not c.passed:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<36} {c.value:.10g}  (threshold {c.threshold:g})")
    return all(c.passed for c in checks)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    root = output_root(args.out)

    manifest = None
    run_dir = None
    try:
        if args.command == "verify":
            run_dir, h = _run_dir(root, "verify", {"verify": __version__})
            manifest = RunManifest(h, __version__)
            status = EXIT_OK if do_verify(run_dir, manifest, args.quiet) else EXIT_CONFIG
        else:
            if args.command == "example":
                cfg, kind = example_config(args.n), f"example{args.n}"
            else:
                cfg, kind = load_config(args.config), args.command
            cfg = _apply_flags(cfg, args)
            payload = sweep_payload(cfg, args) if args.command == "sweep" else cfg.to_dict()
            run_dir, h = _run_dir(root, kind, payload)
            manifest = RunManifest(h, __version__)
            manifest.outputs.append(_write_config(run_dir, payload))
            if args.command == "sweep":
                do_sweep(cfg, args, run_dir, manifest)
            else:
                do_experiment(cfg, run_dir, manifest)
            status = EXIT_OK
    except ConfigError as exc:
        print(f"hyperac: config error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    except BlowUpError as exc:
        print(f"hyperac: numerical blow-up: {exc}", file=sys.stderr)
        status = EXIT_BLOWUP
    if manifest is not None:
        manifest.finish(run_dir, status)
        if not args.quiet:
            print(f"output: {run_dir}")
    return status


if __name__ == "__main__":
    sys.exit(main())
