"""Command-line driver.

Three subcommands:

* ``run --config <path>``: execute a configured protocol (all iterations,
  recycling included) and print a JSON report to stdout;
* ``sweep --spec <path> --out <path> [--workers N]``: evaluate quantities
  on a parameter grid and write deterministic CSV;
* ``validate [--grid coarse|fine]``: cross-validate every closed form
  against the brute-force simulator and print a residual table.

Exit codes: 0 success, 1 validation-suite failure, 2 config/spec parse
error, 3 config/spec validation error, 4 numeric domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Sequence

from . import validate as validate_mod
from .analysis import DomainError
from .channels import validate_cptp
from .config import (
    ConfigError,
    ConfigValidationError,
    run_config_from_text,
    sweep_spec_from_text,
)
from .protocol import (
    IterationReport,
    ProtocolConfig,
    aggregate_fidelity,
    run_protocol,
    success_probability,
)
from .sweeps import run_sweep, write_csv

__all__ = ["main"]

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_DOMAIN = 4


def _round_floats(obj: Any) -> Any:
    """12-significant-digit floats for reproducible reports."""
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return obj
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _config_echo(cfg: ProtocolConfig) -> dict[str, Any]:
    def noise(spec) -> Any:
        if spec is None:
            return None
        return {"kind": spec.kind, "strength": spec.strength}

    channel: Any
    if isinstance(cfg.channel, tuple):
        channel = [noise(s) for s in cfg.channel]
    else:
        channel = noise(cfg.channel)
    return {
        "parties": cfg.parties,
        "iterations": cfg.iterations,
        "secrets_k": [s.k for s in cfg.secrets],
        "channel": channel,
        "wmrqm": None if cfg.wmrqm is None else {"s": cfg.wmrqm.s, "r": cfg.wmrqm.r},
        "return_channel": noise(cfg.return_channel),
    }


def _branch_entry(report: IterationReport) -> dict[str, Any]:
    return {
        "alice": report.alice_outcome,
        "collaborators": list(report.collaborator_outcomes),
        "correction": report.correction_applied,
        "probability": report.branch_probability,
        "fidelity": report.fidelity,
    }


def _run_report(cfg: ProtocolConfig) -> dict[str, Any]:
    iterations = run_protocol(cfg)

    residuals: dict[str, float] = {}
    specs = []
    if isinstance(cfg.channel, tuple):
        specs = [s for s in cfg.channel if s is not None]
    elif cfg.channel is not None:
        specs = [cfg.channel]
    if cfg.return_channel is not None:
        specs.append(cfg.return_channel)
    if specs:
        residuals["channel_completeness"] = max(validate_cptp(s.channel()) for s in specs)
    state_residual = 0.0
    for reports in iterations:
        for r in reports:
            if r.reconstructed_state is not None:
                state_residual = max(state_residual, abs(r.reconstructed_state.trace - 1.0))
    residuals["reconstructed_state_trace"] = state_residual
    if cfg.wmrqm is None:
        # Without post-selection every iteration's branches are exhaustive.
        residuals["branch_probability_sum"] = max(
            abs(success_probability(reports) - 1.0) for reports in iterations
        )

    report = {
        "config": _config_echo(cfg),
        "iterations": [
            {
                "index": i,
                "branches": [_branch_entry(r) for r in reports],
                "success_probability": success_probability(reports),
                "aggregate_fidelity": aggregate_fidelity(reports),
            }
            for i, reports in enumerate(iterations)
        ],
        "validation_residuals": residuals,
    }
    return _round_floats(report)


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        text = open(args.config).read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = run_config_from_text(text)
    except ConfigValidationError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"error: cannot parse config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        report = _run_report(cfg)
    except (DomainError, ValueError) as exc:
        # e.g. a configuration whose post-selection extinguishes every branch
        print(f"error: numeric domain: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    json.dump(report, sys.stdout, indent=2)
    print()
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        text = open(args.spec).read()
    except OSError as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        spec = sweep_spec_from_text(text)
    except ConfigValidationError as exc:
        print(f"error: invalid spec: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"error: cannot parse spec: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        header, rows, warnings = run_sweep(spec, workers=args.workers)
    except ConfigValidationError as exc:
        print(f"error: invalid spec: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as exc:
        print(f"error: numeric domain: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    write_csv(args.out, header, rows, warnings)
    if warnings:
        print(f"warning: {warnings} out-of-domain grid point(s) wrote nan", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    results = validate_mod.run_all(grid=args.grid)
    print(validate_mod.render_report(results))
    failed = [r for r in results if not r.passed and not r.informational]
    if failed:
        print(f"\n{len(failed)} suite(s) failed", file=sys.stderr)
        return EXIT_SUITE_FAILURE
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qss-sim",
        description="Sequential quantum secret sharing simulator and analytic toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured protocol, print JSON report")
    p_run.add_argument("--config", required=True, help="path to key=value config file")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="evaluate quantities on a grid, write CSV")
    p_sweep.add_argument("--spec", required=True, help="path to key=value sweep spec")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel evaluators")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_val = sub.add_parser("validate", help="cross-validate closed forms vs simulator")
    p_val.add_argument("--grid", choices=("coarse", "fine"), default="coarse")
    p_val.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
