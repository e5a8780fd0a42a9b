"""Command-line interface.

    ccqed simulate <scenario_id> [--config cfg.json] [--out DIR]
                   [--format csv|json] [--threads N]
    ccqed suite [--out DIR]
    ccqed sweep --config cfg.json --axis NAME --values v1,v2,... [--out DIR]
                [--threads N]

Exit codes: 0 success, 1 validation failure, 2 numerical failure.  The
default output directory comes from $CCQED_OUT_DIR (falling back to ./out).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import CcqedError, ConfigError, InvalidParamsError, InvalidPulseError
from .invariants import run_invariant_suite
from .scenarios import (
    OUT_DIR_ENV,
    SCENARIO_IDS,
    config_from_dict,
    default_config,
    run_scenario,
    sweep,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

_VALIDATION_ERRORS = (ConfigError, InvalidParamsError, InvalidPulseError)


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, "out")


def _load_config(scenario_id: str | None, config_path: str | None):
    if config_path is None:
        if scenario_id is None:
            raise ConfigError("either a scenario id or --config is required")
        return default_config(scenario_id)
    raw = json.loads(Path(config_path).read_text())
    if scenario_id is not None:
        if "scenario_id" in raw and raw["scenario_id"] != scenario_id:
            raise ConfigError(
                f"config names scenario {raw['scenario_id']!r} but {scenario_id!r} was requested"
            )
        raw.setdefault("scenario_id", scenario_id)
    return config_from_dict(raw)


def _parse_values(text: str) -> list[float]:
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.lower() in ("inf", "infinite"):
            values.append(math.inf)
        else:
            values.append(float(chunk))
    if not values:
        raise ConfigError("--values must list at least one number")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccqed",
        description="Photon-polariton scattering experiments on a doped cavity chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario")
    sim.add_argument("scenario_id", choices=SCENARIO_IDS)
    sim.add_argument("--config", help="JSON config path (defaults per scenario)")
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--format", choices=("csv", "json"), default=None)
    sim.add_argument("--threads", type=int, default=1)

    suite = sub.add_parser("suite", help="run the invariant suite")
    suite.add_argument("--out", default=None, help="output directory")

    swp = sub.add_parser("sweep", help="run a scenario across parameter values")
    swp.add_argument("--config", required=True, help="JSON config path")
    swp.add_argument("--axis", required=True, help="dotted config path, e.g. packets.0.momentum")
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--out", default=None, help="output directory")
    swp.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out if args.out is not None else _default_out())
    try:
        if args.command == "simulate":
            cfg = _load_config(args.scenario_id, args.config)
            if args.format is not None:
                cfg = replace(cfg, out_format=args.format)
            manifest = run_scenario(cfg, out_dir, threads=args.threads)
            print(f"{cfg.scenario_id}: wrote {len(manifest.outputs)} files to {out_dir}")
            return EXIT_OK
        if args.command == "suite":
            checks, ok = run_invariant_suite(out_dir)
            for check in checks:
                status = "pass" if check["passed"] else "FAIL"
                print(f"[{status}] {check['name']}: {check['value']:.3e}")
            print(f"invariants: {sum(c['passed'] for c in checks)}/{len(checks)} passed")
            return EXIT_OK if ok else EXIT_NUMERICAL
        if args.command == "sweep":
            cfg = _load_config(None, args.config)
            values = _parse_values(args.values)
            sweep(cfg, args.axis, values, out_dir, threads=args.threads)
            print(f"sweep over {args.axis}: {len(values)} points in {out_dir}")
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")  # pragma: no cover
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CcqedError, ValueError) as exc:
        print(f"numerical failure [{getattr(exc, 'code', 'ERROR')}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
