"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 extinction or decode failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .errors import ConfigError, DecodeError, ExtinctionError
from .experiments import PRESETS, list_presets, load_config, run_experiment, run_jobs, write_csv
from .hamiltonian import build_pauli
from .synthesis import trotterize

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.override)
    if args.out is None:
        write_csv(config, run_experiment(config), sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(config, run_experiment(config), fh)
    return 0


def cmd_preset(args: argparse.Namespace) -> int:
    try:
        preset = PRESETS[args.name]
    except KeyError:
        raise ConfigError(f"unknown preset {args.name!r}; see list-presets") from None
    jobs = preset.jobs(args.override)
    texts = run_jobs([cfg for _, cfg in jobs], workers=args.jobs)
    if len(jobs) == 1 and args.out_dir is None:
        _emit(texts[0], args.out)
        return 0
    if args.out is not None:
        raise ConfigError("--out takes a single job; use --out-dir for sweeps")
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    for (label, _), text in zip(jobs, texts):
        path = os.path.join(out_dir, f"{label}.csv")
        _emit(text, path)
        print(path)
    return 0


def cmd_dump_hamiltonian(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.override)
    sys.stdout.write(build_pauli(config.model).dumps())
    return 0


def cmd_dump_circuit(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.override)
    if args.steps < 0:
        raise ConfigError("--steps must be nonnegative")
    ham = build_pauli(config.model)
    sys.stdout.write(trotterize(ham, args.steps * config.dt, config.dt).dumps())
    return 0


def cmd_list_presets(args: argparse.Namespace) -> int:
    json.dump(list_presets(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdqsim",
        description="Trotterized circuit simulation of lattice reaction-diffusion master equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--override", action="append", default=[], metavar="KEY=VAL",
            help="override a config entry, e.g. run.dt=1/40 (repeatable)",
        )

    p = sub.add_parser("run", help="run an experiment config and write CSV")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (default: stdout)")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a built-in experiment")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out", help="CSV path for a single job (default: stdout)")
    p.add_argument("--out-dir", help="directory for per-job CSVs of a sweep (default: .)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes for sweeps")
    overrides(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("dump-hamiltonian", help="print the Pauli-basis pseudo-Hamiltonian")
    p.add_argument("config")
    overrides(p)
    p.set_defaults(func=cmd_dump_hamiltonian)

    p = sub.add_parser("dump-circuit", help="print the gate list for k Trotter steps")
    p.add_argument("config")
    p.add_argument("--steps", type=int, required=True)
    overrides(p)
    p.set_defaults(func=cmd_dump_circuit)

    p = sub.add_parser("list-presets", help="print the preset catalog as JSON")
    p.set_defaults(func=cmd_list_presets)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExtinctionError, DecodeError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
