"""Command line interface.

Verbs:

    singtrace model build --model circle --N 256
    singtrace cycle check --model nc_torus --N 32 --chain volume
    singtrace chern | eigen-sums | heat | dixmier | measure | reduce
    singtrace identity-suite --model circle --N 256
    singtrace suite quick|full [--out DIR]
    singtrace run --config experiment.json

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error.
SINGTRACE_THREADS caps the worker pool.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    run,
    suite,
)
from .triples import build_model

_VERB_TO_CHECK = {
    "chern": "chern",
    "eigen-sums": "eigen-sums",
    "heat": "heat",
    "dixmier": "dixmier",
    "measure": "measure",
    "reduce": "reduce",
    "identity-suite": "identity-suite",
}


def _add_model_flags(parser):
    parser.add_argument("--model", default="circle",
                        choices=("circle", "nc_torus", "toy"))
    parser.add_argument("--N", type=int, default=64)
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--p", type=int, default=None)
    parser.add_argument("--chain", default=None,
                        help="builtin chain name or path to a chain JSON file")
    parser.add_argument("--out", default=None, help="report output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol-identity", type=float, default=None)
    parser.add_argument("--tol-z", type=float, default=None)
    parser.add_argument("--tol-residual", type=float, default=None)


def _config_from_args(args, checks):
    tolerances = {}
    if args.tol_identity is not None:
        tolerances["identity"] = args.tol_identity
    if args.tol_z is not None:
        tolerances["diag_z"] = args.tol_z
        tolerances["heat_rel"] = args.tol_z
    if args.tol_residual is not None:
        tolerances["sum_tol"] = args.tol_residual
    chain = args.chain
    if chain and chain.endswith(".json"):
        with open(chain) as fh:
            chain = json.load(fh)
    return ExperimentConfig(
        model={"name": args.model, "N": args.N, "theta": args.theta,
               "p": args.p},
        chain=chain,
        checks=checks,
        tolerances=tolerances,
        out=args.out,
        seed=args.seed,
    )


def _print_report(report):
    for rec in report.records:
        status = "PASS" if rec.passed else "FAIL"
        vals = ", ".join(f"{k}={v}" for k, v in rec.values.items())
        print(f"[{status}] {rec.name}: {vals}")
    print(f"all passed: {report.all_passed}")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="singtrace", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_model = sub.add_parser("model", help="model utilities")
    model_sub = p_model.add_subparsers(dest="action", required=True)
    p_build = model_sub.add_parser("build", help="build and describe a model")
    _add_model_flags(p_build)

    p_cycle = sub.add_parser("cycle", help="chain utilities")
    cycle_sub = p_cycle.add_subparsers(dest="action", required=True)
    p_check = cycle_sub.add_parser("check", help="exact cycle verification")
    _add_model_flags(p_check)

    for verb in _VERB_TO_CHECK:
        p = sub.add_parser(verb)
        _add_model_flags(p)

    p_suite = sub.add_parser("suite", help="curated acceptance runs")
    p_suite.add_argument("which", choices=("quick", "full"))
    p_suite.add_argument("--out", default=None)
    p_suite.add_argument("--seed", type=int, default=0)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    try:
        if args.verb == "model" and args.action == "build":
            model = build_model(args.model, args.N, theta=args.theta, p=args.p)
            print(model.descriptor_json())
            return 0
        if args.verb == "cycle" and args.action == "check":
            report = run(_config_from_args(args, ["cycle"]))
            _print_report(report)
            return 0 if report.all_passed else 1
        if args.verb in _VERB_TO_CHECK:
            report = run(_config_from_args(args, [_VERB_TO_CHECK[args.verb]]))
            _print_report(report)
            return 0 if report.all_passed else 1
        if args.verb == "suite":
            report = suite(args.which, out=args.out, seed=args.seed)
            _print_report(report)
            return 0 if report.all_passed else 1
        if args.verb == "run":
            with open(args.config) as fh:
                config = ExperimentConfig.from_json(fh.read())
            if args.out:
                config.out = args.out
            report = run(config)
            _print_report(report)
            return 0 if report.all_passed else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    parser.error("unhandled verb")


if __name__ == "__main__":
    sys.exit(main())
