"""Command-line front end.

Subcommands::

    mse-curves      Monte-Carlo mean-MSE learning curves per scenario
    ber-sweep       BER-vs-Es/N0 sweep fed by the reference scenario
    stepsize-demo   one adaptive run showing step size versus error
    theory-bounds   closed-form steady-state excess-MSE bound table
    validate-config check a config file (or the built-in defaults)

Exit codes: 0 on success, 1 on configuration/usage errors, 2 on runtime
failures.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from .algorithms import VARIANTS, StopCriterion
from .configfile import load_config
from .errors import ConfigError
from .experiment import ExperimentConfig, run_experiment
from .metrics import TheoryInputs, steady_state_mse_limit, steady_state_mse_nlms

__all__ = ["cli_main", "main"]

# Bare CLI invocations (no config file, no --runs) use a desk-scale run
# count instead of the full 1000-run averaging.
DESK_RUNS = 100


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sparse-nlms", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    def add_common(p):
        p.add_argument("--config", help="config file (key-value text or JSON)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--runs", type=int, help="Monte-Carlo runs per cell")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument(
            "--algorithms",
            help=f"comma list among: {', '.join(VARIANTS)}",
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress")

    p_mse = sub.add_parser("mse-curves", help="mean-MSE learning curves")
    add_common(p_mse)
    p_mse.add_argument("--sparsity", help="comma list of K values")
    p_mse.add_argument("--snr-db", help="comma list of SNR values in dB")

    p_ber = sub.add_parser("ber-sweep", help="BER versus Es/N0 table")
    add_common(p_ber)

    p_step = sub.add_parser("stepsize-demo", help="step size versus error demo")
    add_common(p_step)
    p_step.add_argument(
        "--snr-db", type=float, default=10.0, help="scenario SNR in dB"
    )
    p_step.add_argument(
        "--iterations", type=int, default=1000, help="demo run length"
    )

    p_theory = sub.add_parser("theory-bounds", help="steady-state MSE bounds")
    p_theory.add_argument("--lambda-max", type=float, required=True)
    p_theory.add_argument("--noise-power", type=float, required=True)
    p_theory.add_argument("--mu", type=float, required=True)
    p_theory.add_argument(
        "--n-taps",
        type=int,
        help="when given, also evaluate the exact trace form for a white "
        "input covariance of this size",
    )

    p_val = sub.add_parser("validate-config", help="validate a config file")
    p_val.add_argument("--config", help="config file; defaults when omitted")

    return parser


def _load_base_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        config = load_config(args.config)
        explicit_runs = True
    else:
        config = ExperimentConfig()
        explicit_runs = False
    if getattr(args, "runs", None) is not None:
        if args.runs < 1:
            raise ConfigError(f"--runs must be >= 1, got {args.runs}")
        config.runs = args.runs
    elif not explicit_runs:
        config.runs = DESK_RUNS
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be >= 0, got {args.seed}")
        config.master_seed = args.seed
    if getattr(args, "algorithms", None):
        names = [a.strip() for a in args.algorithms.split(",") if a.strip()]
        config.algorithms = names
    config.validate()
    return config


def _emit(config: ExperimentConfig, out: str, quiet: bool) -> int:
    from .results_io import emit_results

    cells = (
        len(config.sparsity_list) * len(config.snr_db_list) * len(config.algorithms)
    )
    if not quiet:
        print(
            f"running {cells} cells x {config.runs} runs "
            f"(N={config.n_taps}, seed={config.master_seed})",
            file=sys.stderr,
        )
    result = run_experiment(config)
    written = emit_results(result, out)
    if not quiet:
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_mse_curves(args) -> int:
    config = _load_base_config(args)
    if args.sparsity:
        config.sparsity_list = [int(k) for k in args.sparsity.split(",")]
    if args.snr_db:
        config.snr_db_list = [float(s) for s in args.snr_db.split(",")]
    config.validate()
    return _emit(config, args.out, args.quiet)


def _cmd_ber_sweep(args) -> int:
    config = _load_base_config(args)
    ref_k, ref_snr = config.reference_scenario()
    config.sparsity_list = [ref_k]
    config.snr_db_list = [ref_snr]
    config.validate()
    return _emit(config, args.out, args.quiet)


def _cmd_stepsize_demo(args) -> int:
    config = _load_base_config(args)
    # Demo settings: one run, adaptive step against a 0.5 fixed step with
    # ceiling 1, so the plot's reference lines sit at 0.5 and 1.
    if getattr(args, "runs", None) is None:
        config.runs = 1
    config.mu = 0.5
    config.mu_max = 1.0
    config.sparsity_list = [min(config.sparsity_list)]
    config.snr_db_list = [args.snr_db]
    if args.iterations < 1:
        raise ConfigError(f"--iterations must be >= 1, got {args.iterations}")
    config.stop = StopCriterion(
        delta_tolerance=config.stop.delta_tolerance,
        max_iterations=args.iterations,
    )
    if not any(v.startswith("VSS") for v in config.algorithms):
        raise ConfigError("stepsize-demo needs at least one VSS algorithm")
    config.validate()
    return _emit(config, args.out, args.quiet)


def _cmd_theory_bounds(args) -> int:
    covariance = None
    if args.n_taps is not None:
        if args.n_taps < 1:
            raise ConfigError(f"--n-taps must be >= 1, got {args.n_taps}")
        covariance = args.lambda_max * np.eye(args.n_taps)
    inputs = TheoryInputs(
        lambda_max=args.lambda_max,
        noise_power=args.noise_power,
        step=args.mu,
        covariance=covariance,
    )
    trace_form, bound = steady_state_mse_nlms(inputs)
    limit = steady_state_mse_limit(args.lambda_max, args.noise_power)
    print(f"steady-state excess-MSE lower bound: {bound!r}")
    print(f"small-step limit: {limit!r}")
    if trace_form is not None:
        print(f"trace form (white input, N={args.n_taps}): {trace_form!r}")
    return 0


def _cmd_validate_config(args) -> int:
    if args.config:
        config = load_config(args.config)
        source = args.config
    else:
        config = ExperimentConfig()
        source = "built-in defaults"
    config.validate()
    cells = (
        len(config.sparsity_list) * len(config.snr_db_list) * len(config.algorithms)
    )
    print(f"config OK ({source}): {cells} cells x {config.runs} runs")
    return 0


_COMMANDS = {
    "mse-curves": _cmd_mse_curves,
    "ber-sweep": _cmd_ber_sweep,
    "stepsize-demo": _cmd_stepsize_demo,
    "theory-bounds": _cmd_theory_bounds,
    "validate-config": _cmd_validate_config,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
