"""Command-line entry point for every experiment and calculator.

Exit codes: 0 success, 1 parameter or configuration error (the message names
the offending key), 2 runtime error (I/O, degenerate oracle). Progress goes
to stderr, one line per grid cell; results go to files under the output
directory or to stdout for the calculators.

Precedence for experiment settings: command-line flags beat --set overrides,
which beat config-file values, which beat built-in defaults. Numeric flags
accept scientific notation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .bounds import BoundParams, evaluate_bounds, exp_lower_bound, poly_lower_bound, t_crit
from .config import ExperimentConfig, apply_overrides, load_config
from .datagen import PredictorProcessSpec, simulate_panel
from .errors import DegenerateDenominator, DegenerateOracle, DegenerateScale, ParameterError
from .harness import (
    load_scenarios,
    preset_scenarios,
    run_calibration,
    run_convergence,
    run_sweep,
)
from .oracle import limit_kernel_mc, scaling_dependence_probe, small_ball_curve
from .rff import ScaleMode, compute_scales, sample_features, standardized_empirical_kernel
from .stats import ks_two_sample
from .streams import derive_stream


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for runtime
    # failures, so route usage problems through ParameterError instead.
    def error(self, message):
        raise ParameterError(message)


def _progress(line: str) -> None:
    print(line, file=sys.stderr)


def build_parser() -> _Parser:
    parser = _Parser(prog="rfflab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_experiment(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON experiment config path")
        p.add_argument("--seed", type=int, help="override the config root seed")
        p.add_argument("--out-dir", help="override the config output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: machine parallelism)")
        return p

    add_experiment("convergence", "kernel error vs feature count, both kernel variants")
    add_experiment("sweep", "degradation factors and KS statistics over the parameter grids")

    cal = sub.add_parser("calibrate", help="evaluate lower bounds and critical sample sizes")
    cal.add_argument("--preset", choices=["baseline", "signal", "noise", "all"],
                     help="built-in scenario preset")
    cal.add_argument("--scenarios", help="JSON file with a list of scenarios")
    cal.add_argument("--out-dir", default="results", help="output directory (default: results)")

    b = sub.add_parser("bounds", help="lower bounds, critical sample size, and regime for one parameter set")
    b.add_argument("--B2", type=float, required=True, help="signal power (return-variance units)")
    b.add_argument("--sigma2", type=float, required=True, help="noise variance (same units)")
    b.add_argument("--P", type=int, required=True, help="feature count")
    b.add_argument("--T", type=float, default=12.0, help="operational sample size in months (default 12)")
    b.add_argument("--cz", type=float, default=1.0, help="lower eigenvalue bound (default 1.0)")
    b.add_argument("--Cz", type=float, default=1.0, help="upper eigenvalue bound (default 1.0)")
    b.add_argument("--c-universal", type=float, default=1.0,
                   help="stand-in for the exponential bound's unspecified constant (default 1.0)")
    b.add_argument("--format", choices=["text", "json"], default="text")

    o = sub.add_parser("oracle", help="limit-kernel estimate and probes for one seeded instance")
    o.add_argument("--K", type=int, default=15, help="predictor dimension (default 15)")
    o.add_argument("--T", type=int, default=12, help="training window length in months (default 12)")
    o.add_argument("--gamma", type=float, default=2.0, help="kernel bandwidth (default 2.0)")
    o.add_argument("--mode", choices=["rms", "samplestd"], default="rms",
                   help="scale estimator (default rms)")
    o.add_argument("--samples", type=int, default=100_000,
                   help="Monte Carlo draws (default 1e5; use 1e6 for report-grade runs)")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--pair", choices=["distinct", "diagonal"], default="distinct",
                   help="evaluate at two consecutive query states or at one state against itself")
    o.add_argument("--P", type=int, help="also sample a bank of this size and report the empirical gap")
    o.add_argument("--alpha", type=float, help="run the window-scaling dependence probe at this factor")
    o.add_argument("--small-ball", metavar="EPS,EPS,...",
                   help="also estimate P(denominator <= eps) on this grid")
    o.add_argument("--format", choices=["text", "json"], default="text")

    k = sub.add_parser("ks", help="two-sample KS test between two files of numbers")
    k.add_argument("--a", required=True, help="first sample, one number per line")
    k.add_argument("--b", required=True, help="second sample, one number per line")
    k.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def _experiment_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.overrides:
        config = apply_overrides(config, args.overrides)
    updates = {}
    if args.seed is not None:
        updates["root_seed"] = args.seed
    if args.out_dir is not None:
        updates["output_path"] = args.out_dir
    if updates:
        config = dataclasses.replace(config, **updates)
    if args.workers < 1:
        raise ParameterError("workers must be >= 1")
    return config


def _cmd_convergence(args) -> int:
    config = _experiment_config(args)
    run_convergence(config, workers=args.workers, progress=_progress)
    return 0


def _cmd_sweep(args) -> int:
    config = _experiment_config(args)
    run_sweep(config, workers=args.workers, progress=_progress)
    return 0


def _cmd_calibrate(args) -> int:
    if bool(args.preset) == bool(args.scenarios):
        raise ParameterError("pass exactly one of --preset or --scenarios")
    scenarios = preset_scenarios(args.preset) if args.preset else load_scenarios(args.scenarios)
    run_calibration(scenarios, output_path=args.out_dir, progress=_progress)
    return 0


def _cmd_bounds(args) -> int:
    params = BoundParams(
        B2=args.B2, sigma2=args.sigma2, T=args.T, P=args.P,
        c_z=args.cz, C_z=args.Cz, c_universal=args.c_universal,
    )
    report = evaluate_bounds(params, args.T)
    poly = poly_lower_bound(params)
    payload = {
        "B2": args.B2, "sigma2": args.sigma2, "P": args.P, "T_operational": args.T,
        "Cz": args.Cz, "cz": args.cz, "c_universal": args.c_universal,
        "t_crit_months": report.t_crit_months,
        "exp_bound": report.exp_bound,
        "poly_bound": report.poly_bound,
        "binding_term": report.poly_binding_term.value,
        "regime": report.regime.value,
    }
    if poly.warning:
        payload["warning"] = poly.warning
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"t_crit = {report.t_crit_months:.1f} months")
        print(f"regime at T={args.T:g}: {report.regime.value}")
        print(f"exp_bound = {report.exp_bound:.6g} (c_universal={args.c_universal:g}, placeholder constant)")
        print(f"poly_bound = {report.poly_bound:.6g} ({report.poly_binding_term.value} term binding)")
        if poly.warning:
            print(poly.warning)
    return 0


def _cmd_oracle(args) -> int:
    mode = ScaleMode(args.mode)
    rng = derive_stream(args.seed, "oracle-cli", 0, 0)
    spec = PredictorProcessSpec(dim=args.K)
    panel = simulate_panel(spec, args.T, 10, rng)
    if args.pair == "diagonal":
        x = x_prime = panel.queries[0]
    else:
        x, x_prime = panel.queries[0], panel.queries[1]
    estimate = limit_kernel_mc(
        x, x_prime, panel.train, args.gamma, args.samples, mode,
        derive_stream(args.seed, "oracle-cli/mc", 0, 0),
    )
    payload: dict = {
        "K": args.K, "T": args.T, "gamma": args.gamma, "mode": mode.value,
        "pair": args.pair, "n_samples": estimate.n_samples,
        "limit_kernel_mean": estimate.mean,
        "limit_kernel_stderr": estimate.standard_error,
        "degenerate_count": estimate.degenerate_count,
        "training_window_id": estimate.training_window_id,
    }
    if args.P:
        bank = sample_features(args.K, args.P, args.gamma, derive_stream(args.seed, "oracle-cli/bank", 0, 0))
        sbank = compute_scales(bank, panel.train, mode)
        k_std = standardized_empirical_kernel(sbank, x, x_prime).value
        payload["P"] = args.P
        payload["standardized_empirical"] = k_std
        payload["abs_gap_vs_oracle"] = abs(k_std - estimate.mean)
    if args.alpha is not None:
        probe = scaling_dependence_probe(
            x, x_prime, panel.train, args.gamma, args.alpha, args.samples,
            derive_stream(args.seed, "oracle-cli/probe", 0, 0), mode=mode,
        )
        payload["scaling_probe"] = {
            "alpha": probe.alpha,
            "baseline_mean": probe.baseline_mean,
            "scaled_mean": probe.scaled_mean,
            "abs_difference": probe.abs_difference,
            "pooled_stderr": probe.pooled_stderr,
            "resolvable_at_3_sigma": probe.resolvable,
        }
    if args.small_ball:
        try:
            grid = [float(tok) for tok in args.small_ball.split(",") if tok]
        except ValueError:
            raise ParameterError(f"--small-ball must be a comma list of numbers, got {args.small_ball!r}")
        curve = small_ball_curve(
            panel.train, args.gamma, grid, args.samples,
            derive_stream(args.seed, "oracle-cli/smallball", 0, 0),
        )
        payload["small_ball"] = [
            {"epsilon": pt.epsilon, "probability": pt.probability, "hits": pt.hits, "sparse": pt.sparse}
            for pt in curve
        ]
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"limit kernel at {args.pair} pair (mode={mode.value}): "
              f"{estimate.mean:.6f} +/- {estimate.standard_error:.6f} "
              f"({estimate.n_samples} draws, {estimate.degenerate_count} degenerate)")
        if "standardized_empirical" in payload:
            print(f"standardized empirical kernel at P={args.P}: "
                  f"{payload['standardized_empirical']:.6f} "
                  f"(gap vs oracle {payload['abs_gap_vs_oracle']:.6f})")
        if "scaling_probe" in payload:
            pr = payload["scaling_probe"]
            verdict = "resolvable" if pr["resolvable_at_3_sigma"] else "not resolvable"
            print(f"scaling probe alpha={pr['alpha']:g}: |difference| = {pr['abs_difference']:.6f} "
                  f"+/- {pr['pooled_stderr']:.6f} ({verdict} at 3 sigma)")
        if "small_ball" in payload:
            for pt in payload["small_ball"]:
                flag = " (sparse)" if pt["sparse"] else ""
                print(f"P(denominator <= {pt['epsilon']:g}) = {pt['probability']:.3g}{flag}")
    return 0


def _read_sample(path: str) -> np.ndarray:
    try:
        values = np.loadtxt(path, ndmin=1)
    except OSError:
        raise ParameterError(f"sample file not found: {path}")
    except ValueError as err:
        raise ParameterError(f"sample file {path} is not numeric: {err}")
    return np.asarray(values, dtype=float).ravel()


def _cmd_ks(args) -> int:
    result = ks_two_sample(_read_sample(args.a), _read_sample(args.b))
    if args.format == "json":
        print(json.dumps({
            "statistic": result.statistic, "p_value": result.p_value,
            "n1": result.n1, "n2": result.n2,
        }, indent=2))
    else:
        print(f"KS statistic = {result.statistic:.6f}  p-value = {result.p_value:.3g}  "
              f"(n1={result.n1}, n2={result.n2})")
    return 0


_COMMANDS = {
    "convergence": _cmd_convergence,
    "sweep": _cmd_sweep,
    "calibrate": _cmd_calibrate,
    "bounds": _cmd_bounds,
    "oracle": _cmd_oracle,
    "ks": _cmd_ks,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ParameterError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ParameterError, DegenerateDenominator) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, DegenerateOracle, DegenerateScale, RuntimeError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
