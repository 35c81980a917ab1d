"""Command-line interface: simulate, sweep, predict, critical.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
Flag precedence: flags > config file > defaults.  Output formats are
stable and machine-parseable; see each subcommand's docstring.
"""

from __future__ import annotations

import argparse
import sys

from .model import Policy, SimParams, validate_params
from .evolution import run_simulation
from .analytics import dilemma_bounds, extract_critical_r, predicted_critical_r
from .sweep import (
    SWEEP_CONFIG_SCHEMA,
    _convert,
    build_sweep_config,
    parse_kv_text,
    read_sweep_csv,
    run_sweep,
    write_run_csv,
    write_sweep_csv,
    write_sweep_json,
)

__all__ = ["main", "build_parser"]

# Single-run config keys mirror the simulate flags one-to-one.
RUN_CONFIG_SCHEMA = {
    "policy": ("policy", Policy.BASELINE),
    "k": ("int", 4),
    "r": ("float", 5.0),
    "rho": ("float", 0.0),
    "mu": ("float", 0.01),
    "generations": ("int", 10000),
    "grid_width": ("int", 32),
    "grid_height": ("int", 32),
    "games_per_focal": ("int", None),
    "seed": ("int", 0),
    "random_init": ("bool", False),
    "mimic_independent": ("bool", False),
}


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_exact(x: float) -> str:
    """Higher-precision output for closed-form values."""
    return f"{x:.10g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pggsim",
        description=(
            "Evolutionary public goods game simulator with automated "
            "co-players embedded in player neighborhoods."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file path")
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="64-bit unsigned seed")
    common.add_argument("--parallelism", type=int,
                        help="worker pool size (sweep only)")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser(
        "simulate", parents=[common],
        help="run one simulation and write its per-generation CSV",
    )
    p_sim.add_argument("--policy", help="baseline|mandatory|player_controlled|mimic")
    p_sim.add_argument("--k", type=int)
    p_sim.add_argument("--r", type=float)
    p_sim.add_argument("--rho", type=float, help="agent density rho_A in [0,1]")
    p_sim.add_argument("--mu", type=float)
    p_sim.add_argument("--generations", type=int)
    p_sim.add_argument("--grid-width", type=int, dest="grid_width")
    p_sim.add_argument("--grid-height", type=int, dest="grid_height")
    p_sim.add_argument("--games-per-focal", type=int, dest="games_per_focal")
    p_sim.add_argument("--random-init", action=argparse.BooleanOptionalAction,
                       default=None, dest="random_init")
    p_sim.add_argument("--mimic-independent",
                       action=argparse.BooleanOptionalAction,
                       default=None, dest="mimic_independent")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser(
        "sweep", parents=[common],
        help="run a replicate battery over an (r, rho_A) grid",
    )
    p_sweep.add_argument("--policy")
    p_sweep.add_argument("--r-values", dest="r_values",
                         help="comma-separated synergy values")
    p_sweep.add_argument("--rho-values", dest="rho_values",
                         help="comma-separated agent densities")
    p_sweep.add_argument("--replicates", type=int)
    p_sweep.add_argument("--master-seed", type=int, dest="master_seed")
    p_sweep.add_argument("--k", type=int)
    p_sweep.add_argument("--mu", type=float)
    p_sweep.add_argument("--generations", type=int)
    p_sweep.add_argument("--grid-width", type=int, dest="grid_width")
    p_sweep.add_argument("--grid-height", type=int, dest="grid_height")
    p_sweep.add_argument("--games-per-focal", type=int, dest="games_per_focal")
    p_sweep.add_argument("--random-init", action=argparse.BooleanOptionalAction,
                         default=None, dest="random_init")
    p_sweep.add_argument("--mimic-independent",
                         action=argparse.BooleanOptionalAction,
                         default=None, dest="mimic_independent")
    p_sweep.add_argument("--run-csv-dir", dest="run_csv_dir",
                         help="also write every run's time series here")
    p_sweep.add_argument("--json", dest="json_path",
                         help="also write a JSON mirror of the results")
    p_sweep.add_argument("--progress", action="store_true",
                         help="report completed runs on stderr")
    p_sweep.set_defaults(func=cmd_sweep)

    p_pred = sub.add_parser(
        "predict", parents=[common],
        help="print closed-form dilemma bounds and critical synergies",
    )
    p_pred.add_argument("--k", type=int, default=None)
    p_pred.add_argument("--rho", default="0,0.25,0.5,0.75,1",
                        help="comma-separated agent densities")
    p_pred.set_defaults(func=cmd_predict)

    p_crit = sub.add_parser(
        "critical", parents=[common],
        help="re-extract critical points from a sweep CSV and compare "
             "against the closed-form prediction",
    )
    p_crit.add_argument("--input", required=True, help="sweep CSV path")
    p_crit.add_argument("--threshold", type=float, default=0.5)
    p_crit.set_defaults(func=cmd_critical)
    return parser


def _read_config_text(path: str | None) -> str:
    if path is None:
        return ""
    try:
        with open(path) as f:
            return f.read()
    except OSError as exc:
        raise OSError(f"reading config {path}: {exc}") from exc


def _emit(text: str, out_path: str | None) -> None:
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text)


def cmd_simulate(args) -> int:
    """Run one simulation; write the run CSV; print the final summary line.

    Stdout format: `final_mean_p_C=<value>` (6 significant digits).
    """
    values = parse_kv_text(_read_config_text(args.config), RUN_CONFIG_SCHEMA)
    for key in RUN_CONFIG_SCHEMA:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = flag_value
        elif key not in values:
            values[key] = RUN_CONFIG_SCHEMA[key][1]
    if args.out is None:
        raise ValueError("simulate requires --out <path> for the run CSV")

    policy = values["policy"]
    if not isinstance(policy, Policy):
        policy = Policy.from_name(str(policy))
    params = SimParams(
        k=values["k"],
        r=values["r"],
        rho_a=values["rho"],
        policy=policy,
        grid_width=values["grid_width"],
        grid_height=values["grid_height"],
        mu=values["mu"],
        generations=values["generations"],
        games_per_focal=values["games_per_focal"],
        seed=values["seed"],
        random_init=values["random_init"],
        mimic_independent=values["mimic_independent"],
    )
    validate_params(params)
    run = run_simulation(params)
    write_run_csv(run, args.out)
    final_mean = sum(g.p_c for g in run.final_genomes) / len(run.final_genomes)
    print(f"final_mean_p_C={_fmt(final_mean)}")
    return 0


def cmd_sweep(args) -> int:
    """Run a sweep; write the sweep CSV; print one line per critical point.

    Stdout format per rho_A: `rho_A=<value> r_critical=<value|none>`.
    """
    overrides = {}
    for key in SWEEP_CONFIG_SCHEMA:
        if hasattr(args, key) and getattr(args, key) is not None:
            value = getattr(args, key)
            kind = SWEEP_CONFIG_SCHEMA[key][0]
            if isinstance(value, str) and kind in ("float_list", "policy"):
                value = _convert(kind, value)
            overrides[key] = value
    if args.seed is not None and "master_seed" not in overrides:
        overrides["master_seed"] = args.seed
    if args.parallelism is not None:
        overrides["parallelism"] = args.parallelism
    if args.out is None:
        raise ValueError("sweep requires --out <path> for the sweep CSV")

    config = build_sweep_config(_read_config_text(args.config), overrides)
    sink = None
    if args.progress:
        def sink(done, total):
            print(f"run {done}/{total}", file=sys.stderr)
    result = run_sweep(config, progress_sink=sink)
    write_sweep_csv(result, args.out)
    if args.json_path:
        write_sweep_json(result, args.json_path)
    for cp in result.critical_points:
        crit = _fmt(cp.r_critical) if cp.r_critical is not None else "none"
        print(f"rho_A={_fmt(cp.rho_a)} r_critical={crit}")
    return 0


def cmd_predict(args) -> int:
    """Print closed-form values as CSV: rho_A,r_low,r_high,r_critical."""
    k = args.k
    if k is None and args.config:
        cfg_values = parse_kv_text(_read_config_text(args.config),
                                   SWEEP_CONFIG_SCHEMA)
        k = cfg_values.get("k")
    if k is None:
        k = 4
    try:
        rho_list = [float(v) for v in str(args.rho).split(",") if v.strip() != ""]
    except ValueError:
        raise ValueError(f"could not parse rho list {args.rho!r}") from None
    if not rho_list:
        raise ValueError("empty rho list")
    low, high = dilemma_bounds(k)
    lines = ["rho_A,r_low,r_high,r_critical"]
    for rho in rho_list:
        crit = predicted_critical_r(k, rho)
        lines.append(
            f"{_fmt_exact(rho)},{_fmt_exact(low)},{_fmt_exact(high)},"
            f"{_fmt_exact(crit)}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_critical(args) -> int:
    """Compare measured vs predicted critical synergy per rho_A.

    Reads a sweep CSV, re-extracts each rho_A's critical point from its
    (r, mean_p_C) curve, and prints CSV:
    rho_A,r_critical_observed,r_critical_predicted,abs_error.
    """
    rows = read_sweep_csv(args.input)
    if not rows:
        raise ValueError(f"{args.input}: no data rows")
    groups: dict = {}
    order = []
    for row in rows:
        key = row["rho_A"]
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    lines = ["rho_A,r_critical_observed,r_critical_predicted,abs_error"]
    for rho in order:
        group = groups[rho]
        k = group[0]["k"]
        points = [(row["r"], row["mean_p_C"]) for row in group]
        cp = extract_critical_r(points, threshold=args.threshold, rho_a=rho)
        predicted = predicted_critical_r(k, rho)
        if cp.r_critical is None:
            lines.append(f"{_fmt(rho)},none,{_fmt_exact(predicted)},none")
        else:
            err = abs(cp.r_critical - predicted)
            lines.append(
                f"{_fmt(rho)},{_fmt_exact(cp.r_critical)},"
                f"{_fmt_exact(predicted)},{_fmt_exact(err)}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures: I/O, worker crashes, ...
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
