"""Replicate batteries over (r, rho_A) grids with deterministic seeding.

Every run's seed is derived from (master_seed, r_index, rho_index,
replicate) by an avalanche hash, so results are independent of execution
order and of the parallelism level: identical configs produce identical
output bytes whether runs execute sequentially or across a worker pool.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace, asdict

from .model import Policy, SimParams, validate_params
from .evolution import RunResult, run_simulation
from .analytics import (
    CriticalPoint,
    ResponseCurve,
    convergence_statistic,
    extract_critical_r,
)

__all__ = [
    "SweepConfig",
    "SweepCell",
    "SweepResult",
    "derive_seed",
    "run_sweep",
    "write_run_csv",
    "write_sweep_csv",
    "write_sweep_json",
    "read_sweep_csv",
    "parse_config",
    "build_sweep_config",
]

_U64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """splitmix64 step: full-avalanche 64-bit mixing."""
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, r_index: int, rho_index: int,
                replicate: int) -> int:
    """Collision-resistant 64-bit seed for one run of a sweep."""
    h = _mix64(master_seed & _U64)
    h = _mix64(h ^ _mix64(r_index & _U64))
    h = _mix64(h ^ _mix64(rho_index & _U64))
    h = _mix64(h ^ _mix64(replicate & _U64))
    return h


@dataclass(frozen=True)
class SweepConfig:
    """A complete sweep definition.

    base supplies the per-run parameters; r, rho_a, policy, and seed are
    overwritten cell by cell.  run_csv_dir, when set, streams every run's
    full time series to a per-run CSV in that directory.
    """

    base: SimParams
    policy: Policy
    r_values: tuple
    rho_values: tuple
    replicates: int = 100
    master_seed: int = 0
    parallelism: int = 1
    run_csv_dir: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        object.__setattr__(self, "rho_values", tuple(float(v) for v in self.rho_values))
        if not isinstance(self.policy, Policy):
            object.__setattr__(self, "policy", Policy.from_name(str(self.policy)))
        if len(self.r_values) == 0:
            raise ValueError("r_values must be non-empty")
        if len(self.rho_values) == 0:
            raise ValueError("rho_values must be non-empty")
        if any(not r2 > r1 for r1, r2 in zip(self.r_values, self.r_values[1:])):
            raise ValueError("r_values must be strictly ascending")
        if any(not v2 > v1 for v1, v2 in zip(self.rho_values, self.rho_values[1:])):
            raise ValueError("rho_values must be strictly ascending")
        if any(not r > 0 for r in self.r_values):
            raise ValueError("r_values must be positive")
        if any(not 0.0 <= v <= 1.0 for v in self.rho_values):
            raise ValueError("rho_values entries must lie in [0,1]")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")
        if not 0 <= self.master_seed <= _U64:
            raise ValueError("master_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class SweepCell:
    """Aggregated replicate statistics for one (r, rho_A) grid point."""

    r: float
    rho_a: float
    mean_p_c: float
    sd_p_c: float
    mean_p_ac: float
    sd_p_ac: float
    mean_coop_frequency: float
    replicate_count: int


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    cells: list        # SweepCell, rho-major then r-ascending
    critical_points: list  # one CriticalPoint per rho_A


def _cell_params(config: SweepConfig, rho_idx: int, r_idx: int,
                 rep: int) -> SimParams:
    seed = derive_seed(config.master_seed, r_idx, rho_idx, rep)
    return replace(
        config.base,
        r=config.r_values[r_idx],
        rho_a=config.rho_values[rho_idx],
        policy=config.policy,
        seed=seed,
    )


def _sweep_worker(payload):
    """One replicate run; returns its convergence statistics.

    Module-level so it pickles for process pools.  Failures are returned,
    not raised, so the parent can attach the cell identity.
    """
    rho_idx, r_idx, rep, params, run_csv_path = payload
    try:
        run = run_simulation(params)
        stats = convergence_statistic(run)
        if run_csv_path is not None:
            write_run_csv(run, run_csv_path)
        return ("ok", rho_idx, r_idx, rep, stats.p_c, stats.p_ac,
                stats.coop_frequency)
    except Exception as exc:  # pragma: no cover - exercised via error path test
        return ("error", rho_idx, r_idx, rep, f"{type(exc).__name__}: {exc}")


def _mean_sd(values) -> tuple:
    """Two-pass mean and sample standard deviation (ddof=1; 0.0 for n=1)."""
    n = len(values)
    m = sum(values) / n
    if n < 2:
        return m, 0.0
    var = sum((v - m) ** 2 for v in values) / (n - 1)
    return m, math.sqrt(var)


def run_sweep(config: SweepConfig, progress_sink=None) -> SweepResult:
    """Run replicates x |r_values| x |rho_values| simulations and aggregate.

    Per cell: replicate runs are condensed to convergence statistics and
    averaged.  Per rho_A: the (r, mean_p_C) response curve is scanned for
    its critical point.  progress_sink, when given, is called as
    progress_sink(completed_runs, total_runs) in a deterministic order.
    The result depends only on the config, never on parallelism.
    """
    payloads = []
    for rho_idx, rho in enumerate(config.rho_values):
        for r_idx, r in enumerate(config.r_values):
            for rep in range(config.replicates):
                params = _cell_params(config, rho_idx, r_idx, rep)
                try:
                    validate_params(params)
                except ValueError as exc:
                    raise ValueError(
                        f"cell rho_A={rho} r={r}: {exc}"
                    ) from exc
                run_csv_path = None
                if config.run_csv_dir is not None:
                    run_csv_path = os.path.join(
                        config.run_csv_dir,
                        f"run_rho{rho:g}_r{r:g}_rep{rep}.csv",
                    )
                payloads.append((rho_idx, r_idx, rep, params, run_csv_path))

    if config.run_csv_dir is not None:
        os.makedirs(config.run_csv_dir, exist_ok=True)

    total = len(payloads)
    results = {}
    if config.parallelism == 1:
        outputs = map(_sweep_worker, payloads)
        _collect(outputs, results, config, total, progress_sink)
    else:
        # warm the compiled kernels before forking so children inherit them
        run_simulation(replace(_cell_params(config, 0, 0, 0), generations=1))
        chunk = max(1, total // (config.parallelism * 4))
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            outputs = pool.map(_sweep_worker, payloads, chunksize=chunk)
            _collect(outputs, results, config, total, progress_sink)

    cells = []
    critical_points = []
    for rho_idx, rho in enumerate(config.rho_values):
        curve_points = []
        for r_idx, r in enumerate(config.r_values):
            stats = [results[(rho_idx, r_idx, rep)]
                     for rep in range(config.replicates)]
            mean_pc, sd_pc = _mean_sd([s[0] for s in stats])
            mean_pac, sd_pac = _mean_sd([s[1] for s in stats])
            mean_coop, _ = _mean_sd([s[2] for s in stats])
            cells.append(SweepCell(
                r=r, rho_a=rho,
                mean_p_c=mean_pc, sd_p_c=sd_pc,
                mean_p_ac=mean_pac, sd_p_ac=sd_pac,
                mean_coop_frequency=mean_coop,
                replicate_count=config.replicates,
            ))
            curve_points.append((r, mean_pc))
        if len(curve_points) >= 2:
            cp = extract_critical_r(ResponseCurve(tuple(curve_points)), rho_a=rho)
        else:
            cp = CriticalPoint(rho_a=rho, r_critical=None)
        critical_points.append(cp)
    return SweepResult(config=config, cells=cells, critical_points=critical_points)


def _collect(outputs, results, config, total, progress_sink) -> None:
    done = 0
    for out in outputs:
        if out[0] == "error":
            _, rho_idx, r_idx, rep, msg = out
            raise RuntimeError(
                f"run failed at rho_A={config.rho_values[rho_idx]} "
                f"r={config.r_values[r_idx]} replicate={rep}: {msg}"
            )
        _, rho_idx, r_idx, rep, p_c, p_ac, coop = out
        results[(rho_idx, r_idx, rep)] = (p_c, p_ac, coop)
        done += 1
        if progress_sink is not None:
            progress_sink(done, total)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    """Reals in CSV output: 6 significant digits, dot decimal separator."""
    return f"{x:.6g}"


def write_run_csv(run: RunResult, path) -> None:
    """Per-generation time series: generation,mean_p_C,mean_p_AC,coop_freq."""
    try:
        with open(path, "w", newline="") as f:
            f.write("generation,mean_p_C,mean_p_AC,coop_freq\n")
            for rec in run.records:
                f.write(
                    f"{rec.generation},{_fmt(rec.mean_p_c)},"
                    f"{_fmt(rec.mean_p_ac)},{_fmt(rec.coop_frequency)}\n"
                )
    except OSError as exc:
        raise OSError(f"writing run CSV to {path}: {exc}") from exc


def write_sweep_csv(result: SweepResult, path) -> None:
    """Aggregated sweep table, one row per (rho_A, r) cell, rho-major.

    The r_critical column repeats each rho_A's critical point on every row
    of that rho_A block, empty when the curve never crosses.
    """
    crit_by_rho = {cp.rho_a: cp.r_critical for cp in result.critical_points}
    k = result.config.base.k
    label = result.config.policy.label
    try:
        with open(path, "w", newline="") as f:
            f.write("policy,k,r,rho_A,replicates,mean_p_C,sd_p_C,"
                    "mean_p_AC,sd_p_AC,mean_coop_freq,r_critical\n")
            for cell in result.cells:
                crit = crit_by_rho.get(cell.rho_a)
                crit_txt = _fmt(crit) if crit is not None else ""
                f.write(
                    f"{label},{k},{_fmt(cell.r)},{_fmt(cell.rho_a)},"
                    f"{cell.replicate_count},{_fmt(cell.mean_p_c)},"
                    f"{_fmt(cell.sd_p_c)},{_fmt(cell.mean_p_ac)},"
                    f"{_fmt(cell.sd_p_ac)},{_fmt(cell.mean_coop_frequency)},"
                    f"{crit_txt}\n"
                )
    except OSError as exc:
        raise OSError(f"writing sweep CSV to {path}: {exc}") from exc


def write_sweep_json(result: SweepResult, path) -> None:
    """JSON mirror of the sweep CSV with the same field names."""
    base = asdict(result.config.base)
    base["policy"] = result.config.base.policy.label
    doc = {
        "config": {
            "base": base,
            "policy": result.config.policy.label,
            "r_values": list(result.config.r_values),
            "rho_values": list(result.config.rho_values),
            "replicates": result.config.replicates,
            "master_seed": result.config.master_seed,
            "parallelism": result.config.parallelism,
        },
        "cells": [
            {
                "policy": result.config.policy.label,
                "k": result.config.base.k,
                "r": c.r,
                "rho_A": c.rho_a,
                "replicates": c.replicate_count,
                "mean_p_C": c.mean_p_c,
                "sd_p_C": c.sd_p_c,
                "mean_p_AC": c.mean_p_ac,
                "sd_p_AC": c.sd_p_ac,
                "mean_coop_freq": c.mean_coop_frequency,
            }
            for c in result.cells
        ],
        "critical_points": [
            {"rho_A": cp.rho_a, "r_critical": cp.r_critical}
            for cp in result.critical_points
        ],
    }
    try:
        with open(path, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise OSError(f"writing sweep JSON to {path}: {exc}") from exc


def read_sweep_csv(path):
    """Parse a sweep CSV back into a list of row dicts (typed fields)."""
    try:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            field_names = reader.fieldnames
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"reading sweep CSV from {path}: {exc}") from exc
    required = {"policy", "k", "r", "rho_A", "mean_p_C", "r_critical"}
    if field_names is None or not required.issubset(field_names):
        raise ValueError(f"{path}: not a sweep CSV (missing columns)")
    out = []
    for row in rows:
        out.append({
            "policy": row["policy"],
            "k": int(row["k"]),
            "r": float(row["r"]),
            "rho_A": float(row["rho_A"]),
            "replicates": int(row["replicates"]),
            "mean_p_C": float(row["mean_p_C"]),
            "sd_p_C": float(row["sd_p_C"]),
            "mean_p_AC": float(row["mean_p_AC"]),
            "sd_p_AC": float(row["sd_p_AC"]),
            "mean_coop_freq": float(row["mean_coop_freq"]),
            "r_critical": float(row["r_critical"]) if row["r_critical"] else None,
        })
    return out


# ---------------------------------------------------------------------------
# flat key=value configuration
# ---------------------------------------------------------------------------

_REQUIRED = object()

# key -> (type tag, default); _REQUIRED marks keys without defaults
SWEEP_CONFIG_SCHEMA = {
    "policy": ("policy", _REQUIRED),
    "r_values": ("float_list", _REQUIRED),
    "rho_values": ("float_list", _REQUIRED),
    "replicates": ("int", 100),
    "master_seed": ("int", 0),
    "parallelism": ("int", 1),
    "k": ("int", 4),
    "mu": ("float", 0.01),
    "generations": ("int", 10000),
    "grid_width": ("int", 32),
    "grid_height": ("int", 32),
    "games_per_focal": ("int", None),
    "random_init": ("bool", False),
    "mimic_independent": ("bool", False),
    "run_csv_dir": ("str", None),
}


def _convert(kind: str, raw: str):
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind == "policy":
        return Policy.from_name(raw)
    if kind == "float_list":
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not parts:
            raise ValueError("expected a comma-separated list of numbers")
        return tuple(float(p) for p in parts)
    if kind == "str":
        return raw
    raise AssertionError(f"unknown schema kind {kind}")


def parse_kv_text(text: str, schema: dict) -> dict:
    """Parse flat key=value lines against a schema; errors carry line numbers."""
    values = {}
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in schema:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        kind, _default = schema[key]
        try:
            value = _convert(kind, raw)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {key}: {exc}") from None
        if key in ("rho_values", "rho", "rho_A") and kind in ("float_list", "float"):
            vals = value if isinstance(value, tuple) else (value,)
            for v in vals:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(
                        f"line {lineno}: {key} entry out of [0,1]: {v:g}"
                    )
        values[key] = value
    return values


def build_sweep_config(text: str, overrides: dict | None = None) -> SweepConfig:
    """Parse config text, apply typed overrides, fill defaults, validate."""
    values = parse_kv_text(text, SWEEP_CONFIG_SCHEMA)
    if overrides:
        for key, value in overrides.items():
            if key not in SWEEP_CONFIG_SCHEMA:
                raise ValueError(f"unknown config key {key!r}")
            if value is not None:
                values[key] = value
    missing = [key for key, (_, default) in SWEEP_CONFIG_SCHEMA.items()
               if default is _REQUIRED and key not in values]
    if missing:
        raise ValueError(f"missing required config key(s): {', '.join(missing)}")
    for key, (_, default) in SWEEP_CONFIG_SCHEMA.items():
        if key not in values and default is not _REQUIRED:
            values[key] = default

    base = SimParams(
        k=values["k"],
        mu=values["mu"],
        generations=values["generations"],
        grid_width=values["grid_width"],
        grid_height=values["grid_height"],
        games_per_focal=values["games_per_focal"],
        random_init=values["random_init"],
        mimic_independent=values["mimic_independent"],
        policy=values["policy"],
        rho_a=0.0,
        seed=0,
    )
    return SweepConfig(
        base=base,
        policy=values["policy"],
        r_values=values["r_values"],
        rho_values=values["rho_values"],
        replicates=values["replicates"],
        master_seed=values["master_seed"],
        parallelism=values["parallelism"],
        run_csv_dir=values["run_csv_dir"],
    )


def parse_config(text: str) -> SweepConfig:
    """Parse a flat key=value sweep configuration; missing keys take defaults."""
    return build_sweep_config(text, None)
