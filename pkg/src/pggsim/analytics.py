"""Closed-form predictions, lineage reconstruction, and curve analysis.

The central closed form: when agent slots mimic the focal player's
realized action at density rho_a, the payoff advantage of cooperating is

    gain(r) = r * (rho_a * k + 1) / (k + 1) - 1

independent of the peripheral composition, so cooperation pays exactly
when r exceeds (k + 1) / (rho_a * k + 1).
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .model import Genome
from .evolution import MutationLog, RunResult

__all__ = [
    "LodSeries",
    "ResponseCurve",
    "CriticalPoint",
    "ConvergenceStats",
    "dilemma_bounds",
    "predicted_critical_r",
    "mimic_cooperation_gain",
    "DeltaGenomeHistory",
    "SnapshotGenomeHistory",
    "reconstruct_lod",
    "lod_from_run",
    "lod_statistic",
    "extract_critical_r",
    "convergence_statistic",
]


def dilemma_bounds(k: int) -> tuple:
    """The (low, high) synergy range where the social dilemma exists.

    Below low=1 even universal cooperation loses; above high=k+1 a
    cooperator out-earns a defector in the same group and the dilemma
    vanishes.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return (1.0, float(k + 1))


def predicted_critical_r(k: int, rho_a: float) -> float:
    """Synergy threshold above which cooperating pays under mimic agents."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not 0.0 <= rho_a <= 1.0:
        raise ValueError(f"rho_A out of [0,1]: {rho_a}")
    return (k + 1) / (rho_a * k + 1)


def mimic_cooperation_gain(k: int, rho_a: float, n_c: float, r: float) -> float:
    """Focal payoff difference (cooperate minus defect) with mimic agents.

    Each peripheral slot is an agent w.p. rho_a and copies the focal
    action; n_c of the k slots would cooperate as players.  Computed from
    the two payoff formulas with the expected effective cooperator counts,
    not from the simplified closed form, so the sign flip at
    predicted_critical_r is a genuine consistency check.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not 0.0 <= rho_a <= 1.0:
        raise ValueError(f"rho_A out of [0,1]: {rho_a}")
    if not 0 <= n_c <= k:
        raise ValueError(f"n_c out of [0, k={k}]: {n_c}")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    n_eff_coop = n_c + rho_a * (k - n_c)   # agents join the cooperation
    n_eff_defect = (1.0 - rho_a) * n_c     # agents defect along
    p_coop = r * (n_eff_coop + 1) / (k + 1) - 1
    p_defect = r * n_eff_defect / (k + 1)
    return p_coop - p_defect


# ---------------------------------------------------------------------------
# line of descent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LodSeries:
    """Genomes along one line of descent, root (generation 0) first.

    The final truncation_fraction of entries is reserved: recent history
    may predate coalescence of the population's ancestry, so analysis
    windows must stay clear of it.
    """

    genomes: tuple
    truncation_fraction: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 <= self.truncation_fraction < 1.0:
            raise ValueError(
                f"truncation_fraction out of [0,1): {self.truncation_fraction}"
            )

    def __len__(self) -> int:
        return len(self.genomes)


@dataclass(frozen=True)
class DeltaGenomeHistory:
    """Genome lookup backed by initial genomes plus a mutation delta log."""

    initial_genomes: tuple
    log: MutationLog
    _events: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        for j in range(len(self.log)):
            key = (int(self.log.generation[j]), int(self.log.index[j]))
            self._events[key] = Genome(float(self.log.p_c[j]), float(self.log.p_ac[j]))

    def override(self, generation: int, index: int):
        """Genome born at (generation, index) if it mutated, else None."""
        return self._events.get((generation, index))


@dataclass(frozen=True)
class SnapshotGenomeHistory:
    """Genome lookup backed by full per-generation genome snapshots."""

    snapshots: tuple  # snapshots[t][i] = Genome of individual i at generation t

    @property
    def initial_genomes(self):
        return self.snapshots[0]

    def override(self, generation: int, index: int):
        return self.snapshots[generation][index]


def reconstruct_lod(ancestry, final_pick: int, genome_history) -> LodSeries:
    """Walk parent links from one final individual back to generation 0.

    ancestry[t][i] is the parent (at generation t) of individual i at
    generation t+1.  genome_history provides initial_genomes plus an
    override(generation, index) lookup (delta or snapshot backed).
    Returns the root-first genome sequence, one entry per generation.
    """
    ancestry = np.asarray(ancestry)
    if ancestry.ndim != 2:
        if ancestry.size == 0:
            ancestry = ancestry.reshape(0, len(genome_history.initial_genomes))
        else:
            raise ValueError("ancestry must be 2-dimensional")
    gens, n = ancestry.shape
    if not 0 <= final_pick < n:
        raise ValueError(f"final_pick out of [0,{n}): {final_pick}")

    chain = np.empty(gens + 1, dtype=np.int64)
    chain[gens] = final_pick
    for t in range(gens - 1, -1, -1):
        parent = int(ancestry[t][chain[t + 1]])
        if not 0 <= parent < n:
            raise ValueError(
                f"broken ancestry link at generation {t}: parent {parent}"
            )
        chain[t] = parent

    genomes = [genome_history.initial_genomes[chain[0]]]
    for t in range(1, gens + 1):
        override = genome_history.override(t, int(chain[t]))
        genomes.append(override if override is not None else genomes[-1])
    return LodSeries(genomes=tuple(genomes))


def lod_from_run(run: RunResult, final_pick: int) -> LodSeries:
    """Reconstruct a line of descent directly from a RunResult."""
    history = DeltaGenomeHistory(run.initial_genomes, run.mutation_log)
    return reconstruct_lod(run.ancestry, final_pick, history)


def lod_statistic(lod: LodSeries, window: tuple = (0.5, 0.75)) -> float:
    """Mean p_c over the window [start*T, end*T) of the lineage.

    The window must not overlap the reserved tail, i.e. end must not
    exceed 1 - truncation_fraction.
    """
    start, end = window
    limit = 1.0 - lod.truncation_fraction
    if not 0.0 <= start < end:
        raise ValueError(f"invalid window {window}")
    if end > limit:
        raise ValueError(
            f"window {window} overlaps the truncated tail (end > {limit})"
        )
    t = len(lod.genomes)
    lo, hi = int(start * t), int(end * t)
    if hi <= lo:
        raise ValueError(f"window {window} selects no lineage entries (length {t})")
    selected = lod.genomes[lo:hi]
    return sum(g.p_c for g in selected) / len(selected)


# ---------------------------------------------------------------------------
# response curves and critical points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResponseCurve:
    """Measured (r, value) points, strictly ascending in r, values in [0,1]."""

    points: tuple

    def __post_init__(self) -> None:
        pts = tuple((float(r), float(v)) for r, v in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) == 0:
            raise ValueError("empty response curve")
        for (r1, v1), (r2, _) in zip(pts, pts[1:]):
            if not r2 > r1:
                raise ValueError(f"curve r values not strictly ascending at r={r2}")
        for r, v in pts:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"curve value out of [0,1] at r={r}: {v}")


@dataclass(frozen=True)
class CriticalPoint:
    """Interpolated synergy at which a response curve crosses a threshold."""

    rho_a: float | None
    r_critical: float | None


def extract_critical_r(curve, threshold: float = 0.5,
                       rho_a: float | None = None) -> CriticalPoint:
    """First upward crossing of threshold, linearly interpolated.

    Scans adjacent point pairs for v1 < threshold <= v2 and interpolates
    in r.  Returns r_critical=None when the curve never crosses.
    """
    if not isinstance(curve, ResponseCurve):
        curve = ResponseCurve(tuple(curve))
    if len(curve.points) < 2:
        raise ValueError("need at least 2 curve points")
    for (r1, v1), (r2, v2) in zip(curve.points, curve.points[1:]):
        if v1 < threshold <= v2:
            r_crit = r1 + (r2 - r1) * (threshold - v1) / (v2 - v1)
            return CriticalPoint(rho_a=rho_a, r_critical=r_crit)
    return CriticalPoint(rho_a=rho_a, r_critical=None)


ConvergenceStats = namedtuple("ConvergenceStats", ["p_c", "p_ac", "coop_frequency"])


def convergence_statistic(run: RunResult, fraction: float = 0.1) -> ConvergenceStats:
    """Population means averaged over the final fraction of generations.

    The default final-10% window stands in for "after convergence" when
    condensing a run to a single point on a response curve.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction out of (0,1]: {fraction}")
    records = run.records
    if not records:
        raise ValueError("run has no recorded generations")
    n_tail = max(1, int(round(fraction * len(records))))
    tail = records[-n_tail:]
    return ConvergenceStats(
        p_c=sum(rec.mean_p_c for rec in tail) / n_tail,
        p_ac=sum(rec.mean_p_ac for rec in tail) / n_tail,
        coop_frequency=sum(rec.coop_frequency for rec in tail) / n_tail,
    )
