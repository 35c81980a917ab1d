"""Generational loop: placement, scoring, selection, mutation, ancestry.

Two equivalent execution paths exist and are tested against each other
draw for draw:

  * step_generation composes the public operations (score_generation,
    fitness_transform, roulette_select, mutate) in plain python/numpy;
  * run_simulation drives the compiled kernel in _kernels.py.

Both follow the frozen draw protocol documented in _kernels, so a full
run equals iterating step_generation exactly, float for float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import Genome, Policy, SimParams, neighbor_table, validate_params

__all__ = [
    "PopulationState",
    "GenerationRecord",
    "MutationLog",
    "RunResult",
    "initialize_population",
    "score_generation",
    "fitness_transform",
    "roulette_select",
    "mutate",
    "step_generation",
    "run_simulation",
]

# neighbor tables are small and immutable by convention; cache per shape
_NBR_CACHE: dict = {}


def _nbr_table(params: SimParams) -> np.ndarray:
    key = (params.grid_width, params.grid_height, params.k)
    table = _NBR_CACHE.get(key)
    if table is None:
        table = neighbor_table(*key)
        _NBR_CACHE[key] = table
    return table


@dataclass
class PopulationState:
    """Population snapshot plus the live random stream."""

    genomes: tuple  # population_size Genomes
    generation: int
    rng: np.random.Generator

    def clone(self) -> "PopulationState":
        """Deep copy, including the exact random stream position."""
        bg = type(self.rng.bit_generator)()
        bg.state = self.rng.bit_generator.state
        return PopulationState(self.genomes, self.generation, np.random.Generator(bg))


@dataclass(frozen=True)
class GenerationRecord:
    """Per-generation observables, captured before selection."""

    generation: int
    mean_p_c: float
    mean_p_ac: float
    coop_frequency: float
    parent_index: np.ndarray  # int32, parent of each next-generation member


@dataclass(frozen=True)
class MutationLog:
    """Sparse genome-delta log: one entry per offspring that mutated.

    generation is the offspring's generation (1-based relative to init);
    p_c/p_ac are the offspring's resulting genes.  Together with the
    initial genomes and the parent matrix this reconstructs any genome in
    the run's history.
    """

    generation: np.ndarray  # int32
    index: np.ndarray       # int32
    p_c: np.ndarray         # float64
    p_ac: np.ndarray        # float64

    def __len__(self) -> int:
        return len(self.generation)


@dataclass(frozen=True)
class RunResult:
    """Everything recorded from one simulation run."""

    params: SimParams
    records: list  # GenerationRecord per generation
    final_genomes: tuple
    ancestry: np.ndarray          # (generations, population_size) int32
    initial_genomes: tuple
    mutation_log: MutationLog


def initialize_population(params: SimParams) -> PopulationState:
    """Generation-0 population with a stream seeded from params.seed.

    Default: every genome is exactly (0.5, 0.5).  With params.random_init
    both genes are drawn uniformly (one block of 2N uniforms, p_c then
    p_ac per individual).
    """
    rng = np.random.default_rng(params.seed)
    n = params.population_size
    if params.random_init:
        vals = rng.random(2 * n)
        genomes = tuple(
            Genome(float(vals[2 * i]), float(vals[2 * i + 1])) for i in range(n)
        )
    else:
        genomes = tuple(Genome(0.5, 0.5) for _ in range(n))
    return PopulationState(genomes=genomes, generation=0, rng=rng)


def _score_arrays(pc, pac, params: SimParams, rng) -> tuple:
    """Vectorized scoring pass; mirrors the kernel's draw order exactly.

    Returns (scores indexed by player, coop_frequency).
    """
    n = pc.shape[0]
    k = params.k
    games = params.games_per_focal
    rho = params.rho_a
    policy = params.policy
    nbr = _nbr_table(params)

    # 1. placement permutation: perm[cell] = player index
    pb = rng.random(n - 1)
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(pb[n - 1 - i] * (i + 1))
        perm[i], perm[j] = perm[j], perm[i]

    # 2. one uniform block for all games, [focal, slot 0..k-1] per game
    gb = rng.random(n * games * (1 + k)).reshape(n, games, 1 + k)
    fpc = pc[perm]
    fpac = pac[perm]
    nbr_pc = pc[perm[nbr]]  # (n, k): p_c of each cell's neighbors
    fc = (gb[:, :, 0] < fpc[:, None]).astype(np.int64)  # (n, games)
    us = gb[:, :, 1:]  # (n, games, k)

    inv_rho = 1.0 / rho if rho > 0.0 else 0.0
    inv_1m = 1.0 / (1.0 - rho) if rho < 1.0 else 0.0
    if policy is Policy.BASELINE:
        slot_coop = us < nbr_pc[:, None, :]
    else:
        agent = us < rho
        player_coop = (us - rho) * inv_1m < nbr_pc[:, None, :]
        if policy is Policy.MANDATORY_COOPERATION:
            agent_coop = np.ones_like(agent)
        elif policy is Policy.PLAYER_CONTROLLED:
            agent_coop = us * inv_rho < fpac[:, None, None]
        elif params.mimic_independent:
            agent_coop = us * inv_rho < fpc[:, None, None]
        else:
            agent_coop = np.broadcast_to(fc[:, :, None] == 1, us.shape)
        slot_coop = np.where(agent, agent_coop, player_coop)
    n_c = slot_coop.sum(axis=2, dtype=np.int64)  # (n, games)

    payoff = params.r * (n_c + fc) / (k + 1) - fc
    cell_scores = np.zeros(n)
    for g in range(games):  # sequential per-game accumulation, kernel order
        cell_scores += payoff[:, g]
    scores = np.empty(n)
    scores[perm] = cell_scores

    n_coop = int(n_c.sum()) + int(fc.sum())
    coop_frequency = n_coop / (n * games * (k + 1))
    return scores, coop_frequency


def score_generation(state: PopulationState, params: SimParams) -> tuple:
    """Score every player over its games_per_focal focal games.

    Players are permuted onto the torus afresh; each plays games_per_focal
    games as the focal member against its k fixed neighbors for this
    generation; only focal payoffs accumulate.  Returns (scores list,
    coop_frequency over all k+1 actions of all games).  Advances the
    stream of state.rng.
    """
    pc = np.array([g.p_c for g in state.genomes])
    pac = np.array([g.p_ac for g in state.genomes])
    scores, coop_frequency = _score_arrays(pc, pac, params, state.rng)
    return [float(s) for s in scores], coop_frequency


def fitness_transform(scores, k: int, games_per_focal: int):
    """Shift scores into non-negative roulette weights.

    Per-game payoff exceeds -1 strictly, so score + games_per_focal > 0;
    the all-zero guard covers degenerate inputs only.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if games_per_focal < 1:
        raise ValueError(f"games_per_focal must be >= 1, got {games_per_focal}")
    weights = [s + games_per_focal for s in scores]
    if all(w == 0.0 for w in weights):
        return [1.0] * len(weights)
    return weights


def roulette_select(weights, count: int, rng: np.random.Generator):
    """count independent fitness-proportional draws, with replacement."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ValueError("empty weights")
    if (w < 0).any():
        raise ValueError("negative weight in roulette wheel")
    cum = np.cumsum(w)
    if not cum[-1] > 0.0:
        raise ValueError("all-zero weights")
    u = rng.random(count) * cum[-1]
    idx = np.minimum(np.searchsorted(cum, u, side="right"), w.size - 1)
    return [int(i) for i in idx]


def mutate(genome: Genome, mu: float, rng: np.random.Generator) -> Genome:
    """Redraw each gene independently w.p. mu from Uniform[0,1].

    Draw order: p_c flag, p_c value if flagged, p_ac flag, p_ac value if
    flagged.  The two flag draws are always consumed, so the stream
    position after a call depends only on which genes mutated.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu out of [0,1]: {mu}")
    p_c = genome.p_c
    p_ac = genome.p_ac
    if rng.random() < mu:
        p_c = float(rng.random())
    if rng.random() < mu:
        p_ac = float(rng.random())
    return Genome(p_c, p_ac)


def step_generation(state: PopulationState, params: SimParams) -> tuple:
    """One full generation: score, shift, select, mutate.

    Returns (next state, record).  The record holds pre-selection means
    and the parent index of every next-generation member.
    """
    genomes = state.genomes
    n = len(genomes)
    mean_p_c = sum(g.p_c for g in genomes) / n
    mean_p_ac = sum(g.p_ac for g in genomes) / n

    scores, coop_frequency = score_generation(state, params)
    weights = fitness_transform(scores, params.k, params.games_per_focal)
    parents = roulette_select(weights, n, state.rng)
    offspring = tuple(mutate(genomes[p], params.mu, state.rng) for p in parents)

    record = GenerationRecord(
        generation=state.generation,
        mean_p_c=mean_p_c,
        mean_p_ac=mean_p_ac,
        coop_frequency=coop_frequency,
        parent_index=np.asarray(parents, dtype=np.int32),
    )
    next_state = PopulationState(
        genomes=offspring, generation=state.generation + 1, rng=state.rng
    )
    return next_state, record


def run_simulation(params: SimParams) -> RunResult:
    """Initialize and run params.generations generations (compiled path).

    Bit-identical to iterating step_generation from initialize_population.
    The mutation delta log is captured for lineage reconstruction; if the
    preallocated log overflows, the run is repeated from the same stream
    position with exact capacity.
    """
    validate_params(params)
    state0 = initialize_population(params)
    initial_genomes = state0.genomes
    n = params.population_size
    gens = params.generations
    rng = state0.rng
    pc0 = np.array([g.p_c for g in initial_genomes])
    pac0 = np.array([g.p_ac for g in initial_genomes])
    nbr = _nbr_table(params)

    expected_mut = 2.0 * n * gens * params.mu
    cap = int(min(2 * n * gens, expected_mut + 10.0 * math.sqrt(expected_mut) + 64))
    rng_state = rng.bit_generator.state
    while True:
        pc = pc0.copy()
        pac = pac0.copy()
        (mean_pc, mean_pac, coop_freq, parents,
         mut_t, mut_i, mut_pc, mut_pac, n_mut) = _kernels.evolve_kernel(
            pc, pac, nbr,
            params.games_per_focal, int(params.policy),
            float(params.r), float(params.rho_a), float(params.mu),
            gens, bool(params.mimic_independent), rng, cap,
        )
        if n_mut <= cap:
            break
        cap = n_mut  # deterministic rerun with exact capacity
        rng.bit_generator.state = rng_state

    records = [
        GenerationRecord(
            generation=t,
            mean_p_c=float(mean_pc[t]),
            mean_p_ac=float(mean_pac[t]),
            coop_frequency=float(coop_freq[t]),
            parent_index=parents[t],
        )
        for t in range(gens)
    ]
    final_genomes = tuple(
        Genome(float(pc[i]), float(pac[i])) for i in range(n)
    )
    log = MutationLog(
        generation=mut_t[:n_mut].copy(),
        index=mut_i[:n_mut].copy(),
        p_c=mut_pc[:n_mut].copy(),
        p_ac=mut_pac[:n_mut].copy(),
    )
    return RunResult(
        params=params,
        records=records,
        final_genomes=final_genomes,
        ancestry=parents,
        initial_genomes=initial_genomes,
        mutation_log=log,
    )
