"""Resolution of a single focal public goods game.

One game involves a focal player and k peripheral slots.  Each peripheral
slot is independently occupied by an automated agent with probability
rho_a, otherwise by the neighboring player.  Everyone acts once
(cooperate/defect), the pot of contributions is multiplied by r and split
k+1 ways, and only the focal payoff is ever computed.

Payoffs in units of the ante:
    cooperator: r * (n_c + 1) / (k + 1) - 1
    defector:   r * n_c / (k + 1)
with n_c the number of cooperating peripheral participants.

Draw discipline: play_focal_game consumes exactly 1+k uniforms per call
(one focal draw plus one per slot; role and action share a single uniform
via its conditional remainder), so replay from a saved stream position is
exact for any (k, policy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Action, Genome, Policy, Role, RoleMask, SimParams

__all__ = [
    "GameOutcome",
    "payoff_cooperator",
    "payoff_defector",
    "sample_role_mask",
    "resolve_peripheral_action",
    "play_focal_game",
    "play_focal_game_batch",
    "expected_focal_payoff_oracle",
    "ORACLE_MAX_K",
]

# Exhaustive enumeration is 2^(2k+1) weighted terms; cap the blowup.
ORACLE_MAX_K = 12


def _check_nc_k_r(n_c, k, r) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not isinstance(n_c, (int, np.integer)):
        raise ValueError(f"n_c must be an integer, got {n_c!r}")
    if not 0 <= n_c <= k:
        raise ValueError(f"n_c out of [0, k={k}]: {n_c}")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")


def payoff_cooperator(n_c: int, k: int, r: float) -> float:
    """Focal payoff when cooperating alongside n_c cooperating peripherals."""
    _check_nc_k_r(n_c, k, r)
    return r * (n_c + 1) / (k + 1) - 1


def payoff_defector(n_c: int, k: int, r: float) -> float:
    """Focal payoff when defecting alongside n_c cooperating peripherals."""
    _check_nc_k_r(n_c, k, r)
    return r * n_c / (k + 1)


def sample_role_mask(k: int, rho_a: float, rng: np.random.Generator) -> RoleMask:
    """Draw the k peripheral roles; each slot is an agent w.p. rho_a.

    Consumes exactly k uniforms.  rho_a=0 and rho_a=1 are exact, not
    statistical.
    """
    if not 0.0 <= rho_a <= 1.0:
        raise ValueError(f"rho_A out of [0,1]: {rho_a}")
    u = rng.random(k)
    return tuple(Role.AGENT if u[s] < rho_a else Role.PLAYER for s in range(k))


def resolve_peripheral_action(
    slot_role: Role,
    policy: Policy,
    focal_genome: Genome,
    focal_action: Action,
    peripheral_genome: Genome,
    rng: np.random.Generator,
) -> Action:
    """Resolve one peripheral slot's move.

    Player slots cooperate w.p. the peripheral genome's p_c (one draw).
    Agent slots follow the policy: mandatory cooperation always cooperates
    (no draw); player-controlled cooperates w.p. the focal p_ac (one
    draw); mimic copies the focal player's realized action (no draw).
    """
    if slot_role is Role.PLAYER:
        return Action.COOPERATE if rng.random() < peripheral_genome.p_c else Action.DEFECT
    if policy is Policy.MANDATORY_COOPERATION:
        return Action.COOPERATE
    if policy is Policy.PLAYER_CONTROLLED:
        return Action.COOPERATE if rng.random() < focal_genome.p_ac else Action.DEFECT
    if policy is Policy.MIMIC:
        return focal_action
    raise RuntimeError("internal logic error: agent slot under baseline policy")


@dataclass(frozen=True)
class GameOutcome:
    """Everything observable from one focal game."""

    focal_action: Action
    focal_payoff: float
    n_cooperators_peripheral: int
    n_agent_slots: int
    actions_all: tuple  # k+1 Actions, focal first


def play_focal_game(
    focal_genome: Genome,
    peripheral_genomes,
    params: SimParams,
    rng: np.random.Generator,
) -> GameOutcome:
    """Play one focal game and score only the focal player.

    Consumes exactly 1+k uniforms: the focal action draw, then one per
    slot.  A slot's uniform u decides its role (agent iff u < rho_a) and,
    through the conditional remainder, the occupant's action, so the draw
    count never depends on the sampled mask.

    With params.mimic_independent set, mimic agents redraw from the focal
    p_c instead of copying the realized focal action.
    """
    k = params.k
    if len(peripheral_genomes) != k:
        raise ValueError(
            f"expected {k} peripheral genomes, got {len(peripheral_genomes)}"
        )
    rho = params.rho_a
    policy = params.policy
    inv_rho = 1.0 / rho if rho > 0.0 else 0.0
    inv_1m = 1.0 / (1.0 - rho) if rho < 1.0 else 0.0

    u = rng.random(1 + k)
    focal_coop = bool(u[0] < focal_genome.p_c)
    focal_action = Action.COOPERATE if focal_coop else Action.DEFECT

    actions = []
    n_agents = 0
    n_c = 0
    for s in range(k):
        us = u[1 + s]
        if us < rho:
            n_agents += 1
            if policy is Policy.MANDATORY_COOPERATION:
                coop = True
            elif policy is Policy.PLAYER_CONTROLLED:
                coop = bool(us * inv_rho < focal_genome.p_ac)
            elif policy is Policy.MIMIC:
                if params.mimic_independent:
                    coop = bool(us * inv_rho < focal_genome.p_c)
                else:
                    coop = focal_coop
            else:
                raise RuntimeError(
                    "internal logic error: agent slot under baseline policy"
                )
        else:
            coop = bool((us - rho) * inv_1m < peripheral_genomes[s].p_c)
        actions.append(Action.COOPERATE if coop else Action.DEFECT)
        if coop:
            n_c += 1

    if focal_coop:
        payoff = payoff_cooperator(n_c, k, params.r)
    else:
        payoff = payoff_defector(n_c, k, params.r)
    return GameOutcome(
        focal_action=focal_action,
        focal_payoff=payoff,
        n_cooperators_peripheral=n_c,
        n_agent_slots=n_agents,
        actions_all=(focal_action, *actions),
    )


def play_focal_game_batch(
    focal_genome: Genome,
    peripheral_genomes,
    params: SimParams,
    rng: np.random.Generator,
    n_games: int,
) -> np.ndarray:
    """Focal payoffs of n_games games, identical stream-for-stream to
    n_games sequential play_focal_game calls.  Compiled; used for Monte
    Carlo comparison against the enumeration oracle."""
    k = params.k
    if len(peripheral_genomes) != k:
        raise ValueError(
            f"expected {k} peripheral genomes, got {len(peripheral_genomes)}"
        )
    per_pc = np.array([g.p_c for g in peripheral_genomes], dtype=np.float64)
    return _kernels.game_batch_kernel(
        n_games,
        float(focal_genome.p_c),
        float(focal_genome.p_ac),
        per_pc,
        int(params.policy),
        float(params.r),
        float(params.rho_a),
        bool(params.mimic_independent),
        rng,
    )


def expected_focal_payoff_oracle(
    focal_genome: Genome,
    peripheral_genomes,
    params: SimParams,
) -> float:
    """Exact expected focal payoff by exhaustive enumeration.

    Sums over both focal actions, all 2^k role masks, and all 2^k
    peripheral action tuples, weighting each term by its probability.  No
    sampling anywhere; serves as the independent ground truth for the
    Monte Carlo path.  Guarded to k <= ORACLE_MAX_K.
    """
    k = params.k
    if k > ORACLE_MAX_K:
        raise ValueError(f"oracle limited to k <= {ORACLE_MAX_K}, got k={k}")
    if len(peripheral_genomes) != k:
        raise ValueError(
            f"expected {k} peripheral genomes, got {len(peripheral_genomes)}"
        )
    r, rho = params.r, params.rho_a
    policy = params.policy
    per_pc = np.array([g.p_c for g in peripheral_genomes], dtype=np.float64)

    m = 1 << k
    # bits[i, s] = bit s of i; reused for role masks and action tuples
    bits = ((np.arange(m)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.float64)
    mask_weight = np.prod(bits * rho + (1.0 - bits) * (1.0 - rho), axis=1)
    n_c = bits.sum(axis=1)

    total = 0.0
    for focal_coop, focal_weight in ((1.0, focal_genome.p_c),
                                     (0.0, 1.0 - focal_genome.p_c)):
        if policy is Policy.MANDATORY_COOPERATION:
            agent_q = 1.0
        elif policy is Policy.PLAYER_CONTROLLED:
            agent_q = focal_genome.p_ac
        elif policy is Policy.MIMIC:
            agent_q = focal_genome.p_c if params.mimic_independent else focal_coop
        else:
            agent_q = 0.0  # baseline: agent masks carry zero weight
        payoff = r * (n_c + focal_coop) / (k + 1) - focal_coop
        for mask in range(m):
            if mask_weight[mask] == 0.0:
                continue
            slot_q = np.where(bits[mask] == 1.0, agent_q, per_pc)
            tuple_p = np.prod(bits * slot_q + (1.0 - bits) * (1.0 - slot_q), axis=1)
            total += focal_weight * mask_weight[mask] * float(tuple_p @ payoff)
    return total
