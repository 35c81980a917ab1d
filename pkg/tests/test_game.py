"""Single-game resolution: payoffs, roles, draw discipline, oracle."""

import numpy as np
import pytest
from scipy import stats

from pggsim import (
    Action,
    Genome,
    Policy,
    Role,
    SimParams,
    expected_focal_payoff_oracle,
    payoff_cooperator,
    payoff_defector,
    play_focal_game,
    play_focal_game_batch,
    resolve_peripheral_action,
    sample_role_mask,
)

C, D = Action.COOPERATE, Action.DEFECT


def clone(rng):
    other = np.random.default_rng(0)
    other.bit_generator.state = rng.bit_generator.state
    return other


def advanced(rng, n):
    c = clone(rng)
    c.random(n)
    return c.bit_generator.state


# ---------------------------------------------------------------- payoffs

def test_payoff_values():
    assert payoff_cooperator(2, 4, 5.0) == 2.0
    assert payoff_cooperator(4, 4, 1.0) == 0.0
    assert payoff_cooperator(0, 4, 5.0) == 0.0
    assert payoff_defector(3, 4, 5.0) == 3.0
    assert payoff_defector(0, 4, 5.0) == 0.0
    assert payoff_defector(4, 4, 5.0) == 4.0


def test_payoff_argument_errors():
    for fn in (payoff_cooperator, payoff_defector):
        with pytest.raises(ValueError):
            fn(-1, 4, 5.0)
        with pytest.raises(ValueError):
            fn(5, 4, 5.0)
        with pytest.raises(ValueError):
            fn(1.5, 4, 5.0)
        with pytest.raises(ValueError):
            fn(2, 0, 5.0)
        with pytest.raises(ValueError):
            fn(2, 4, 0.0)


def test_payoff_identity():
    # P_D - P_C = 1 - r/(k+1) for every configuration
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        k = int(rng.integers(1, 13))
        n_c = int(rng.integers(0, k + 1))
        r = float(rng.uniform(0.1, 20.0))
        gap = payoff_defector(n_c, k, r) - payoff_cooperator(n_c, k, r)
        assert abs(gap - (1.0 - r / (k + 1))) < 1e-12
        if r < k + 1:
            assert gap > 0.0
        elif r > k + 1:
            assert gap < 0.0


def test_full_cooperation_dominance():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        k = int(rng.integers(1, 13))
        r = float(rng.uniform(0.1, 20.0))
        gain = payoff_cooperator(k, k, r) - payoff_defector(0, k, r)
        assert abs(gain - (r - 1.0)) < 1e-12
        assert (gain > 0.0) == (r > 1.0)


def test_payoff_bounds():
    for k in (1, 4, 9):
        for r in (0.5, 2.0, k + 1.0, 8.0):
            for n_c in range(k + 1):
                assert -1.0 < payoff_cooperator(n_c, k, r) <= r - 1.0 + 1e-12
                assert 0.0 <= payoff_defector(n_c, k, r) <= r * k / (k + 1) + 1e-12


# ------------------------------------------------------------- role masks

def test_role_mask_degenerate_densities():
    rng = np.random.default_rng(0)
    for _ in range(200):
        assert sample_role_mask(4, 0.0, rng) == (Role.PLAYER,) * 4
        assert sample_role_mask(4, 1.0, rng) == (Role.AGENT,) * 4


def test_role_mask_draw_count():
    rng = np.random.default_rng(3)
    expect = advanced(rng, 7)
    sample_role_mask(7, 0.3, rng)
    assert rng.bit_generator.state == expect


def test_role_mask_binomial_mean():
    rng = np.random.default_rng(42)
    n = 20_000
    counts = [sum(role is Role.AGENT for role in sample_role_mask(4, 0.5, rng))
              for _ in range(n)]
    # Binomial(4, 0.5): mean 2, variance 1
    assert abs(np.mean(counts) - 2.0) < 3.0 / np.sqrt(n)


def test_role_mask_range_check():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="rho_A"):
        sample_role_mask(4, 1.2, rng)


# -------------------------------------------------- peripheral resolution

def test_resolve_agent_policies():
    rng = np.random.default_rng(0)
    g = Genome(0.5, 0.5)
    assert resolve_peripheral_action(
        Role.AGENT, Policy.MANDATORY_COOPERATION, g, D, g, rng) is C
    assert resolve_peripheral_action(Role.AGENT, Policy.MIMIC, g, D, g, rng) is D
    assert resolve_peripheral_action(Role.AGENT, Policy.MIMIC, g, C, g, rng) is C
    hi = Genome(0.5, 1.0)
    lo = Genome(0.5, 0.0)
    assert resolve_peripheral_action(
        Role.AGENT, Policy.PLAYER_CONTROLLED, hi, D, g, rng) is C
    assert resolve_peripheral_action(
        Role.AGENT, Policy.PLAYER_CONTROLLED, lo, D, g, rng) is D


def test_resolve_player_follows_own_genome():
    rng = np.random.default_rng(0)
    focal = Genome(0.0, 0.0)
    assert resolve_peripheral_action(
        Role.PLAYER, Policy.MIMIC, focal, C, Genome(1.0), rng) is C
    assert resolve_peripheral_action(
        Role.PLAYER, Policy.MIMIC, focal, C, Genome(0.0), rng) is D


def test_resolve_draw_counts():
    g = Genome(0.5, 0.5)
    cases = [
        (Role.AGENT, Policy.MANDATORY_COOPERATION, 0),
        (Role.AGENT, Policy.MIMIC, 0),
        (Role.AGENT, Policy.PLAYER_CONTROLLED, 1),
        (Role.PLAYER, Policy.BASELINE, 1),
        (Role.PLAYER, Policy.MIMIC, 1),
    ]
    for role, policy, n_draws in cases:
        rng = np.random.default_rng(11)
        expect = advanced(rng, n_draws)
        resolve_peripheral_action(role, policy, g, C, g, rng)
        assert rng.bit_generator.state == expect, (role, policy)


def test_resolve_agent_under_baseline_is_internal_error():
    rng = np.random.default_rng(0)
    g = Genome(0.5)
    with pytest.raises(RuntimeError):
        resolve_peripheral_action(Role.AGENT, Policy.BASELINE, g, C, g, rng)


# ------------------------------------------------------------ focal games

def test_play_deterministic_examples():
    rng = np.random.default_rng(0)
    params = SimParams(k=4, r=5.0, rho_a=0.0)
    out = play_focal_game(Genome(1.0), [Genome(1.0)] * 4, params, rng)
    assert out.focal_payoff == 4.0
    assert out.focal_action is C
    assert out.actions_all == (C, C, C, C, C)
    assert out.n_agent_slots == 0

    out = play_focal_game(Genome(0.0), [Genome(0.0)] * 4, params, rng)
    assert out.focal_payoff == 0.0
    assert out.actions_all == (D, D, D, D, D)

    # focal cooperates with exactly two cooperating peripherals
    out = play_focal_game(
        Genome(1.0), [Genome(1.0), Genome(1.0), Genome(0.0), Genome(0.0)],
        params, rng)
    assert out.focal_payoff == 2.0
    assert out.n_cooperators_peripheral == 2


def test_play_mimic_full_density_copies_focal():
    rng = np.random.default_rng(5)
    params = SimParams(k=4, r=5.0, rho_a=1.0, policy=Policy.MIMIC)
    out = play_focal_game(Genome(1.0), [Genome(0.0)] * 4, params, rng)
    assert out.actions_all == (C,) * 5
    assert out.focal_payoff == 4.0
    assert out.n_agent_slots == 4
    out = play_focal_game(Genome(0.0), [Genome(1.0)] * 4, params, rng)
    assert out.actions_all == (D,) * 5
    assert out.focal_payoff == 0.0


def test_play_draw_count_fixed_per_policy():
    peripherals = [Genome(0.37, 0.61)] * 4
    focal = Genome(0.52, 0.44)
    for policy, rho in [(Policy.BASELINE, 0.0),
                        (Policy.MANDATORY_COOPERATION, 0.7),
                        (Policy.PLAYER_CONTROLLED, 0.3),
                        (Policy.MIMIC, 0.5),
                        (Policy.MIMIC, 1.0)]:
        params = SimParams(k=4, r=3.0, rho_a=rho, policy=policy)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            expect = advanced(rng, 5)
            play_focal_game(focal, peripherals, params, rng)
            assert rng.bit_generator.state == expect, (policy, rho, seed)


def test_play_outcome_invariants():
    rng = np.random.default_rng(19)
    grid = [(Policy.BASELINE, 0.0), (Policy.MANDATORY_COOPERATION, 0.4),
            (Policy.PLAYER_CONTROLLED, 0.6), (Policy.MIMIC, 0.5)]
    for policy, rho in grid:
        params = SimParams(k=4, r=5.0, rho_a=rho, policy=policy)
        for _ in range(300):
            focal = Genome(rng.random(), rng.random())
            peripherals = [Genome(rng.random()) for _ in range(4)]
            out = play_focal_game(focal, peripherals, params, rng)
            assert len(out.actions_all) == 5
            assert out.actions_all[0] is out.focal_action
            assert 0 <= out.n_cooperators_peripheral <= 4
            assert 0 <= out.n_agent_slots <= 4
            assert out.n_cooperators_peripheral == sum(
                a is C for a in out.actions_all[1:])
            if out.focal_action is C:
                expect = payoff_cooperator(out.n_cooperators_peripheral, 4, 5.0)
            else:
                expect = payoff_defector(out.n_cooperators_peripheral, 4, 5.0)
            assert out.focal_payoff == expect
            if policy is Policy.BASELINE:
                assert out.n_agent_slots == 0


def test_play_rejects_wrong_peripheral_count():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="peripheral"):
        play_focal_game(Genome(0.5), [Genome(0.5)] * 3, SimParams(k=4), rng)


def test_play_matches_componentwise_composition():
    """play_focal_game shares one uniform per slot between role and action;
    sampling the mask and resolving each slot separately uses a different
    draw layout but must produce the same outcome distribution."""
    params = SimParams(k=2, r=3.0, rho_a=0.4, policy=Policy.MIMIC)
    focal = Genome(0.5, 0.5)
    peripherals = [Genome(0.6), Genome(0.3)]
    n = 40_000

    rng = np.random.default_rng(101)
    direct = {}
    for _ in range(n):
        out = play_focal_game(focal, peripherals, params, rng)
        key = (out.focal_action, out.n_agent_slots, out.actions_all[1:])
        direct[key] = direct.get(key, 0) + 1

    composed = {}
    for _ in range(n):
        focal_action = C if rng.random() < focal.p_c else D
        mask = sample_role_mask(2, 0.4, rng)
        acts = tuple(
            resolve_peripheral_action(mask[s], params.policy, focal,
                                      focal_action, peripherals[s], rng)
            for s in range(2))
        n_agents = sum(role is Role.AGENT for role in mask)
        key = (focal_action, n_agents, acts)
        composed[key] = composed.get(key, 0) + 1

    keys = sorted(set(direct) | set(composed), key=repr)
    table = np.array([[direct.get(kk, 0) for kk in keys],
                      [composed.get(kk, 0) for kk in keys]])
    table = table[:, table.sum(axis=0) > 0]
    _, p, _, _ = stats.chi2_contingency(table)
    assert p > 0.001


def test_mimic_conditional_defector_scaling():
    # conditioned on a agent slots, peripheral defectors under a cooperating
    # focal average (1 - a/k) times the agent-free defector count
    params = SimParams(k=4, r=5.0, rho_a=0.5, policy=Policy.MIMIC)
    p = 0.3
    rng = np.random.default_rng(77)
    by_a = {a: [] for a in range(5)}
    for _ in range(40_000):
        out = play_focal_game(Genome(1.0), [Genome(p)] * 4, params, rng)
        by_a[out.n_agent_slots].append(4 - out.n_cooperators_peripheral)
    for a, vals in by_a.items():
        vals = np.array(vals, dtype=float)
        expect = (1.0 - a / 4.0) * 4.0 * (1.0 - p)
        se = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
        assert abs(vals.mean() - expect) <= max(4.0 * se, 1e-12), a


def test_mimic_conditional_cooperator_scaling():
    # symmetric check with a defecting focal: agents copy the defection
    params = SimParams(k=4, r=5.0, rho_a=0.5, policy=Policy.MIMIC)
    p = 0.7
    rng = np.random.default_rng(78)
    by_a = {a: [] for a in range(5)}
    for _ in range(40_000):
        out = play_focal_game(Genome(0.0), [Genome(p)] * 4, params, rng)
        by_a[out.n_agent_slots].append(out.n_cooperators_peripheral)
    for a, vals in by_a.items():
        vals = np.array(vals, dtype=float)
        expect = (1.0 - a / 4.0) * 4.0 * p
        se = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
        assert abs(vals.mean() - expect) <= max(4.0 * se, 1e-12), a


# ------------------------------------------------------------ batch games

def test_batch_matches_sequential_stream():
    focal = Genome(0.52, 0.44)
    peripherals = [Genome(0.37), Genome(0.9), Genome(0.12), Genome(0.66)]
    cases = [
        SimParams(k=4, r=3.0, rho_a=0.0, policy=Policy.BASELINE),
        SimParams(k=4, r=5.0, rho_a=0.6, policy=Policy.MANDATORY_COOPERATION),
        SimParams(k=4, r=4.0, rho_a=0.3, policy=Policy.PLAYER_CONTROLLED),
        SimParams(k=4, r=2.0, rho_a=0.5, policy=Policy.MIMIC),
        SimParams(k=4, r=2.0, rho_a=1.0, policy=Policy.MIMIC,
                  mimic_independent=True),
    ]
    for params in cases:
        rng_a = np.random.default_rng(123)
        rng_b = np.random.default_rng(123)
        batch = play_focal_game_batch(focal, peripherals, params, rng_a, 500)
        seq = np.array([
            play_focal_game(focal, peripherals, params, rng_b).focal_payoff
            for _ in range(500)])
        assert np.array_equal(batch, seq), params.policy
        assert rng_a.bit_generator.state == rng_b.bit_generator.state


# ----------------------------------------------------------------- oracle

def test_oracle_deterministic_cases():
    assert expected_focal_payoff_oracle(
        Genome(1.0), [Genome(1.0)] * 4, SimParams(k=4, r=5.0)) == 4.0
    assert expected_focal_payoff_oracle(
        Genome(1.0), [Genome(0.0)] * 4,
        SimParams(k=4, r=5.0, rho_a=1.0, policy=Policy.MIMIC)) == 4.0
    for policy, rho in [(Policy.BASELINE, 0.0), (Policy.MIMIC, 0.0),
                        (Policy.PLAYER_CONTROLLED, 0.0)]:
        assert expected_focal_payoff_oracle(
            Genome(0.0, 0.0), [Genome(0.0)] * 4,
            SimParams(k=4, r=5.0, rho_a=rho, policy=policy)) == 0.0


def test_oracle_hand_computed_cases():
    # k=1 baseline: focal always cooperates, one peripheral at 1/2, r=2:
    # payoff = 2(n_c+1)/2 - 1 = n_c, expectation 0.5
    v = expected_focal_payoff_oracle(
        Genome(1.0), [Genome(0.5)], SimParams(k=1, r=2.0))
    assert abs(v - 0.5) < 1e-12
    # k=2 mimic at rho 1/2, focal 1/2, peripherals certain cooperators, r=3:
    # focal C -> everyone C -> payoff 2; focal D -> n_c ~ Bin(2,1/2) -> mean 1
    v = expected_focal_payoff_oracle(
        Genome(0.5), [Genome(1.0), Genome(1.0)],
        SimParams(k=2, r=3.0, rho_a=0.5, policy=Policy.MIMIC))
    assert abs(v - 1.5) < 1e-12
    # k=2 controlled at rho 1: defecting focal, agents cooperate w.p. 1/4,
    # payoff = 4 n_c / 3 with n_c ~ Bin(2, 1/4) -> 2/3
    v = expected_focal_payoff_oracle(
        Genome(0.0, 0.25), [Genome(0.5), Genome(0.5)],
        SimParams(k=2, r=4.0, rho_a=1.0, policy=Policy.PLAYER_CONTROLLED))
    assert abs(v - 2.0 / 3.0) < 1e-12
    # k=3 mandatory at rho 1/2, cooperating focal, defecting peripherals:
    # n_c ~ Bin(3,1/2), payoff = 2(n_c+1)/4 - 1 -> 0.25
    v = expected_focal_payoff_oracle(
        Genome(1.0), [Genome(0.0)] * 3,
        SimParams(k=3, r=2.0, rho_a=0.5, policy=Policy.MANDATORY_COOPERATION))
    assert abs(v - 0.25) < 1e-12


def test_oracle_against_linear_expectation():
    """Cross-check the enumeration against a closed form that never
    enumerates: payoff is linear in the peripheral cooperator count, so
    E[payoff | focal action] needs only the per-slot cooperation odds."""
    rng = np.random.default_rng(55)
    policies = [Policy.BASELINE, Policy.MANDATORY_COOPERATION,
                Policy.PLAYER_CONTROLLED, Policy.MIMIC]
    for trial in range(60):
        policy = policies[trial % 4]
        k = int(rng.integers(1, 7))
        rho = 0.0 if policy is Policy.BASELINE else float(rng.random())
        r = float(rng.uniform(0.5, 8.0))
        independent = policy is Policy.MIMIC and trial % 8 >= 4
        focal = Genome(float(rng.random()), float(rng.random()))
        peripherals = [Genome(float(rng.random())) for _ in range(k)]
        params = SimParams(k=k, r=r, rho_a=rho, policy=policy,
                           mimic_independent=independent)

        expect = 0.0
        for coop, w in ((1.0, focal.p_c), (0.0, 1.0 - focal.p_c)):
            if policy is Policy.MANDATORY_COOPERATION:
                q_agent = 1.0
            elif policy is Policy.PLAYER_CONTROLLED:
                q_agent = focal.p_ac
            elif policy is Policy.MIMIC:
                q_agent = focal.p_c if independent else coop
            else:
                q_agent = 0.0
            mean_nc = sum(rho * q_agent + (1.0 - rho) * g.p_c
                          for g in peripherals)
            expect += w * (r * (mean_nc + coop) / (k + 1) - coop)

        got = expected_focal_payoff_oracle(focal, peripherals, params)
        assert abs(got - expect) < 1e-9, (policy, k, rho, r)


def test_oracle_vs_monte_carlo():
    params = SimParams(k=4, r=4.5, rho_a=0.35, policy=Policy.PLAYER_CONTROLLED)
    focal = Genome(0.4, 0.7)
    peripherals = [Genome(0.2), Genome(0.8), Genome(0.5), Genome(0.9)]
    exact = expected_focal_payoff_oracle(focal, peripherals, params)
    rng = np.random.default_rng(2024)
    payoffs = play_focal_game_batch(focal, peripherals, params, rng, 200_000)
    se = payoffs.std(ddof=1) / np.sqrt(payoffs.size)
    assert abs(payoffs.mean() - exact) < 4.0 * se


def test_oracle_guard_and_arity():
    with pytest.raises(ValueError, match="oracle"):
        expected_focal_payoff_oracle(
            Genome(0.5), [Genome(0.5)] * 13, SimParams(k=13, r=2.0))
    with pytest.raises(ValueError, match="peripheral"):
        expected_focal_payoff_oracle(Genome(0.5), [Genome(0.5)] * 3,
                                     SimParams(k=4, r=2.0))
