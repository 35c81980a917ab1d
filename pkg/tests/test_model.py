"""Domain types, parameter validation, neighbor geometry."""

import numpy as np
import pytest

from pggsim import (
    Action,
    Genome,
    Policy,
    SimParams,
    neighbor_offsets,
    neighbor_table,
    validate_params,
)
from pggsim import _kernels


def test_action_enum():
    assert Action.COOPERATE.value == "C"
    assert Action.DEFECT.value == "D"
    assert len(Action) == 2


def test_policy_names_and_labels():
    assert Policy.from_name("mimic") is Policy.MIMIC
    assert Policy.from_name("Mandatory") is Policy.MANDATORY_COOPERATION
    assert Policy.from_name("mandatory_cooperation") is Policy.MANDATORY_COOPERATION
    assert Policy.from_name("player-controlled") is Policy.PLAYER_CONTROLLED
    assert Policy.from_name("controlled") is Policy.PLAYER_CONTROLLED
    assert Policy.from_name("baseline") is Policy.BASELINE
    for p in Policy:
        assert Policy.from_name(p.label) is p
    with pytest.raises(ValueError):
        Policy.from_name("nonsense")


def test_policy_codes_match_kernel_constants():
    assert int(Policy.BASELINE) == _kernels.BASELINE
    assert int(Policy.MANDATORY_COOPERATION) == _kernels.MANDATORY
    assert int(Policy.PLAYER_CONTROLLED) == _kernels.CONTROLLED
    assert int(Policy.MIMIC) == _kernels.MIMIC


def test_genome_bounds():
    Genome(0.0, 0.0)
    Genome(1.0, 1.0)
    Genome(0.5)
    assert Genome(0.3).p_ac == 0.5
    with pytest.raises(ValueError):
        Genome(-0.01)
    with pytest.raises(ValueError):
        Genome(1.01)
    with pytest.raises(ValueError):
        Genome(0.5, 1.5)
    with pytest.raises(ValueError):
        Genome(0.5, -1e-9)


def test_simparams_defaults():
    p = SimParams()
    assert p.games_per_focal == p.k + 1 == 5
    assert p.population_size == 1024
    p6 = SimParams(k=6)
    assert p6.games_per_focal == 7
    p_explicit = SimParams(k=4, games_per_focal=3)
    assert p_explicit.games_per_focal == 3
    # policy coercion from a string
    assert SimParams(policy="mimic", rho_a=0.5).policy is Policy.MIMIC


def test_validate_accepts_standard_params():
    p = SimParams(k=4, grid_width=32, grid_height=32, r=5.0, rho_a=0.5,
                  mu=0.01, policy=Policy.MANDATORY_COOPERATION)
    assert validate_params(p) is p


def test_validate_rho_range():
    with pytest.raises(ValueError, match="rho_A"):
        validate_params(SimParams(rho_a=1.5, policy=Policy.MIMIC))
    with pytest.raises(ValueError, match="rho_A"):
        validate_params(SimParams(rho_a=-0.1, policy=Policy.MIMIC))


def test_validate_baseline_requires_zero_density():
    with pytest.raises(ValueError, match="Baseline"):
        validate_params(SimParams(policy=Policy.BASELINE, rho_a=0.25))
    validate_params(SimParams(policy=Policy.BASELINE, rho_a=0.0))


def test_validate_field_checks():
    with pytest.raises(ValueError, match="k"):
        validate_params(SimParams(k=0))
    with pytest.raises(ValueError, match="r"):
        validate_params(SimParams(r=0.0))
    with pytest.raises(ValueError, match="r"):
        validate_params(SimParams(r=-2.0))
    with pytest.raises(ValueError, match="mu"):
        validate_params(SimParams(mu=1.2))
    with pytest.raises(ValueError, match="generations"):
        validate_params(SimParams(generations=-1))
    validate_params(SimParams(generations=0))
    with pytest.raises(ValueError, match="games_per_focal"):
        validate_params(SimParams(games_per_focal=0))
    with pytest.raises(ValueError, match="seed"):
        validate_params(SimParams(seed=2**64))
    validate_params(SimParams(seed=2**64 - 1))


def test_validate_grid_size():
    # 2-wide torus folds the left/right offsets onto the same cell
    with pytest.raises(ValueError, match="too small"):
        validate_params(SimParams(grid_width=2, grid_height=8))
    validate_params(SimParams(grid_width=3, grid_height=3))
    with pytest.raises(ValueError, match="k"):
        validate_params(SimParams(k=9, grid_width=3, grid_height=3))


def test_neighbor_offsets_von_neumann():
    assert neighbor_offsets(4) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert neighbor_offsets(2) == [(-1, 0), (0, -1)]
    offs8 = neighbor_offsets(8)
    assert set(offs8) == {(-1, 0), (0, -1), (0, 1), (1, 0),
                          (-1, -1), (-1, 1), (1, -1), (1, 1)}
    assert offs8[:4] == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    with pytest.raises(ValueError):
        neighbor_offsets(0)


def test_neighbor_table_wraps():
    table = neighbor_table(4, 3, 4)
    assert table.shape == (12, 4)
    # cell 0 = (0,0): left wraps to 3, up wraps to row 2
    assert list(table[0]) == [3, 8, 4, 1]
    # no self-neighbors; uniform in-degree k on the torus
    for c in range(12):
        assert c not in table[c]
    counts = np.bincount(table.ravel(), minlength=12)
    assert (counts == 4).all()


def test_neighbor_table_rejects_tiny_grid():
    with pytest.raises(ValueError, match="too small"):
        neighbor_table(2, 2, 4)
