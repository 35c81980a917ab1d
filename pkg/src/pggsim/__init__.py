"""pggsim: evolutionary public goods games with automated co-players.

A population of players on a toroidal grid evolves its cooperation
probability under fitness-proportional selection.  Peripheral group slots
may be taken by automated agents at density rho_a whose behavior follows
a policy (always cooperate, cooperate at an evolvable focal-owned rate,
or mimic the focal player's action).  The package provides the game and
evolution engines, closed-form predictions with lineage and curve
analysis, a deterministic parallel sweep harness, and a CLI.
"""

from .model import (
    Action,
    Genome,
    Policy,
    Role,
    RoleMask,
    SimParams,
    neighbor_offsets,
    neighbor_table,
    validate_params,
)
from .game import (
    GameOutcome,
    expected_focal_payoff_oracle,
    payoff_cooperator,
    payoff_defector,
    play_focal_game,
    play_focal_game_batch,
    resolve_peripheral_action,
    sample_role_mask,
)
from .evolution import (
    GenerationRecord,
    MutationLog,
    PopulationState,
    RunResult,
    fitness_transform,
    initialize_population,
    mutate,
    roulette_select,
    run_simulation,
    score_generation,
    step_generation,
)
from .analytics import (
    ConvergenceStats,
    CriticalPoint,
    DeltaGenomeHistory,
    LodSeries,
    ResponseCurve,
    SnapshotGenomeHistory,
    convergence_statistic,
    dilemma_bounds,
    extract_critical_r,
    lod_from_run,
    lod_statistic,
    mimic_cooperation_gain,
    predicted_critical_r,
    reconstruct_lod,
)
from .sweep import (
    SweepCell,
    SweepConfig,
    SweepResult,
    derive_seed,
    parse_config,
    read_sweep_csv,
    run_sweep,
    write_run_csv,
    write_sweep_csv,
    write_sweep_json,
)

__version__ = "0.1.0"
