"""Domain types and parameter validation shared by the simulator modules.

The model is a spatial public goods game: a focal player and its k grid
neighbors each either contribute one unit (cooperate) or not (defect); the
pot is multiplied by the synergy factor r and split evenly among all k+1
group members.  Peripheral slots may be taken over by automated co-players
("agents") at density rho_a, whose behavior is fixed by a Policy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Action",
    "Policy",
    "Role",
    "RoleMask",
    "Genome",
    "SimParams",
    "validate_params",
    "neighbor_offsets",
    "neighbor_table",
]


class Action(str, enum.Enum):
    """A single move in one game. Serializes as "C"/"D"."""

    COOPERATE = "C"
    DEFECT = "D"

    def __repr__(self) -> str:  # keep log/test output compact
        return self.value


class Policy(enum.IntEnum):
    """Behavior rule for agent-occupied peripheral slots.

    The integer values double as dispatch codes for the compiled kernels.
    """

    BASELINE = 0            # no agents ever; requires rho_a == 0
    MANDATORY_COOPERATION = 1  # agents always cooperate
    PLAYER_CONTROLLED = 2   # agents cooperate w.p. the focal player's p_ac
    MIMIC = 3               # agents copy the focal player's realized action

    @property
    def label(self) -> str:
        return _POLICY_LABELS[self]

    @classmethod
    def from_name(cls, name: str) -> "Policy":
        key = name.strip().lower().replace("-", "_")
        try:
            return _POLICY_NAMES[key]
        except KeyError:
            raise ValueError(
                f"unknown policy {name!r}; expected one of "
                f"{sorted(set(_POLICY_NAMES))}"
            ) from None


_POLICY_LABELS = {
    Policy.BASELINE: "baseline",
    Policy.MANDATORY_COOPERATION: "mandatory",
    Policy.PLAYER_CONTROLLED: "player_controlled",
    Policy.MIMIC: "mimic",
}

_POLICY_NAMES = {
    "baseline": Policy.BASELINE,
    "mandatory": Policy.MANDATORY_COOPERATION,
    "mandatory_cooperation": Policy.MANDATORY_COOPERATION,
    "player_controlled": Policy.PLAYER_CONTROLLED,
    "controlled": Policy.PLAYER_CONTROLLED,
    "mimic": Policy.MIMIC,
}


class Role(str, enum.Enum):
    """Occupant of one peripheral slot in a single game."""

    PLAYER = "P"
    AGENT = "A"

    def __repr__(self) -> str:
        return self.value


# A role assignment for the k peripheral slots of one game.
RoleMask = tuple  # tuple[Role, ...]


@dataclass(frozen=True)
class Genome:
    """Heritable strategy of one player.

    p_c is the probability of cooperating when playing (focal or
    peripheral).  p_ac is the probability that an agent controlled by this
    player cooperates; it is read only under Policy.PLAYER_CONTROLLED but
    exists, mutates, and drifts in every genome.
    """

    p_c: float
    p_ac: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_c <= 1.0:
            raise ValueError(f"p_c out of [0,1]: {self.p_c}")
        if not 0.0 <= self.p_ac <= 1.0:
            raise ValueError(f"p_ac out of [0,1]: {self.p_ac}")


@dataclass(frozen=True)
class SimParams:
    """Full parameterization of one simulation run.

    games_per_focal defaults to k+1 when left as None.  population_size is
    derived from the grid dimensions.
    """

    k: int = 4
    r: float = 5.0
    rho_a: float = 0.0
    policy: Policy = Policy.BASELINE
    grid_width: int = 32
    grid_height: int = 32
    mu: float = 0.01
    generations: int = 10000
    games_per_focal: int | None = None
    seed: int = 0
    # Initialize genomes uniformly at random instead of all (0.5, 0.5).
    random_init: bool = False
    # Mimic variant: agents redraw from the focal p_c instead of copying
    # the realized focal action.  Off by default.
    mimic_independent: bool = False

    def __post_init__(self) -> None:
        if self.games_per_focal is None:
            object.__setattr__(self, "games_per_focal", self.k + 1)
        if not isinstance(self.policy, Policy):
            object.__setattr__(self, "policy", Policy.from_name(str(self.policy)))

    @property
    def population_size(self) -> int:
        return self.grid_width * self.grid_height


def validate_params(params: SimParams) -> SimParams:
    """Check every invariant of SimParams; return it unchanged if valid.

    Raises ValueError naming the offending field.
    """
    p = params
    if not isinstance(p.k, (int, np.integer)) or p.k < 1:
        raise ValueError(f"k must be a positive integer, got {p.k}")
    if not p.r > 0:
        raise ValueError(f"r must be positive, got {p.r}")
    if not 0.0 <= p.rho_a <= 1.0:
        raise ValueError(f"rho_A out of [0,1]: {p.rho_a}")
    if p.policy is Policy.BASELINE and p.rho_a != 0.0:
        raise ValueError(f"Baseline requires rho_A=0, got rho_A={p.rho_a}")
    if p.grid_width < 1 or p.grid_height < 1:
        raise ValueError(
            f"grid dimensions must be positive, got "
            f"{p.grid_width}x{p.grid_height}"
        )
    if not 0.0 <= p.mu <= 1.0:
        raise ValueError(f"mu out of [0,1]: {p.mu}")
    if p.generations < 0:
        raise ValueError(f"generations must be >= 0, got {p.generations}")
    if p.games_per_focal is not None and p.games_per_focal < 1:
        raise ValueError(
            f"games_per_focal must be >= 1, got {p.games_per_focal}"
        )
    if not 0 <= p.seed < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {p.seed}")
    if p.k >= p.population_size:
        raise ValueError(
            f"k={p.k} needs at least k+1 grid cells, "
            f"population is {p.population_size}"
        )
    # The k neighbor offsets must land on k distinct cells under wraparound.
    offsets = neighbor_offsets(p.k)
    wrapped = {(dx % p.grid_width, dy % p.grid_height) for dx, dy in offsets}
    if len(wrapped) != p.k or (0, 0) in wrapped:
        raise ValueError(
            f"grid {p.grid_width}x{p.grid_height} too small for k={p.k} "
            f"distinct toroidal neighbors"
        )
    return params


def neighbor_offsets(k: int) -> list[tuple[int, int]]:
    """The k nearest toroidal grid offsets in a fixed deterministic order.

    Candidates are ranked by (squared distance, dx, dy); for k=4 this yields
    the von Neumann neighborhood (-1,0),(0,-1),(0,1),(1,0).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    radius = 1
    while (2 * radius + 1) ** 2 - 1 < k:
        radius += 1
    candidates = [
        (dx, dy)
        for dx in range(-radius, radius + 1)
        for dy in range(-radius, radius + 1)
        if (dx, dy) != (0, 0)
    ]
    candidates.sort(key=lambda o: (o[0] * o[0] + o[1] * o[1], o[0], o[1]))
    return candidates[:k]


def neighbor_table(grid_width: int, grid_height: int, k: int) -> np.ndarray:
    """Cell index -> k neighbor cell indices on the torus, shape (N, k).

    Cells are numbered row-major: cell = x + y * grid_width.
    """
    offsets = neighbor_offsets(k)
    n = grid_width * grid_height
    table = np.empty((n, k), dtype=np.int64)
    for cell in range(n):
        x, y = cell % grid_width, cell // grid_width
        for s, (dx, dy) in enumerate(offsets):
            table[cell, s] = ((x + dx) % grid_width) + ((y + dy) % grid_height) * grid_width
    if len(set(table[0])) != k:
        raise ValueError(
            f"grid {grid_width}x{grid_height} too small for k={k} "
            f"distinct toroidal neighbors"
        )
    return table
