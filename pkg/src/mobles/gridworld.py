"""Stochastic 2D maze environments with truncated-mixture rewards.

Coordinates: ``x`` is the 1-based column counted from the left, ``y`` the
1-based row counted from the bottom.  Actions are ``0=up, 1=down, 2=right,
3=left``.  Infrared bits are reported in the order (up, right, down, left).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

UP, DOWN, RIGHT, LEFT = 0, 1, 2, 3
ACTIONS = (UP, DOWN, RIGHT, LEFT)
ACTION_NAMES = ("up", "down", "right", "left")
DELTAS = {UP: (0, 1), DOWN: (0, -1), RIGHT: (1, 0), LEFT: (-1, 0)}
IR_ORDER = (UP, RIGHT, DOWN, LEFT)

MAPS_DIR = Path(__file__).parent / "maps"
MIN_INTERVAL_MASS = 1e-3

Cell = Tuple[int, int]


class MapError(ValueError):
    """Raised for malformed map documents."""


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class RewardSpec:
    """Mixture of Gaussians conditioned on a closed interval.

    ``components`` holds ``(weight, mean, stddev)`` triples.
    """

    components: Tuple[Tuple[float, float, float], ...]
    lo: float
    hi: float

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("reward spec needs at least one component")
        if abs(sum(w for w, _, _ in comps) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        if any(w < 0 for w, _, _ in comps):
            raise ValueError("mixture weights must be nonnegative")
        if any(sd <= 0 for _, _, sd in comps):
            raise ValueError("stddev must be positive")
        if not self.lo < self.hi:
            raise ValueError("truncation interval must satisfy lo < hi")
        if self.interval_mass() < MIN_INTERVAL_MASS:
            raise ValueError("mixture puts too little mass inside the interval")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def interval_mass(self) -> float:
        return sum(
            w * (_norm_cdf((self.hi - mu) / sd) - _norm_cdf((self.lo - mu) / sd))
            for w, mu, sd in self.components
        )

    def truncated_mean(self) -> float:
        """Closed-form mean of the mixture conditioned on ``[lo, hi]``."""
        num = 0.0
        den = 0.0
        for w, mu, sd in self.components:
            a = (self.lo - mu) / sd
            b = (self.hi - mu) / sd
            z = _norm_cdf(b) - _norm_cdf(a)
            num += w * (mu * z + sd * (_norm_pdf(a) - _norm_pdf(b)))
            den += w * z
        return num / den


COLLISION_REWARD = RewardSpec(((1 / 3, -11.5, 0.2), (2 / 3, -10.5, 0.3)), -12.0, -10.0)
GOAL_REWARD = RewardSpec(((1.0, 10.0, 0.02),), 9.5, 11.5)
STEP_REWARD = RewardSpec(((1 / 3, -1.5, 0.2), (2 / 3, -0.5, 0.3)), -2.0, 0.0)

DEFAULT_REWARDS: Mapping[str, RewardSpec] = {
    "collision": COLLISION_REWARD,
    "goal": GOAL_REWARD,
    "step": STEP_REWARD,
}


def sample_reward(spec: RewardSpec, rng: np.random.Generator) -> float:
    """Draw from ``spec`` by picking a component, sampling it and rejecting
    draws that fall outside the truncation interval."""
    comps = spec.components
    while True:
        if len(comps) == 1:
            _, mu, sd = comps[0]
        else:
            u = rng.random()
            acc = 0.0
            for w, mu, sd in comps:
                acc += w
                if u < acc:
                    break
        x = rng.normal(mu, sd)
        if spec.lo <= x <= spec.hi:
            return float(x)


@dataclass(frozen=True)
class GridMaze:
    width: int
    height: int
    walls: Tuple[Tuple[bool, ...], ...]  # walls[x - 1][y - 1]
    goal: Cell
    slip_prob: float = 0.1
    rewards: Mapping[str, RewardSpec] = field(default_factory=lambda: dict(DEFAULT_REWARDS))
    name: str = "maze"

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise MapError("maze must be at least 3x3")
        if not 0.0 <= self.slip_prob <= 1.0:
            raise ValueError("slip_prob must lie in [0, 1]")
        for x in range(1, self.width + 1):
            for y in range(1, self.height + 1):
                border = x in (1, self.width) or y in (1, self.height)
                if border and not self.walls[x - 1][y - 1]:
                    raise MapError("map must be bordered by walls")
        if self.is_wall(self.goal):
            raise MapError("goal cell is a wall")
        missing = {"collision", "goal", "step"} - set(self.rewards)
        if missing:
            raise ValueError(f"missing reward specs: {sorted(missing)}")

    def is_wall(self, cell: Cell) -> bool:
        x, y = cell
        if not (1 <= x <= self.width and 1 <= y <= self.height):
            return True
        return self.walls[x - 1][y - 1]

    def free_cells(self) -> List[Cell]:
        """Non-wall cells, goal included, in (x, y) lexicographic order."""
        return [
            (x, y)
            for x in range(1, self.width + 1)
            for y in range(1, self.height + 1)
            if not self.walls[x - 1][y - 1]
        ]

    def start_cells(self) -> List[Cell]:
        return [c for c in self.free_cells() if c != self.goal]

    def target(self, cell: Cell, action: int) -> Cell:
        dx, dy = DELTAS[action]
        return (cell[0] + dx, cell[1] + dy)

    def with_slip(self, slip_prob: float) -> "GridMaze":
        return GridMaze(self.width, self.height, self.walls, self.goal, slip_prob,
                        self.rewards, self.name)


def load_map(text: str, slip_prob: float = 0.1,
             rewards: Optional[Mapping[str, RewardSpec]] = None,
             name: str = "maze") -> GridMaze:
    """Parse a character map: ``#`` wall, ``.`` free, ``G`` goal.

    Rows may be separated by newlines or ``/``.  Blank lines and lines
    starting with ``;`` are ignored.
    """
    if "\n" not in text and "/" in text:
        rows = text.split("/")
    else:
        rows = text.splitlines()
    rows = [r.strip() for r in rows]
    rows = [r for r in rows if r and not r.startswith(";")]
    if not rows:
        raise MapError("empty map")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MapError("map is not rectangular")
    height = len(rows)
    for r in rows:
        for ch in r:
            if ch not in "#.G":
                raise MapError(f"unknown character {ch!r}")
    goals = [(col + 1, height - row) for row, r in enumerate(rows)
             for col, ch in enumerate(r) if ch == "G"]
    if len(goals) != 1:
        raise MapError(f"map must contain exactly one goal, found {len(goals)}")
    walls = tuple(
        tuple(rows[height - y][x - 1] == "#" for y in range(1, height + 1))
        for x in range(1, width + 1)
    )
    return GridMaze(width, height, walls, goals[0], slip_prob,
                    dict(rewards or DEFAULT_REWARDS), name)


def load_map_file(path, **kwargs) -> GridMaze:
    path = Path(path)
    if not path.exists() and not path.suffix:
        path = MAPS_DIR / f"{path}.txt"
    kwargs.setdefault("name", path.stem)
    return load_map(path.read_text(), **kwargs)


def shipped_maps() -> List[str]:
    return sorted(p.stem for p in MAPS_DIR.glob("*.txt"))


def reset(maze: GridMaze, rng: np.random.Generator) -> Cell:
    """Uniformly random free, non-goal start cell."""
    cells = maze.start_cells()
    if not cells:
        raise ValueError("maze has no free non-goal cell")
    return cells[int(rng.integers(len(cells)))]


def step(maze: GridMaze, state: Cell, action: int, rng: np.random.Generator
         ) -> Tuple[Cell, float, bool, float]:
    """One environment transition; returns ``(next, reward, done, len_r)``."""
    if maze.is_wall(state) or state == maze.goal:
        raise ValueError(f"cannot act from {state}")
    if action not in DELTAS:
        raise ValueError(f"unknown action {action}")
    if maze.slip_prob > 0 and rng.random() < maze.slip_prob:
        action = int(rng.integers(4))
    target = maze.target(state, action)
    if maze.is_wall(target):
        spec, nxt, done = maze.rewards["collision"], state, False
    elif target == maze.goal:
        spec, nxt, done = maze.rewards["goal"], target, True
    else:
        spec, nxt, done = maze.rewards["step"], target, False
    return nxt, sample_reward(spec, rng), done, spec.length


def ir_sensors(maze: GridMaze, state: Cell) -> Tuple[int, int, int, int]:
    """Wall-presence bits in the order (up, right, down, left)."""
    if maze.is_wall(state):
        raise ValueError(f"{state} is a wall")
    return tuple(int(maze.is_wall(maze.target(state, d))) for d in IR_ORDER)


def observe(maze: GridMaze, cell: Cell, sensors: int = 2) -> Tuple[int, ...]:
    if sensors == 2:
        return cell
    if sensors == 6:
        return cell + ir_sensors(maze, cell)
    raise ValueError("sensors must be 2 or 6")


def outcome_distribution(maze: GridMaze, cell: Cell, action: int
                         ) -> Dict[Tuple[Cell, str], float]:
    """Exact ``{(next cell, reward kind): probability}`` for one action."""
    out: Dict[Tuple[Cell, str], float] = {}
    for d in ACTIONS:
        p = maze.slip_prob / 4.0 + (1.0 - maze.slip_prob if d == action else 0.0)
        if p == 0.0:
            continue
        target = maze.target(cell, d)
        if maze.is_wall(target):
            key = (cell, "collision")
        elif target == maze.goal:
            key = (target, "goal")
        else:
            key = (target, "step")
        out[key] = out.get(key, 0.0) + p
    return out


def reachable(maze: GridMaze, cell: Cell) -> List[Cell]:
    """The cell itself plus its free neighbours, sorted.  This is the
    a-priori successor set under any action (a superset of the cells
    actually reachable: interior cells cannot stay put)."""
    nxt = {cell}
    nxt.update(maze.target(cell, d) for d in ACTIONS
               if not maze.is_wall(maze.target(cell, d)))
    return sorted(nxt)


@dataclass
class ExactMDP:
    """Exact model over the free non-goal cells plus one terminal index.

    ``P`` has shape ``(S + 1, A, S + 1)``; the last index is the absorbing
    goal with value 0.
    """

    states: List[Tuple[int, ...]]
    cells: List[Cell]
    P: np.ndarray
    R: np.ndarray

    @property
    def terminal(self) -> int:
        return len(self.states)

    def index(self, features: Sequence[int]) -> int:
        return self._lookup[tuple(features)]

    def __post_init__(self):
        self._lookup = {s: i for i, s in enumerate(self.states)}


def true_model(maze: GridMaze, sensors: int = 2) -> ExactMDP:
    cells = maze.start_cells()
    idx = {c: i for i, c in enumerate(cells)}
    term = len(cells)
    P = np.zeros((term + 1, 4, term + 1))
    R = np.zeros((term + 1, 4))
    means = {k: spec.truncated_mean() for k, spec in maze.rewards.items()}
    for c in cells:
        for a in ACTIONS:
            for (nxt, kind), p in outcome_distribution(maze, c, a).items():
                j = term if kind == "goal" else idx[nxt]
                P[idx[c], a, j] += p
                R[idx[c], a] += p * means[kind]
    P[term, :, term] = 1.0
    states = [observe(maze, c, sensors) for c in cells]
    return ExactMDP(states, cells, P, R)


def exact_q(mdp: ExactMDP, gamma: float, tol: float = 1e-12, max_iter: int = 100000
            ) -> np.ndarray:
    """Optimal Q of the exact model by plain value iteration."""
    q = np.zeros_like(mdp.R)
    for _ in range(max_iter):
        v = q.max(axis=1)
        v[mdp.terminal] = 0.0
        new = mdp.R + gamma * mdp.P @ v
        new[mdp.terminal] = 0.0
        if np.max(np.abs(new - q)) <= tol:
            return new
        q = new
    raise RuntimeError("exact value iteration did not converge")


class MazeEnv:
    """Episode wrapper exposing observations as feature tuples."""

    n_actions = 4

    def __init__(self, maze: GridMaze, sensors: int = 2, max_steps: int = 2000):
        if sensors not in (2, 6):
            raise ValueError("sensors must be 2 or 6")
        self.maze = maze
        self.sensors = sensors
        self.max_steps = max_steps
        self.cell: Optional[Cell] = None
        self._obs = {c: observe(maze, c, sensors) for c in maze.free_cells()}

    def feature_spec(self) -> List[Tuple[str, int, int]]:
        """``(name, lowest value, cardinality)`` per observed feature."""
        spec = [("x", 1, self.maze.width), ("y", 1, self.maze.height)]
        if self.sensors == 6:
            spec += [(f"ir_{ACTION_NAMES[d]}", 0, 2) for d in IR_ORDER]
        return spec

    def observation(self, cell: Cell) -> Tuple[int, ...]:
        return self._obs[cell]

    def support(self) -> Dict[Tuple[int, ...], List[Tuple[int, ...]]]:
        """Reachable successor observations for each non-goal observation.

        Successor lists may contain the goal observation; agents map it
        to their terminal index.
        """
        out = {}
        for c in self.maze.start_cells():
            out[self._obs[c]] = [self._obs[n] for n in reachable(self.maze, c)]
        return out

    @property
    def goal_observation(self) -> Tuple[int, ...]:
        return self._obs[self.maze.goal]

    def reset(self, rng: np.random.Generator) -> Tuple[int, ...]:
        self.cell = reset(self.maze, rng)
        return self._obs[self.cell]

    def step(self, action: int, rng: np.random.Generator):
        self.cell, r, done, len_r = step(self.maze, self.cell, action, rng)
        return self._obs[self.cell], r, done, len_r
