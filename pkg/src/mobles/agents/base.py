"""Plumbing shared by every agent: episode logs, space bookkeeping, step-size
schedules and action sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..model import TabularModel
from ..spaces import SpaceFamily, project

LAMBDAS = (1.0, 0.9, 0.5, 0.0)


def alpha_schedule(which, n, episode: int):
    """Step sizes for the Q(lambda) family.  ``which`` is a schedule id 1..7
    or a literal float; ``n`` is the visit count (scalar or array)."""
    if not isinstance(which, int) or isinstance(which, bool):
        return float(which)
    n = np.asarray(n, dtype=float)
    if which == 1:
        return 1.0 / (1.0 + n)
    if which == 2:
        return np.sqrt(1.0 / (1.0 + n))
    if which == 3:
        return 1.0 / (1.0 + np.sqrt(n))
    if which == 4:
        return 1.0 / (1.0 + episode)
    if which == 5:
        return math.sqrt(1.0 / (1.0 + episode))
    if which == 6:
        return 1.0 / (1.0 + math.sqrt(episode))
    if which == 7:
        return 0.1
    raise ValueError(f"unknown alpha schedule {which}")


def beta_schedule(which, n_subspaces: int, episode: int) -> float:
    """Step sizes for tile-coded Q-learning, schedule ids 1..5 or a float."""
    if not isinstance(which, int) or isinstance(which, bool):
        return float(which)
    if which == 1:
        return 1.0 / (1.0 + n_subspaces)
    if which == 2:
        return 1.0 / (1.0 + 10.0 * n_subspaces)
    if which == 3:
        return 1.0 / (1.0 + episode)
    if which == 4:
        return math.sqrt(1.0 / (1.0 + episode))
    if which == 5:
        return 1.0 / (1.0 + math.sqrt(episode))
    raise ValueError(f"unknown beta schedule {which}")


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw using exactly one uniform variate."""
    u = rng.random()
    acc = 0.0
    for a, p in enumerate(probs):
        acc += p
        if u < acc:
            return a
    return len(probs) - 1


@dataclass
class EpisodeLog:
    episode: int
    states: List[Tuple[int, ...]] = field(default_factory=list)
    actions: List[int] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    weights: List[np.ndarray] = field(default_factory=list)
    reached_goal: bool = False
    truncated: bool = False

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))

    @property
    def steps(self) -> int:
        return len(self.actions)

    def mean_weights(self) -> Optional[np.ndarray]:
        if not self.weights:
            return None
        return np.mean(np.asarray(self.weights), axis=0)


class SpaceSet:
    """Index bookkeeping for the full space and each subspace of a family.

    The successor structure of each space is derived from the environment's
    one-step reachability: a subspace state's successors are the projections
    of the successors of every full-space state mapping onto it.  Goal
    arrival maps to each space's terminal index.
    """

    def __init__(self, env, family: SpaceFamily, prior_len: float = 2.0):
        self.family = family
        self.defs = family.spaces
        self.names = family.names
        support = env.support()
        goal = env.goal_observation
        self._cache: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
        self.models: List[TabularModel] = []
        for d in self.defs:
            succ: List[set] = [set() for _ in range(d.size)]
            for obs, nxt in support.items():
                s = project(obs, d)
                for o in nxt:
                    succ[s].add(d.size if o == goal else project(o, d))
            kind = "full" if d.is_full() else "subspace"
            name = "full" if d.is_full() else d.name
            self.models.append(TabularModel(d.size, env.n_actions, [sorted(x) for x in succ],
                                            prior_len=prior_len, kind=kind, name=name))
        self.terminals = tuple(m.terminal for m in self.models)

    def indices(self, obs: Sequence[int]) -> Tuple[int, ...]:
        key = tuple(obs)
        idx = self._cache.get(key)
        if idx is None:
            idx = tuple(project(key, d) for d in self.defs)
            self._cache[key] = idx
        return idx


def reward_interval_length(env) -> float:
    return max(spec.length for spec in env.maze.rewards.values())
