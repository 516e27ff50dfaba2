"""Model-free baselines: Watkins Q(lambda), Q(lambda) over subspaces with
return-based confidence intervals, and tile-coded linear Q-learning."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .. import cdm
from ..model import hoeffding_radius
from ..spaces import SpaceFamily
from .base import EpisodeLog, SpaceSet, alpha_schedule, beta_schedule, sample_action


@dataclass(frozen=True)
class TDParams:
    gamma: float = 0.9
    lam: float = 0.9


def qlambda_step(traces: np.ndarray, Q: np.ndarray, s: int, a: int, r: float, s_next: int,
                 params: TDParams, alpha, next_greedy: bool, terminal: bool = False) -> float:
    """One Watkins Q(lambda) update in place; returns the TD error.

    ``alpha`` is a scalar or an array shaped like ``Q``.  Traces decay by
    ``gamma * lam`` when the next action is greedy and are cleared otherwise.
    """
    target = r if terminal else r + params.gamma * Q[s_next].max()
    delta = target - Q[s, a]
    traces[s, a] += 1.0
    Q += alpha * delta * traces
    if next_greedy and not terminal:
        traces *= params.gamma * params.lam
    else:
        traces[:] = 0.0
    return float(delta)


class _TraceLearner:
    def __init__(self, n_states: int, n_actions: int, alpha_id):
        self.Q = np.zeros((n_states + 1, n_actions))
        self.e = np.zeros_like(self.Q)
        self.n = np.zeros(self.Q.shape, dtype=np.int64)
        self.terminal = n_states
        self.alpha_id = alpha_id

    def update(self, s, a, r, s2, params, episode, next_action, done):
        alpha = alpha_schedule(self.alpha_id, self.n, episode)
        greedy = (not done) and self.Q[s2, next_action] == self.Q[s2].max()
        qlambda_step(self.e, self.Q, s, a, r, s2, params, alpha, greedy, terminal=done)
        self.n[s, a] += 1


class QLambdaAgent:
    """Tabular Watkins Q(lambda) on the full space."""

    def __init__(self, env, family: SpaceFamily, epsilon: float = 0.1, gamma: float = 0.9,
                 lam: float = 0.9, alpha=7):
        self.spaces = SpaceSet(env, SpaceFamily(family.full, ()))
        self.learner = _TraceLearner(family.full.size, env.n_actions, alpha)
        self.epsilon = epsilon
        self.params = TDParams(gamma, lam)

    space_names = ("full",)

    @property
    def Q(self):
        return self.learner.Q

    def _probs(self, s):
        return cdm.epsilon_greedy_probs(self.learner.Q[s], self.epsilon)

    def run_episode(self, env, rng, episode: int) -> EpisodeLog:
        log = EpisodeLog(episode)
        obs = env.reset(rng)
        s = self.spaces.indices(obs)[0]
        a = sample_action(self._probs(s), rng)
        for _ in range(env.max_steps):
            nxt, r, done, _ = env.step(a, rng)
            s2 = self.learner.terminal if done else self.spaces.indices(nxt)[0]
            a2 = None if done else sample_action(self._probs(s2), rng)
            self.learner.update(s, a, r, s2, self.params, episode, a2, done)
            log.states.append(obs)
            log.actions.append(a)
            log.rewards.append(r)
            if done:
                log.reached_goal = True
                break
            obs, s, a = nxt, s2, a2
        else:
            log.truncated = True
        self.learner.e[:] = 0.0
        return log


class QSLambdaAgent:
    """Q(lambda) in the full space and every subspace, fused by confidence
    degree.  Intervals are Hoeffding radii over first-visit discounted
    returns observed for each pair; a pair with no returns yet gets the whole
    admissible return range."""

    def __init__(self, env, family: SpaceFamily, epsilon: float = 0.1, gamma: float = 0.9,
                 lam: float = 0.9, alpha=7, delta_R: float = 0.1, force_full: bool = False):
        self.spaces = SpaceSet(env, family)
        self.learners = [_TraceLearner(d.size, env.n_actions, alpha) for d in family.spaces]
        self.epsilon = epsilon
        self.params = TDParams(gamma, lam)
        self.delta_R = delta_R
        self.force_full = force_full
        self.return_range = return_bounds(env, gamma)
        self.n_returns = [np.zeros(l.Q.shape, dtype=np.int64) for l in self.learners]
        self.n_actions = env.n_actions
        self.last_returns = []

    @property
    def space_names(self):
        return self.spaces.names

    def intervals(self, k: int, s: int):
        lo_r, hi_r = self.return_range
        q = self.learners[k].Q[s]
        n = self.n_returns[k][s]
        rad = np.array([hoeffding_radius(hi_r - lo_r, int(c), self.delta_R) for c in n])
        lo = np.where(n > 0, q - rad, lo_r)
        hi = np.where(n > 0, q + rad, hi_r)
        return lo, hi

    def action_probs(self, idx):
        probs = [cdm.epsilon_greedy_probs(l.Q[s], self.epsilon)
                 for l, s in zip(self.learners, idx)]
        k = len(self.learners) - 1
        if k == 0:
            return probs[0], np.ones(1)
        if self.force_full:
            cds = np.zeros((k, self.n_actions))
        else:
            lo0, hi0 = self.intervals(0, idx[0])
            lohi = [self.intervals(j, idx[j]) for j in range(1, k + 1)]
            cds = cdm.confidence_degrees(
                self.learners[0].Q[idx[0]], lo0, hi0,
                np.stack([self.learners[j].Q[idx[j]] for j in range(1, k + 1)]),
                np.stack([x[0] for x in lohi]), np.stack([x[1] for x in lohi]))
        return cdm.fuse(probs[0], np.stack(probs[1:]), cds), cdm.decision_weights(cds)

    def _record_returns(self, visited: List[tuple], actions: List[int], rewards: List[float]):
        gamma = self.params.gamma
        G = 0.0
        returns = np.empty(len(rewards))
        for t in range(len(rewards) - 1, -1, -1):
            G = rewards[t] + gamma * G
            returns[t] = G
        recorded = []
        for k, counts in enumerate(self.n_returns):
            seen = set()
            for t, (idx, a) in enumerate(zip(visited, actions)):
                key = (idx[k], a)
                if key not in seen:
                    seen.add(key)
                    counts[key] += 1
                    recorded.append((k, key[0], a, float(returns[t])))
        return recorded

    def run_episode(self, env, rng, episode: int) -> EpisodeLog:
        log = EpisodeLog(episode)
        visited = []
        obs = env.reset(rng)
        idx = self.spaces.indices(obs)
        probs, w = self.action_probs(idx)
        a = sample_action(probs, rng)
        for _ in range(env.max_steps):
            nxt, r, done, _ = env.step(a, rng)
            nidx = self.spaces.terminals if done else self.spaces.indices(nxt)
            if not done:
                nprobs, nw = self.action_probs(nidx)
                a2 = sample_action(nprobs, rng)
            else:
                a2 = None
            for l, s, s2 in zip(self.learners, idx, nidx):
                l.update(s, a, r, s2, self.params, episode, a2, done)
            visited.append(idx)
            log.states.append(obs)
            log.actions.append(a)
            log.rewards.append(r)
            log.weights.append(w)
            if done:
                log.reached_goal = True
                break
            obs, idx, a, w = nxt, nidx, a2, nw
        else:
            log.truncated = True
        for l in self.learners:
            l.e[:] = 0.0
        self.last_returns = self._record_returns(visited, log.actions, log.rewards)
        return log


def return_bounds(env, gamma: float):
    """Range of any discounted return within the step cap, from the reward
    intervals."""
    lo = min(spec.lo for spec in env.maze.rewards.values())
    hi = max(spec.hi for spec in env.maze.rewards.values())
    horizon = (1.0 - gamma ** env.max_steps) / (1.0 - gamma)
    return min(lo, 0.0) * horizon, max(hi, 0.0) * horizon


def ql_tile_step(weights: List[np.ndarray], idx, a: int, r: float, next_idx, params: TDParams,
                 beta: float, terminal: bool = False) -> float:
    """Linear Q-learning update where each tiling contributes one active
    cell; returns the TD error."""
    q = sum(w[i, a] for w, i in zip(weights, idx))
    if terminal:
        target = r
    else:
        target = r + params.gamma * sum(w[i] for w, i in zip(weights, next_idx)).max()
    delta = target - q
    for w, i in zip(weights, idx):
        w[i, a] += beta * delta
    return float(delta)


class TileQAgent:
    """Q-learning with one tiling per subspace plus one for the full space."""

    def __init__(self, env, family: SpaceFamily, epsilon: float = 0.1, gamma: float = 0.9,
                 beta=1):
        self.spaces = SpaceSet(env, family)
        self.weights = [np.zeros((d.size + 1, env.n_actions)) for d in family.spaces]
        self.epsilon = epsilon
        self.params = TDParams(gamma, 0.0)
        self.beta_id = beta
        self.n_subspaces = len(family.subs)

    space_names = ("full",)

    def q_values(self, idx) -> np.ndarray:
        return sum(w[i] for w, i in zip(self.weights, idx))

    def run_episode(self, env, rng, episode: int) -> EpisodeLog:
        beta = beta_schedule(self.beta_id, self.n_subspaces, episode)
        log = EpisodeLog(episode)
        obs = env.reset(rng)
        for _ in range(env.max_steps):
            idx = self.spaces.indices(obs)
            a = sample_action(cdm.epsilon_greedy_probs(self.q_values(idx), self.epsilon), rng)
            nxt, r, done, _ = env.step(a, rng)
            nidx = self.spaces.terminals if done else self.spaces.indices(nxt)
            ql_tile_step(self.weights, idx, a, r, nidx, self.params, beta, terminal=done)
            log.states.append(obs)
            log.actions.append(a)
            log.rewards.append(r)
            if done:
                log.reached_goal = True
                break
            obs = nxt
        else:
            log.truncated = True
        return log
