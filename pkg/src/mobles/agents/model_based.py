"""Model-based agents: MoBLeS (with confidence-degree fusion over feature
subspaces) and the plain full-space model-based baseline."""
from __future__ import annotations

import math
from typing import Callable, Optional, Tuple

import numpy as np

from .. import cdm
from ..planner import (PlannerParams, full_sweep, local_backups, one_step_backup, plan,
                       theta_schedule)
from ..spaces import SpaceFamily
from .base import EpisodeLog, SpaceSet, reward_interval_length, sample_action


def mobles_thr_gate(n_full: int, threshold: float) -> bool:
    """True while subspaces may still influence this state-action."""
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    return n_full < threshold


class MoBLeSAgent:
    """Model-based learner over a full space and a family of subspaces.

    Each space keeps its own tabular model with point, optimistic and
    pessimistic Q tables.  Actions come from per-space epsilon-greedy
    policies fused by confidence degree.  During an episode only the
    visited pair of each space is backed up; all tables are recomputed to
    convergence once the episode ends.
    """

    def __init__(self, env, family: SpaceFamily, epsilon: float = 0.1,
                 params: PlannerParams = PlannerParams(), theta0: float = 0.01,
                 visit_threshold: float = math.inf, full_backup: bool = False,
                 f: Callable = cdm.length_fn, g: Callable = cdm.overlap_fn):
        self.spaces = SpaceSet(env, family, reward_interval_length(env))
        self.models = self.spaces.models
        self.epsilon = epsilon
        self.params = params
        self.theta0 = theta0
        self.visit_threshold = visit_threshold
        self.full_backup = full_backup
        self.f = f
        self.g = g
        self.n_actions = env.n_actions

    @property
    def space_names(self):
        return self.spaces.names

    def confidence_degrees(self, idx: Tuple[int, ...]) -> np.ndarray:
        full, subs = self.models[0], self.models[1:]
        s0 = idx[0]
        if not subs:
            return np.zeros((0, self.n_actions))
        q = [m.q[s] for m, s in zip(subs, idx[1:])]
        hi = [m.q_u[s] for m, s in zip(subs, idx[1:])]
        lo = [m.q_l[s] for m, s in zip(subs, idx[1:])]
        cds = cdm.confidence_degrees(full.q[s0], full.q_l[s0], full.q_u[s0], q, lo, hi,
                                     self.f, self.g)
        if self.visit_threshold != math.inf:
            cds[:, full.n[s0] >= self.visit_threshold] = 0.0
        return cds

    def action_probs(self, idx: Tuple[int, ...]):
        full_probs = cdm.epsilon_greedy_probs(self.models[0].q[idx[0]], self.epsilon)
        if len(self.models) == 1:
            return full_probs, np.ones(1)
        cds = self.confidence_degrees(idx)
        sub_probs = np.stack([cdm.epsilon_greedy_probs(m.q[s], self.epsilon)
                              for m, s in zip(self.models[1:], idx[1:])])
        return cdm.fuse(full_probs, sub_probs, cds), cdm.decision_weights(cds)

    def greedy_action(self, obs) -> int:
        return int(np.argmax(self.models[0].q[self.spaces.indices(obs)[0]]))

    def run_episode(self, env, rng: np.random.Generator, episode: int) -> EpisodeLog:
        params = self.params.with_theta(theta_schedule(episode, self.theta0))
        log = EpisodeLog(episode)
        obs = env.reset(rng)
        for _ in range(env.max_steps):
            idx = self.spaces.indices(obs)
            probs, weights = self.action_probs(idx)
            a = sample_action(probs, rng)
            nxt, r, done, len_r = env.step(a, rng)
            nidx = self.spaces.terminals if done else self.spaces.indices(nxt)
            for m, s, s2 in zip(self.models, idx, nidx):
                m.update(s, a, s2, r, len_r)
                if self.full_backup:
                    full_sweep(m, params)
                else:
                    local_backups(m, s, a, params)
            log.states.append(obs)
            log.actions.append(a)
            log.rewards.append(r)
            log.weights.append(weights)
            if done:
                log.reached_goal = True
                break
            obs = nxt
        else:
            log.truncated = True
        for m in self.models:
            plan(m, params, bounds=True)
        return log


class ModelBasedAgent:
    """Epsilon-greedy on the full-space point estimate; no subspaces and no
    confidence bounds."""

    def __init__(self, env, family: SpaceFamily, epsilon: float = 0.1,
                 params: PlannerParams = PlannerParams(), theta0: float = 0.01):
        self.spaces = SpaceSet(env, SpaceFamily(family.full, ()), reward_interval_length(env))
        self.model = self.spaces.models[0]
        self.models = self.spaces.models
        self.epsilon = epsilon
        self.params = params
        self.theta0 = theta0

    space_names = ("full",)

    def greedy_action(self, obs) -> int:
        return int(np.argmax(self.model.q[self.spaces.indices(obs)[0]]))

    def run_episode(self, env, rng: np.random.Generator, episode: int) -> EpisodeLog:
        params = self.params.with_theta(theta_schedule(episode, self.theta0))
        m = self.model
        log = EpisodeLog(episode)
        obs = env.reset(rng)
        for _ in range(env.max_steps):
            s = self.spaces.indices(obs)[0]
            a = sample_action(cdm.epsilon_greedy_probs(m.q[s], self.epsilon), rng)
            nxt, r, done, len_r = env.step(a, rng)
            s2 = m.terminal if done else self.spaces.indices(nxt)[0]
            m.update(s, a, s2, r, len_r)
            one_step_backup(m, s, a, params)
            log.states.append(obs)
            log.actions.append(a)
            log.rewards.append(r)
            if done:
                log.reached_goal = True
                break
            obs = nxt
        else:
            log.truncated = True
        plan(m, params, bounds=False)
        return log
