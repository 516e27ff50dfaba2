"""Value iteration over estimated models, with optimistic and pessimistic
bounds from L1 transition balls and Hoeffding reward radii."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .model import TabularModel

MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class PlannerParams:
    gamma: float = 0.9
    theta: float = 0.01
    delta_R: float = 0.1
    delta_p: float = 0.1
    max_sweeps: int = MAX_SWEEPS

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        for name in ("delta_R", "delta_p"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")

    def with_theta(self, theta: float) -> "PlannerParams":
        return PlannerParams(self.gamma, theta, self.delta_R, self.delta_p, self.max_sweeps)


def theta_schedule(episode: int, base: float = 0.01) -> float:
    """Stopping threshold for episode ``episode`` (numbered from 1)."""
    if episode < 1:
        raise ValueError("episodes are numbered from 1")
    return base / (1.0 + math.log(episode))


# --------------------------------------------------------------------------
# inner problem: extreme point of the L1 ball around p_hat inside the simplex


def _check_prob(p: np.ndarray) -> None:
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p_hat must be a nonempty vector")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p_hat must be a probability vector")


def _shift_mass(values: Sequence[float], probs: Sequence[float], eps: float) -> List[float]:
    # maximise sum(p * values): move up to eps/2 onto the best successor,
    # taking it from the worst ones first; ties keep the lower index first
    m = len(values)
    order = sorted(range(m), key=lambda i: -values[i])
    out = list(probs)
    best = order[0]
    top = min(1.0, out[best] + 0.5 * eps)
    excess = top - out[best]
    out[best] = top
    for i in reversed(order[1:]):
        if excess <= 0.0:
            break
        take = min(out[i], excess)
        out[i] -= take
        excess -= take
    return out


def inner_extreme_L1(values, p_hat, eps_p: float, direction: str = "max") -> np.ndarray:
    """Probability vector within L1 distance ``eps_p`` of ``p_hat`` that
    maximises (or minimises) its inner product with ``values``."""
    values = np.asarray(values, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    _check_prob(p_hat)
    if values.shape != p_hat.shape:
        raise ValueError("values and p_hat differ in length")
    if direction not in ("max", "min"):
        raise ValueError("direction must be 'max' or 'min'")
    eps = min(max(float(eps_p), 0.0), 2.0)
    signed = values if direction == "max" else -values
    return np.array(_shift_mass(signed.tolist(), p_hat.tolist(), eps))


def extreme_probs(values: np.ndarray, p: np.ndarray, eps: np.ndarray,
                  mask: np.ndarray) -> np.ndarray:
    """Batched maximising version of :func:`inner_extreme_L1` over the last
    axis.  Entries where ``mask`` is False are padding and stay at zero."""
    v = np.where(mask, values, -np.inf)
    order = np.argsort(-v, axis=-1, kind="stable")
    ps = np.take_along_axis(p, order, axis=-1)
    top = np.minimum(1.0, ps[..., 0] + 0.5 * eps)
    excess = top - ps[..., 0]
    rest = ps[..., 1:]
    after = np.cumsum(rest[..., ::-1], axis=-1)[..., ::-1] - rest
    rest = rest - np.clip(excess[..., None] - after, 0.0, rest)
    new = np.concatenate([top[..., None], rest], axis=-1)
    out = np.empty_like(new)
    np.put_along_axis(out, order, new, axis=-1)
    return out


# --------------------------------------------------------------------------
# value iteration


def state_values(q: np.ndarray) -> np.ndarray:
    return q.max(axis=1)


def _iterate(step, q0: np.ndarray, active: np.ndarray, theta: float, max_sweeps: int,
             history: Optional[list]) -> np.ndarray:
    q = q0.copy()
    q[~active] = 0.0
    for _ in range(max_sweeps):
        new = step(q)
        new[~active] = 0.0
        diff = float(np.max(np.abs(new - q))) if q.size else 0.0
        if history is not None:
            history.append(diff)
        q = new
        if diff <= theta:
            return q
    raise RuntimeError(f"value iteration exceeded {max_sweeps} sweeps")


def policy_evaluation(model: TabularModel, params: PlannerParams,
                      init: Optional[np.ndarray] = None,
                      history: Optional[list] = None) -> np.ndarray:
    """Point-estimate optimal Q of the estimated model."""
    P = model.probs()
    R = model.r_hat
    succ = model.succ
    gamma = params.gamma

    def sweep(q):
        v = q.max(axis=1)
        return R + gamma * (P * v[succ]).sum(axis=-1)

    q0 = np.zeros_like(R) if init is None else init
    return _iterate(sweep, q0, model.active, params.theta, params.max_sweeps, history)


def _bound_sweep_fn(model: TabularModel, params: PlannerParams, sign: float):
    P = model.probs()
    mask = model.mask
    succ = model.succ
    eps_p = model.transition_radii(params.delta_p)
    r = model.r_hat + sign * model.reward_radii(params.delta_R)
    gamma = params.gamma

    def sweep(q):
        vals = q.max(axis=1)[succ]
        pt = extreme_probs(sign * vals, P, eps_p, mask)
        return r + gamma * np.where(mask, pt * vals, 0.0).sum(axis=-1)

    return sweep


def optimistic_values(model: TabularModel, params: PlannerParams,
                      init: Optional[np.ndarray] = None,
                      history: Optional[list] = None) -> np.ndarray:
    sweep = _bound_sweep_fn(model, params, 1.0)
    q0 = np.zeros_like(model.r_hat) if init is None else init
    return _iterate(sweep, q0, model.active, params.theta, params.max_sweeps, history)


def pessimistic_values(model: TabularModel, params: PlannerParams,
                       init: Optional[np.ndarray] = None,
                       history: Optional[list] = None) -> np.ndarray:
    sweep = _bound_sweep_fn(model, params, -1.0)
    q0 = np.zeros_like(model.r_hat) if init is None else init
    return _iterate(sweep, q0, model.active, params.theta, params.max_sweeps, history)


def _row_max(q: np.ndarray, succ: List[int]) -> List[float]:
    return q[succ].max(axis=1).tolist()


def one_step_backup(model: TabularModel, s: int, a: int, params: PlannerParams,
                    q: Optional[np.ndarray] = None) -> float:
    """Apply the Bellman equation once at ``(s, a)``; writes into ``q``
    (``model.q`` by default) and returns the new value."""
    q = model.q if q is None else q
    succ = model.succ_lists[s][a]
    if not succ:
        return float(q[s, a])
    v = _row_max(q, succ)
    p = model.prob_list(s, a)
    val = float(model.r_hat[s, a]) + params.gamma * sum(pi * vi for pi, vi in zip(p, v))
    q[s, a] = val
    return val


def bound_backup(model: TabularModel, s: int, a: int, params: PlannerParams,
                 direction: str = "max", q: Optional[np.ndarray] = None) -> float:
    """One optimistic (``max``) or pessimistic (``min``) backup at ``(s, a)``."""
    if direction not in ("max", "min"):
        raise ValueError("direction must be 'max' or 'min'")
    if q is None:
        q = model.q_u if direction == "max" else model.q_l
    succ = model.succ_lists[s][a]
    if not succ:
        return float(q[s, a])
    v = _row_max(q, succ)
    p = model.prob_list(s, a)
    eps_p = model.transition_radius(s, a, params.delta_p)
    eps_r = model.reward_radius(s, a, params.delta_R)
    if direction == "max":
        pt = _shift_mass(v, p, eps_p)
        base = float(model.r_hat[s, a]) + eps_r
    else:
        pt = _shift_mass([-x for x in v], p, eps_p)
        base = float(model.r_hat[s, a]) - eps_r
    val = base + params.gamma * sum(pi * vi for pi, vi in zip(pt, v))
    q[s, a] = val
    return val


def local_backups(model: TabularModel, s: int, a: int, params: PlannerParams) -> None:
    """Point, optimistic and pessimistic backups at one visited pair."""
    one_step_backup(model, s, a, params)
    bound_backup(model, s, a, params, "max")
    bound_backup(model, s, a, params, "min")


def full_sweep(model: TabularModel, params: PlannerParams) -> None:
    """Single synchronous sweep of all three operators over every state."""
    one = params.with_theta(float("inf"))
    model.q = policy_evaluation(model, one, init=model.q)
    model.q_u = optimistic_values(model, one, init=model.q_u)
    model.q_l = pessimistic_values(model, one, init=model.q_l)


def plan(model: TabularModel, params: PlannerParams, bounds: bool = True,
         warm_start: bool = True) -> None:
    """Recompute ``q`` (and optionally ``q_u``/``q_l``) to convergence."""
    model.q = policy_evaluation(model, params, init=model.q if warm_start else None)
    if bounds:
        model.q_u = optimistic_values(model, params, init=model.q_u if warm_start else None)
        model.q_l = pessimistic_values(model, params, init=model.q_l if warm_start else None)
