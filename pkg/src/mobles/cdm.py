"""Confidence degrees and fusion of subspace and full-space policies.

Singular cases use ``inf`` as a sentinel: a zero-length subspace interval
against a nonzero full-space interval gives an infinite length ratio, and a
zero distance over a zero-length overlap gives an infinite overlap-distance
quantity.  Products follow ``0 * inf = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

INF = math.inf


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval lower bound exceeds upper bound")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def intersect(self, other: "ConfidenceInterval") -> Optional["ConfidenceInterval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return ConfidenceInterval(lo, hi)


def erfinv(x):
    """Inverse error function; ``|x| >= 1`` maps to signed infinity."""
    arr = np.asarray(x, dtype=float)
    out = special.erfinv(np.clip(arr, -1.0, 1.0))
    out = np.where(np.abs(arr) >= 1.0, np.copysign(np.inf, arr), out)
    return float(out) if np.ndim(out) == 0 else out


def length_fn(t):
    """Default length quantity: zero up to a ratio of one, identity above."""
    if isinstance(t, float):
        return t if t > 1.0 else 0.0
    t = np.asarray(t, dtype=float)
    out = np.where(t > 1.0, t, 0.0)
    return float(out) if out.ndim == 0 else out


def overlap_fn(t):
    """Default overlap-distance quantity, decreasing from ``inf`` at 0 to 0 at 1/2."""
    if isinstance(t, float):
        if t > 0.5:
            return 0.0
        return INF if t == 0.0 else -float(special.erfinv(2.0 * t - 1.0))
    t = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.where(t <= 0.5, -erfinv(np.minimum(2.0 * t - 1.0, 0.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = num / den
    return np.where(den > 0, r, np.where(num > 0, np.inf, 0.0))


def length_quantity(ci_full: ConfidenceInterval, ci_sub: ConfidenceInterval,
                    f: Callable = length_fn) -> float:
    return float(f(_ratio(ci_full.length, ci_sub.length)))


def overlap_distance_quantity(q_full: float, q_sub: float, ci_full: ConfidenceInterval,
                              ci_sub: ConfidenceInterval, g: Callable = overlap_fn) -> float:
    inter = ci_full.intersect(ci_sub)
    if inter is None:
        raise ValueError("intervals do not overlap")
    dist = abs(float(q_full) - float(q_sub))
    if inter.length == 0.0:
        t = 0.0 if dist == 0.0 else INF
    else:
        t = dist / float(inter.length)
    return float(g(t))


def _product(fv, gv):
    fv = np.asarray(fv, dtype=float)
    gv = np.asarray(gv, dtype=float)
    with np.errstate(invalid="ignore"):
        prod = fv * gv
    return np.where((fv == 0.0) | (gv == 0.0), 0.0, prod)


def confidence_degree(q_full: float, q_sub: float, ci_full: ConfidenceInterval,
                      ci_sub: ConfidenceInterval, f: Callable = length_fn,
                      g: Callable = overlap_fn) -> float:
    if ci_full.intersect(ci_sub) is None:
        return 0.0
    fv = length_quantity(ci_full, ci_sub, f)
    gv = overlap_distance_quantity(q_full, q_sub, ci_full, ci_sub, g)
    return float(_product(fv, gv))


def _scalar_ratio(num: float, den: float) -> float:
    if den > 0.0:
        return num / den
    return INF if num > 0.0 else 0.0


def _scalar_degree(qf, lf, hf, qs, ls, hs, f, g) -> float:
    ov = min(hf, hs) - max(lf, ls)
    if ov < 0.0:
        return 0.0
    fv = f(_scalar_ratio(max(hf - lf, 0.0), max(hs - ls, 0.0)))
    if fv == 0.0:
        return 0.0
    gv = g(_scalar_ratio(abs(qf - qs), ov))
    if gv == 0.0:
        return 0.0
    return float(fv * gv)


def confidence_degrees(q_full, lo_full, hi_full, q_sub, lo_sub, hi_sub,
                       f: Callable = length_fn, g: Callable = overlap_fn) -> np.ndarray:
    """Confidence degrees for every subspace and action.

    Full-space arguments have shape ``(A,)``; subspace arguments ``(k, A)``.
    Interval lengths are clipped at zero.
    """
    qf, lf, hf = (np.asarray(x, dtype=float).tolist() for x in (q_full, lo_full, hi_full))
    qs, ls, hs = (np.asarray(x, dtype=float).reshape(-1, len(qf)).tolist()
                  for x in (q_sub, lo_sub, hi_sub))
    out = np.zeros((len(qs), len(qf)))
    for j in range(len(qs)):
        for a in range(len(qf)):
            out[j, a] = _scalar_degree(qf[a], lf[a], hf[a], qs[j][a], ls[j][a], hs[j][a], f, g)
    return out


def epsilon_greedy_probs(q_row: Sequence[float], epsilon: float) -> np.ndarray:
    q = np.asarray(q_row, dtype=float).tolist()
    if not q:
        raise ValueError("empty action set")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    top = max(q)
    n_top = q.count(top)
    base = epsilon / len(q)
    return np.array([base + (1.0 - epsilon) / n_top if x == top else base for x in q])


def _select(cds: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    cols = np.arange(cds.shape[1])
    best = np.argmax(cds, axis=0)
    return best, cds[best, cols] > 1.0


def fuse(full_probs, sub_probs, cds) -> np.ndarray:
    """Per action, take the most confident subspace's probability when its
    confidence degree exceeds one, otherwise the full-space probability;
    then renormalise."""
    full = np.asarray(full_probs, dtype=float)
    sub = np.asarray(sub_probs, dtype=float).reshape(-1, full.size)
    cds = np.asarray(cds, dtype=float).reshape(-1, full.size)
    if sub.shape != cds.shape:
        raise ValueError("subspace probabilities and degrees differ in shape")
    if sub.shape[0] == 0:
        return full.copy()
    best, use = _select(cds)
    if not use.any():
        return full.copy()
    pr = np.where(use, sub[best, np.arange(full.size)], full)
    total = pr.sum()
    if not total > 0.0:
        raise ValueError("fused action probabilities sum to zero")
    return pr / total


def decision_weights(cds) -> np.ndarray:
    """Share of actions whose probability came from each space, full first."""
    cds = np.asarray(cds, dtype=float)
    k, n_actions = cds.shape
    weights = np.zeros(k + 1)
    if k:
        best, use = _select(cds)
        weights[1:] = np.bincount(best[use], minlength=k) / n_actions
    weights[0] = 1.0 - weights[1:].sum()
    return weights
