"""Per-space tabular MDP estimates and their confidence radii."""
from __future__ import annotations

import csv
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

SIMPLEX_L1_DIAMETER = 2.0

SuccessorSpec = Union[None, Sequence[Sequence[int]], Callable[[int, int], Sequence[int]]]


def _log_subsets(m: int) -> float:
    """``log(2**m - 2)`` without overflow, for ``m >= 2``."""
    return m * math.log(2.0) + math.log1p(-2.0 ** (1 - m))


class TabularModel:
    """Counts, running reward means and value tables for one space.

    States are dense indices ``0..n_states-1``; index ``n_states`` is an
    absorbing terminal whose value is pinned to zero.  ``successors`` lists
    the states reachable from each state (shared by all actions), may be a
    callable ``(s, a) -> states``, or ``None`` for "every state".  States
    with an empty successor list are inactive and keep zero values.
    """

    def __init__(self, n_states: int, n_actions: int, successors: SuccessorSpec = None,
                 prior_len: float = 2.0, kind: str = "full", name: str = "full"):
        if kind not in ("full", "subspace"):
            raise ValueError("kind must be 'full' or 'subspace'")
        self.n_states = n_states
        self.n_actions = n_actions
        self.terminal = n_states
        self.prior_len = float(prior_len)
        self.kind = kind
        self.name = name
        S = n_states + 1
        lists: List[List[List[int]]] = []
        for s in range(n_states):
            row = []
            for a in range(n_actions):
                if successors is None:
                    succ = list(range(S))
                elif callable(successors):
                    succ = list(successors(s, a))
                else:
                    succ = list(successors[s])
                row.append(sorted(set(int(t) for t in succ)))
            lists.append(row)
        lists.append([[] for _ in range(n_actions)])
        width = max(1, max(len(x) for row in lists for x in row))
        self.succ = np.full((S, n_actions, width), self.terminal, dtype=np.int64)
        self.mask = np.zeros((S, n_actions, width), dtype=bool)
        self._slot: List[List[Dict[int, int]]] = []
        # python-side mirrors of successors and counts for the per-step path
        self.succ_lists = [[list(x) for x in row] for row in lists]
        self.count_lists = [[[0] * len(x) for x in row] for row in lists]
        for s, row in enumerate(lists):
            slots = []
            for a, succ in enumerate(row):
                self.succ[s, a, :len(succ)] = succ
                self.mask[s, a, :len(succ)] = True
                slots.append({t: k for k, t in enumerate(succ)})
            self._slot.append(slots)
        self.active = self.mask.any(axis=(1, 2))
        self.counts = np.zeros((S, n_actions, width), dtype=np.int64)
        self.n = np.zeros((S, n_actions), dtype=np.int64)
        self.r_hat = np.zeros((S, n_actions))
        self.sum_sq_len = np.zeros((S, n_actions))
        self.len_r = np.full((S, n_actions), self.prior_len)
        self.q = np.zeros((S, n_actions))
        self.q_u = np.zeros((S, n_actions))
        self.q_l = np.zeros((S, n_actions))

    # ------------------------------------------------------------------ updates

    def _extend(self, s: int, a: int, s_next: int) -> int:
        log.warning("%s: successor %d of (%d, %d) was not declared; extending",
                    self.name, s_next, s, a)
        k = int(self.mask[s, a].sum())
        if k == self.succ.shape[2]:
            pad = ((0, 0), (0, 0), (0, 1))
            self.succ = np.pad(self.succ, pad, constant_values=self.terminal)
            self.mask = np.pad(self.mask, pad, constant_values=False)
            self.counts = np.pad(self.counts, pad)
        self.succ[s, a, k] = s_next
        self.mask[s, a, k] = True
        self._slot[s][a][s_next] = k
        self.succ_lists[s][a].append(s_next)
        self.count_lists[s][a].append(0)
        self.active[s] = True
        return k

    def update(self, s: int, a: int, s_next: int, r: float, len_r: float) -> None:
        if len_r <= 0:
            raise ValueError("reward interval length must be positive")
        k = self._slot[s][a].get(s_next)
        if k is None:
            k = self._extend(s, a, s_next)
        n = self.n[s, a]
        self.r_hat[s, a] = (self.r_hat[s, a] * n + r) / (n + 1)
        self.counts[s, a, k] += 1
        self.count_lists[s][a][k] += 1
        self.n[s, a] = n + 1
        self.sum_sq_len[s, a] += len_r * len_r
        self.len_r[s, a] = len_r

    # ------------------------------------------------------------ probabilities

    def successors(self, s: int, a: int) -> np.ndarray:
        return self.succ[s, a][self.mask[s, a]]

    def n_successors(self, s: int, a: int) -> int:
        return len(self.succ_lists[s][a])

    def prob_list(self, s: int, a: int) -> List[float]:
        """Same as :meth:`prob_row` as a plain list."""
        c = self.count_lists[s][a]
        n = int(self.n[s, a])
        if n == 0:
            return [1.0 / len(c)] * len(c) if c else []
        return [x / n for x in c]

    def prob_row(self, s: int, a: int) -> np.ndarray:
        """Estimated transition probabilities aligned with ``successors``."""
        m = self.mask[s, a]
        k = int(m.sum())
        if k == 0:
            return np.zeros(0)
        n = self.n[s, a]
        if n == 0:
            return np.full(k, 1.0 / k)
        return self.counts[s, a][m] / n

    def estimated_prob(self, s: int, a: int, s_next: int) -> float:
        k = self._slot[s][a].get(s_next)
        if k is None:
            return 0.0
        n = self.n[s, a]
        if n == 0:
            return 1.0 / self.n_successors(s, a)
        return self.counts[s, a, k] / n

    def probs(self) -> np.ndarray:
        """Padded ``(S + 1, A, K)`` array of estimated probabilities."""
        m = self.mask.sum(axis=2, keepdims=True)
        uniform = np.where(self.mask, 1.0 / np.maximum(m, 1), 0.0)
        n = self.n[..., None]
        return np.where(n > 0, self.counts / np.maximum(n, 1), uniform)

    # ------------------------------------------------------------------- radii

    def reward_radius(self, s: int, a: int, delta_R: float,
                      space_kind: Optional[str] = None) -> float:
        if not 0.0 < delta_R < 1.0:
            raise ValueError("delta_R must lie in (0, 1)")
        kind = space_kind or self.kind
        n = self.n[s, a]
        eff = max(1, n)
        log_term = math.log(2.0 / delta_R)
        if kind == "full":
            L = self.len_r[s, a]
            return math.sqrt(L * L * log_term / (2.0 * eff))
        total = self.sum_sq_len[s, a] if n > 0 else self.prior_len ** 2
        return math.sqrt(total * log_term / (2.0 * eff * eff))

    def reward_radii(self, delta_R: float, space_kind: Optional[str] = None) -> np.ndarray:
        kind = space_kind or self.kind
        eff = np.maximum(1, self.n).astype(float)
        log_term = math.log(2.0 / delta_R)
        if kind == "full":
            return np.sqrt(self.len_r ** 2 * log_term / (2.0 * eff))
        total = np.where(self.n > 0, self.sum_sq_len, self.prior_len ** 2)
        return np.sqrt(total * log_term / (2.0 * eff * eff))

    def transition_radius(self, s: int, a: int, delta_p: float) -> float:
        return transition_radius(self.n_successors(s, a), int(self.n[s, a]), delta_p)

    def transition_radii(self, delta_p: float) -> np.ndarray:
        m = self.mask.sum(axis=2)
        out = np.zeros(self.n.shape)
        eff = np.maximum(1, self.n).astype(float)
        for k in np.unique(m):
            if k < 2:
                continue
            sel = m == k
            val = np.sqrt(2.0 * (_log_subsets(int(k)) - math.log(delta_p)) / eff[sel])
            out[sel] = np.minimum(val, SIMPLEX_L1_DIAMETER)
        return out

    # ---------------------------------------------------------------- snapshot

    def dump_csv(self, path, space: Optional[str] = None, mode: str = "w") -> None:
        """Write ``space, s, a, s', count, R_hat`` rows for visited pairs."""
        space = space or self.name
        with open(path, mode, newline="") as fh:
            w = csv.writer(fh)
            if mode == "w":
                w.writerow(["space", "s", "a", "s_next", "count", "r_hat"])
            for s, a in zip(*np.nonzero(self.n)):
                for k in np.nonzero(self.counts[s, a])[0]:
                    w.writerow([space, s, a, self.succ[s, a, k],
                                self.counts[s, a, k], repr(float(self.r_hat[s, a]))])


def transition_radius(m: int, n: int, delta_p: float) -> float:
    """L1 radius for an ``m``-outcome categorical estimate from ``n`` samples,
    clamped to the simplex diameter."""
    if not 0.0 < delta_p < 1.0:
        raise ValueError("delta_p must lie in (0, 1)")
    if m <= 1:
        return 0.0
    val = math.sqrt(2.0 * (_log_subsets(m) - math.log(delta_p)) / max(1, n))
    return min(val, SIMPLEX_L1_DIAMETER)


def hoeffding_radius(span: float, n: int, delta: float) -> float:
    """Half-width for the mean of ``n`` samples of range ``span``."""
    return span * math.sqrt(math.log(2.0 / delta) / (2.0 * max(1, n)))
