"""Feature subspaces and dense state indexing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

IR_NAMES = ("ir_up", "ir_right", "ir_down", "ir_left")


@dataclass(frozen=True)
class Feature:
    name: str
    low: int
    cardinality: int


class StateIndexer:
    """Mixed-radix bijection between value tuples and ``[0, size)``."""

    def __init__(self, lows: Sequence[int], cards: Sequence[int]):
        self.lows = tuple(int(v) for v in lows)
        self.cards = tuple(int(c) for c in cards)
        if any(c < 1 for c in self.cards):
            raise ValueError("cardinalities must be positive")
        strides = []
        acc = 1
        for c in reversed(self.cards):
            strides.append(acc)
            acc *= c
        self.strides = tuple(reversed(strides))
        self.size = acc

    def index(self, values: Sequence[int]) -> int:
        if len(values) != len(self.cards):
            raise ValueError(f"expected {len(self.cards)} values, got {len(values)}")
        i = 0
        for v, lo, c, st in zip(values, self.lows, self.cards, self.strides):
            k = v - lo
            if not 0 <= k < c:
                raise ValueError(f"feature value {v} outside [{lo}, {lo + c - 1}]")
            i += k * st
        return i

    def values(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < self.size:
            raise ValueError(f"index {index} outside [0, {self.size})")
        out = []
        for lo, c, st in zip(self.lows, self.cards, self.strides):
            out.append(lo + (index // st) % c)
        return tuple(out)


@dataclass(frozen=True)
class SubspaceDef:
    """Ordered, nonempty selection of features (0-based indices)."""

    feature_indices: Tuple[int, ...]
    features: Tuple[Feature, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.feature_indices)
        object.__setattr__(self, "feature_indices", idx)
        if not idx:
            raise ValueError("subspace must select at least one feature")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("feature indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= len(self.features):
            raise ValueError("feature index out of range")
        sel = [self.features[i] for i in idx]
        object.__setattr__(self, "_indexer",
                           StateIndexer([f.low for f in sel], [f.cardinality for f in sel]))

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(self.features[i].cardinality for i in self.feature_indices)

    @property
    def size(self) -> int:
        return self._indexer.size

    @property
    def name(self) -> str:
        return "+".join(self.features[i].name for i in self.feature_indices)

    @property
    def indexer(self) -> StateIndexer:
        return self._indexer

    def is_full(self) -> bool:
        return len(self.feature_indices) == len(self.features)


def project(state: Sequence[int], sub: SubspaceDef) -> int:
    """Dense index of the sub-tuple of ``state`` selected by ``sub``."""
    if len(state) != len(sub.features):
        raise ValueError("state has the wrong number of features")
    return sub.indexer.index([state[i] for i in sub.feature_indices])


@dataclass(frozen=True)
class SpaceFamily:
    full: SubspaceDef
    subs: Tuple[SubspaceDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "subs", tuple(self.subs))
        if not self.full.is_full():
            raise ValueError("full space must cover every feature")
        keys = [s.feature_indices for s in self.subs]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate subspaces")
        if any(s.is_full() for s in self.subs):
            raise ValueError("a subspace may not equal the full feature set")
        if any(s.features != self.full.features for s in self.subs):
            raise ValueError("subspaces must share the full space's features")

    @property
    def spaces(self) -> Tuple[SubspaceDef, ...]:
        return (self.full,) + self.subs

    @property
    def names(self) -> List[str]:
        return ["full"] + [s.name for s in self.subs]


def grid_features(width: int, height: int, sensors: int = 2) -> Tuple[Feature, ...]:
    feats = [Feature("x", 1, width), Feature("y", 1, height)]
    if sensors == 6:
        feats += [Feature(n, 0, 2) for n in IR_NAMES]
    elif sensors != 2:
        raise ValueError("sensors must be 2 or 6")
    return tuple(feats)


def family_from_names(features: Sequence[Feature],
                      subspaces: Iterable[Sequence[str]]) -> SpaceFamily:
    """Build a family from lists of feature names, e.g. ``[["x"], ["y"]]``."""
    features = tuple(features)
    names = [f.name for f in features]
    subs = []
    for group in subspaces:
        try:
            idx = sorted(names.index(n) for n in group)
        except ValueError as exc:
            raise ValueError(f"unknown feature in subspace {list(group)}") from exc
        subs.append(SubspaceDef(tuple(idx), features))
    return SpaceFamily(SubspaceDef(tuple(range(len(features))), features), tuple(subs))


def default_family(mode: int, width: int, height: int,
                   subspaces: Optional[Iterable[Sequence[str]]] = None) -> SpaceFamily:
    """Singleton subspace per feature unless ``subspaces`` overrides it."""
    features = grid_features(width, height, mode)
    if subspaces is None:
        subspaces = [[f.name] for f in features]
    return family_from_names(features, subspaces)


def projection_table(states: Sequence[Sequence[int]], sub: SubspaceDef) -> np.ndarray:
    return np.array([project(s, sub) for s in states], dtype=np.int64)
