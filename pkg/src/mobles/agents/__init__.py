"""Learning agents sharing one episode protocol:
``agent.run_episode(env, rng, episode) -> EpisodeLog``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import List, Optional, Union

from ..planner import PlannerParams
from ..spaces import default_family
from .base import LAMBDAS, EpisodeLog, SpaceSet, alpha_schedule, beta_schedule, sample_action
from .model_based import ModelBasedAgent, MoBLeSAgent, mobles_thr_gate
from .model_free import (QLambdaAgent, QSLambdaAgent, TDParams, TileQAgent, ql_tile_step,
                         qlambda_step)

KINDS = ("mobles", "mobles-thr", "mb", "qlambda", "qslambda", "ql-tile")


@dataclass
class AgentConfig:
    id: str
    kind: str
    epsilon: float = 0.1
    gamma: float = 0.9
    theta0: float = 0.01
    delta_R: float = 0.1
    delta_p: float = 0.1
    lam: float = 0.9
    alpha: Union[int, float] = 7
    beta: Union[int, float] = 1
    visit_threshold: Optional[float] = None
    subspaces: Optional[List[List[str]]] = None
    sensors: Optional[int] = None
    full_backup: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        for name, hi in (("alpha", 7), ("beta", 5)):
            v = getattr(self, name)
            if isinstance(v, int) and not isinstance(v, bool) and not 1 <= v <= hi:
                raise ValueError(f"{name} schedule id must be in 1..{hi}")
            if isinstance(v, float) and v < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.sensors not in (None, 2, 6):
            raise ValueError("sensors must be 2 or 6")
        if self.kind == "mobles-thr" and self.visit_threshold is None:
            self.visit_threshold = 5
        if self.visit_threshold is not None and self.visit_threshold < 1:
            raise ValueError("visit_threshold must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "AgentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown agent options: {sorted(extra)}")
        data = dict(data)
        if "id" not in data:
            data["id"] = data.get("kind", "")
        return cls(**data)

    def planner_params(self) -> PlannerParams:
        return PlannerParams(self.gamma, self.theta0, self.delta_R, self.delta_p)


def make_agent(cfg: AgentConfig, env):
    family = default_family(env.sensors, env.maze.width, env.maze.height, cfg.subspaces)
    if cfg.kind in ("mobles", "mobles-thr"):
        thr = cfg.visit_threshold if cfg.visit_threshold is not None else math.inf
        return MoBLeSAgent(env, family, cfg.epsilon, cfg.planner_params(), cfg.theta0,
                           visit_threshold=thr, full_backup=cfg.full_backup)
    if cfg.kind == "mb":
        return ModelBasedAgent(env, family, cfg.epsilon, cfg.planner_params(), cfg.theta0)
    if cfg.kind == "qlambda":
        return QLambdaAgent(env, family, cfg.epsilon, cfg.gamma, cfg.lam, cfg.alpha)
    if cfg.kind == "qslambda":
        return QSLambdaAgent(env, family, cfg.epsilon, cfg.gamma, cfg.lam, cfg.alpha,
                             cfg.delta_R)
    return TileQAgent(env, family, cfg.epsilon, cfg.gamma, cfg.beta)


__all__ = [
    "AgentConfig", "EpisodeLog", "KINDS", "LAMBDAS", "ModelBasedAgent", "MoBLeSAgent",
    "QLambdaAgent", "QSLambdaAgent", "SpaceSet", "TDParams", "TileQAgent", "alpha_schedule",
    "beta_schedule", "make_agent", "mobles_thr_gate", "ql_tile_step", "qlambda_step",
    "sample_action",
]
