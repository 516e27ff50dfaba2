"""Experiment orchestration: configs, seeding, multi-run execution,
aggregation, smoothing and CSV output."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .agents import LAMBDAS, AgentConfig, make_agent
from .gridworld import MAPS_DIR, MapError, MazeEnv, load_map_file

log = logging.getLogger(__name__)

RETURNS_COLUMNS = ("env", "agent", "run", "episode", "return", "steps", "reached_goal",
                   "truncated")
WEIGHTS_COLUMNS = ("env", "agent", "run", "episode", "space", "weight")


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configurations."""


@dataclass(frozen=True)
class RunRecord:
    env: str
    agent: str
    run: int
    episode: int
    ret: float
    steps: int
    reached_goal: bool
    truncated: bool

    def row(self):
        return [self.env, self.agent, self.run, self.episode, repr(self.ret), self.steps,
                int(self.reached_goal), int(self.truncated)]


@dataclass(frozen=True)
class WeightRecord:
    env: str
    agent: str
    run: int
    episode: int
    space: str
    weight: float

    def row(self):
        return [self.env, self.agent, self.run, self.episode, self.space, repr(self.weight)]


def _resolve_map(ref: str) -> Tuple[str, str]:
    """Return ``(env id, path)`` for a shipped map name or a file path."""
    path = Path(ref)
    if not path.suffix and not path.exists():
        path = MAPS_DIR / f"{ref}.txt"
    if not path.is_file():
        raise ConfigError(f"map not found: {ref}")
    return path.stem, str(path)


@dataclass
class ExperimentConfig:
    maps: List[str]
    agents: List[AgentConfig]
    sensors: int = 2
    episodes: int = 100
    runs: int = 15
    seed: int = 0
    max_steps: int = 2000
    out: str = "results"
    parallel: int = 1
    slip: float = 0.1

    def __post_init__(self):
        if not self.maps:
            raise ConfigError("at least one map is required")
        if not self.agents:
            raise ConfigError("at least one agent is required")
        if self.episodes < 1 or self.runs < 1:
            raise ConfigError("episodes and runs must be at least 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if self.parallel < 1:
            raise ConfigError("parallel must be at least 1")
        if self.sensors not in (2, 6):
            raise ConfigError("sensors must be 2 or 6")
        if not 0.0 <= self.slip <= 1.0:
            raise ConfigError("slip must lie in [0, 1]")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate agent ids: {ids}")
        for ref in self.maps:
            _resolve_map(ref)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        data = dict(data)
        maps = data.pop("maps", None)
        single = data.pop("map", None)
        if maps is None:
            maps = [single] if single is not None else []
        elif single is not None:
            raise ConfigError("give either 'map' or 'maps', not both")
        if isinstance(maps, str):
            maps = [maps]
        agents = data.pop("agents", None) or []
        known = {"sensors", "episodes", "runs", "seed", "max_steps", "out", "parallel", "slip"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            parsed = [AgentConfig.from_dict(a) for a in agents]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad agent entry: {exc}") from exc
        try:
            return cls(maps=[str(m) for m in maps], agents=parsed, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# execution


def run_seed(base_seed: int, run: int) -> np.random.SeedSequence:
    """Seed for run ``run``.  Every agent and map of one run starts from the
    same stream, so adding agents never perturbs the others."""
    return np.random.SeedSequence(base_seed + run)


def make_env(map_ref: str, sensors: int, max_steps: int, slip: float = 0.1) -> MazeEnv:
    _, path = _resolve_map(map_ref)
    maze = load_map_file(path, slip_prob=slip)
    return MazeEnv(maze, sensors, max_steps=max_steps)


def run_single(map_ref: str, agent_cfg: AgentConfig, run: int, cfg: ExperimentConfig
               ) -> Tuple[List[RunRecord], List[WeightRecord]]:
    """All episodes of one agent on one map for one run."""
    env_id, _ = _resolve_map(map_ref)
    sensors = agent_cfg.sensors or cfg.sensors
    env = make_env(map_ref, sensors, cfg.max_steps, cfg.slip)
    agent = make_agent(agent_cfg, env)
    rng = np.random.default_rng(run_seed(cfg.seed, run))
    returns, weights = [], []
    for ep in range(1, cfg.episodes + 1):
        ep_log = agent.run_episode(env, rng, ep)
        ret = ep_log.total_return
        if not math.isfinite(ret):
            raise RuntimeError(f"non-finite return in {env_id}/{agent_cfg.id} run {run}")
        returns.append(RunRecord(env_id, agent_cfg.id, run, ep, ret, ep_log.steps,
                                 ep_log.reached_goal, ep_log.truncated))
        w = ep_log.mean_weights()
        if w is not None:
            for name, value in zip(agent.space_names, w):
                weights.append(WeightRecord(env_id, agent_cfg.id, run, ep, name, float(value)))
    return returns, weights


def _task(args):
    return run_single(*args)


def _sort_key(rec):
    return (rec.env, rec.agent, rec.run, rec.episode)


def execute(cfg: ExperimentConfig) -> Tuple[List[RunRecord], List[WeightRecord]]:
    """Run every (map, agent, run) and return canonically sorted records."""
    tasks = [(m, a, r, cfg) for m in cfg.maps for a in cfg.agents for r in range(cfg.runs)]
    if cfg.parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    returns = sorted(itertools.chain.from_iterable(r[0] for r in results), key=_sort_key)
    weights = sorted(itertools.chain.from_iterable(r[1] for r in results), key=_sort_key)
    return returns, weights


def _csv_text(columns, records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def write_csvs(out_dir, returns: Sequence[RunRecord], weights: Sequence[WeightRecord]
               ) -> Tuple[Path, Path]:
    """Write both CSVs atomically (temporary file, then rename)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, cols, recs in (("returns.csv", RETURNS_COLUMNS, returns),
                             ("weights.csv", WEIGHTS_COLUMNS, weights)):
        final = out / name
        tmp = out / (name + ".tmp")
        try:
            tmp.write_text(_csv_text(cols, recs))
            os.replace(tmp, final)
        finally:
            if tmp.exists():
                tmp.unlink()
        paths.append(final)
    return paths[0], paths[1]


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> Tuple[Path, Path]:
    """Run the experiment and write ``returns.csv`` and ``weights.csv``."""
    returns, weights = execute(cfg)
    return write_csvs(out_dir or cfg.out, returns, weights)


# ---------------------------------------------------------------------------
# reading back and summarising


def read_returns(path) -> List[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != RETURNS_COLUMNS:
            raise ValueError(f"{path}: expected columns {RETURNS_COLUMNS}, got {header}")
        return [RunRecord(r[0], r[1], int(r[2]), int(r[3]), float(r[4]), int(r[5]),
                          bool(int(r[6])), bool(int(r[7]))) for r in reader]


def read_weights(path) -> List[WeightRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != WEIGHTS_COLUMNS:
            raise ValueError(f"{path}: expected columns {WEIGHTS_COLUMNS}, got {header}")
        return [WeightRecord(r[0], r[1], int(r[2]), int(r[3]), r[4], float(r[5]))
                for r in reader]


def smooth_rect(series, window: int) -> np.ndarray:
    """Centered moving average; near the ends the window shrinks
    symmetrically so it stays centered."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    x = np.asarray(series, dtype=float)
    half = window // 2
    out = np.empty_like(x)
    n = x.size
    for i in range(n):
        h = min(half, i, n - 1 - i)
        out[i] = x[i - h:i + h + 1].mean()
    return out


@dataclass
class Curve:
    episodes: np.ndarray
    mean: np.ndarray
    sem: np.ndarray
    runs: int

    @property
    def single_run(self) -> bool:
        """SEM is reported as zero by convention when there is only one run."""
        return self.runs == 1


def _curve(table: Dict[int, Dict[int, float]]) -> Curve:
    episodes = np.array(sorted(table))
    runs = sorted({r for ep in table.values() for r in ep})
    vals = np.array([[table[e].get(r, np.nan) for r in runs] for e in episodes])
    mean = np.nanmean(vals, axis=1)
    counts = np.sum(~np.isnan(vals), axis=1)
    if len(runs) > 1:
        sem = np.nanstd(vals, axis=1, ddof=1) / np.sqrt(counts)
    else:
        sem = np.zeros(len(episodes))
    return Curve(episodes, mean, sem, len(runs))


def aggregate(records: Iterable[RunRecord]) -> Dict[Tuple[str, str], Curve]:
    """Per-episode mean return and standard error per (env, agent)."""
    tables: Dict[Tuple[str, str], Dict[int, Dict[int, float]]] = {}
    for rec in records:
        tables.setdefault((rec.env, rec.agent), {}).setdefault(rec.episode, {})[rec.run] = rec.ret
    out = {k: _curve(t) for k, t in sorted(tables.items())}
    for (env, agent), c in out.items():
        if c.single_run:
            log.info("%s/%s has a single run; SEM reported as 0", env, agent)
    return out


def aggregate_weights(records: Iterable[WeightRecord]) -> Dict[Tuple[str, str, str], Curve]:
    """Per-episode mean weight per (env, agent, space)."""
    tables: Dict[Tuple[str, str, str], Dict[int, Dict[int, float]]] = {}
    for rec in records:
        key = (rec.env, rec.agent, rec.space)
        tables.setdefault(key, {}).setdefault(rec.episode, {})[rec.run] = rec.weight
    return {k: _curve(t) for k, t in sorted(tables.items())}


def subspace_weight(records: Iterable[WeightRecord]) -> Dict[Tuple[str, str], Curve]:
    """Per-episode mean total weight of all subspaces (one minus the full
    space's weight) per (env, agent)."""
    full = [r for r in records if r.space == "full"]
    flipped = [replace(r, weight=1.0 - r.weight) for r in full]
    return {(e, a): c for (e, a, _), c in aggregate_weights(flipped).items()}


def window_means(records: Iterable[RunRecord], env: str, agent: str, first: int,
                 last: int) -> np.ndarray:
    """Per-run mean return over episodes ``first..last`` (inclusive)."""
    per_run: Dict[int, List[float]] = {}
    for rec in records:
        if rec.env == env and rec.agent == agent and first <= rec.episode <= last:
            per_run.setdefault(rec.run, []).append(rec.ret)
    if not per_run:
        raise KeyError(f"no records for {env}/{agent} in episodes {first}..{last}")
    return np.array([np.mean(per_run[r]) for r in sorted(per_run)])


def sem(samples) -> float:
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


def pooled_sem(a, b) -> float:
    """Standard error of the difference of two independent sample means."""
    return math.hypot(sem(a), sem(b))


# ---------------------------------------------------------------------------
# baseline grid search


def sweep_grid(kind: str) -> List[dict]:
    """Hyperparameter settings searched for a baseline kind."""
    if kind in ("qlambda", "qslambda"):
        return [{"lam": lam, "alpha": alpha} for lam in LAMBDAS for alpha in range(1, 8)]
    if kind == "ql-tile":
        return [{"beta": beta} for beta in range(1, 6)]
    raise ConfigError(f"no sweep grid for agent kind {kind!r}")


def run_sweep(cfg: ExperimentConfig, out_dir=None) -> Path:
    """Grid search for every swept baseline in ``cfg``; writes ``sweep.csv``
    (one row per setting, mean return over all runs and episodes) and
    ``best.json`` (the best setting per map and agent)."""
    rows = []
    best: Dict[str, Dict[str, dict]] = {}
    for agent in cfg.agents:
        grid = sweep_grid(agent.kind)
        variants = [replace(agent, id=f"{agent.id}[{i}]", **g) for i, g in enumerate(grid)]
        sub = replace(cfg, agents=variants)
        returns, _ = execute(sub)
        by_key: Dict[Tuple[str, str], List[float]] = {}
        for rec in returns:
            by_key.setdefault((rec.env, rec.agent), []).append(rec.ret)
        for (env, vid), rets in sorted(by_key.items()):
            i = int(vid[len(agent.id) + 1:-1])
            mean = float(np.mean(rets))
            rows.append((env, agent.id, json.dumps(grid[i], sort_keys=True), mean))
            cur = best.setdefault(env, {}).get(agent.id)
            if cur is None or mean > cur["mean_return"]:
                best[env][agent.id] = {"setting": grid[i], "mean_return": mean}
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["env", "agent", "setting", "mean_return"])
        for env, aid, setting, mean in rows:
            w.writerow([env, aid, setting, repr(mean)])
    (out / "best.json").write_text(json.dumps(best, indent=2, sort_keys=True) + "\n")
    return out / "sweep.csv"
