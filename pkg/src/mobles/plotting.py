"""Static SVG figures: learning curves with SEM bands and smoothed
decision-weight curves."""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import (Curve, RunRecord, WeightRecord, aggregate, aggregate_weights,  # noqa: E402
                      read_returns, read_weights, smooth_rect)

MARGIN = 0.05
SMOOTH_WINDOW = 5

# keep SVG output stable across runs
plt.rcParams["svg.hashsalt"] = "mobles"
plt.rcParams["svg.fonttype"] = "none"


def _limits(lo: float, hi: float) -> Tuple[float, float]:
    span = hi - lo
    if span == 0.0:
        span = abs(hi) or 1.0
    return lo - MARGIN * span, hi + MARGIN * span


def _set_limits(ax, xs: Sequence[np.ndarray], ys: Sequence[np.ndarray]) -> None:
    x = np.concatenate([np.ravel(v) for v in xs])
    y = np.concatenate([np.ravel(v) for v in ys])
    ax.set_xlim(*_limits(float(x.min()), float(x.max())))
    ax.set_ylim(*_limits(float(y.min()), float(y.max())))


def learning_curve_figure(env: str, curves: Dict[str, Curve]):
    """Mean return per episode for each agent with a shaded SEM band."""
    if not curves:
        raise ValueError("no agents to plot")
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    xs, ys = [], []
    for agent, c in curves.items():
        line, = ax.plot(c.episodes, c.mean, label=agent, lw=1.2)
        lo, hi = c.mean - c.sem, c.mean + c.sem
        ax.fill_between(c.episodes, lo, hi, color=line.get_color(), alpha=0.25, lw=0)
        xs.append(c.episodes)
        ys.extend([lo, hi])
    _set_limits(ax, xs, ys)
    ax.set_xlabel("episode")
    ax.set_ylabel("accumulated reward")
    ax.set_title(env)
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    return fig


def weight_figure(curves: Dict[Tuple[str, str, str], Curve], window: int = SMOOTH_WINDOW):
    """Smoothed mean decision weight per space, one panel per (env, agent)."""
    if not curves:
        raise ValueError("no weight curves to plot")
    panels: Dict[Tuple[str, str], List[Tuple[str, Curve]]] = {}
    for (env, agent, space), c in curves.items():
        panels.setdefault((env, agent), []).append((space, c))
    n = len(panels)
    fig, axes = plt.subplots(n, 1, figsize=(6.4, 2.6 * n), squeeze=False)
    for ax, ((env, agent), items) in zip(axes[:, 0], sorted(panels.items())):
        xs, ys = [], []
        for space, c in items:
            y = smooth_rect(c.mean, window)
            ax.plot(c.episodes, y, label=space, lw=1.2)
            xs.append(c.episodes)
            ys.append(y)
        _set_limits(ax, xs, ys)
        ax.set_title(f"{env} / {agent}")
        ax.set_xlabel("episode")
        ax.set_ylabel("mean weight")
        ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    return fig


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_records(returns: Sequence[RunRecord], weights: Sequence[WeightRecord], out_dir
                 ) -> List[Path]:
    """Write ``returns_<env>.svg`` per environment and ``weights.svg``."""
    curves = aggregate(returns)
    if not curves:
        raise ValueError("no agents to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_env: Dict[str, Dict[str, Curve]] = {}
    for (env, agent), c in curves.items():
        by_env.setdefault(env, {})[agent] = c
    figs = [(learning_curve_figure(env, cs), out / f"returns_{env}.svg")
            for env, cs in sorted(by_env.items())]
    wcurves = aggregate_weights(weights)
    if wcurves:
        figs.append((weight_figure(wcurves), out / "weights.svg"))
    return [_save(fig, path) for fig, path in figs]


def plot_dir(in_dir, out_dir) -> List[Path]:
    in_dir = Path(in_dir)
    returns = read_returns(in_dir / "returns.csv")
    wpath = in_dir / "weights.csv"
    weights = read_weights(wpath) if wpath.exists() else []
    return plot_records(returns, weights, out_dir)
