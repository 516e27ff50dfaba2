import numpy as np
import pytest

from mobles.gridworld import load_map
from mobles.model import TabularModel


def open_map(size: int = 7, goal_top_right: bool = True):
    """Bordered ``size``x``size`` map with an empty interior and the goal in
    the top-right interior cell."""
    inner = size - 2
    rows = ["#" * size]
    for r in range(inner):
        row = ["."] * inner
        if r == 0 and goal_top_right:
            row[-1] = "G"
        rows.append("#" + "".join(row) + "#")
    rows.append("#" * size)
    return "\n".join(rows)


CORRIDOR = "#######\n#....G#\n#######"


def model_from_exact(mdp, scale: int = 40) -> TabularModel:
    """Tabular model whose estimated transitions and rewards equal the exact
    model.  Probabilities in the shipped dynamics are multiples of 1/40."""
    S = len(mdp.states)
    succ = [sorted(set(np.nonzero(mdp.P[s].sum(axis=0))[0].tolist())) for s in range(S)]
    m = TabularModel(S, mdp.P.shape[1], succ)
    for s in range(S):
        for a in range(mdp.P.shape[1]):
            for k, t in enumerate(m.succ_lists[s][a]):
                c = int(round(mdp.P[s, a, t] * scale))
                m.counts[s, a, k] = c
                m.count_lists[s][a][k] = c
            m.n[s, a] = scale
            m.r_hat[s, a] = mdp.R[s, a]
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def open7():
    return load_map(open_map(7))


ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion."""
    def _report(number: int, ok: bool, detail: str) -> bool:
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
