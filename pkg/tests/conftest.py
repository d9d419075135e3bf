import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from concbound.measures import DiscreteDist  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def coin():
    return DiscreteDist.from_atoms([(-1, 0.5), (1, 0.5)])


@pytest.fixture
def bernoulli():
    return DiscreteDist.from_atoms([(0, 0.5), (1, 0.5)])


@pytest.fixture
def delta0():
    return DiscreteDist.point(0.0)


@st.composite
def discrete_dists(draw, max_atoms=5, lattice=None):
    k = draw(st.integers(1, max_atoms))
    on_grid = draw(st.booleans()) if lattice is None else lattice
    if on_grid:
        xs = draw(st.lists(st.integers(-8, 8), min_size=k, max_size=k, unique=True))
        xs = [x * 0.5 for x in xs]
    else:
        xs = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=k, max_size=k, unique=True))
    ws = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
    total = sum(ws)
    return DiscreteDist.from_atoms([(x, w / total) for x, w in zip(xs, ws)])


@st.composite
def centered_dists(draw, max_atoms=5):
    F = draw(discrete_dists(max_atoms=max_atoms, lattice=False))
    x = F.positions - np.dot(F.masses, F.positions)
    G = DiscreteDist(x, F.masses)
    from hypothesis import assume
    assume(len(G) >= 2 and np.dot(G.masses, G.positions**2) > 1e-4)
    assume(abs(np.dot(G.masses, G.positions)) <= 1e-12)
    return G
