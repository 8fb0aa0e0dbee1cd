"""
Shared builders for the FLM Solver test suite
"""

from typing import List, Sequence

import numpy as np
import pytest
from hypothesis import strategies as st

from flmsolver.config import reload_settings
from flmsolver.models.graph import Graph
from flmsolver.models.instance import FlmInstance
from flmsolver.services.instances import make_instance


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test sees default settings, whatever the caller's environment"""
    for key in ("FLM_DATABASE_URL", "FLM_LOG_FILE", "FLM_JOBS", "FLM_CHECK_LEMMAS"):
        monkeypatch.delenv(key, raising=False)
    reload_settings()
    yield
    reload_settings()


def zero_metric(n: int) -> List[List[float]]:
    return [[0.0] * n for _ in range(n)]


def line_instance(opening: Sequence[float], positions: Sequence[float], edges) -> FlmInstance:
    """Facilities and clients on a line; positions list facilities first"""
    metric = [[abs(a - b) for b in positions] for a in positions]
    return make_instance(opening=list(opening), metric=metric, edges=edges)


def cycle_edges(n: int):
    return [(v, v + 1) for v in range(n - 1)] + [(0, n - 1)]


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(len(rows)) < p
    return Graph(n, tuple(zip(rows[keep].tolist(), cols[keep].tolist())))


@st.composite
def graphs(draw, min_vertices: int = 1, max_vertices: int = 8) -> Graph:
    """Random simple graphs on a handful of vertices"""
    n = draw(st.integers(min_vertices, max_vertices))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, tuple(p for p, k in zip(pairs, keep) if k))
