import itertools
import math
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np

from shiftlab.fixtures import load_fixture
from shiftlab.graph import is_valid_graph_torus
from shiftlab.interface import MultiGraph
from shiftlab.interface import TorusConfig

# The configuration printed for the single_orbit fixture, bottom row first
SINGLE_ORBIT_ROWS = [[1, 2, 0, 0], [0, 0, 1, 2]]


def fixture_graph(name: str) -> MultiGraph:
    graph = load_fixture(name).graph
    assert graph is not None, f"{name} does not describe a graph"
    return graph


def graph(h, v, labels: Optional[Sequence[str]] = None) -> MultiGraph:
    n = np.asarray(h).shape[0]
    if labels is None:
        labels = [str(i) for i in range(n)]
    return MultiGraph.from_matrices(labels, [h, v])


def permutation_graph(h_perm: Sequence[int], v_perm: Sequence[int]) -> MultiGraph:
    """Graph whose axis matrices send i to h_perm[i] and v_perm[i]"""
    n = len(h_perm)
    eye = np.eye(n, dtype=np.int64)
    return graph(eye[list(h_perm)], eye[list(v_perm)])


def cycle_lcm(perm: Sequence[int]) -> int:
    lengths = []
    for start in range(len(perm)):
        length, cur = 1, perm[start]
        while cur != start:
            cur = perm[cur]
            length += 1
        lengths.append(length)
    return math.lcm(*lengths)


def random_graph(
    rng: np.random.Generator, n: int, density: float = 0.5
) -> MultiGraph:
    h = (rng.random((n, n)) < density).astype(np.int64)
    v = (rng.random((n, n)) < density).astype(np.int64)
    return graph(h, v)


def brute_force_tori(g: MultiGraph, periods: Sequence[int]) -> List[TorusConfig]:
    """Every assignment of the torus checked one by one, no pruning"""
    size = math.prod(periods)
    out = []
    for cells in itertools.product(range(g.size), repeat=size):
        torus = TorusConfig(periods=tuple(periods), cells=cells)
        if is_valid_graph_torus(g, torus):
            out.append(torus)
    return out


def single_orbit_config() -> TorusConfig:
    return TorusConfig.from_rows(SINGLE_ORBIT_ROWS)
