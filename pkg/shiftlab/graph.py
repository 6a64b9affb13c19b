import logging
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from shiftlab.interface import Alphabet
from shiftlab.interface import BlockAlphabetCoding
from shiftlab.interface import CellArray
from shiftlab.interface import GeneralPattern
from shiftlab.interface import MultiGraph
from shiftlab.interface import SearchBudget
from shiftlab.interface import ShiftSpec
from shiftlab.interface import SpecificationError
from shiftlab.interface import TorusConfig
from shiftlab.interface import unit_vector
from shiftlab.recode import higher_block_spec

logger = logging.getLogger(__name__)


###############################################################################
#                    Matrix predicates on 0/1 adjacency                        #
###############################################################################


def is_permutation_matrix(a: np.ndarray) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        return False
    if not np.isin(a, (0, 1)).all():
        return False
    return bool((a.sum(axis=0) == 1).all() and (a.sum(axis=1) == 1).all())


def is_irreducible_matrix(a: np.ndarray) -> bool:
    """The digraph of nonzero entries is strongly connected"""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        return False
    n_components, _ = connected_components(
        csr_matrix(a != 0), directed=True, connection="strong"
    )
    return n_components == 1


###############################################################################
#                  Conversions between one-step specs and graphs              #
###############################################################################


def graph_from_one_step(spec: ShiftSpec) -> MultiGraph:
    n = len(spec.alphabet)
    matrices = [np.ones((n, n), dtype=np.int64) for _ in range(spec.dimension)]
    for pattern in spec.forbidden:
        axis = pattern.domino_axis()
        if axis is None:
            raise SpecificationError(
                f"pattern {pattern.cells} is not a domino; recode the spec with a "
                "window first"
            )
        a, b = pattern.symbols
        matrices[axis][a, b] = 0
    return MultiGraph.from_matrices(spec.alphabet.symbols, matrices)


def spec_from_graph(g: MultiGraph) -> ShiftSpec:
    if g.size == 0:
        raise SpecificationError("a graph without vertices has no alphabet")
    forbidden = []
    for axis in range(g.dimension):
        for a, b in zip(*np.nonzero(g.matrix(axis) == 0)):
            forbidden.append(GeneralPattern.domino(axis, g.dimension, int(a), int(b)))
    return ShiftSpec(
        dimension=g.dimension,
        alphabet=Alphabet(symbols=g.vertex_labels),
        forbidden=tuple(forbidden),
    )


def one_step_graph_for_sft(
    spec: ShiftSpec,
    window: Sequence[int],
    budget: Optional[SearchBudget] = None,
) -> Tuple[MultiGraph, BlockAlphabetCoding]:
    recoded, coding = higher_block_spec(spec, window, budget)
    return graph_from_one_step(recoded), coding


###############################################################################
#                      Structural operations on graphs                        #
###############################################################################


def induced_subgraph(g: MultiGraph, vertices: Sequence[int]) -> MultiGraph:
    idx = np.array(sorted(vertices), dtype=np.int64)
    return MultiGraph(
        vertex_labels=tuple(g.vertex_labels[i] for i in idx),
        axes=tuple(
            tuple(
                tuple(int(x) for x in row) for row in g.matrix(k)[np.ix_(idx, idx)]
            )
            for k in range(g.dimension)
        ),
    )


def trim(g: MultiGraph) -> MultiGraph:
    """Drop vertices with no successor or no predecessor along some axis

    Repeats until nothing changes; the shift generated is unaffected.
    """
    keep = np.ones(g.size, dtype=bool)
    matrices = [g.matrix(k) for k in range(g.dimension)]
    while True:
        nxt = keep.copy()
        for m in matrices:
            sub = m * keep[np.newaxis, :] * keep[:, np.newaxis]
            nxt &= (sub.sum(axis=1) > 0) & (sub.sum(axis=0) > 0)
        if (nxt == keep).all():
            break
        keep = nxt
    removed = int(g.size - keep.sum())
    if removed:
        logger.debug("Trimmed %d of %d vertices", removed, g.size)
    return induced_subgraph(g, [int(i) for i in np.flatnonzero(keep)])


def decompose_components(g: MultiGraph) -> List[MultiGraph]:
    if g.size == 0:
        return []
    union = sum(g.matrix(k) for k in range(g.dimension))
    n_components, labels = connected_components(
        csr_matrix(union), directed=True, connection="weak"
    )
    groups: List[List[int]] = [[] for _ in range(n_components)]
    for vertex, label in enumerate(labels):
        groups[label].append(vertex)
    groups.sort(key=min)
    return [induced_subgraph(g, members) for members in groups]


def swap_axes(g: MultiGraph, first: int = 0, second: int = 1) -> MultiGraph:
    axes = list(g.axes)
    axes[first], axes[second] = axes[second], axes[first]
    return MultiGraph(vertex_labels=g.vertex_labels, axes=tuple(axes))


def relabel(g: MultiGraph, permutation: Sequence[int]) -> MultiGraph:
    """Vertex i of g becomes vertex permutation[i] of the result"""
    n = g.size
    if sorted(permutation) != list(range(n)):
        raise SpecificationError(f"{list(permutation)} is not a permutation of {n}")
    inverse = np.argsort(np.asarray(permutation))
    return MultiGraph(
        vertex_labels=tuple(g.vertex_labels[i] for i in inverse),
        axes=tuple(
            tuple(
                tuple(int(x) for x in row)
                for row in g.matrix(k)[np.ix_(inverse, inverse)]
            )
            for k in range(g.dimension)
        ),
    )


def first_violation(
    g: MultiGraph, cells: CellArray, wrap: bool = True
) -> Optional[Tuple[Tuple[int, ...], int]]:
    """First (cell, axis) whose successor along axis is not allowed, or None"""
    if cells.dimension != g.dimension:
        raise SpecificationError(
            f"{cells.dimension}-dimensional cells against a "
            f"{g.dimension}-axis graph"
        )
    for v in cells.positions():
        if not 0 <= cells.cell(v) < g.size:
            # Axis -1 marks a symbol that is not a vertex
            return v, -1
    matrices = [g.matrix(k) for k in range(g.dimension)]
    for v in cells.positions():
        for axis in range(g.dimension):
            step = unit_vector(axis, g.dimension)
            w = [a + b for a, b in zip(v, step)]
            if w[axis] >= cells.shape[axis]:
                if not wrap:
                    continue
                w[axis] = 0
            if not matrices[axis][cells.cell(v), cells.cell(w)]:
                return v, axis
    return None


def is_valid_graph_torus(g: MultiGraph, config: TorusConfig) -> bool:
    return first_violation(g, config, wrap=True) is None
