"""Brute-force oracle and constructive periodicity procedures

Every search here fills cells in storage order (axis 0 fastest) with
ordinals ascending, so results come out in lexicographic order of cells
and repeated runs agree exactly.
"""
import itertools
import logging
import math
from typing import Dict
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from shiftlab.core import translate
from shiftlab.core import window_at
from shiftlab.graph import first_violation
from shiftlab.graph import is_permutation_matrix
from shiftlab.graph import swap_axes
from shiftlab.graph import trim
from shiftlab.interface import BudgetExceeded
from shiftlab.interface import CellArray
from shiftlab.interface import ConstructionError
from shiftlab.interface import GrowthSeries
from shiftlab.interface import HorizontalPeriodicity
from shiftlab.interface import InputTooShortError
from shiftlab.interface import MultiGraph
from shiftlab.interface import OracleStatus
from shiftlab.interface import OracleVerdict
from shiftlab.interface import PreconditionError
from shiftlab.interface import RectBlock
from shiftlab.interface import SearchBudget
from shiftlab.interface import SpecificationError
from shiftlab.interface import TorusConfig
from shiftlab.interface import UnsupportedDimensionError

logger = logging.getLogger(__name__)


###############################################################################
#                        Backtracking over grid cells                         #
###############################################################################


def _search(
    matrices: Sequence[np.ndarray],
    extents: Sequence[int],
    wrap: bool,
    budget: SearchBudget,
) -> Iterator[Tuple[int, ...]]:
    """Yield every assignment whose axis adjacencies are allowed

    Candidates for a cell are narrowed by its already-filled predecessor
    along each axis and, on a torus, by the wraparound successor that was
    filled first. A period of 1 requires a self-loop.
    """
    extents = tuple(int(e) for e in extents)
    if len(extents) != len(matrices) or any(e <= 0 for e in extents):
        raise SpecificationError(
            f"extents {extents} do not fit a {len(matrices)}-axis graph"
        )
    total = math.prod(extents)
    if total > budget.max_cells:
        raise BudgetExceeded(
            f"{total} cells exceed the cap of {budget.max_cells}",
            limit=budget.max_cells,
        )
    n = matrices[0].shape[0]
    if n == 0:
        return
    allowed = [np.asarray(m) != 0 for m in matrices]
    strides = [math.prod(extents[:i]) for i in range(len(extents))]

    # constraints[k]: (kind, axis, other cell) applied when cell k is filled
    constraints: List[List[Tuple[str, int, int]]] = []
    for k in range(total):
        rule = []
        rest = k
        for axis, e in enumerate(extents):
            c = rest % e
            rest //= e
            if c > 0:
                rule.append(("pred", axis, k - strides[axis]))
            if wrap and c == e - 1:
                if e == 1:
                    rule.append(("loop", axis, k))
                else:
                    rule.append(("succ", axis, k - (e - 1) * strides[axis]))
        constraints.append(rule)

    assignment = [0] * total
    nodes = 0

    def place(k: int) -> Iterator[Tuple[int, ...]]:
        nonlocal nodes
        if k == total:
            yield tuple(assignment)
            return
        candidates = np.ones(n, dtype=bool)
        for kind, axis, other in constraints[k]:
            if kind == "pred":
                candidates &= allowed[axis][assignment[other], :]
            elif kind == "succ":
                candidates &= allowed[axis][:, assignment[other]]
            else:
                candidates &= np.diagonal(allowed[axis])
        for s in np.flatnonzero(candidates):
            nodes += 1
            if nodes > budget.max_nodes:
                raise BudgetExceeded(
                    f"search visited more than {budget.max_nodes} nodes",
                    limit=budget.max_nodes,
                )
            assignment[k] = int(s)
            yield from place(k + 1)

    yield from place(0)


def _collect(
    found: Iterator[Tuple[int, ...]], limit: Optional[int]
) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = []
    try:
        for cells in found:
            out.append(cells)
            if limit is not None and len(out) >= limit:
                break
    except BudgetExceeded as e:
        e.progress = len(out)
        raise
    return out


def torus_search(
    g: MultiGraph,
    periods: Sequence[int],
    budget: Optional[SearchBudget] = None,
    limit: Optional[int] = None,
) -> List[TorusConfig]:
    """Every torus of the given periods whose wraparound adjacencies are allowed"""
    budget = budget or SearchBudget()
    periods = tuple(int(p) for p in periods)
    matrices = [g.matrix(k) for k in range(g.dimension)]
    found = _collect(_search(matrices, periods, True, budget), limit)
    logger.debug("%d tori of periods %s", len(found), periods)
    return [TorusConfig(periods=periods, cells=c) for c in found]


def enumerate_graph_blocks(
    g: MultiGraph,
    extents: Sequence[int],
    budget: Optional[SearchBudget] = None,
    limit: Optional[int] = None,
) -> List[RectBlock]:
    """Admissible rectangles of the graph (no wraparound)"""
    budget = budget or SearchBudget()
    extents = tuple(int(e) for e in extents)
    matrices = [g.matrix(k) for k in range(g.dimension)]
    found = _collect(_search(matrices, extents, False, budget), limit)
    return [RectBlock(extents=extents, cells=c) for c in found]


def _count_blocks(g: MultiGraph, extents: Sequence[int], budget: SearchBudget) -> int:
    matrices = [g.matrix(k) for k in range(g.dimension)]
    return sum(1 for _ in _search(matrices, extents, False, budget))


def bounded_emptiness(
    g: MultiGraph, n_max: int = 6, budget: Optional[SearchBudget] = None
) -> OracleVerdict:
    """Semi-decide emptiness with squares and tori up to size n_max

    No admissible n x n block means the shift is empty by compactness; a
    torus is a periodic point. Anything else stays Unknown.
    """
    budget = budget or SearchBudget()
    if n_max < 1:
        raise SpecificationError("n_max must be at least 1")
    if g.size == 0:
        return OracleVerdict(
            status=OracleStatus.empty_certificate,
            certificate_size=1,
            detail="the graph has no vertices",
        )
    d = g.dimension
    try:
        for n in range(1, n_max + 1):
            if not enumerate_graph_blocks(g, (n,) * d, budget, limit=1):
                logger.debug("No admissible %s block", (n,) * d)
                return OracleVerdict(
                    status=OracleStatus.empty_certificate,
                    certificate_size=n,
                    detail=f"no admissible block of extents {(n,) * d}",
                )
            for periods in itertools.product(range(1, n + 1), repeat=d):
                if max(periods) != n:
                    continue
                tori = torus_search(g, periods, budget, limit=1)
                if tori:
                    return OracleVerdict(
                        status=OracleStatus.nonempty_witness,
                        witness=tori[0],
                        detail=f"torus of periods {periods}",
                    )
    except BudgetExceeded as e:
        return OracleVerdict(status=OracleStatus.unknown, detail=str(e))
    return OracleVerdict(
        status=OracleStatus.unknown,
        detail=f"no certificate or torus up to size {n_max}",
    )


def block_growth(
    g: MultiGraph, n_max: int = 6, budget: Optional[SearchBudget] = None
) -> GrowthSeries:
    """Counts of admissible n x n blocks for n = 1..n_max

    Growth is evidence about finiteness, never a proof of it.
    """
    budget = budget or SearchBudget()
    counts: List[int] = []
    for n in range(1, n_max + 1):
        try:
            counts.append(_count_blocks(g, (n,) * g.dimension, budget))
        except BudgetExceeded as e:
            logger.debug("Growth truncated at n=%d: %s", n, e)
            return GrowthSeries(counts=tuple(counts), truncated=True)
    return GrowthSeries(counts=tuple(counts))


###############################################################################
#                Horizontal periodicity through column graphs                 #
###############################################################################


def _require_planar(g: MultiGraph) -> None:
    if g.dimension != 2:
        raise UnsupportedDimensionError(
            f"only two-dimensional graphs are supported, got {g.dimension} axes"
        )


def _periodic_rows(
    g: MultiGraph, m: int, budget: SearchBudget
) -> List[Tuple[int, ...]]:
    """Closed horizontal walks of length m, i.e. rows of period m"""
    rows = _collect(_search([g.h], (m,), True, budget), None)
    if len(rows) > budget.max_symbols:
        raise BudgetExceeded(
            f"{len(rows)} periodic rows exceed the cap of {budget.max_symbols}",
            limit=budget.max_symbols,
            progress=len(rows),
        )
    return rows


def _column_walk(
    g: MultiGraph, rows: Sequence[Tuple[int, ...]]
) -> Optional[List[Tuple[int, ...]]]:
    """A walk through the column graph long enough to repeat a row

    Vertices are the given rows, r -> r' when every cell of r' may sit on
    top of the cell of r below it.
    """
    if not rows:
        return None
    vb = g.v != 0
    arr = np.array(rows, dtype=np.int64)
    column = np.all(vb[arr[:, np.newaxis, :], arr[np.newaxis, :, :]], axis=2)
    labels = tuple(str(i) for i in range(len(rows)))
    core = trim(MultiGraph.from_matrices(labels, [column.astype(np.int64)]))
    if core.size == 0:
        return None
    survivors = [int(label) for label in core.vertex_labels]
    alive = set(survivors)
    walk = [survivors[0]]
    while walk.count(walk[-1]) < 2:
        nxt = next(j for j in np.flatnonzero(column[walk[-1]]) if int(j) in alive)
        walk.append(int(nxt))
    return [rows[i] for i in walk]


def cut_repeated_row(g: MultiGraph, walk: Sequence[Sequence[int]]) -> TorusConfig:
    """Torus cut between the first two occurrences of one row in a column walk"""
    seen: Dict[Tuple[int, ...], int] = {}
    for v, row in enumerate(walk):
        key = tuple(int(c) for c in row)
        if key in seen:
            torus = TorusConfig.from_rows(walk[seen[key] : v])
            _validate(g, torus, "repeated-row cut")
            return torus
        seen[key] = v
    raise InputTooShortError(f"no row repeats within a walk of length {len(walk)}")


def horizontal_periodic_exists(
    g: MultiGraph, m: int, budget: Optional[SearchBudget] = None
) -> HorizontalPeriodicity:
    """Is there a configuration fixed by the translation (m, 0)?

    Such a configuration is a vertical strip of width m repeated
    horizontally; the strip is a bi-infinite walk in the column graph of
    m-periodic rows, which exists exactly when that graph has a cycle.
    """
    _require_planar(g)
    if m < 1:
        raise SpecificationError("m must be at least 1")
    budget = budget or SearchBudget()
    rows = _periodic_rows(g, m, budget)
    walk = _column_walk(g, rows)
    if walk is None:
        return HorizontalPeriodicity(exists=False, rows=len(rows))
    return HorizontalPeriodicity(
        exists=True, witness=cut_repeated_row(g, walk), rows=len(rows)
    )


def vertical_periodic_exists(
    g: MultiGraph, n: int, budget: Optional[SearchBudget] = None
) -> HorizontalPeriodicity:
    """Is there a configuration fixed by the translation (0, n)?"""
    swapped = horizontal_periodic_exists(swap_axes(g), n, budget)
    if swapped.witness is None:
        return swapped
    return HorizontalPeriodicity(
        exists=True,
        witness=TorusConfig.from_array(swapped.witness.as_array().T),
        rows=swapped.rows,
    )


###############################################################################
#            From (m, n)-periodic points to horizontally periodic ones        #
###############################################################################


def _validate(g: MultiGraph, cells: CellArray, procedure: str) -> None:
    violation = first_violation(g, cells, wrap=True)
    if violation is not None:
        v, axis = violation
        raise ConstructionError(
            f"{procedure} produced an invalid seam at cell {v} along axis {axis}"
        )


def horizontal_run(config: TorusConfig, m: int, n: int) -> List[RectBlock]:
    """Blocks B_0 .. B_k read left to right from an (m, n)-periodic torus

    The run stops just before B_0 recurs.
    """
    if config.dimension != 2:
        raise UnsupportedDimensionError("runs are defined for planar tori")
    if m < 1 or n < 1:
        raise SpecificationError("block extents must be positive")
    if translate(config, (m, n)) != config:
        raise PreconditionError(f"torus is not fixed by the translation {(m, n)}")
    p1 = config.periods[0]
    first = window_at(config, (0, 0), (m, n))
    blocks = [first]
    for i in range(1, p1 + 1):
        block = window_at(config, ((i * m) % p1, 0), (m, n))
        if block == first:
            return blocks
        blocks.append(block)
    raise ConstructionError("first block of the run never recurs")


def diagonal_arrangement(
    g: MultiGraph, blocks: Sequence[RectBlock]
) -> TorusConfig:
    """Place B_{(k - j + i + 1) mod (k + 1)} at block position (i, j)

    The (k+1) x (k+1) arrangement is checked cell by cell, wraparound
    included, and any failing seam is reported rather than accepted.
    """
    _require_planar(g)
    if not blocks:
        raise SpecificationError("at least one block is required")
    m, n = blocks[0].extents
    if any(b.extents != (m, n) for b in blocks):
        raise SpecificationError("all blocks of a run must share extents")
    k = len(blocks) - 1
    arr = np.zeros(((k + 1) * m, (k + 1) * n), dtype=np.int64)
    for i in range(k + 1):
        for j in range(k + 1):
            block = blocks[(k - j + i + 1) % (k + 1)]
            arr[i * m : (i + 1) * m, j * n : (j + 1) * n] = block.as_array()
    torus = TorusConfig.from_array(arr)
    _validate(g, torus, "diagonal arrangement")
    return torus


def periodic_to_horizontal(
    g: MultiGraph, config: TorusConfig, m: int, n: int
) -> TorusConfig:
    return diagonal_arrangement(g, horizontal_run(config, m, n))


def minimal_horizontal_period(config: TorusConfig) -> int:
    d = config.dimension
    for a in range(1, config.periods[0] + 1):
        if translate(config, (a,) + (0,) * (d - 1)) == config:
            return a
    return config.periods[0]


def _least_period(row: Sequence[int]) -> int:
    m = len(row)
    return next(
        s for s in range(1, m + 1) if tuple(row[s:]) + tuple(row[:s]) == tuple(row)
    )


def _cycle_length(succ: Sequence[int], s: int) -> int:
    length, cur = 1, succ[s]
    while cur != s:
        cur = succ[cur]
        length += 1
    return length


def _require_zero_pattern(g: MultiGraph) -> None:
    trimmed = trim(g)
    if trimmed.size == 0:
        raise PreconditionError("trimming removes every vertex")
    hv = (trimmed.h @ trimmed.v) != 0
    vh = (trimmed.v @ trimmed.h) != 0
    if not ((~hv | vh).all() or (~vh | hv).all()):
        raise PreconditionError("zero patterns of HV and VH are incomparable")


def arbitrary_period_construct(
    g: MultiGraph,
    m: int,
    budget: Optional[SearchBudget] = None,
    check_precondition: bool = True,
) -> TorusConfig:
    """A verified torus whose least horizontal period is at least m

    For each width w >= m the rows of width w whose least period is at
    least m are stacked through the column graph until one repeats; the
    cut between the repetitions closes up vertically. With a permutation
    H only its cycle lengths can be widths, otherwise widths run until
    the cell cap.
    """
    _require_planar(g)
    if m < 1:
        raise SpecificationError("m must be at least 1")
    if check_precondition:
        _require_zero_pattern(g)
    if g.size == 0:
        raise ConstructionError("the graph has no vertices")
    budget = budget or SearchBudget()
    capped = not is_permutation_matrix(g.h)
    if not capped:
        succ = [int(j) for j in np.argmax(g.h, axis=1)]
        lengths = {_cycle_length(succ, s) for s in range(g.size)}
        widths: Sequence[int] = sorted(w for w in lengths if w >= m)
    else:
        widths = range(m, budget.max_cells + 1)
    for width in widths:
        rows = [
            r for r in _periodic_rows(g, width, budget) if _least_period(r) >= m
        ]
        walk = _column_walk(g, rows)
        if walk is None:
            logger.debug("No cycle among %d rows of width %d", len(rows), width)
            continue
        torus = cut_repeated_row(g, walk)
        assert minimal_horizontal_period(torus) >= m
        return torus
    if capped:
        raise BudgetExceeded(
            f"no torus with least horizontal period at least {m} "
            f"within {budget.max_cells} columns",
            limit=budget.max_cells,
            progress=len(widths),
        )
    raise ConstructionError(
        f"no horizontal cycle of length at least {m} closes up vertically"
    )


###############################################################################
#               Finite shifts and pairs of permutation matrices               #
###############################################################################


def orbit_of(config: TorusConfig) -> List[TorusConfig]:
    seen = {
        translate(config, v)
        for v in itertools.product(*(range(p) for p in config.periods))
    }
    return sorted(seen, key=lambda t: t.cells)


def _orbit_extents(orbit: Sequence[TorusConfig]) -> Tuple[int, ...]:
    if not orbit:
        raise SpecificationError("the orbit is empty")
    dims = {t.dimension for t in orbit}
    if len(dims) != 1:
        raise SpecificationError("orbit tori have different dimensions")
    d = dims.pop()
    return tuple(math.lcm(*(t.periods[i] for t in orbit)) for i in range(d))


def orbit_windows(orbit: Sequence[TorusConfig]) -> List[RectBlock]:
    """Distinct windows of the least common periods over every orbit member"""
    extents = _orbit_extents(orbit)
    windows = {
        window_at(t, v, extents) for t in orbit for v in t.positions()
    }
    return sorted(windows, key=lambda b: b.cells)


def permutation_generators_from_orbit(orbit: Sequence[TorusConfig]) -> MultiGraph:
    """Graph on orbit windows whose axis matrices are permutations

    A window as large as the common period fixes the whole torus and its
    position, so each window has exactly one successor and predecessor
    along every axis.
    """
    extents = _orbit_extents(orbit)
    windows = orbit_windows(orbit)
    index = {w: i for i, w in enumerate(windows)}
    d = len(extents)
    n = len(windows)
    matrices = [np.zeros((n, n), dtype=np.int64) for _ in range(d)]
    for t in orbit:
        for v in t.positions():
            here = index[window_at(t, v, extents)]
            for axis in range(d):
                w = list(v)
                w[axis] += 1
                matrices[axis][here, index[window_at(t, w, extents)]] = 1
    for axis, mat in enumerate(matrices):
        assert is_permutation_matrix(mat), f"axis {axis} is not a permutation"
    return MultiGraph.from_matrices([f"w{i}" for i in range(len(windows))], matrices)


def project_windows(config: TorusConfig, windows: Sequence[RectBlock]) -> TorusConfig:
    """Replace each window symbol by its bottom-left base symbol"""
    return TorusConfig(
        periods=config.periods,
        cells=tuple(windows[c].cells[0] for c in config.cells),
    )


def propagate_permutation(g: MultiGraph, seed: int) -> OracleVerdict:
    """Fill a torus outward from seed using the unique successors

    With permutation matrices a configuration is fixed by its origin
    symbol; a cell receiving two symbols proves seed occurs nowhere.
    """
    _require_planar(g)
    if not (is_permutation_matrix(g.h) and is_permutation_matrix(g.v)):
        raise PreconditionError("both axis matrices must be permutation matrices")
    if not 0 <= seed < g.size:
        raise SpecificationError(f"seed {seed} is not a vertex")
    h_next = [int(j) for j in np.argmax(g.h, axis=1)]
    v_next = [int(j) for j in np.argmax(g.v, axis=1)]

    row = [seed]
    while h_next[row[-1]] != seed:
        row.append(h_next[row[-1]])
    p1 = len(row)
    p2 = math.lcm(*(_cycle_length(v_next, s) for s in row))
    arr = np.zeros((p1, p2), dtype=np.int64)
    for x, s in enumerate(row):
        for y in range(p2):
            arr[x, y] = s
            s = v_next[s]

    labels = g.vertex_labels
    for y in range(p2):
        for x in range(p1):
            expected, actual = h_next[arr[x, y]], arr[(x + 1) % p1, y]
            if expected != actual:
                detail = (
                    f"cell {((x + 1) % p1, y)} receives {labels[actual]} vertically "
                    f"and {labels[expected]} horizontally"
                )
                logger.debug("Propagation from %s: %s", labels[seed], detail)
                return OracleVerdict(status=OracleStatus.contradiction, detail=detail)
    torus = TorusConfig.from_array(arr)
    _validate(g, torus, "permutation propagation")
    return OracleVerdict(
        status=OracleStatus.nonempty_witness,
        witness=torus,
        detail=f"propagation from {labels[seed]} closes up on periods {(p1, p2)}",
    )
