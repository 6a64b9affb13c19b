import itertools
import logging
import math
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from shiftlab.interface import BudgetExceeded
from shiftlab.interface import GeneralPattern
from shiftlab.interface import PeriodLattice
from shiftlab.interface import RectBlock
from shiftlab.interface import SearchBudget
from shiftlab.interface import ShiftSpec
from shiftlab.interface import SpecificationError
from shiftlab.interface import TorusConfig
from shiftlab.interface import Vector

logger = logging.getLogger(__name__)


def occurs_at(pattern: GeneralPattern, block: RectBlock, offset: Sequence[int]) -> bool:
    if len(offset) != block.dimension or pattern.dimension != block.dimension:
        return False
    for v, s in pattern.cells:
        p = tuple(a + b for a, b in zip(v, offset))
        if any(c < 0 or c >= e for c, e in zip(p, block.extents)):
            return False
        if block.cell(p) != s:
            return False
    return True


def _check_compatible(block_dimension: int, cells: Sequence[int], spec: ShiftSpec):
    if block_dimension != spec.dimension:
        raise SpecificationError(
            f"block dimension {block_dimension} does not match spec dimension "
            f"{spec.dimension}"
        )
    n = len(spec.alphabet)
    if any(not 0 <= c < n for c in cells):
        raise SpecificationError(f"block uses symbols outside the {n}-symbol alphabet")


def _offsets(outer: Sequence[int], inner: Sequence[int]):
    return itertools.product(*(range(o - i + 1) for o, i in zip(outer, inner)))


def is_locally_admissible(block: RectBlock, spec: ShiftSpec) -> bool:
    _check_compatible(block.dimension, block.cells, spec)
    for pattern in spec.forbidden:
        for offset in _offsets(block.extents, pattern.extents):
            if occurs_at(pattern, block, offset):
                logger.debug("Pattern %s occurs at %s", pattern.cells, offset)
                return False
    return True


def is_valid_torus(config: TorusConfig, spec: ShiftSpec) -> bool:
    """Local admissibility of a torus, every pattern read with wraparound"""
    _check_compatible(config.dimension, config.cells, spec)
    arr = config.as_array()
    for pattern in spec.forbidden:
        for offset in itertools.product(*(range(p) for p in config.periods)):
            if all(
                arr[
                    tuple(
                        (c + o) % p for c, o, p in zip(v, offset, config.periods)
                    )
                ]
                == s
                for v, s in pattern.cells
            ):
                return False
    return True


def restrict(
    block: RectBlock, offset: Sequence[int], extents: Sequence[int]
) -> RectBlock:
    arr = block.as_array()
    window = tuple(slice(o, o + e) for o, e in zip(offset, extents))
    sub = arr[window]
    if sub.shape != tuple(extents):
        raise SpecificationError(
            f"sub-rectangle {tuple(extents)} at {tuple(offset)} leaves the block"
        )
    return RectBlock.from_array(sub)


def _last_cell(pattern: GeneralPattern) -> Vector:
    # Highest storage index: axis 0 varies fastest, so compare reversed vectors
    return max(pattern.support, key=lambda v: tuple(reversed(v)))


def enumerate_admissible_blocks(
    spec: ShiftSpec,
    extents: Sequence[int],
    budget: Optional[SearchBudget] = None,
) -> List[RectBlock]:
    """Every locally admissible block of the given extents

    Cells are filled in storage order with ordinals ascending, so the
    result comes out sorted lexicographically by cells. A forbidden pattern
    is checked at the moment the last of its cells is filled.
    """
    budget = budget or SearchBudget()
    extents = tuple(int(e) for e in extents)
    if len(extents) != spec.dimension or any(e <= 0 for e in extents):
        raise SpecificationError(
            f"extents {extents} are not positive {spec.dimension}-vectors"
        )
    total = math.prod(extents)
    if total > budget.max_cells:
        raise BudgetExceeded(
            f"{total} cells exceed the cap of {budget.max_cells}",
            limit=budget.max_cells,
        )

    strides = [math.prod(extents[:i]) for i in range(len(extents))]

    def flat(v: Sequence[int]) -> int:
        return sum(c * s for c, s in zip(v, strides))

    # checks[k] lists (pattern cells as flat deltas, symbols) to test once
    # cell k is assigned
    checks: Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...]]]] = {}
    for pattern in spec.forbidden:
        last = _last_cell(pattern)
        for offset in _offsets(extents, pattern.extents):
            anchor = flat(tuple(a + b for a, b in zip(last, offset)))
            cells = tuple(
                flat(tuple(a + b for a, b in zip(v, offset))) for v in pattern.support
            )
            checks.setdefault(anchor, []).append((cells, pattern.symbols))

    n = len(spec.alphabet)
    assignment = [0] * total
    out: List[RectBlock] = []
    nodes = 0

    def place(k: int) -> None:
        nonlocal nodes
        if k == total:
            out.append(RectBlock(extents=extents, cells=tuple(assignment)))
            return
        for s in range(n):
            nodes += 1
            if nodes > budget.max_nodes:
                raise BudgetExceeded(
                    f"block enumeration visited more than {budget.max_nodes} nodes",
                    limit=budget.max_nodes,
                    progress=len(out),
                )
            assignment[k] = s
            if any(
                all(assignment[c] == sym for c, sym in zip(cells, symbols))
                for cells, symbols in checks.get(k, ())
            ):
                continue
            place(k + 1)

    place(0)
    logger.debug("%d admissible blocks of extents %s", len(out), extents)
    return out


def translate(config: TorusConfig, a: Sequence[int]) -> TorusConfig:
    """sigma_a: the cell at v of the result is the cell at v + a"""
    if len(a) != config.dimension:
        raise SpecificationError(
            f"shift {tuple(a)} does not match dimension {config.dimension}"
        )
    arr = config.as_array()
    shifted = np.roll(arr, shift=tuple(-int(c) for c in a), axis=tuple(range(arr.ndim)))
    return TorusConfig.from_array(shifted)


def period_lattice(config: TorusConfig) -> PeriodLattice:
    d = config.dimension
    periods: List[Vector] = []
    for v in itertools.product(*(range(p) for p in config.periods)):
        if translate(config, v) == config:
            periods.append(tuple(v))
    for i, p in enumerate(config.periods):
        periods.append(tuple(p if j == i else 0 for j in range(d)))
    return PeriodLattice(generators=tuple(periods))


def window_at(
    config: TorusConfig, v: Sequence[int], extents: Sequence[int]
) -> RectBlock:
    """Block of the given extents with bottom-left corner at v, read with wraparound"""
    out = config.as_array()
    for axis, (c, w) in enumerate(zip(v, extents)):
        idx = [(c + k) % config.periods[axis] for k in range(w)]
        out = np.take(out, idx, axis=axis)
    return RectBlock.from_array(out)
