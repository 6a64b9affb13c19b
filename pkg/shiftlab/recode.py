"""Higher-block codes and one-step recoding of shifts of finite type"""
import itertools
import logging
import math
from typing import List
from typing import Optional
from typing import Sequence
from typing import Set
from typing import Tuple

import numpy as np

from shiftlab.core import enumerate_admissible_blocks
from shiftlab.core import is_locally_admissible
from shiftlab.core import window_at
from shiftlab.interface import Alphabet
from shiftlab.interface import BlockAlphabetCoding
from shiftlab.interface import BudgetExceeded
from shiftlab.interface import ConsistencyError
from shiftlab.interface import GeneralPattern
from shiftlab.interface import RectBlock
from shiftlab.interface import SearchBudget
from shiftlab.interface import ShiftSpec
from shiftlab.interface import SpecificationError
from shiftlab.interface import TorusConfig

logger = logging.getLogger(__name__)


def is_one_step(spec: ShiftSpec) -> bool:
    return all(p.domino_axis() is not None for p in spec.forbidden)


def overlap_progressive(b: RectBlock, c: RectBlock, axis: int) -> bool:
    if b.extents != c.extents:
        raise SpecificationError(
            f"blocks of extents {b.extents} and {c.extents} cannot overlap"
        )
    if not 0 <= axis < b.dimension:
        raise SpecificationError(
            f"axis {axis} out of range for dimension {b.dimension}"
        )
    width = b.extents[axis]
    tail = np.take(b.as_array(), range(1, width), axis=axis)
    head = np.take(c.as_array(), range(0, width - 1), axis=axis)
    return bool(np.array_equal(tail, head))


def uniformize_forbidden(
    spec: ShiftSpec,
    target: Sequence[int],
    budget: Optional[SearchBudget] = None,
) -> ShiftSpec:
    """Replace every forbidden pattern by all target-extent rectangles containing it"""
    budget = budget or SearchBudget()
    target = tuple(int(t) for t in target)
    if len(target) != spec.dimension or any(t <= 0 for t in target):
        raise SpecificationError(f"target {target} is not a positive extent vector")
    n = len(spec.alphabet)
    size = math.prod(target)
    rectangles: Set[RectBlock] = set()
    for pattern in spec.forbidden:
        if any(e > t for e, t in zip(pattern.extents, target)):
            raise SpecificationError(
                f"forbidden pattern with extents {pattern.extents} does not fit "
                f"in {target}"
            )
        free = size - len(pattern.cells)
        if n**free > budget.max_nodes:
            raise BudgetExceeded(
                f"{n}**{free} fillings per placement exceed {budget.max_nodes}",
                limit=budget.max_nodes,
                progress=len(rectangles),
            )
        for offset in itertools.product(
            *(range(t - e + 1) for t, e in zip(target, pattern.extents))
        ):
            fixed = {
                tuple(a + b for a, b in zip(v, offset)): s for v, s in pattern.cells
            }
            template = RectBlock(extents=target, cells=tuple([0] * size))
            slots = [
                i for i, v in enumerate(template.positions()) if v not in fixed
            ]
            base = [fixed.get(v, 0) for v in template.positions()]
            for filling in itertools.product(range(n), repeat=len(slots)):
                cells = list(base)
                for i, s in zip(slots, filling):
                    cells[i] = s
                rectangles.add(RectBlock(extents=target, cells=tuple(cells)))

    ordered = sorted(rectangles, key=lambda b: b.cells)
    logger.debug(
        "Uniformized %d patterns into %d rectangles of extents %s",
        len(spec.forbidden),
        len(ordered),
        target,
    )
    return ShiftSpec(
        dimension=spec.dimension,
        alphabet=spec.alphabet,
        forbidden=tuple(GeneralPattern.from_block(b) for b in ordered),
    )


def _union(b: RectBlock, c: RectBlock, axis: int) -> RectBlock:
    """b followed one step along axis by c, assuming they overlap progressively"""
    last = np.take(c.as_array(), [c.extents[axis] - 1], axis=axis)
    return RectBlock.from_array(np.concatenate([b.as_array(), last], axis=axis))


def higher_block_spec(
    spec: ShiftSpec,
    window: Sequence[int],
    budget: Optional[SearchBudget] = None,
) -> Tuple[ShiftSpec, BlockAlphabetCoding]:
    """One-step spec over the alphabet of admissible window blocks

    A domino of block symbols along an axis is allowed only when the two
    windows overlap progressively and their union avoids every uniformized
    forbidden rectangle, so the result is strictly one-step.
    """
    budget = budget or SearchBudget()
    window = tuple(int(w) for w in window)
    uniform = uniformize_forbidden(spec, window, budget)
    blocks = enumerate_admissible_blocks(spec, window, budget)
    if len(blocks) > budget.max_symbols:
        raise BudgetExceeded(
            f"{len(blocks)} block symbols exceed the cap of {budget.max_symbols}",
            limit=budget.max_symbols,
            progress=len(blocks),
        )
    if not blocks:
        raise SpecificationError(
            f"no admissible blocks of extents {window}; the block alphabet is empty"
        )
    coding = BlockAlphabetCoding(
        window=window, base_spec=spec, block_symbols=tuple(blocks)
    )

    forbidden: List[GeneralPattern] = []
    for axis in range(spec.dimension):
        for (i, b), (j, c) in itertools.product(enumerate(blocks), repeat=2):
            allowed = overlap_progressive(b, c, axis) and is_locally_admissible(
                _union(b, c, axis), uniform
            )
            if not allowed:
                forbidden.append(GeneralPattern.domino(axis, spec.dimension, i, j))
    logger.debug(
        "Higher-block spec: %d symbols, %d forbidden dominoes",
        len(blocks),
        len(forbidden),
    )
    alphabet = Alphabet(symbols=tuple(f"b{i}" for i in range(len(blocks))))
    return (
        ShiftSpec(
            dimension=spec.dimension,
            alphabet=alphabet,
            forbidden=tuple(forbidden),
        ),
        coding,
    )


def _check_periods(config: TorusConfig, coding: BlockAlphabetCoding) -> None:
    if config.dimension != len(coding.window) or any(
        p < w for p, w in zip(config.periods, coding.window)
    ):
        raise SpecificationError(
            f"torus periods {config.periods} must be at least the window "
            f"{coding.window}"
        )


def beta_apply(config: TorusConfig, coding: BlockAlphabetCoding) -> TorusConfig:
    _check_periods(config, coding)
    index = coding.forward_index
    out = np.zeros(config.periods, dtype=np.int64)
    for v in config.positions():
        block = window_at(config, v, coding.window)
        out[v] = coding.index_of(block, index)
    return TorusConfig.from_array(out)


def beta_inverse(config: TorusConfig, coding: BlockAlphabetCoding) -> TorusConfig:
    _check_periods(config, coding)
    n = len(coding.block_symbols)
    if any(not 0 <= c < n for c in config.cells):
        raise ConsistencyError("torus uses symbols outside the block alphabet")
    origin = TorusConfig(
        periods=config.periods,
        cells=tuple(coding.block_symbols[c].cells[0] for c in config.cells),
    )
    if beta_apply(origin, coding) != config:
        raise ConsistencyError("neighbouring block symbols do not overlap consistently")
    return origin
