import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shiftlab.core import enumerate_admissible_blocks
from shiftlab.core import is_locally_admissible
from shiftlab.core import is_valid_torus
from shiftlab.core import occurs_at
from shiftlab.core import period_lattice
from shiftlab.core import restrict
from shiftlab.core import translate
from shiftlab.core import window_at
from shiftlab.fixtures import load_fixture
from shiftlab.interface import Alphabet
from shiftlab.interface import BudgetExceeded
from shiftlab.interface import GeneralPattern
from shiftlab.interface import RectBlock
from shiftlab.interface import SearchBudget
from shiftlab.interface import ShiftSpec
from shiftlab.interface import SpecificationError
from shiftlab.interface import TorusConfig
from tests.util import single_orbit_config


@pytest.fixture
def golden():
    return load_fixture("golden_mean").spec


@st.composite
def tori(draw, max_period=4, symbols=3):
    periods = (draw(st.integers(1, max_period)), draw(st.integers(1, max_period)))
    size = math.prod(periods)
    cells = draw(
        st.lists(st.integers(0, symbols - 1), min_size=size, max_size=size)
    )
    return TorusConfig(periods=periods, cells=tuple(cells))


shifts = st.tuples(st.integers(-6, 6), st.integers(-6, 6))


def test_array_convention():
    block = RectBlock.from_rows([[1, 2], [3, 4]])
    assert block.extents == (2, 2)
    assert block.cell((0, 0)) == 1
    assert block.cell((1, 0)) == 2
    assert block.cell((0, 1)) == 3
    assert block.as_array()[1, 0] == 2
    assert RectBlock.from_array(block.as_array()) == block


def test_pattern_normalization():
    shifted = GeneralPattern.from_mapping({(3, 1): 0, (4, 1): 1})
    assert shifted == GeneralPattern.domino(0, 2, 0, 1)
    assert shifted.extents == (2, 1)
    assert shifted.domino_axis() == 0
    assert GeneralPattern.domino(1, 2, 1, 1).domino_axis() == 1


@pytest.mark.parametrize(
    "mapping",
    [
        {(0, 1): 1, (1, 0): 1},
        {(0, 0): 1, (1, 1): 1},
        {(0, 0): 0, (2, 0): 0},
        {(0, 0): 0, (1, 0): 0, (2, 0): 0},
    ],
)
def test_non_dominoes(mapping):
    assert GeneralPattern.from_mapping(mapping).domino_axis() is None


def test_domino_axis_in_three_dimensions():
    pattern = GeneralPattern.from_mapping({(0, 0, 0): 1, (0, 0, 1): 0})
    assert pattern.domino_axis() == 2


def test_invalid_models():
    with pytest.raises(ValueError):
        Alphabet(symbols=("a", "a"))
    with pytest.raises(ValueError):
        Alphabet(symbols=())
    with pytest.raises(ValueError):
        ShiftSpec(
            dimension=2,
            alphabet=Alphabet.of_size(2),
            forbidden=(GeneralPattern.domino(0, 2, 0, 2),),
        )
    with pytest.raises(ValueError):
        RectBlock(extents=(2, 2), cells=(0, 1, 0))


def test_occurs_at():
    block = RectBlock.from_rows([[0, 1, 1]])
    pattern = GeneralPattern.domino(0, 2, 1, 1)
    assert occurs_at(pattern, block, (1, 0))
    assert not occurs_at(pattern, block, (0, 0))
    assert not occurs_at(pattern, block, (2, 0))


def test_local_admissibility(golden):
    assert is_locally_admissible(RectBlock.from_rows([[0, 1], [1, 0]]), golden)
    assert not is_locally_admissible(RectBlock.from_rows([[1, 0], [1, 0]]), golden)
    with pytest.raises(SpecificationError):
        is_locally_admissible(RectBlock(extents=(2,), cells=(0, 1)), golden)
    with pytest.raises(SpecificationError):
        is_locally_admissible(RectBlock.from_rows([[0, 2]]), golden)


def test_golden_blocks(golden):
    blocks = enumerate_admissible_blocks(golden, (2, 2))
    assert len(blocks) == 7
    assert blocks == sorted(blocks, key=lambda b: b.cells)
    assert all(is_locally_admissible(b, golden) for b in blocks)
    assert len(enumerate_admissible_blocks(golden, (3, 3))) == 63


def test_blocks_match_exhaustive_filter(golden):
    extents = (3, 2)
    every = [
        RectBlock(extents=extents, cells=cells)
        for cells in itertools.product(range(2), repeat=6)
    ]
    expected = sorted(
        (b for b in every if is_locally_admissible(b, golden)), key=lambda b: b.cells
    )
    assert enumerate_admissible_blocks(golden, extents) == expected


def test_rectangular_pattern():
    # No 2x2 square of zeros
    spec = ShiftSpec(
        dimension=2,
        alphabet=Alphabet.of_size(2),
        forbidden=(GeneralPattern.from_block(RectBlock.from_rows([[0, 0], [0, 0]])),),
    )
    assert len(enumerate_admissible_blocks(spec, (2, 2))) == 15
    assert len(enumerate_admissible_blocks(spec, (1, 3))) == 8


def test_block_budget(golden):
    with pytest.raises(BudgetExceeded) as e:
        enumerate_admissible_blocks(golden, (2, 2), SearchBudget(max_cells=3))
    assert e.value.limit == 3
    with pytest.raises(BudgetExceeded) as e:
        enumerate_admissible_blocks(golden, (3, 3), SearchBudget(max_nodes=5))
    assert e.value.limit == 5


def test_bad_extents(golden):
    with pytest.raises(SpecificationError):
        enumerate_admissible_blocks(golden, (2, 0))
    with pytest.raises(SpecificationError):
        enumerate_admissible_blocks(golden, (2, 2, 2))


def test_valid_torus(golden):
    assert is_valid_torus(TorusConfig(periods=(1, 1), cells=(0,)), golden)
    # A lone 1 meets itself across the wraparound
    assert not is_valid_torus(TorusConfig(periods=(1, 1), cells=(1,)), golden)
    assert is_valid_torus(TorusConfig.from_rows([[0, 1], [1, 0]]), golden)
    assert not is_valid_torus(TorusConfig.from_rows([[1, 0, 0]]), golden)


def test_translate():
    config = single_orbit_config()
    shifted = translate(config, (1, 0))
    assert shifted.rows() == [(2, 0, 0, 1), (0, 1, 2, 0)]
    assert translate(config, (4, 0)) == config
    assert translate(config, (2, 1)) == config
    with pytest.raises(SpecificationError):
        translate(config, (1,))


def test_period_lattice():
    lattice = period_lattice(single_orbit_config())
    assert lattice.generators == ((0, 0), (2, 1), (4, 0), (0, 2))


def test_window_wraps():
    config = single_orbit_config()
    assert window_at(config, (3, 1), (2, 2)) == RectBlock.from_rows([[2, 0], [0, 1]])
    assert window_at(config, (0, 0), (4, 2)).cells == config.cells


def test_restrict_is_monotone(golden):
    for block in enumerate_admissible_blocks(golden, (3, 3)):
        for offset in itertools.product(range(2), repeat=2):
            assert is_locally_admissible(restrict(block, offset, (2, 2)), golden)
    with pytest.raises(SpecificationError):
        restrict(RectBlock.from_rows([[0, 0]]), (1, 0), (2, 1))


@given(tori(), shifts, shifts)
def test_translation_is_an_action(torus, a, b):
    both = tuple(x + y for x, y in zip(a, b))
    assert translate(translate(torus, a), b) == translate(torus, both)
    assert translate(torus, (0, 0)) == torus


@given(tori())
def test_periods_fix_the_torus(torus):
    assert translate(torus, torus.periods) == torus
    generators = period_lattice(torus).generators
    for g in generators:
        assert translate(torus, g) == torus
    for g, h in itertools.product(generators, repeat=2):
        assert translate(torus, tuple(x + y for x, y in zip(g, h))) == torus
