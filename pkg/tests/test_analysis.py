import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from shiftlab import analysis
from shiftlab.analysis import analyze
from shiftlab.analysis import build_epair_tables
from shiftlab.analysis import derived_triomino_sets
from shiftlab.analysis import epair_nonempty_test
from shiftlab.analysis import mn_finiteness_test
from shiftlab.analysis import perm_commute_test
from shiftlab.analysis import permutation_propagation_test
from shiftlab.analysis import products
from shiftlab.analysis import prune_products
from shiftlab.analysis import transpose_variant_test
from shiftlab.analysis import zero_pattern_test
from shiftlab.dynamics import bounded_emptiness
from shiftlab.dynamics import torus_search
from shiftlab.fixtures import fixture_names
from shiftlab.graph import decompose_components
from shiftlab.graph import is_valid_graph_torus
from shiftlab.graph import trim
from shiftlab.interface import MultiGraph
from shiftlab.interface import OracleStatus
from shiftlab.interface import SpecificationError
from shiftlab.interface import TriominoKind
from shiftlab.interface import UnsupportedDimensionError
from shiftlab.interface import Verdict
from shiftlab.interface import VerdictStatus
from tests.util import fixture_graph
from tests.util import graph
from tests.util import permutation_graph

# Every triangular pattern of this graph lives in A1 and in A2
NON_PERMUTATION_TRIOMINOES = [(0, 1, 2), (1, 2, 0), (1, 2, 1), (2, 0, 1), (2, 1, 2)]
NON_PERMUTATION_M = [
    [0, 0, 0, 1, 1],
    [1, 0, 0, 0, 0],
    [0, 1, 1, 0, 0],
    [0, 1, 1, 0, 0],
    [0, 0, 0, 1, 1],
]


@pytest.fixture
def components():
    return decompose_components(fixture_graph("disjoint_permutations"))


def test_products_non_permutation():
    report = products(fixture_graph("non_permutation_mn"))
    assert report.hv == ((0, 0, 1), (1, 1, 0), (1, 1, 1))
    assert report.vh == ((0, 1, 1), (1, 1, 0), (0, 1, 1))
    assert report.pruned_hv == ((0, 0, 1), (1, 1, 0), (0, 1, 1))
    assert report.pruned_vh == report.pruned_hv


def test_products_transposed_pair():
    g = fixture_graph("transposed_pair")
    report = products(g)
    assert report.hv == ((1, 0, 1), (0, 1, 0), (1, 0, 2))
    assert report.vh == ((1, 1, 0), (1, 2, 0), (0, 0, 1))
    assert report.pruned_hv == ((1, 0, 0), (0, 1, 0), (0, 0, 2))
    assert report.pruned_vh == ((1, 0, 0), (0, 2, 0), (0, 0, 1))
    # V^T is H for this graph, so both transposed products are H^2
    assert report.hvt == report.vth


def test_prune_products_shape_mismatch():
    with pytest.raises(SpecificationError):
        prune_products(np.ones((2, 2)), np.ones((3, 3)))


def test_planar_only():
    line = MultiGraph.from_matrices(["0"], [[[1]]])
    with pytest.raises(UnsupportedDimensionError):
        products(line)
    with pytest.raises(UnsupportedDimensionError):
        analyze(line)


def test_perm_commute(components):
    commuting, contradictory = components
    verdict = perm_commute_test(commuting)
    assert verdict.status == VerdictStatus.nonempty
    assert verdict.witness.periods == (3, 3)
    undecided = perm_commute_test(contradictory)
    assert undecided.status == VerdictStatus.inconclusive
    assert "V is not irreducible" in undecided.reason


def test_perm_commute_empty():
    # two 4-cycles that do not commute
    g = permutation_graph([1, 2, 3, 0], [2, 3, 1, 0])
    verdict = perm_commute_test(g)
    assert verdict.status == VerdictStatus.empty
    assert verdict.certificate
    assert permutation_propagation_test(g).status == VerdictStatus.empty


def test_perm_commute_needs_permutations():
    verdict = perm_commute_test(fixture_graph("golden_mean"))
    assert verdict.status == VerdictStatus.inconclusive
    assert "H is not a permutation matrix" in verdict.reason


def test_zero_pattern():
    golden = zero_pattern_test(fixture_graph("golden_mean"))
    assert golden.status == VerdictStatus.nonempty
    assert golden.reason == "HV and VH share a zero pattern"
    for name in (
        "efg_dominoes",
        "single_orbit",
        "non_permutation_mn",
        "identity_mn",
        "transposed_pair",
    ):
        assert zero_pattern_test(fixture_graph(name)).status == (
            VerdictStatus.inconclusive
        ), name


def test_transpose_variant():
    verdict = transpose_variant_test(fixture_graph("transposed_pair"))
    assert verdict.status == VerdictStatus.nonempty
    assert verdict.criterion == "transpose-variant"


def test_zero_pattern_on_empty_graph():
    g = graph(np.zeros((2, 2), dtype=int), np.ones((2, 2), dtype=int))
    for test in (zero_pattern_test, transpose_variant_test, epair_nonempty_test):
        verdict = test(g)
        assert verdict.status == VerdictStatus.empty
        assert verdict.criterion == "trim"
    assert mn_finiteness_test(g).status == VerdictStatus.finite_sufficient


def test_epair_tables_non_permutation():
    tables = build_epair_tables(fixture_graph("non_permutation_mn"))
    assert [t.cells for t in tables.a1] == NON_PERMUTATION_TRIOMINOES
    assert [t.cells for t in tables.a2] == NON_PERMUTATION_TRIOMINOES
    assert all(t.kind == TriominoKind.lower_right for t in tables.a1)
    assert all(t.kind == TriominoKind.upper_left for t in tables.a2)
    np.testing.assert_array_equal(tables.m(), NON_PERMUTATION_M)
    np.testing.assert_array_equal(tables.n(), NON_PERMUTATION_M)
    verdict = mn_finiteness_test(fixture_graph("non_permutation_mn"), tables)
    assert verdict.status == VerdictStatus.inconclusive
    assert verdict.reason == "M and N are not permutation matrices"


def test_derived_triomino_sets_agree():
    g = fixture_graph("non_permutation_mn")
    a1, a2 = derived_triomino_sets(g, products(g))
    assert list(a1) == NON_PERMUTATION_TRIOMINOES
    assert list(a2) == NON_PERMUTATION_TRIOMINOES


@pytest.mark.parametrize("name", fixture_names())
def test_derived_triomino_sets_match_completions(name):
    g = fixture_graph(name)
    tables = build_epair_tables(g)
    a1, a2 = derived_triomino_sets(g, products(g))
    assert list(a1) == [t.cells for t in tables.a1]
    assert list(a2) == [t.cells for t in tables.a2]


def test_epair_tables_identity_mn():
    tables = build_epair_tables(fixture_graph("identity_mn"))
    assert [t.cells for t in tables.a1] == [(0, 1, 0), (1, 2, 1), (2, 0, 2), (2, 1, 2)]
    assert [t.cells for t in tables.a2] == [(0, 2, 0), (1, 0, 1), (1, 2, 1), (2, 1, 2)]
    np.testing.assert_array_equal(tables.m(), np.eye(4, dtype=int))
    np.testing.assert_array_equal(tables.n(), np.eye(4, dtype=int))
    # corners (1, 1) complete through two different 2x2 blocks
    assert tables.epairs_of_a1(1) == [1, 2]
    assert tables.epairs_of_a2(3) == [2, 3]


def test_mn_finiteness_needs_unique_epairs():
    verdict = mn_finiteness_test(fixture_graph("identity_mn"))
    assert verdict.status == VerdictStatus.inconclusive
    assert "uniquely" in verdict.reason


def test_mn_finiteness_single_orbit():
    tables = build_epair_tables(fixture_graph("single_orbit"))
    assert [t.cells for t in tables.a1] == [(0, 0, 2), (0, 1, 0), (1, 2, 0), (2, 0, 1)]
    # M cycles 0 -> 3 -> 2 -> 1
    assert tables.m_matrix == ((0, 0, 0, 1), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0))
    verdict = mn_finiteness_test(fixture_graph("single_orbit"), tables)
    assert verdict.status == VerdictStatus.finite_sufficient


@pytest.mark.parametrize(
    "name",
    [
        "golden_mean",
        "efg_dominoes",
        "single_orbit",
        "non_permutation_mn",
        "identity_mn",
    ],
)
def test_epair_nonempty(name):
    verdict = epair_nonempty_test(fixture_graph(name))
    assert verdict.status == VerdictStatus.nonempty
    assert verdict.criterion == "epair"


def test_epair_without_blocks(components):
    _, contradictory = components
    verdict = epair_nonempty_test(contradictory)
    assert verdict.status == VerdictStatus.inconclusive


def test_permutation_propagation(components):
    commuting, contradictory = components
    assert permutation_propagation_test(commuting).status == VerdictStatus.nonempty
    verdict = permutation_propagation_test(contradictory)
    assert verdict.status == VerdictStatus.empty
    assert "3:" in verdict.certificate
    oracle = bounded_emptiness(contradictory, 4)
    assert oracle.status == OracleStatus.empty_certificate
    assert oracle.certificate_size == 2
    undecided = permutation_propagation_test(fixture_graph("golden_mean"))
    assert undecided.status == VerdictStatus.inconclusive


def test_analyze_disjoint_permutations():
    result = analyze(fixture_graph("disjoint_permutations"))
    assert result.overall.status == VerdictStatus.nonempty
    assert result.overall.criterion == "perm-commute"
    assert result.overall.witness.periods == (3, 3)
    first, second = result.components
    assert first.vertex_labels == ("0", "1", "2")
    assert second.conclusion.status == VerdictStatus.empty
    assert second.conclusion.criterion == "permutation-propagation"
    assert second.oracle.status == OracleStatus.empty_certificate
    assert all(c.oracle_agrees for c in result.components)
    criteria = [v.criterion for v in first.verdicts]
    assert criteria == [
        "perm-commute",
        "zero-pattern",
        "transpose-variant",
        "epair",
        "mn-finiteness",
        "permutation-propagation",
    ]
    assert result.notes
    assert result.disagreements == []


def test_analyze_reports_oracle_disagreement(monkeypatch, caplog):
    def always_nonempty(g):
        return Verdict(status=VerdictStatus.nonempty, criterion="perm-commute")

    monkeypatch.setattr(analysis, "perm_commute_test", always_nonempty)
    result = analyze(fixture_graph("disjoint_permutations"))
    assert result.disagreements == [("3", "4", "5")]
    assert not result.components[1].oracle_agrees
    assert "the oracle says EmptyCertificate" in caplog.text


def test_analyze_golden():
    result = analyze(fixture_graph("golden_mean"))
    assert result.overall.status == VerdictStatus.nonempty
    assert result.overall.criterion == "zero-pattern"
    assert result.trimmed_labels == ("0", "1")
    assert result.verdicts[0] == result.overall


def test_analyze_single_orbit():
    result = analyze(fixture_graph("single_orbit"), oracle_depth=4)
    assert result.overall.status == VerdictStatus.nonempty


def test_analyze_empty_graph():
    g = graph(np.zeros((2, 2), dtype=int), np.ones((2, 2), dtype=int))
    result = analyze(g)
    assert result.overall.status == VerdictStatus.empty
    assert result.overall.criterion == "trim"
    assert result.components == ()


@st.composite
def matrix_pairs(draw, max_size=4):
    n = draw(st.integers(1, max_size))
    entries = st.lists(st.integers(0, 3), min_size=n * n, max_size=n * n)
    a = np.array(draw(entries)).reshape(n, n)
    b = np.array(draw(entries)).reshape(n, n)
    return a, b


@given(matrix_pairs())
def test_pruning_is_idempotent(pair):
    once = prune_products(*pair)
    twice = prune_products(*once)
    np.testing.assert_array_equal(once[0], twice[0])
    np.testing.assert_array_equal(once[1], twice[1])
    np.testing.assert_array_equal(once[0] != 0, once[1] != 0)


@given(st.permutations(range(4)), st.permutations(range(4)))
def test_permutation_products_stay_permutations(h, v):
    report = products(permutation_graph(h, v))
    for m in (report.hv, report.vh, report.hvt, report.vth):
        arr = np.array(m)
        assert (arr.sum(axis=0) == 1).all()
        assert (arr.sum(axis=1) == 1).all()


@st.composite
def small_graphs(draw, max_size=4):
    n = draw(st.integers(1, max_size))
    entries = st.lists(st.integers(0, 1), min_size=n * n, max_size=n * n)
    h = np.array(draw(entries)).reshape(n, n)
    v = np.array(draw(entries)).reshape(n, n)
    return graph(h, v)


@settings(max_examples=80, deadline=None)
@given(small_graphs())
def test_criteria_agree_with_the_oracle(g):
    for component in decompose_components(trim(g)):
        tables = build_epair_tables(component)
        verdicts = (
            perm_commute_test(component),
            zero_pattern_test(component),
            transpose_variant_test(component),
            epair_nonempty_test(component, tables),
            permutation_propagation_test(component),
        )
        oracle = bounded_emptiness(component, 4)
        for verdict in verdicts:
            if verdict.status == VerdictStatus.nonempty:
                assert oracle.status != OracleStatus.empty_certificate, verdict
                if verdict.witness is not None:
                    assert is_valid_graph_torus(component, verdict.witness)
            elif verdict.status == VerdictStatus.empty:
                assert oracle.status != OracleStatus.nonempty_witness, verdict
                for periods in itertools.product(range(1, 4), repeat=2):
                    assert torus_search(component, periods, limit=1) == []
