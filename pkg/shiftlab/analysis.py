"""Matrix criteria for two-dimensional graph generated shifts

Every criterion returns Inconclusive rather than guess; only the oracle
in analyze() turns an open case into a definitive answer, and only at
desk scale.
"""
import itertools
import logging
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from shiftlab.dynamics import bounded_emptiness
from shiftlab.dynamics import propagate_permutation
from shiftlab.graph import decompose_components
from shiftlab.graph import is_irreducible_matrix
from shiftlab.graph import is_permutation_matrix
from shiftlab.graph import trim
from shiftlab.interface import as_matrix
from shiftlab.interface import ComponentAnalysis
from shiftlab.interface import EPairTables
from shiftlab.interface import GraphAnalysis
from shiftlab.interface import MatrixPredicates
from shiftlab.interface import MultiGraph
from shiftlab.interface import OracleStatus
from shiftlab.interface import OracleVerdict
from shiftlab.interface import ProductReport
from shiftlab.interface import SearchBudget
from shiftlab.interface import SpecificationError
from shiftlab.interface import Triomino
from shiftlab.interface import TriominoKind
from shiftlab.interface import UnsupportedDimensionError
from shiftlab.interface import Verdict
from shiftlab.interface import VerdictStatus

logger = logging.getLogger(__name__)

PERIODIC_POINTS = "periodic points of arbitrarily large period"

# Attached to every analysis
INTERPRETATION_NOTES = (
    "graphs are trimmed before any criterion runs",
    "the sequence space of M (or N) is read as the one-dimensional vertex "
    "shift of its nonzero digraph; it is non-empty when a cycle survives "
    "trimming",
    "perm-commute requires irreducible permutation matrices; other cases "
    "defer to permutation propagation and the oracle",
)


def _require_planar(g: MultiGraph) -> None:
    if g.dimension != 2:
        raise UnsupportedDimensionError(
            f"matrix criteria need exactly 2 axes, got {g.dimension}"
        )


###############################################################################
#                     Products and predicates on matrices                     #
###############################################################################


def prune_products(hv, vh) -> Tuple[np.ndarray, np.ndarray]:
    """Zero an entry of each product wherever either product is zero"""
    hv, vh = np.asarray(hv), np.asarray(vh)
    if hv.shape != vh.shape:
        raise SpecificationError(f"shapes {hv.shape} and {vh.shape} differ")
    both = (hv != 0) & (vh != 0)
    return np.where(both, hv, 0), np.where(both, vh, 0)


def products(g: MultiGraph) -> ProductReport:
    _require_planar(g)
    h, v = g.h, g.v
    hv, vh = h @ v, v @ h
    pruned_hv, pruned_vh = prune_products(hv, vh)
    return ProductReport(
        hv=as_matrix(hv),
        vh=as_matrix(vh),
        hvt=as_matrix(h @ v.T),
        vth=as_matrix(v.T @ h),
        pruned_hv=as_matrix(pruned_hv),
        pruned_vh=as_matrix(pruned_vh),
    )


def matrix_predicates(a) -> MatrixPredicates:
    return MatrixPredicates(
        is_permutation=is_permutation_matrix(a),
        is_irreducible=is_irreducible_matrix(a),
    )


###############################################################################
#                 Criteria built on HV, VH and their transposes               #
###############################################################################


def perm_commute_test(g: MultiGraph) -> Verdict:
    _require_planar(g)
    failures = []
    for name, mat in (("H", g.h), ("V", g.v)):
        p = matrix_predicates(mat)
        if not p.is_permutation:
            failures.append(f"{name} is not a permutation matrix")
        if not p.is_irreducible:
            failures.append(f"{name} is not irreducible")
    if failures:
        return Verdict(
            status=VerdictStatus.inconclusive,
            criterion="perm-commute",
            reason="; ".join(failures),
        )
    h, v = g.h, g.v
    if np.array_equal(h @ v, v @ h):
        witness = propagate_permutation(g, 0).witness
        return Verdict(
            status=VerdictStatus.nonempty,
            criterion="perm-commute",
            witness=witness,
            reason="HV = VH for irreducible permutation matrices",
        )
    return Verdict(
        status=VerdictStatus.empty,
        criterion="perm-commute",
        certificate="HV != VH for irreducible permutation matrices",
    )


def _zero_pattern_verdict(
    a: np.ndarray, b: np.ndarray, criterion: str, names: Tuple[str, str]
) -> Verdict:
    first, second = names
    nz_a, nz_b = a != 0, b != 0
    if np.array_equal(nz_a, nz_b):
        reason = f"{first} and {second} share a zero pattern"
    elif (~nz_a | nz_b).all():
        reason = f"{first} != 0 implies {second} != 0"
    elif (~nz_b | nz_a).all():
        reason = f"{second} != 0 implies {first} != 0"
    else:
        return Verdict(
            status=VerdictStatus.inconclusive,
            criterion=criterion,
            reason=f"zero patterns of {first} and {second} are incomparable",
        )
    return Verdict(
        status=VerdictStatus.nonempty,
        criterion=criterion,
        reason=reason,
        certificate=PERIODIC_POINTS,
    )


def _trimmed_or_empty(g: MultiGraph) -> Tuple[MultiGraph, Optional[Verdict]]:
    _require_planar(g)
    trimmed = trim(g)
    if trimmed.size == 0:
        return trimmed, Verdict(
            status=VerdictStatus.empty,
            criterion="trim",
            certificate="trimming removes every vertex",
        )
    return trimmed, None


def zero_pattern_test(g: MultiGraph) -> Verdict:
    trimmed, empty = _trimmed_or_empty(g)
    if empty is not None:
        return empty
    h, v = trimmed.h, trimmed.v
    return _zero_pattern_verdict(h @ v, v @ h, "zero-pattern", ("HV", "VH"))


def transpose_variant_test(g: MultiGraph) -> Verdict:
    trimmed, empty = _trimmed_or_empty(g)
    if empty is not None:
        return empty
    h, v = trimmed.h, trimmed.v
    return _zero_pattern_verdict(
        h @ v.T, v.T @ h, "transpose-variant", ("HV^T", "V^TH")
    )


###############################################################################
#                 Triominoes, the M and N matrices, E-pairs                   #
###############################################################################


def build_epair_tables(g: MultiGraph) -> EPairTables:
    """A1, A2, M, N and the E-pair relation from 2x2 completability"""
    _require_planar(g)
    h, v = g.h != 0, g.v != 0
    n = g.size
    a1: List[Triomino] = []
    a2: List[Triomino] = []
    for a, b, c in itertools.product(range(n), repeat=3):
        # a b along the bottom, c above b; completable through some d above a
        if h[a, b] and v[b, c] and (v[a, :] & h[:, c]).any():
            a1.append(Triomino(kind=TriominoKind.lower_right, cells=(a, b, c)))
        # x below y, z right of y; completable through some w right of x
        if v[a, b] and h[b, c] and (h[a, :] & v[:, c]).any():
            a2.append(Triomino(kind=TriominoKind.upper_left, cells=(a, b, c)))

    a2_set = {t.cells for t in a2}
    a1_set = {t.cells for t in a1}
    m = np.zeros((len(a1), len(a1)), dtype=np.int64)
    for (i, s), (j, t) in itertools.product(enumerate(a1), repeat=2):
        # t starts where s ends; the seam is the upper-left ^{s3 t2}_{s2}
        if t.cells[0] == s.cells[2] and (s.cells[1], s.cells[2], t.cells[1]) in a2_set:
            m[i, j] = 1
    nn = np.zeros((len(a2), len(a2)), dtype=np.int64)
    for (i, s), (j, t) in itertools.product(enumerate(a2), repeat=2):
        # t starts where s ends; the seam is the lower-right ^{.. t2}_{s2 s3}
        if t.cells[0] == s.cells[2] and (s.cells[1], s.cells[2], t.cells[1]) in a1_set:
            nn[i, j] = 1
    epair = tuple(
        (i, j)
        for (i, s), (j, t) in itertools.product(enumerate(a1), enumerate(a2))
        if s.corners == t.corners
    )
    logger.debug("E-pair tables: |A1|=%d |A2|=%d", len(a1), len(a2))
    return EPairTables(
        a1=tuple(a1),
        a2=tuple(a2),
        m_matrix=as_matrix(m),
        n_matrix=as_matrix(nn),
        epair=epair,
    )


def derived_triomino_sets(
    g: MultiGraph, report: ProductReport
) -> Tuple[Tuple[Tuple[int, int, int], ...], Tuple[Tuple[int, int, int], ...]]:
    """A1 and A2 read off the pruned products instead of completions"""
    h, v = g.h != 0, g.v != 0
    pruned_hv = np.array(report.pruned_hv).reshape(g.size, g.size)
    pruned_vh = np.array(report.pruned_vh).reshape(g.size, g.size)
    a1, a2 = [], []
    for a, b, c in itertools.product(range(g.size), repeat=3):
        if h[a, b] and v[b, c] and pruned_vh[a, c] != 0:
            a1.append((a, b, c))
        if v[a, b] and h[b, c] and pruned_hv[a, c] != 0:
            a2.append((a, b, c))
    return tuple(a1), tuple(a2)


def _vertex_shift_nonempty(a: np.ndarray) -> bool:
    if a.size == 0:
        return False
    labels = tuple(str(i) for i in range(a.shape[0]))
    return trim(MultiGraph.from_matrices(labels, [(a != 0).astype(np.int64)])).size > 0


def epair_nonempty_test(
    g: MultiGraph, tables: Optional[EPairTables] = None
) -> Verdict:
    if tables is None:
        trimmed, empty = _trimmed_or_empty(g)
        if empty is not None:
            return empty
        tables = build_epair_tables(trimmed)
    m, n = tables.m(), tables.n()
    if not (_vertex_shift_nonempty(m) and _vertex_shift_nonempty(n)):
        return Verdict(
            status=VerdictStatus.inconclusive,
            criterion="epair",
            reason="the vertex shift of M or of N is empty",
        )

    def chained(first: np.ndarray, second: np.ndarray, pairs, partner_pairs) -> bool:
        for i, j in zip(*np.nonzero(first)):
            for i1 in pairs(int(i)):
                if not any(second[i1, j1] for j1 in partner_pairs(int(j))):
                    return False
        return True

    if chained(m, n, tables.epairs_of_a1, tables.epairs_of_a1):
        return Verdict(
            status=VerdictStatus.nonempty,
            criterion="epair",
            reason="every M step lifts to an N step through E-pairs",
        )
    if chained(n, m, tables.epairs_of_a2, tables.epairs_of_a2):
        return Verdict(
            status=VerdictStatus.nonempty,
            criterion="epair",
            reason="every N step lifts to an M step through E-pairs",
        )
    return Verdict(
        status=VerdictStatus.inconclusive,
        criterion="epair",
        reason="some M step has an E-pair without an N continuation, and "
        "some N step has one without an M continuation",
    )


def mn_finiteness_test(
    g: MultiGraph, tables: Optional[EPairTables] = None
) -> Verdict:
    if tables is None:
        trimmed, empty = _trimmed_or_empty(g)
        if empty is not None:
            return Verdict(
                status=VerdictStatus.finite_sufficient,
                criterion="mn-finiteness",
                certificate="the shift is empty",
            )
        tables = build_epair_tables(trimmed)
    if not (is_permutation_matrix(tables.m()) and is_permutation_matrix(tables.n())):
        return Verdict(
            status=VerdictStatus.inconclusive,
            criterion="mn-finiteness",
            reason="M and N are not permutation matrices",
        )
    unique = all(len(tables.epairs_of_a1(i)) == 1 for i in range(len(tables.a1)))
    unique = unique and all(
        len(tables.epairs_of_a2(j)) == 1 for j in range(len(tables.a2))
    )
    if not unique:
        return Verdict(
            status=VerdictStatus.inconclusive,
            criterion="mn-finiteness",
            reason="not every triangular pattern extends uniquely to a 2x2 block",
        )
    return Verdict(
        status=VerdictStatus.finite_sufficient,
        criterion="mn-finiteness",
        reason="M and N are permutation matrices and every E-pair is unique",
    )


def permutation_propagation_test(g: MultiGraph) -> Verdict:
    _require_planar(g)
    if g.size == 0 or not (is_permutation_matrix(g.h) and is_permutation_matrix(g.v)):
        return Verdict(
            status=VerdictStatus.inconclusive,
            criterion="permutation-propagation",
            reason="axis matrices are not permutation matrices",
        )
    contradictions = []
    for seed in range(g.size):
        result = propagate_permutation(g, seed)
        if result.status == OracleStatus.nonempty_witness:
            return Verdict(
                status=VerdictStatus.nonempty,
                criterion="permutation-propagation",
                witness=result.witness,
                reason=result.detail,
            )
        contradictions.append(f"{g.vertex_labels[seed]}: {result.detail}")
    return Verdict(
        status=VerdictStatus.empty,
        criterion="permutation-propagation",
        certificate="; ".join(contradictions),
    )


###############################################################################
#                               Orchestration                                 #
###############################################################################


def _conclude(
    verdicts: Tuple[Verdict, ...], oracle: OracleVerdict
) -> Tuple[Verdict, bool]:
    firing = next(
        (
            v
            for v in verdicts
            if v.status in (VerdictStatus.nonempty, VerdictStatus.empty)
        ),
        None,
    )
    oracle_nonempty = oracle.status == OracleStatus.nonempty_witness
    oracle_empty = oracle.status == OracleStatus.empty_certificate
    if firing is not None:
        agrees = not (
            (firing.status == VerdictStatus.nonempty and oracle_empty)
            or (firing.status == VerdictStatus.empty and oracle_nonempty)
        )
        return firing, agrees
    if oracle_nonempty:
        return (
            Verdict(
                status=VerdictStatus.nonempty,
                criterion="oracle",
                witness=oracle.witness,
                reason=oracle.detail,
            ),
            True,
        )
    if oracle_empty:
        return (
            Verdict(
                status=VerdictStatus.empty,
                criterion="oracle",
                certificate=oracle.detail,
            ),
            True,
        )
    return (
        Verdict(
            status=VerdictStatus.inconclusive,
            criterion="all-criteria",
            reason="no criterion fired and the oracle stayed Unknown",
        ),
        True,
    )


def analyze_component(
    g: MultiGraph, budget: Optional[SearchBudget] = None, oracle_depth: int = 4
) -> ComponentAnalysis:
    report = products(g)
    tables = build_epair_tables(g)
    verdicts = (
        perm_commute_test(g),
        zero_pattern_test(g),
        transpose_variant_test(g),
        epair_nonempty_test(g, tables),
        mn_finiteness_test(g, tables),
        permutation_propagation_test(g),
    )
    oracle = bounded_emptiness(g, oracle_depth, budget)
    conclusion, agrees = _conclude(verdicts, oracle)
    if not agrees:
        logger.warning(
            "Criterion %s says %s but the oracle says %s for %s",
            conclusion.criterion,
            conclusion.status,
            oracle.status,
            g.vertex_labels,
        )
    return ComponentAnalysis(
        vertex_labels=g.vertex_labels,
        products=report,
        epairs=tables,
        verdicts=verdicts,
        oracle=oracle,
        conclusion=conclusion,
        oracle_agrees=agrees,
    )


def analyze(
    g: MultiGraph, budget: Optional[SearchBudget] = None, oracle_depth: int = 4
) -> GraphAnalysis:
    """Trim, split into components and run every criterion on each"""
    _require_planar(g)
    trimmed = trim(g)
    if trimmed.size == 0:
        return GraphAnalysis(
            trimmed_labels=(),
            overall=Verdict(
                status=VerdictStatus.empty,
                criterion="trim",
                certificate="trimming removes every vertex",
            ),
            notes=INTERPRETATION_NOTES,
        )
    components = tuple(
        analyze_component(c, budget, oracle_depth)
        for c in decompose_components(trimmed)
    )
    nonempty = [
        c for c in components if c.conclusion.status == VerdictStatus.nonempty
    ]
    if nonempty:
        first = nonempty[0].conclusion
        overall = Verdict(
            status=VerdictStatus.nonempty,
            criterion=first.criterion,
            witness=first.witness,
            reason=f"component {' '.join(nonempty[0].vertex_labels)} is non-empty",
        )
    elif all(c.conclusion.status == VerdictStatus.empty for c in components):
        overall = Verdict(
            status=VerdictStatus.empty,
            criterion="components",
            certificate="every component is empty",
        )
    else:
        overall = Verdict(
            status=VerdictStatus.inconclusive,
            criterion="components",
            reason="no component is known non-empty and some are undecided",
        )
    return GraphAnalysis(
        trimmed_labels=trimmed.vertex_labels,
        components=components,
        overall=overall,
        notes=INTERPRETATION_NOTES,
    )
