# pylint: disable=too-many-lines
from __future__ import annotations

import math
from enum import Enum
from typing import Any
from typing import Dict
from typing import Iterator
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic import model_validator

Vector = Tuple[int, ...]
Matrix = Tuple[Tuple[int, ...], ...]


class ExcludeUnsetModel(BaseModel):
    def model_dump(self, *args, **kwargs):
        if "exclude_unset" not in kwargs:
            kwargs["exclude_unset"] = True
        return super().model_dump(*args, **kwargs)

    def model_dump_json(self, *args, **kwargs):
        if "exclude_unset" not in kwargs:
            kwargs["exclude_unset"] = True
        return super().model_dump_json(*args, **kwargs)


###############################################################################
#                 Errors raised by the library and the CLI                    #
###############################################################################


class SpecificationError(ValueError):
    """The input does not describe a valid shift, block, graph or request"""


class UnsupportedDimensionError(SpecificationError):
    pass


class PreconditionError(SpecificationError):
    pass


class SpecParseError(SpecificationError):
    def __init__(
        self, message: str, line: int, column: int = 1, path: Optional[str] = None
    ):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.path = path

    def __str__(self):
        return f"{self.path or '<spec>'}:{self.line}:{self.column}: {self.message}"


class BudgetExceeded(RuntimeError):
    """A search ran past its configured cap

    progress records how far the search got (nodes visited or items
    produced) so callers can report partial work.
    """

    def __init__(self, message: str, limit: int, progress: int = 0):
        super().__init__(message)
        self.limit = limit
        self.progress = progress


class ConsistencyError(ValueError):
    pass


class ConstructionError(ValueError):
    pass


class InputTooShortError(ValueError):
    pass


def as_matrix(arr: Any) -> Matrix:
    return tuple(tuple(int(v) for v in row) for row in np.asarray(arr))


def unit_vector(axis: int, dimension: int) -> Vector:
    return tuple(1 if i == axis else 0 for i in range(dimension))


###############################################################################
#              Models (structs) for alphabets, patterns and specs             #
###############################################################################


class Alphabet(BaseModel):
    """Ordered symbol names; a symbol's ordinal is its declaration position"""

    symbols: Tuple[str, ...]
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @model_validator(mode="after")
    def _check_symbols(self) -> "Alphabet":
        if not self.symbols:
            raise SpecificationError("alphabet must declare at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise SpecificationError(f"duplicate symbols in {list(self.symbols)}")
        for s in self.symbols:
            if not s or any(c.isspace() for c in s):
                raise SpecificationError(f"invalid symbol name {s!r}")
        return self

    @classmethod
    def of_size(cls, n: int) -> "Alphabet":
        return cls(symbols=tuple(str(i) for i in range(n)))

    @property
    def index(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def ordinal(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise SpecificationError(f"symbol {symbol!r} is not declared") from None

    def name(self, ordinal: int) -> str:
        return self.symbols[ordinal]

    def __len__(self) -> int:
        return len(self.symbols)


class GeneralPattern(BaseModel):
    """A finite pattern: symbol ordinals placed on a support of d-vectors

    The support is normalized so its coordinatewise minimum is the zero
    vector and cells are kept sorted by vector, so equal patterns compare
    equal regardless of how they were written down.
    """

    cells: Tuple[Tuple[Vector, int], ...]
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @field_validator("cells")
    @classmethod
    def _normalize(
        cls, cells: Tuple[Tuple[Vector, int], ...]
    ) -> Tuple[Tuple[Vector, int], ...]:
        if not cells:
            raise SpecificationError("pattern support must be non-empty")
        dims = {len(v) for v, _ in cells}
        if len(dims) != 1:
            raise SpecificationError("pattern mixes vectors of different dimension")
        vectors = [v for v, _ in cells]
        if len(set(vectors)) != len(vectors):
            raise SpecificationError("pattern assigns one cell twice")
        d = dims.pop()
        low = [min(v[i] for v in vectors) for i in range(d)]
        shifted = [
            (tuple(v[i] - low[i] for i in range(d)), int(s)) for v, s in cells
        ]
        return tuple(sorted(shifted))

    @classmethod
    def from_mapping(cls, mapping: Mapping[Vector, int]) -> "GeneralPattern":
        return cls(cells=tuple((tuple(v), s) for v, s in mapping.items()))

    @classmethod
    def domino(cls, axis: int, dimension: int, a: int, b: int) -> "GeneralPattern":
        """a followed by b along axis (a at the origin)"""
        return cls(
            cells=(
                (tuple(0 for _ in range(dimension)), a),
                (unit_vector(axis, dimension), b),
            )
        )

    @classmethod
    def from_block(cls, block: "RectBlock") -> "GeneralPattern":
        return cls(cells=tuple((v, block.cell(v)) for v in block.positions()))

    @property
    def dimension(self) -> int:
        return len(self.cells[0][0])

    @property
    def support(self) -> Tuple[Vector, ...]:
        return tuple(v for v, _ in self.cells)

    @property
    def extents(self) -> Vector:
        return tuple(
            max(v[i] for v in self.support) + 1 for i in range(self.dimension)
        )

    @property
    def symbols(self) -> Tuple[int, ...]:
        return tuple(s for _, s in self.cells)

    def is_rectangular(self) -> bool:
        return len(self.cells) == math.prod(self.extents)

    def domino_axis(self) -> Optional[int]:
        """Axis along which this pattern is a domino, or None"""
        if len(self.cells) != 2:
            return None
        (origin, _), (v, _) = self.cells
        if any(origin) or sorted(v) != [0] * (len(v) - 1) + [1]:
            return None
        return v.index(1)


class ShiftSpec(BaseModel):
    dimension: int = Field(gt=0)
    alphabet: Alphabet
    forbidden: Tuple[GeneralPattern, ...] = ()
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @model_validator(mode="after")
    def _check_patterns(self) -> "ShiftSpec":
        for p in self.forbidden:
            if p.dimension != self.dimension:
                raise SpecificationError(
                    f"pattern of dimension {p.dimension} in a "
                    f"{self.dimension}-dimensional spec"
                )
            for s in p.symbols:
                if not 0 <= s < len(self.alphabet):
                    raise SpecificationError(f"pattern uses unknown ordinal {s}")
        return self


###############################################################################
#             Models (structs) for finite blocks and periodic tori            #
###############################################################################


class CellArray(BaseModel):
    """Dense cells with axis 0 varying fastest, origin at the bottom-left"""

    cells: Tuple[int, ...]
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @property
    def shape(self) -> Vector:
        raise NotImplementedError

    @property
    def dimension(self) -> int:
        return len(self.shape)

    def _check_shape(self) -> None:
        if not self.shape or any(e <= 0 for e in self.shape):
            raise SpecificationError(f"extents must be positive, got {self.shape}")
        if len(self.cells) != math.prod(self.shape):
            raise SpecificationError(
                f"{len(self.cells)} cells do not fill extents {self.shape}"
            )

    def flat_index(self, v: Sequence[int]) -> int:
        idx, stride = 0, 1
        for c, e in zip(v, self.shape):
            idx += c * stride
            stride *= e
        return idx

    def cell(self, v: Sequence[int]) -> int:
        return self.cells[self.flat_index(v)]

    def positions(self) -> Iterator[Vector]:
        """All cell vectors in storage order"""
        for flat in range(len(self.cells)):
            v = []
            for e in self.shape:
                v.append(flat % e)
                flat //= e
            yield tuple(v)

    def as_array(self) -> np.ndarray:
        """Array indexed [x, y, ...]"""
        return np.array(self.cells, dtype=np.int64).reshape(self.shape[::-1]).T

    @staticmethod
    def _cells_of(arr: np.ndarray) -> Tuple[int, ...]:
        return tuple(int(c) for c in np.asarray(arr).T.ravel())


class RectBlock(CellArray):
    extents: Vector

    @model_validator(mode="after")
    def _validate(self) -> "RectBlock":
        self._check_shape()
        return self

    @property
    def shape(self) -> Vector:
        return self.extents

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RectBlock":
        arr = np.asarray(arr)
        return cls(extents=tuple(int(e) for e in arr.shape), cells=cls._cells_of(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "RectBlock":
        """2-d block from rows listed bottom row first"""
        return cls.from_array(np.array(rows, dtype=np.int64).T)


class TorusConfig(CellArray):
    periods: Vector

    @model_validator(mode="after")
    def _validate(self) -> "TorusConfig":
        self._check_shape()
        return self

    @property
    def shape(self) -> Vector:
        return self.periods

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "TorusConfig":
        arr = np.asarray(arr)
        return cls(periods=tuple(int(e) for e in arr.shape), cells=cls._cells_of(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "TorusConfig":
        """2-d torus from rows listed bottom row first"""
        return cls.from_array(np.array(rows, dtype=np.int64).T)

    def rows(self) -> List[Tuple[int, ...]]:
        """2-d rows, bottom row first"""
        arr = self.as_array()
        return [tuple(int(c) for c in arr[:, y]) for y in range(self.periods[1])]


class PeriodLattice(BaseModel):
    generators: Tuple[Vector, ...]
    model_config = ConfigDict(frozen=True, protected_namespaces=())


###############################################################################
#                 Models (structs) for graph generated shifts                 #
###############################################################################


class MultiGraph(BaseModel):
    """G = (H_1, ..., H_d) on a shared vertex set

    Entry (i, j) of axis matrix k is 1 when vertex j may follow vertex i
    along axis k. Axis 0 is horizontal (H), axis 1 vertical (V).
    """

    vertex_labels: Tuple[str, ...]
    axes: Tuple[Matrix, ...]
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @model_validator(mode="after")
    def _check_matrices(self) -> "MultiGraph":
        n = len(self.vertex_labels)
        if not self.axes:
            raise SpecificationError("a graph needs at least one axis matrix")
        if len(set(self.vertex_labels)) != n:
            raise SpecificationError("duplicate vertex labels")
        for k, m in enumerate(self.axes):
            if len(m) != n or any(len(row) != n for row in m):
                raise SpecificationError(f"axis {k} matrix is not {n}x{n}")
            if any(v not in (0, 1) for row in m for v in row):
                raise SpecificationError(f"axis {k} matrix has entries outside 0/1")
        return self

    @classmethod
    def from_matrices(
        cls, labels: Sequence[str], matrices: Sequence[Any]
    ) -> "MultiGraph":
        return cls(
            vertex_labels=tuple(labels),
            axes=tuple(
                as_matrix(np.asarray(m).reshape(len(labels), len(labels)))
                for m in matrices
            ),
        )

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def size(self) -> int:
        return len(self.vertex_labels)

    def matrix(self, axis: int) -> np.ndarray:
        if not 0 <= axis < self.dimension:
            raise SpecificationError(
                f"axis {axis} out of range for a {self.dimension}-axis graph"
            )
        return np.array(self.axes[axis], dtype=np.int64).reshape(self.size, self.size)

    @property
    def h(self) -> np.ndarray:
        return self.matrix(0)

    @property
    def v(self) -> np.ndarray:
        return self.matrix(1)


class BlockAlphabetCoding(BaseModel):
    """Higher-block code: admissible window blocks become the new symbols"""

    window: Vector
    base_spec: ShiftSpec
    block_symbols: Tuple[RectBlock, ...]
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @property
    def forward_index(self) -> Dict[RectBlock, int]:
        return {b: i for i, b in enumerate(self.block_symbols)}

    def index_of(
        self, block: RectBlock, index: Optional[Dict[RectBlock, int]] = None
    ) -> int:
        try:
            return (index or self.forward_index)[block]
        except KeyError:
            raise ConsistencyError(
                f"window block {block.cells} is not a symbol of the coding"
            ) from None


###############################################################################
#              Models (structs) for the matrix based criteria                 #
###############################################################################


class MatrixPredicates(BaseModel):
    is_permutation: bool
    is_irreducible: bool
    model_config = ConfigDict(frozen=True, protected_namespaces=())


class ProductReport(BaseModel):
    hv: Matrix
    vh: Matrix
    hvt: Matrix
    vth: Matrix
    pruned_hv: Matrix
    pruned_vh: Matrix
    model_config = ConfigDict(frozen=True, protected_namespaces=())


class TriominoKind(str, Enum):
    def __str__(self):
        return str(self.value)

    # a at (0,0), b at (1,0), c at (1,1)
    lower_right = "LowerRight"
    # x at (0,0), y at (0,1), z at (1,1)
    upper_left = "UpperLeft"


class Triomino(BaseModel):
    kind: TriominoKind
    cells: Tuple[int, int, int]
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @property
    def placements(self) -> Tuple[Vector, Vector, Vector]:
        if self.kind == TriominoKind.lower_right:
            return (0, 0), (1, 0), (1, 1)
        return (0, 0), (0, 1), (1, 1)

    @property
    def corners(self) -> Tuple[int, int]:
        """Symbols at (0,0) and (1,1), the cells an E-pair shares"""
        return self.cells[0], self.cells[2]


class EPairTables(BaseModel):
    a1: Tuple[Triomino, ...] = ()
    a2: Tuple[Triomino, ...] = ()
    m_matrix: Matrix = ()
    n_matrix: Matrix = ()
    # (index into a1, index into a2)
    epair: Tuple[Tuple[int, int], ...] = ()
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    def epairs_of_a1(self, i: int) -> List[int]:
        return [j for a, j in self.epair if a == i]

    def epairs_of_a2(self, j: int) -> List[int]:
        return [i for i, b in self.epair if b == j]

    def m(self) -> np.ndarray:
        n = len(self.a1)
        return np.array(self.m_matrix, dtype=np.int64).reshape(n, n)

    def n(self) -> np.ndarray:
        n = len(self.a2)
        return np.array(self.n_matrix, dtype=np.int64).reshape(n, n)


class VerdictStatus(str, Enum):
    def __str__(self):
        return str(self.value)

    nonempty = "Nonempty"
    empty = "Empty"
    finite_sufficient = "FiniteSufficient"
    inconclusive = "Inconclusive"


class Verdict(BaseModel):
    status: VerdictStatus
    # Name of the rule that produced this verdict
    criterion: str
    witness: Optional[TorusConfig] = None
    certificate: Optional[str] = None
    reason: Optional[str] = None
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @property
    def definitive(self) -> bool:
        return self.status != VerdictStatus.inconclusive


###############################################################################
#                 Models (structs) for the brute-force oracle                 #
###############################################################################


class SearchBudget(BaseModel):
    max_cells: int = Field(default=64, gt=0)
    # Backtracking node cap
    max_nodes: int = Field(default=10**6, gt=0)
    # Cap on derived alphabets (block symbols, rows, windows)
    max_symbols: int = Field(default=4096, gt=0)
    model_config = ConfigDict(frozen=True, protected_namespaces=())


class OracleStatus(str, Enum):
    def __str__(self):
        return str(self.value)

    nonempty_witness = "NonemptyWitness"
    empty_certificate = "EmptyCertificate"
    # Propagation from a seed assigned two symbols to one cell
    contradiction = "Contradiction"
    unknown = "Unknown"


class OracleVerdict(BaseModel):
    status: OracleStatus
    witness: Optional[TorusConfig] = None
    certificate_size: Optional[int] = None
    detail: Optional[str] = None
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @model_validator(mode="after")
    def _check_evidence(self) -> "OracleVerdict":
        if self.status == OracleStatus.nonempty_witness:
            assert self.witness is not None, "witness required"
        if self.status == OracleStatus.empty_certificate:
            assert self.certificate_size is not None, "certificate size required"
        return self


class HorizontalPeriodicity(BaseModel):
    exists: bool
    witness: Optional[TorusConfig] = None
    # Number of periodic rows in the column graph
    rows: int = 0
    model_config = ConfigDict(frozen=True, protected_namespaces=())


class GrowthSeries(BaseModel):
    counts: Tuple[int, ...]
    truncated: bool = False
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @property
    def strictly_increasing(self) -> bool:
        return all(a < b for a, b in zip(self.counts, self.counts[1:]))


###############################################################################
#                      Models (structs) for reports                           #
###############################################################################


class ComponentAnalysis(BaseModel):
    vertex_labels: Tuple[str, ...]
    products: ProductReport
    epairs: EPairTables
    # Criterion verdicts in a fixed order
    verdicts: Tuple[Verdict, ...]
    oracle: Optional[OracleVerdict] = None
    conclusion: Verdict
    oracle_agrees: bool = True
    model_config = ConfigDict(frozen=True, protected_namespaces=())


class GraphAnalysis(BaseModel):
    trimmed_labels: Tuple[str, ...]
    components: Tuple[ComponentAnalysis, ...] = ()
    overall: Verdict
    notes: Tuple[str, ...] = ()
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @property
    def verdicts(self) -> List[Verdict]:
        out = [self.overall]
        out.extend(c.conclusion for c in self.components)
        for c in self.components:
            out.extend(c.verdicts)
        return out

    @property
    def disagreements(self) -> List[Tuple[str, ...]]:
        """Components whose conclusion the bounded oracle contradicts"""
        return [c.vertex_labels for c in self.components if not c.oracle_agrees]


class SpecFile(BaseModel):
    path: Optional[str] = None
    spec: ShiftSpec
    # Present whenever the spec is one-step or matrices were declared
    graph: Optional[MultiGraph] = None
    # blake2b hex digest of the source text, empty when built in code
    digest: str = ""
    patterns_declared: bool = False
    matrices_declared: bool = False
    model_config = ConfigDict(frozen=True, protected_namespaces=())


class Report(ExcludeUnsetModel):
    tool_version: str
    command: str
    input_digest: str
    status: str
    exit_code: int
    analysis: Optional[Dict[str, Any]] = None
    products: Optional[Dict[str, Any]] = None
    epairs: Optional[Dict[str, Any]] = None
    verdicts: Optional[List[Dict[str, Any]]] = None
    higher_block: Optional[Dict[str, Any]] = None
    periodicity: Optional[Dict[str, Any]] = None
    oracle: Optional[Dict[str, Any]] = None
    growth: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    timing: Optional[Dict[str, float]] = None


class CommandOptions(BaseModel):
    """Knobs of one CLI command; every field maps to a flag"""

    budget: SearchBudget = SearchBudget()
    window: Optional[Vector] = None
    period: Optional[Vector] = None
    torus: Optional[Vector] = None
    max_n: int = Field(default=6, gt=0)
    # Cap on tori listed by the oracle command
    limit: Optional[int] = Field(default=None, gt=0)
    oracle_depth: int = Field(default=4, gt=0)
    include_timing: bool = True
    model_config = ConfigDict(frozen=True, protected_namespaces=())
