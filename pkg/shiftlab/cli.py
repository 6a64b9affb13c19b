"""Spec files, canonical reports and the shiftlab command line

A spec file is line oriented; '#' starts a comment:

    dim 2
    symbols 0 1
    forbid h 1 1          # strip along axis 0, left to right
    forbid v 1 1          # strip along axis 1, bottom to top
    forbid axis 3 0 1     # strip along the k-th axis (1-based)
    forbid rect 2 2       # followed by 2 rows of 2 symbols, top row first
    hmatrix               # followed by one 0/1 row per symbol
    vmatrix
"""
import argparse
import json
import logging
import re
import sys
import time
from hashlib import blake2b
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from shiftlab import __version__
from shiftlab.analysis import analyze
from shiftlab.analysis import build_epair_tables
from shiftlab.analysis import mn_finiteness_test
from shiftlab.analysis import products
from shiftlab.dynamics import block_growth
from shiftlab.dynamics import bounded_emptiness
from shiftlab.dynamics import horizontal_periodic_exists
from shiftlab.dynamics import torus_search
from shiftlab.dynamics import vertical_periodic_exists
from shiftlab.graph import graph_from_one_step
from shiftlab.graph import one_step_graph_for_sft
from shiftlab.graph import spec_from_graph
from shiftlab.graph import trim
from shiftlab.interface import Alphabet
from shiftlab.interface import BudgetExceeded
from shiftlab.interface import CellArray
from shiftlab.interface import CommandOptions
from shiftlab.interface import EPairTables
from shiftlab.interface import GeneralPattern
from shiftlab.interface import GraphAnalysis
from shiftlab.interface import HorizontalPeriodicity
from shiftlab.interface import MultiGraph
from shiftlab.interface import OracleVerdict
from shiftlab.interface import ProductReport
from shiftlab.interface import Report
from shiftlab.interface import SearchBudget
from shiftlab.interface import ShiftSpec
from shiftlab.interface import SpecFile
from shiftlab.interface import SpecificationError
from shiftlab.interface import SpecParseError
from shiftlab.interface import Triomino
from shiftlab.interface import UnsupportedDimensionError
from shiftlab.interface import Verdict
from shiftlab.interface import VerdictStatus
from shiftlab.recode import higher_block_spec
from shiftlab.recode import is_one_step

logger = logging.getLogger(__name__)

DIRECTIVES = ("dim", "symbols", "forbid", "hmatrix", "vmatrix")
MATRIX_AXES = {"hmatrix": 0, "vmatrix": 1}
STRIP_AXES = {"h": 0, "v": 1}

EXIT_DEFINITIVE = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2
UNDECIDED = ("Inconclusive", "Unknown")

_TOKEN = re.compile(r"\S+")


###############################################################################
#                             Spec file parsing                               #
###############################################################################


def _tokens(line: str) -> List[Tuple[str, int]]:
    """Whitespace separated words with their 1-based columns, comments dropped"""
    body = line.split("#", 1)[0]
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(body)]


class _Parser:
    def __init__(self, text: str, path: Optional[str]):
        self.path = path
        self.lines: List[Tuple[int, List[Tuple[str, int]]]] = []
        for n, raw in enumerate(text.splitlines(), 1):
            toks = _tokens(raw)
            if toks:
                self.lines.append((n, toks))
        self.last_line = max(1, len(text.splitlines()))
        self.pos = 0
        self.dim: Optional[int] = None
        self.symbols: Optional[Tuple[str, ...]] = None
        self.patterns: List[GeneralPattern] = []
        self.pattern_lines: List[int] = []
        self.matrices: Dict[int, Tuple[np.ndarray, int]] = {}

    def error(self, message: str, line: int, column: int = 1) -> SpecParseError:
        return SpecParseError(message, line=line, column=column, path=self.path)

    @property
    def dimension(self) -> int:
        return self.dim if self.dim is not None else 2

    def _int(self, token: str, line: int, column: int, low: int = 1) -> int:
        try:
            value = int(token)
        except ValueError:
            raise self.error(
                f"expected an integer, got {token!r}", line, column
            ) from None
        if value < low:
            raise self.error(f"expected an integer >= {low}, got {value}", line, column)
        return value

    def _ordinal(self, token: str, line: int, column: int) -> int:
        if self.symbols is None:
            raise self.error(
                "symbols must be declared before they are used", line, column
            )
        if token not in self.symbols:
            raise self.error(f"symbol {token!r} is not declared", line, column)
        return self.symbols.index(token)

    def parse(self) -> None:
        while self.pos < len(self.lines):
            line, toks = self.lines[self.pos]
            self.pos += 1
            word, column = toks[0]
            if word == "dim":
                self._dim(line, toks)
            elif word == "symbols":
                self._symbols(line, toks)
            elif word == "forbid":
                self._forbid(line, toks)
            elif word in MATRIX_AXES:
                self._matrix(line, toks)
            else:
                raise self.error(f"unknown directive {word!r}", line, column)

    def _dim(self, line: int, toks: List[Tuple[str, int]]) -> None:
        if self.dim is not None:
            raise self.error("dim is declared twice", line)
        if self.patterns or self.matrices:
            raise self.error("dim must come before patterns and matrices", line)
        if len(toks) != 2:
            raise self.error("dim takes exactly one integer", line)
        self.dim = self._int(toks[1][0], line, toks[1][1])

    def _symbols(self, line: int, toks: List[Tuple[str, int]]) -> None:
        if self.symbols is not None:
            raise self.error("symbols are declared twice", line)
        if len(toks) < 2:
            raise self.error("symbols needs at least one name", line)
        seen: List[str] = []
        for token, column in toks[1:]:
            if token in seen:
                raise self.error(f"symbol {token!r} is declared twice", line, column)
            seen.append(token)
        self.symbols = tuple(seen)

    def _strip(self, axis: int, toks: List[Tuple[str, int]], line: int) -> None:
        if not toks:
            raise self.error("forbid needs at least one symbol", line)
        cells = []
        for i, (token, column) in enumerate(toks):
            v = tuple(i if k == axis else 0 for k in range(self.dimension))
            cells.append((v, self._ordinal(token, line, column)))
        self._add(GeneralPattern(cells=tuple(cells)), line)

    def _add(self, pattern: GeneralPattern, line: int) -> None:
        self.patterns.append(pattern)
        self.pattern_lines.append(line)

    def _forbid(self, line: int, toks: List[Tuple[str, int]]) -> None:
        if len(toks) < 2:
            raise self.error("forbid needs a kind: h, v, axis or rect", line)
        kind, column = toks[1]
        if kind in STRIP_AXES:
            axis = STRIP_AXES[kind]
            if axis >= self.dimension:
                raise self.error(
                    f"forbid {kind} needs dimension at least {axis + 1}", line, column
                )
            self._strip(axis, toks[2:], line)
        elif kind == "axis":
            if len(toks) < 3:
                raise self.error("forbid axis needs an axis number", line, column)
            k = self._int(toks[2][0], line, toks[2][1])
            if k > self.dimension:
                raise self.error(
                    f"axis {k} exceeds dimension {self.dimension}", line, toks[2][1]
                )
            self._strip(k - 1, toks[3:], line)
        elif kind == "rect":
            self._rect(line, toks)
        else:
            raise self.error(f"unknown forbid kind {kind!r}", line, column)

    def _rect(self, line: int, toks: List[Tuple[str, int]]) -> None:
        if self.dimension != 2:
            raise self.error("forbid rect needs dimension 2", line, toks[1][1])
        if len(toks) != 4:
            raise self.error("forbid rect takes a width and a height", line, toks[1][1])
        width = self._int(toks[2][0], line, toks[2][1])
        height = self._int(toks[3][0], line, toks[3][1])
        cells = []
        for r in range(height):
            row_line, row = self._next_row(line, f"rect row {r + 1} of {height}")
            if len(row) != width:
                raise self.error(
                    f"rect row has {len(row)} symbols, expected {width}",
                    row_line,
                    row[width][1] if len(row) > width else row[-1][1],
                )
            # rows are listed top row first
            y = height - 1 - r
            for x, (token, column) in enumerate(row):
                cells.append(((x, y), self._ordinal(token, row_line, column)))
        self._add(GeneralPattern(cells=tuple(cells)), line)

    def _next_row(self, line: int, what: str) -> Tuple[int, List[Tuple[str, int]]]:
        if self.pos >= len(self.lines):
            raise self.error(f"file ends before {what}", self.last_line)
        row_line, row = self.lines[self.pos]
        if row[0][0] in DIRECTIVES and row[0][0] not in (self.symbols or ()):
            raise self.error(f"expected {what}, got directive {row[0][0]!r}", row_line)
        self.pos += 1
        return row_line, row

    def _matrix(self, line: int, toks: List[Tuple[str, int]]) -> None:
        word = toks[0][0]
        axis = MATRIX_AXES[word]
        if len(toks) != 1:
            raise self.error(f"{word} takes no arguments", line, toks[1][1])
        if self.dimension != 2:
            raise self.error(f"{word} needs dimension 2", line)
        if self.symbols is None:
            raise self.error(f"symbols must be declared before {word}", line)
        if axis in self.matrices:
            raise self.error(f"{word} is declared twice", line)
        n = len(self.symbols)
        rows = []
        for r in range(n):
            row_line, row = self._next_row(line, f"{word} row {r + 1} of {n}")
            if len(row) != n:
                column = row[n][1] if len(row) > n else row[-1][1]
                raise self.error(
                    f"{word} row has {len(row)} entries, expected {n}", row_line, column
                )
            for token, column in row:
                if token not in ("0", "1"):
                    raise self.error(
                        f"matrix entries must be 0 or 1, got {token!r}",
                        row_line,
                        column,
                    )
            rows.append([int(token) for token, _ in row])
        self.matrices[axis] = (np.array(rows, dtype=np.int64), line)

    def _graph(self) -> Optional[MultiGraph]:
        if not self.matrices:
            return None
        assert self.symbols is not None
        for word, axis in MATRIX_AXES.items():
            if axis not in self.matrices:
                raise self.error(f"{word} is missing", self.last_line)
        return MultiGraph.from_matrices(
            self.symbols, [self.matrices[k][0] for k in sorted(self.matrices)]
        )

    def _check_consistent(self, spec: ShiftSpec, graph: MultiGraph) -> None:
        for pattern, line in zip(spec.forbidden, self.pattern_lines):
            if pattern.domino_axis() is None:
                raise self.error(
                    "only dominoes can be combined with hmatrix and vmatrix", line
                )
        derived = graph_from_one_step(spec)
        for word, axis in MATRIX_AXES.items():
            diff = np.argwhere(derived.matrix(axis) != graph.matrix(axis))
            if len(diff):
                a, b = (int(i) for i in diff[0])
                raise self.error(
                    f"{word} entry ({spec.alphabet.name(a)}, {spec.alphabet.name(b)}) "
                    f"is {graph.matrix(axis)[a, b]} but the forbidden patterns give "
                    f"{derived.matrix(axis)[a, b]}",
                    self.matrices[axis][1],
                )

    def result(self, text: str) -> SpecFile:
        if self.symbols is None:
            raise self.error("no symbols declared", self.last_line)
        alphabet = Alphabet(symbols=self.symbols)
        # Repeated patterns are dropped, first occurrence wins
        unique: Dict[GeneralPattern, int] = {}
        for pattern, line in zip(self.patterns, self.pattern_lines):
            unique.setdefault(pattern, line)
        self.patterns = list(unique)
        self.pattern_lines = list(unique.values())
        spec = ShiftSpec(
            dimension=self.dimension, alphabet=alphabet, forbidden=tuple(self.patterns)
        )
        graph = self._graph()
        if graph is not None and self.patterns:
            self._check_consistent(spec, graph)
        elif graph is not None:
            spec = spec_from_graph(graph)
        elif is_one_step(spec):
            graph = graph_from_one_step(spec)
        return SpecFile(
            path=self.path,
            spec=spec,
            graph=graph,
            patterns_declared=bool(self.patterns),
            matrices_declared=bool(self.matrices),
            digest=blake2b(text.encode(), digest_size=16).hexdigest(),
        )


def parse_spec(text: str, path: Optional[str] = None) -> SpecFile:
    parser = _Parser(text, path)
    parser.parse()
    spec_file = parser.result(text)
    logger.debug(
        "Parsed %s: %d symbols, %d patterns, graph=%s",
        path or "<spec>",
        len(spec_file.spec.alphabet),
        len(spec_file.spec.forbidden),
        spec_file.graph is not None,
    )
    return spec_file


def load_spec_file(path: Union[str, Path]) -> SpecFile:
    path = Path(path)
    with open(path, encoding="utf-8") as fd:
        return parse_spec(fd.read(), path=str(path))


def _format_pattern(pattern: GeneralPattern, spec: ShiftSpec) -> List[str]:
    names = spec.alphabet.symbols
    long_axes = [k for k, e in enumerate(pattern.extents) if e > 1]
    if pattern.is_rectangular() and len(long_axes) <= 1:
        axis = long_axes[0] if long_axes else 0
        kind = {0: "h", 1: "v"}.get(axis, f"axis {axis + 1}")
        return [f"forbid {kind} " + " ".join(names[s] for s in pattern.symbols)]
    if pattern.is_rectangular() and pattern.dimension == 2:
        width, height = pattern.extents
        placed = dict(pattern.cells)
        lines = [f"forbid rect {width} {height}"]
        for y in reversed(range(height)):
            lines.append(" ".join(names[placed[(x, y)]] for x in range(width)))
        return lines
    raise SpecificationError(
        f"pattern {pattern.cells} is neither a strip nor a planar rectangle"
    )


def format_spec(spec_file: SpecFile) -> str:
    """Text that parse_spec reads back to the same spec and graph"""
    spec = spec_file.spec
    lines = [f"dim {spec.dimension}", "symbols " + " ".join(spec.alphabet.symbols)]
    if not spec_file.matrices_declared or spec_file.patterns_declared:
        for pattern in spec.forbidden:
            lines.extend(_format_pattern(pattern, spec))
    if spec_file.matrices_declared and spec_file.graph is not None:
        for word, axis in MATRIX_AXES.items():
            lines.append(word)
            lines.extend(
                " ".join(str(v) for v in row) for row in spec_file.graph.axes[axis]
            )
    return "\n".join(lines) + "\n"


###############################################################################
#                          Rendering and serialization                        #
###############################################################################


def render_ascii(cells: CellArray, alphabet: Optional[Alphabet] = None) -> str:
    """Rows top to bottom, symbols separated by single spaces"""
    if cells.dimension > 2:
        raise UnsupportedDimensionError(
            f"cannot render {cells.dimension}-dimensional cells as text"
        )

    def name(c: Any) -> str:
        return alphabet.name(int(c)) if alphabet is not None else str(int(c))

    arr = cells.as_array()
    if cells.dimension == 1:
        return " ".join(name(c) for c in arr)
    return "\n".join(
        " ".join(name(c) for c in arr[:, y]) for y in reversed(range(arr.shape[1]))
    )


def canonical_json(report: Report, include_timing: bool = True) -> str:
    data = report.model_dump()
    if not include_timing:
        data.pop("timing", None)
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _cells_json(cells: CellArray, labels: Sequence[str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {"extents": list(cells.shape)}
    if cells.dimension <= 2:
        out["rows"] = render_ascii(cells, Alphabet(symbols=tuple(labels))).splitlines()
    else:
        out["cells"] = [labels[c] for c in cells.cells]
    return out


def _matrix_json(m: Sequence[Sequence[int]]) -> List[List[int]]:
    return [[int(v) for v in row] for row in m]


def _verdict_json(v: Verdict, labels: Sequence[str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {"status": str(v.status), "criterion": v.criterion}
    if v.reason is not None:
        out["reason"] = v.reason
    if v.certificate is not None:
        out["certificate"] = v.certificate
    if v.witness is not None:
        out["witness"] = _cells_json(v.witness, labels)
    return out


def _oracle_json(o: OracleVerdict, labels: Sequence[str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {"status": str(o.status)}
    if o.detail is not None:
        out["detail"] = o.detail
    if o.certificate_size is not None:
        out["certificate_size"] = o.certificate_size
    if o.witness is not None:
        out["witness"] = _cells_json(o.witness, labels)
    return out


def _products_json(p: ProductReport) -> Dict[str, Any]:
    return {
        "hv": _matrix_json(p.hv),
        "vh": _matrix_json(p.vh),
        "hvt": _matrix_json(p.hvt),
        "vth": _matrix_json(p.vth),
        "pruned_hv": _matrix_json(p.pruned_hv),
        "pruned_vh": _matrix_json(p.pruned_vh),
    }


def _triomino_json(t: Triomino, labels: Sequence[str]) -> Dict[str, str]:
    a, b, c = (labels[s] for s in t.cells)
    return {"kind": str(t.kind), "a": a, "b": b, "c": c}


def _epairs_json(tables: EPairTables, labels: Sequence[str]) -> Dict[str, Any]:
    return {
        "a1": [_triomino_json(t, labels) for t in tables.a1],
        "a2": [_triomino_json(t, labels) for t in tables.a2],
        "m": _matrix_json(tables.m_matrix),
        "n": _matrix_json(tables.n_matrix),
        "pairs": [[i, j] for i, j in tables.epair],
    }


def _periodicity_json(
    p: HorizontalPeriodicity, labels: Sequence[str]
) -> Dict[str, Any]:
    out: Dict[str, Any] = {"exists": p.exists, "rows": p.rows}
    if p.witness is not None:
        out["witness"] = _cells_json(p.witness, labels)
    return out


def _analysis_json(a: GraphAnalysis) -> Dict[str, Any]:
    components = []
    for c in a.components:
        labels = c.vertex_labels
        entry: Dict[str, Any] = {
            "vertices": list(labels),
            "products": _products_json(c.products),
            "epairs": _epairs_json(c.epairs, labels),
            "verdicts": [_verdict_json(v, labels) for v in c.verdicts],
            "conclusion": _verdict_json(c.conclusion, labels),
            "oracle_agrees": c.oracle_agrees,
        }
        if c.oracle is not None:
            entry["oracle"] = _oracle_json(c.oracle, labels)
        components.append(entry)
    # The overall witness, if any, comes from the first non-empty component
    overall_labels = next(
        (
            c.vertex_labels
            for c in a.components
            if c.conclusion.status == VerdictStatus.nonempty
        ),
        a.trimmed_labels,
    )
    return {
        "trimmed_vertices": list(a.trimmed_labels),
        "overall": _verdict_json(a.overall, overall_labels),
        "components": components,
        "disagreements": [list(labels) for labels in a.disagreements],
        "notes": list(a.notes),
    }


###############################################################################
#                                 Commands                                    #
###############################################################################

CommandResult = Tuple[str, Dict[str, Any]]


def _graph_of(spec_file: SpecFile, options: CommandOptions) -> MultiGraph:
    if options.window is not None:
        graph, coding = one_step_graph_for_sft(
            spec_file.spec, options.window, options.budget
        )
        logger.debug(
            "Recoded with window %s into %d block symbols",
            options.window,
            len(coding.block_symbols),
        )
        return graph
    if spec_file.graph is None:
        raise SpecificationError(
            "the spec is not one-step; pass --window to recode it first"
        )
    return spec_file.graph


def _analyze(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    graph = _graph_of(spec_file, options)
    result = analyze(graph, options.budget, options.oracle_depth)
    return str(result.overall.status), {"analysis": _analysis_json(result)}


def _nonempty(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    graph = _graph_of(spec_file, options)
    result = analyze(graph, options.budget, options.oracle_depth)
    payload = _analysis_json(result)
    verdicts = [payload["overall"]]
    for c in result.components:
        entry = _verdict_json(c.conclusion, c.vertex_labels)
        entry["component"] = list(c.vertex_labels)
        verdicts.append(entry)
    return str(result.overall.status), {"verdicts": verdicts}


def _finite(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    graph = _graph_of(spec_file, options)
    verdict = mn_finiteness_test(graph)
    return str(verdict.status), {
        "verdicts": [_verdict_json(verdict, graph.vertex_labels)]
    }


def _epairs(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    trimmed = trim(_graph_of(spec_file, options))
    tables = _epairs_json(build_epair_tables(trimmed), trimmed.vertex_labels)
    tables["vertices"] = list(trimmed.vertex_labels)
    return "Ok", {"products": _products_json(products(trimmed)), "epairs": tables}


def _higher_block(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    if options.window is None:
        raise SpecificationError("higher-block needs --window")
    base = spec_file.spec
    recoded, coding = higher_block_spec(base, options.window, options.budget)
    graph = graph_from_one_step(recoded)
    labels = base.alphabet.symbols
    return "Ok", {
        "higher_block": {
            "window": list(coding.window),
            "symbols": len(coding.block_symbols),
            "blocks": [
                dict(_cells_json(b, labels), symbol=recoded.alphabet.name(i))
                for i, b in enumerate(coding.block_symbols)
            ],
            "forbidden_dominoes": len(recoded.forbidden),
            "matrices": [_matrix_json(m) for m in graph.axes],
        }
    }


def _periodic(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    if options.period is None:
        raise SpecificationError("periodic needs --period")
    graph = _graph_of(spec_file, options)
    period = options.period
    if len(period) != graph.dimension:
        raise SpecificationError(
            f"--period takes {graph.dimension} values, got {len(period)}"
        )
    labels = graph.vertex_labels
    found = torus_search(graph, period, options.budget, limit=1)
    payload: Dict[str, Any] = {"periods": list(period), "exists": bool(found)}
    if found:
        payload["witness"] = _cells_json(found[0], labels)
    if graph.dimension == 2:
        payload["horizontal"] = _periodicity_json(
            horizontal_periodic_exists(graph, period[0], options.budget), labels
        )
        payload["vertical"] = _periodicity_json(
            vertical_periodic_exists(graph, period[1], options.budget), labels
        )
    return ("Found" if found else "NotFound"), {"periodicity": payload}


def _oracle(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    graph = _graph_of(spec_file, options)
    labels = graph.vertex_labels
    if options.torus is None:
        verdict = bounded_emptiness(graph, options.max_n, options.budget)
        return str(verdict.status), {"oracle": _oracle_json(verdict, labels)}
    tori = torus_search(graph, options.torus, options.budget, limit=options.limit)
    return ("Found" if tori else "NotFound"), {
        "oracle": {
            "periods": list(options.torus),
            "count": len(tori),
            "limited": options.limit is not None and len(tori) >= options.limit,
            "tori": [_cells_json(t, labels) for t in tori],
        }
    }


def _growth(spec_file: SpecFile, options: CommandOptions) -> CommandResult:
    series = block_growth(_graph_of(spec_file, options), options.max_n, options.budget)
    return ("Unknown" if series.truncated else "Ok"), {
        "growth": {
            "counts": list(series.counts),
            "truncated": series.truncated,
            "strictly_increasing": series.strictly_increasing,
        }
    }


COMMANDS: Dict[str, Callable[[SpecFile, CommandOptions], CommandResult]] = {
    "analyze": _analyze,
    "nonempty": _nonempty,
    "finite": _finite,
    "epairs": _epairs,
    "higher-block": _higher_block,
    "periodic": _periodic,
    "oracle": _oracle,
    "growth": _growth,
}


def run_command(
    command: str, spec_file: SpecFile, options: Optional[CommandOptions] = None
) -> Tuple[Report, int]:
    """Run one command; exit code 0 is definitive and 2 is undecided

    Errors in the input propagate as ValueError for the caller to map to
    exit code 1.
    """
    options = options or CommandOptions()
    if command not in COMMANDS:
        raise SpecificationError(
            f"unknown command {command!r}, choose one of {', '.join(COMMANDS)}"
        )
    digest = spec_file.digest or blake2b(
        spec_file.model_dump_json().encode(), digest_size=16
    ).hexdigest()
    start = time.perf_counter()
    try:
        status, payload = COMMANDS[command](spec_file, options)
    except BudgetExceeded as e:
        logger.debug("%s stopped on its budget: %s", command, e)
        status = "Unknown"
        payload = {"error": f"budget exhausted: {e} (progress {e.progress})"}
    code = EXIT_UNDECIDED if status in UNDECIDED else EXIT_DEFINITIVE
    fields: Dict[str, Any] = dict(
        tool_version=__version__,
        command=command,
        input_digest=digest,
        status=status,
        exit_code=code,
        **payload,
    )
    if options.include_timing:
        fields["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return Report(**fields), code


###############################################################################
#                               Entry point                                   #
###############################################################################


def build_parser() -> argparse.ArgumentParser:
    defaults = SearchBudget()
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description=(
            "Decide non-emptiness, finiteness and periodicity of shifts of "
            "finite type given by forbidden patterns or adjacency matrices"
        ),
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("spec", type=Path, help="Spec file to analyze")
    parser.add_argument(
        "--json",
        dest="json_path",
        type=Path,
        default=None,
        help="Also write the report to this path",
    )
    parser.add_argument("--max-cells", type=int, default=defaults.max_cells)
    parser.add_argument("--max-nodes", type=int, default=defaults.max_nodes)
    parser.add_argument(
        "--max-symbols",
        type=int,
        default=defaults.max_symbols,
        help="Cap on block alphabets and periodic row sets",
    )
    parser.add_argument(
        "--window",
        type=int,
        nargs="+",
        metavar="N",
        help="Recode the spec with this window before running the command",
    )
    parser.add_argument("--period", type=int, nargs="+", metavar="P")
    parser.add_argument("--torus", type=int, nargs="+", metavar="P")
    parser.add_argument(
        "--max",
        dest="max_n",
        type=int,
        default=6,
        help="Largest block size for growth and the standalone oracle",
    )
    parser.add_argument("--limit", type=int, default=None, help="Cap on listed tori")
    parser.add_argument(
        "--oracle-depth",
        type=int,
        default=4,
        help="Largest block size the oracle tries inside analyze",
    )
    parser.add_argument(
        "--no-timing", action="store_true", help="Leave timing out of the report"
    )
    parser.add_argument("--debug", action="store_true", help="Show verbose output")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_DEFINITIVE if e.code == 0 else EXIT_ERROR
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        spec_file = load_spec_file(args.spec)
        options = CommandOptions(
            budget=SearchBudget(
                max_cells=args.max_cells,
                max_nodes=args.max_nodes,
                max_symbols=args.max_symbols,
            ),
            window=args.window,
            period=args.period,
            torus=args.torus,
            max_n=args.max_n,
            limit=args.limit,
            oracle_depth=args.oracle_depth,
            include_timing=not args.no_timing,
        )
        report, code = run_command(args.command, spec_file, options)
    except (OSError, ValueError) as e:
        print(f"shiftlab: error: {e}", file=sys.stderr)
        return EXIT_ERROR

    text = canonical_json(report)
    sys.stdout.write(text)
    if args.json_path is not None:
        with open(args.json_path, "wt", encoding="utf-8") as fd:
            fd.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
