"""Consumer shopping behavior as a finite Markov chain.

Fifteen states grouped into six stages of a shopping trip (preparation,
list support, purchase influence, label attention, item comparison,
sharing).  A shopper's habits are a labeled row-stochastic transition
matrix; adopting the assistant is modeled as a named set of whole-row
overrides.  Long-run behavior before and after adoption is compared via
stationary distributions computed by power iteration.

The matrix machinery is generic over the label set and matrix size so
small chains can be used in tests; the 15 behavior states are the shipped
vocabulary.
"""

from __future__ import annotations

import math
import re
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import networkx as nx
import numpy as np

from greenbasket.errors import ConfigError, GreenBasketError, ValidationError

#: Row sums must match 1 within this absolute tolerance.
ROW_SUM_TOL = 1e-9

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 100_000


class MacroState(str, Enum):
    """The six stages a shopping trip cycles through."""

    PREPARATION = "Preparation"
    SUPPORT = "Support"
    INFLUENCE_ON_PURCHASES = "InfluenceOnPurchases"
    PURCHASE_ATTENTION = "PurchaseAttention"
    ITEM_COMPARISON = "ItemComparison"
    SHARING = "Sharing"


class BehaviorState(Enum):
    """The fifteen behavior states, each belonging to one macro stage."""

    S1 = (MacroState.PREPARATION, "plans the trip with a shopping list")
    S2 = (MacroState.PREPARATION, "shops without a list")
    S3 = (MacroState.SUPPORT, "builds the list in the footprint assistant")
    S4 = (MacroState.SUPPORT, "builds the list in a generic checklist app")
    S5 = (MacroState.SUPPORT, "builds the list on paper")
    S6 = (MacroState.INFLUENCE_ON_PURCHASES, "swayed by community recommendations of low-impact products")
    S7 = (MacroState.INFLUENCE_ON_PURCHASES, "buys the usual products out of habit")
    S8 = (MacroState.INFLUENCE_ON_PURCHASES, "swayed by other influences")
    S9 = (MacroState.PURCHASE_ATTENTION, "reads product labels")
    S10 = (MacroState.PURCHASE_ATTENTION, "skips product labels")
    S11 = (MacroState.ITEM_COMPARISON, "compares items on price")
    S12 = (MacroState.ITEM_COMPARISON, "compares items on environmental impact")
    S13 = (MacroState.ITEM_COMPARISON, "compares items on other attributes")
    S14 = (MacroState.SHARING, "shares low-impact recommendations with the community")
    S15 = (MacroState.SHARING, "keeps recommendations to themselves")

    def __init__(self, macro_state: MacroState, description: str):
        self.macro_state = macro_state
        self.description = description


#: Canonical label order for behavior matrices.
BEHAVIOR_LABELS: tuple[str, ...] = tuple(s.name for s in BehaviorState)


@dataclass(frozen=True)
class MatrixViolation:
    """One problem found while validating a candidate matrix."""

    row: str | None      # row label, or None for matrix-level problems
    column: str | None   # column label for entry-level problems
    reason: str

    def __str__(self) -> str:
        where = ""
        if self.row is not None:
            where = f"row {self.row}"
            if self.column is not None:
                where += f", column {self.column}"
            where += ": "
        return where + self.reason


class MatrixValidationError(GreenBasketError):
    """Candidate matrix is not row-stochastic; carries every violation found."""

    code = "matrix_invalid"

    def __init__(self, violations: Iterable[MatrixViolation]):
        self.violations = tuple(violations)
        summary = "; ".join(str(v) for v in self.violations[:8])
        if len(self.violations) > 8:
            summary += f"; ... ({len(self.violations)} violations total)"
        super().__init__(f"invalid transition matrix: {summary}")


class ChainStructureError(GreenBasketError):
    """The chain is reducible or periodic, so no unique limit exists."""

    def __init__(self, message: str, *, code: str, states: tuple[str, ...] = ()):
        super().__init__(message)
        self.code = code
        self.states = states


class ConvergenceError(GreenBasketError):
    """Power iteration did not converge within the iteration budget."""

    code = "chain_no_convergence"

    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """A validated labeled row-stochastic matrix.

    Construct through :func:`validate_matrix`; ``rows`` is a read-only
    numpy array, so instances are safe to share between threads.
    """

    labels: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        self.rows.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown state label {label!r}", field="label") from None

    def probability(self, source: str, target: str) -> float:
        return float(self.rows[self.index(source), self.index(target)])


def validate_matrix(rows, labels: Sequence[str]) -> TransitionMatrix:
    """Validate a candidate matrix, reporting every violation at once.

    Checks: square shape matching the label count, unique non-empty labels,
    finite entries in [0, 1], and row sums equal to 1 within ROW_SUM_TOL.
    """
    violations: list[MatrixViolation] = []
    labels = tuple(str(l) for l in labels)
    if not labels:
        raise MatrixValidationError([MatrixViolation(None, None, "no state labels given")])
    seen: set[str] = set()
    for label in labels:
        if not label:
            violations.append(MatrixViolation(None, None, "empty state label"))
        elif label in seen:
            violations.append(MatrixViolation(None, None, f"duplicate state label {label!r}"))
        seen.add(label)

    try:
        array = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixValidationError(
            [MatrixViolation(None, None, f"entries are not numeric: {exc}")]
        ) from None
    n = len(labels)
    if array.ndim != 2 or array.shape != (n, n):
        violations.append(
            MatrixViolation(
                None, None,
                f"expected a {n}x{n} matrix for {n} labels, got shape {array.shape}",
            )
        )
        raise MatrixValidationError(violations)

    for i, label in enumerate(labels):
        row = array[i]
        for j, value in enumerate(row):
            if not math.isfinite(value):
                violations.append(MatrixViolation(label, labels[j], f"entry is {value}"))
            elif value < 0:
                violations.append(MatrixViolation(label, labels[j], f"negative entry {value}"))
            elif value > 1:
                violations.append(MatrixViolation(label, labels[j], f"entry {value} exceeds 1"))
        total = float(row.sum())
        if math.isfinite(total) and abs(total - 1.0) > ROW_SUM_TOL:
            violations.append(MatrixViolation(label, None, f"row sums to {total!r}, not 1"))

    if violations:
        raise MatrixValidationError(violations)
    return TransitionMatrix(labels=labels, rows=array.copy())


@dataclass(frozen=True)
class AdoptionTransform:
    """Named whole-row overrides modeling a change in shopping behavior."""

    name: str
    row_overrides: Mapping[str, tuple[float, ...]]

    def __post_init__(self):
        if not self.name:
            raise ValidationError("transform name must not be empty", field="name")
        frozen: dict[str, tuple[float, ...]] = {}
        for label, row in dict(self.row_overrides).items():
            row = tuple(float(v) for v in row)
            for value in row:
                if not math.isfinite(value) or value < 0 or value > 1:
                    raise ValidationError(
                        f"override row {label!r} has entry {value!r} outside [0, 1]",
                        field=label,
                    )
            if abs(sum(row) - 1.0) > ROW_SUM_TOL:
                raise ValidationError(
                    f"override row {label!r} sums to {sum(row)!r}, not 1",
                    field=label,
                )
            frozen[label] = row
        object.__setattr__(self, "row_overrides", frozen)


def apply_transform(base: TransitionMatrix, transform: AdoptionTransform) -> TransitionMatrix:
    """Replace whole rows named by the transform; all other rows are copied.

    Overrides are validated against the base's labels and size before any
    result is produced, and the combined matrix is re-validated.
    """
    n = base.size
    for label, row in transform.row_overrides.items():
        if label not in base.labels:
            raise ValidationError(
                f"transform {transform.name!r} overrides unknown state {label!r}",
                field=label,
            )
        if len(row) != n:
            raise ValidationError(
                f"transform {transform.name!r} row {label!r} has {len(row)} entries, "
                f"expected {n}",
                field=label,
            )
    rows = base.rows.copy()
    for label, row in transform.row_overrides.items():
        rows[base.index(label)] = row
    return validate_matrix(rows, base.labels)


@dataclass(frozen=True)
class StationaryDistribution:
    """Long-run state occupancy of an ergodic chain."""

    probabilities: dict[str, float]
    iterations_used: int
    residual: float

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.probabilities)

    def __getitem__(self, label: str) -> float:
        return self.probabilities[label]


def _positive_digraph(matrix: TransitionMatrix) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(matrix.size))
    rows, cols = np.nonzero(matrix.rows > 0)
    graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
    return graph


def _period(graph: nx.DiGraph) -> int:
    """Period of a strongly connected digraph: gcd of its cycle lengths.

    Standard BFS-level argument: with levels d from any root, the gcd of
    d(u) + 1 - d(v) over all edges (u, v) equals the gcd of cycle lengths.
    """
    root = next(iter(graph.nodes))
    levels = {root: 0}
    queue = deque([root])
    g = 0
    while queue:
        u = queue.popleft()
        for v in graph.successors(u):
            if v not in levels:
                levels[v] = levels[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, levels[u] + 1 - levels[v])
    return abs(g)


def check_ergodic(matrix: TransitionMatrix) -> None:
    """Raise ChainStructureError unless the chain is irreducible and aperiodic."""
    graph = _positive_digraph(matrix)
    components = list(nx.strongly_connected_components(graph))
    if len(components) > 1:
        smallest = min(components, key=lambda c: (len(c), sorted(c)))
        names = tuple(sorted((matrix.labels[i] for i in smallest),
                             key=matrix.labels.index))
        raise ChainStructureError(
            f"chain is reducible: {len(components)} communicating classes; "
            f"one component is {{{', '.join(names)}}}",
            code="chain_reducible",
            states=names,
        )
    period = _period(graph)
    if period != 1:
        raise ChainStructureError(
            f"chain is periodic with period {period}",
            code="chain_periodic",
            states=matrix.labels,
        )


def stationary(
    matrix: TransitionMatrix,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> StationaryDistribution:
    """Stationary distribution by power iteration from the uniform vector.

    Iterates v <- vM, renormalizing each step, until successive iterates
    differ by less than ``tolerance`` in L1 norm.  The chain must be
    irreducible and aperiodic; this is checked structurally up front so
    non-convergence can only mean an exhausted iteration budget.
    """
    if not (isinstance(tolerance, float) and math.isfinite(tolerance) and tolerance > 0):
        raise ValidationError(f"tolerance must be > 0, got {tolerance!r}", field="tolerance")
    if max_iterations < 1:
        raise ValidationError(
            f"max_iterations must be >= 1, got {max_iterations!r}", field="max_iterations"
        )
    check_ergodic(matrix)
    n = matrix.size
    v = np.full(n, 1.0 / n)
    diff = math.inf
    for iteration in range(1, max_iterations + 1):
        nxt = v @ matrix.rows
        nxt /= nxt.sum()
        diff = float(np.abs(nxt - v).sum())
        v = nxt
        if diff < tolerance:
            residual = float(np.abs(v @ matrix.rows - v).sum())
            return StationaryDistribution(
                probabilities=dict(zip(matrix.labels, v.tolist())),
                iterations_used=iteration,
                residual=residual,
            )
    raise ConvergenceError(
        f"no convergence after {max_iterations} iterations (last L1 step {diff:.3e})",
        residual=diff,
        iterations=max_iterations,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Per-state change between two stationary distributions."""

    labels: tuple[str, ...]
    before: dict[str, float]
    after: dict[str, float]
    delta: dict[str, float]
    #: watched state -> True when its probability strictly increased
    increased: dict[str, bool]

    @property
    def all_watched_increased(self) -> bool:
        return all(self.increased.values())


def compare(
    before: StationaryDistribution,
    after: StationaryDistribution,
    watch: Iterable[str] = (),
) -> ComparisonReport:
    """Per-state deltas plus strict-increase flags for the watched states."""
    if set(before.labels) != set(after.labels):
        raise ValidationError(
            "distributions are over different label sets", field="labels"
        )
    labels = before.labels
    watch = tuple(watch)
    unknown = [w for w in watch if w not in before.probabilities]
    if unknown:
        raise ValidationError(f"watched states not in the chain: {unknown}", field="watch")
    delta = {l: after[l] - before[l] for l in labels}
    return ComparisonReport(
        labels=labels,
        before=dict(before.probabilities),
        after={l: after[l] for l in labels},
        delta=delta,
        increased={w: after[w] > before[w] for w in watch},
    )


# --- matrix and transform files ----------------------------------------------
#
# Shared line format; '#' starts a comment, blank lines are ignored.
#
# matrix file:      states: L1 L2 ... Ln          then one "L: n numbers"
#                   line per state, in any order, covering every state.
# transform file:   name: <transform-name>        then states: ... and one
#                   "L: n numbers" line per overridden row.

_ROW_LINE = re.compile(r"^(?P<label>[^:\s]+)\s*:\s*(?P<numbers>.*)$")


def _strip_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_rows(lines, labels: tuple[str, ...], source: str) -> dict[str, list[float]]:
    rows: dict[str, list[float]] = {}
    for lineno, line in lines:
        match = _ROW_LINE.match(line)
        if match is None:
            raise ConfigError(
                f"{source}:{lineno}: expected '<state>: <numbers>', got {line!r}",
                source=source,
            )
        label = match.group("label")
        if label not in labels:
            raise ConfigError(
                f"{source}:{lineno}: unknown state label {label!r}", source=source
            )
        if label in rows:
            raise ConfigError(
                f"{source}:{lineno}: duplicate row for state {label!r}", source=source
            )
        fields = match.group("numbers").split()
        if len(fields) != len(labels):
            raise ConfigError(
                f"{source}:{lineno}: row {label!r} has {len(fields)} entries, "
                f"expected {len(labels)}",
                source=source,
            )
        try:
            rows[label] = [float(f) for f in fields]
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}", source=source) from None
    return rows


def _parse_header(lines, source: str, expect: str) -> tuple[str, object]:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise ConfigError(f"{source}: empty document", source=source) from None
    if not line.startswith(expect + ":"):
        raise ConfigError(
            f"{source}:{lineno}: expected '{expect}: ...', got {line!r}", source=source
        )
    return line[len(expect) + 1:].strip(), lines


def parse_matrix(text: str, source: str = "<string>") -> TransitionMatrix:
    """Parse a matrix document: a states header plus one row line per state."""
    lines = _strip_lines(text)
    header, lines = _parse_header(lines, source, "states")
    labels = tuple(header.split())
    if not labels:
        raise ConfigError(f"{source}: states header lists no labels", source=source)
    rows = _parse_rows(lines, labels, source)
    missing = [l for l in labels if l not in rows]
    if missing:
        raise ConfigError(
            f"{source}: missing rows for states: {', '.join(missing)}", source=source
        )
    return validate_matrix([rows[l] for l in labels], labels)


def parse_transform(text: str, source: str = "<string>") -> AdoptionTransform:
    """Parse a transform document: name and states headers plus override rows."""
    lines = _strip_lines(text)
    name, lines = _parse_header(lines, source, "name")
    if not name:
        raise ConfigError(f"{source}: transform name is empty", source=source)
    header, lines = _parse_header(lines, source, "states")
    labels = tuple(header.split())
    if not labels:
        raise ConfigError(f"{source}: states header lists no labels", source=source)
    rows = _parse_rows(lines, labels, source)
    if not rows:
        raise ConfigError(f"{source}: transform overrides no rows", source=source)
    try:
        return AdoptionTransform(
            name=name, row_overrides={l: tuple(r) for l, r in rows.items()}
        )
    except ValidationError as exc:
        raise ConfigError(f"{source}: {exc}", source=source) from exc


def load_matrix(path: str | Path) -> TransitionMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file: {exc}", source=str(path)) from exc
    return parse_matrix(text, source=str(path))


def load_transform(path: str | Path) -> AdoptionTransform:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read transform file: {exc}", source=str(path)) from exc
    return parse_transform(text, source=str(path))


def format_matrix(matrix: TransitionMatrix, comment: str | None = None) -> str:
    """Render a matrix in the document format accepted by parse_matrix."""
    out = []
    if comment:
        out.extend(f"# {line}" for line in comment.splitlines())
    out.append("states: " + " ".join(matrix.labels))
    width = max(len(l) for l in matrix.labels)
    for i, label in enumerate(matrix.labels):
        numbers = " ".join(f"{v:.6g}" for v in matrix.rows[i])
        out.append(f"{label.ljust(width)}: {numbers}")
    return "\n".join(out) + "\n"
