"""Datasets of discrete mastery states and their sufficient statistics.

A :class:`MasteryDataset` holds one row per student, one column per knowledge
component, every cell a discrete state in ``0..cardinality-1``. Contingency
tables over (child, parents) are the only statistic the scoring and fitting
code ever needs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, SchemaError


@dataclass(frozen=True)
class Variable:
    """A named knowledge component with a finite number of discrete states."""

    name: str
    cardinality: int = 2

    def __post_init__(self) -> None:
        if self.cardinality < 2:
            raise SchemaError(
                f"variable {self.name!r}: cardinality must be >= 2, got {self.cardinality}"
            )


@dataclass(frozen=True)
class PerformanceRecord:
    """One graded interaction: a student's score on one knowledge component."""

    student_id: str
    component_name: str
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise DataError(
                f"score for ({self.student_id}, {self.component_name}) "
                f"outside [0, 1]: {self.score}"
            )


class MasteryDataset:
    """Complete-case table of per-student discrete mastery states.

    Rows are immutable after construction; the underlying array is marked
    read-only so datasets can be shared across concurrent workers.
    """

    def __init__(
        self,
        variables: list[Variable] | tuple[Variable, ...],
        rows: np.ndarray | list[list[int]],
        meta: dict | None = None,
    ) -> None:
        self.variables: tuple[Variable, ...] = tuple(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate variable names: {names}")
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != len(self.variables):
            raise SchemaError(
                f"rows must be N x {len(self.variables)}, got shape {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise DataError("N >= 1 violated: dataset has no rows")
        for i, var in enumerate(self.variables):
            col = arr[:, i]
            if col.min() < 0 or col.max() >= var.cardinality:
                bad = int(np.argmax((col < 0) | (col >= var.cardinality)))
                raise DataError(
                    f"value {int(col[bad])} in row {bad} outside states "
                    f"0..{var.cardinality - 1} of variable {var.name!r}"
                )
        arr.flags.writeable = False
        self.rows = arr
        self.meta = dict(meta or {})
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def n_records(self) -> int:
        return int(self.rows.shape[0])

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def variable(self, name: str) -> Variable:
        return self.variables[self.index_of(name)]

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(
                f"unknown variable {name!r}; dataset has {self.names}"
            ) from None

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.index_of(name)]

    def replace_column(self, name: str, values: np.ndarray) -> "MasteryDataset":
        """Return a copy with one column swapped (used by placebo refutation)."""
        arr = self.rows.copy()
        arr[:, self.index_of(name)] = values
        return MasteryDataset(self.variables, arr, meta=self.meta)

    def subsample(self, indices: np.ndarray) -> "MasteryDataset":
        """Return a bootstrap-style row resample (with repeats allowed)."""
        return MasteryDataset(self.variables, self.rows[indices], meta=self.meta)

    def __repr__(self) -> str:
        return f"MasteryDataset({self.n_records} rows x {len(self.variables)} vars)"


@dataclass
class ContingencyTable:
    """Counts N[j, k] of child state k under parent configuration j.

    Parent configurations use mixed-radix encoding in the given parent order,
    first parent most significant; q = product of parent cardinalities.
    """

    child: Variable
    parents: tuple[Variable, ...]
    counts: np.ndarray  # shape (q, r_child)

    @property
    def n_configs(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def parent_config_index(states: tuple[int, ...], cards: tuple[int, ...]) -> int:
    """Mixed-radix encode parent states, first parent most significant."""
    j = 0
    for s, r in zip(states, cards):
        j = j * r + s
    return j


def decode_parent_config(j: int, cards: tuple[int, ...]) -> tuple[int, ...]:
    """Inverse of :func:`parent_config_index`."""
    states = [0] * len(cards)
    for i in range(len(cards) - 1, -1, -1):
        states[i] = j % cards[i]
        j //= cards[i]
    return tuple(states)


def config_codes(data: MasteryDataset, parents: list[str]) -> tuple[np.ndarray, int]:
    """Per-row mixed-radix configuration codes for the given parent order."""
    codes = np.zeros(data.n_records, dtype=np.int64)
    q = 1
    for name in parents:
        r = data.variable(name).cardinality
        codes = codes * r + data.column(name)
        q *= r
    return codes, q


def contingency(
    data: MasteryDataset, child: str, parents: list[str] | tuple[str, ...] = ()
) -> ContingencyTable:
    """Tally N[j, k] for one child and an ordered parent list."""
    parents = list(parents)
    if child in parents:
        raise SchemaError(f"child {child!r} listed among its own parents")
    child_var = data.variable(child)
    parent_vars = tuple(data.variable(p) for p in parents)
    codes, q = config_codes(data, parents)
    r = child_var.cardinality
    flat = np.bincount(codes * r + data.column(child), minlength=q * r)
    return ContingencyTable(child_var, parent_vars, flat.reshape(q, r))


def load_mastery_csv(
    path: str | Path, schema: dict[str, int] | None = None
) -> MasteryDataset:
    """Read a mastery CSV (header = variable names, cells = state integers).

    Cardinalities come from ``schema`` when given, otherwise are inferred as
    max observed value + 1, clamped to >= 2.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header: {header}")
        raw_rows: list[list[int]] = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue  # trailing blank line
            if len(cells) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
                )
            row = []
            for col, cell in zip(header, cells):
                text = cell.strip()
                if not text.isdigit():
                    raise DataError(
                        f"{path}:{lineno}: column {col!r}: "
                        f"not a non-negative integer: {cell!r}"
                    )
                row.append(int(text))
            raw_rows.append(row)
    if not raw_rows:
        raise DataError(f"{path}: N >= 1 violated: header present but no data rows")

    arr = np.asarray(raw_rows, dtype=np.int64)
    variables = []
    for i, name in enumerate(header):
        if schema and name in schema:
            card = schema[name]
        else:
            card = max(int(arr[:, i].max()) + 1, 2)
        variables.append(Variable(name, card))
    if schema:
        unknown = sorted(set(schema) - set(header))
        if unknown:
            raise SchemaError(f"{path}: schema names absent from header: {unknown}")
    return MasteryDataset(variables, arr)


def save_mastery_csv(data: MasteryDataset, path: str | Path) -> None:
    """Write the dataset in the same CSV layout `load_mastery_csv` reads."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        writer.writerows(data.rows.tolist())


@dataclass
class TransformResult:
    """Binarized mastery dataset plus the students dropped as incomplete."""

    dataset: MasteryDataset
    dropped_students: list[str] = field(default_factory=list)


def transform_performance(
    records: list[PerformanceRecord], threshold: float = 0.6
) -> TransformResult:
    """Collapse graded records into a binary mastery dataset.

    A student's cell for a component is 1 iff the mean score over that
    student's records for the component is >= threshold. Students missing any
    component are dropped and listed in the result. Output ordering is sorted
    (components, then students) so it depends only on per-pair score means.
    """
    if not 0.0 < threshold < 1.0:
        raise SchemaError(f"threshold must lie in (0, 1), got {threshold}")
    if not records:
        raise DataError("no performance records supplied")

    components = sorted({r.component_name for r in records})
    sums: dict[tuple[str, str], float] = {}
    counts: dict[tuple[str, str], int] = {}
    for rec in records:
        key = (rec.student_id, rec.component_name)
        sums[key] = sums.get(key, 0.0) + rec.score
        counts[key] = counts.get(key, 0) + 1

    students = sorted({r.student_id for r in records})
    rows: list[list[int]] = []
    kept: list[str] = []
    dropped: list[str] = []
    for student in students:
        if all((student, c) in counts for c in components):
            row = [
                1 if sums[(student, c)] / counts[(student, c)] >= threshold else 0
                for c in components
            ]
            rows.append(row)
            kept.append(student)
        else:
            dropped.append(student)
    if not rows:
        raise DataError(
            "no student has records for every component; all "
            f"{len(dropped)} students dropped"
        )
    variables = [Variable(c, 2) for c in components]
    dataset = MasteryDataset(
        variables, rows, meta={"students": kept, "threshold": threshold}
    )
    return TransformResult(dataset, dropped)
