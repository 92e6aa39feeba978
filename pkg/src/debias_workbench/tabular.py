"""Tabular schema, dataset loading, and subgroup binning.

A dataset is an immutable table whose columns are described by a schema of
variables.  Numeric variables are discretized into subgroups through a bin
spec; categorical variables use their declared category list.  All other
components (metrics, model, augmentation, curation) consume datasets through
this module.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .errors import (
    EmptyDataset,
    IndexOutOfRange,
    InvalidValue,
    MissingBinSpec,
    SchemaMismatch,
    UnknownVariable,
)

Value = Union[float, int, str]

NUMERIC_CONTINUOUS = "numeric-continuous"
NUMERIC_INTEGER = "numeric-integer"
CATEGORICAL = "categorical"
KINDS = (NUMERIC_CONTINUOUS, NUMERIC_INTEGER, CATEGORICAL)

ROLE_PREDICTOR = "predictor"
ROLE_TARGET = "target"
ROLES = (ROLE_PREDICTOR, ROLE_TARGET)

ORIGIN_ORIGINAL = "original"
ORIGIN_GENERATED = "generated"

DEFAULT_BIN_COUNT = 5

# Columns written by exports; silently ignored when a dataset is loaded back.
RESERVED_COLUMNS = ("origin", "base_row_id", "neighbor_row_id", "interpolation_u")


@dataclass(frozen=True)
class BinSpec:
    """Discretization rule for one numeric variable.

    ``equal-width`` and ``quantile`` need ``bin_count``; ``explicit-edges``
    needs ``edges`` (strictly increasing, at least 3 values).
    """

    strategy: str
    bin_count: int | None = None
    edges: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.strategy not in ("equal-width", "quantile", "explicit-edges"):
            raise InvalidValue(f"unknown binning strategy {self.strategy!r}")
        if self.strategy == "explicit-edges":
            if self.edges is None or len(self.edges) < 3:
                raise InvalidValue("explicit-edges requires at least 3 edges")
            object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
            if any(a >= b for a, b in zip(self.edges, self.edges[1:])):
                raise InvalidValue("bin edges must be strictly increasing")
        else:
            if self.edges is not None:
                raise InvalidValue(f"{self.strategy} binning does not take edges")
            if self.bin_count is None or self.bin_count < 2:
                raise InvalidValue("bin_count must be at least 2")


@dataclass(frozen=True)
class VariableSchema:
    """Declaration of one dataset column."""

    name: str
    kind: str
    role: str
    categories: tuple[str, ...] | None = None
    binning: BinSpec | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidValue("variable name must be non-empty")
        if self.kind not in KINDS:
            raise InvalidValue(f"unknown variable kind {self.kind!r}")
        if self.role not in ROLES:
            raise InvalidValue(f"unknown variable role {self.role!r}")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise InvalidValue(f"categorical variable {self.name!r} needs categories")
            object.__setattr__(self, "categories", tuple(self.categories))
            if len(set(self.categories)) != len(self.categories):
                raise InvalidValue(f"duplicate categories on {self.name!r}")
            if self.binning is not None:
                raise InvalidValue(f"categorical variable {self.name!r} cannot be binned")
        else:
            if self.categories is not None:
                raise InvalidValue(f"numeric variable {self.name!r} cannot declare categories")
        if self.role == ROLE_TARGET and self.kind != CATEGORICAL:
            raise InvalidValue(f"target variable {self.name!r} must be categorical")

    @property
    def is_numeric(self) -> bool:
        return self.kind in (NUMERIC_CONTINUOUS, NUMERIC_INTEGER)

    def effective_binning(self) -> BinSpec:
        return self.binning or BinSpec("equal-width", bin_count=DEFAULT_BIN_COUNT)


@dataclass(frozen=True, order=True)
class SubgroupKey:
    """Identifies one subgroup: a category or a bin label of a variable."""

    variable: str
    label: str


def validate_schema(variables: Sequence[VariableSchema]) -> tuple[VariableSchema, ...]:
    """Check cross-variable schema invariants and return the schema tuple."""
    variables = tuple(variables)
    if not variables:
        raise SchemaMismatch("schema declares no variables")
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise SchemaMismatch("duplicate variable names in schema")
    targets = [v for v in variables if v.role == ROLE_TARGET]
    if len(targets) != 1:
        raise SchemaMismatch(f"schema must declare exactly one target variable, found {len(targets)}")
    if len(targets[0].categories or ()) < 2:
        raise SchemaMismatch("target variable needs at least two categories")
    return variables


@dataclass(frozen=True)
class Dataset:
    """Immutable table plus per-row origin tags."""

    id: str
    schema: tuple[VariableSchema, ...]
    rows: tuple[tuple[Value, ...], ...]
    origin: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        validate_schema(self.schema)
        if not self.rows:
            raise EmptyDataset(f"dataset {self.id!r} has no rows")
        if not self.origin:
            object.__setattr__(self, "origin", tuple(ORIGIN_ORIGINAL for _ in self.rows))
        if len(self.origin) != len(self.rows):
            raise SchemaMismatch("origin tags must match row count")

    def index_of(self, variable: str) -> int:
        for i, v in enumerate(self.schema):
            if v.name == variable:
                return i
        raise UnknownVariable(f"dataset has no variable {variable!r}")

    def variable(self, name: str) -> VariableSchema:
        return self.schema[self.index_of(name)]

    @property
    def target(self) -> VariableSchema:
        return next(v for v in self.schema if v.role == ROLE_TARGET)

    @property
    def predictors(self) -> tuple[VariableSchema, ...]:
        return tuple(v for v in self.schema if v.role == ROLE_PREDICTOR)

    def column(self, variable: str) -> list[Value]:
        i = self.index_of(variable)
        return [row[i] for row in self.rows]

    def original_row_ids(self) -> list[int]:
        return [i for i, o in enumerate(self.origin) if o == ORIGIN_ORIGINAL]


# ---------------------------------------------------------------------------
# Binning


def resolve_bin_edges(spec: BinSpec, values: Sequence[float]) -> np.ndarray:
    """Turn a bin spec into concrete edges for the observed values."""
    if spec.strategy == "explicit-edges":
        return np.asarray(spec.edges, dtype=float)
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyDataset("cannot derive bin edges from zero values")
    assert spec.bin_count is not None
    if spec.strategy == "equal-width":
        return np.linspace(arr.min(), arr.max(), spec.bin_count + 1)
    return np.quantile(arr, np.linspace(0.0, 1.0, spec.bin_count + 1))


def assign_bin(edges: np.ndarray, value: float) -> int:
    """Map a value to its bin index: left-closed bins, last bin closed.

    Values outside explicit edges clamp to the terminal bins so that every
    value receives a bin.
    """
    idx = int(np.searchsorted(edges, value, side="right")) - 1
    return max(0, min(idx, len(edges) - 2))


def _format_number(v: float) -> str:
    if math.isfinite(v) and v == int(v):
        return str(int(v))
    return repr(float(v))


def format_bin_label(edges: np.ndarray, index: int) -> str:
    if index < 0 or index > len(edges) - 2:
        raise IndexOutOfRange(f"bin index {index} out of range for {len(edges) - 1} bins")
    lo = _format_number(float(edges[index]))
    hi = _format_number(float(edges[index + 1]))
    closing = "]" if index == len(edges) - 2 else ")"
    return f"[{lo}, {hi}{closing}"


def bin_label(
    spec: BinSpec,
    observed_min: float,
    observed_max: float,
    index: int,
    values: Sequence[float] | None = None,
) -> str:
    """Human-readable half-open interval label for one bin.

    Quantile bins depend on the full value distribution, so ``values`` must be
    supplied for them; the other strategies need only the observed range.
    """
    if spec.strategy == "quantile":
        if values is None:
            raise InvalidValue("quantile bin labels require the observed values")
        edges = resolve_bin_edges(spec, values)
    elif spec.strategy == "equal-width":
        edges = resolve_bin_edges(spec, [observed_min, observed_max])
    else:
        edges = resolve_bin_edges(spec, ())
    return format_bin_label(edges, index)


def subgroups(dataset: Dataset, variable: str) -> list[tuple[SubgroupKey, int]]:
    """Realized subgroups of a variable with their row counts.

    Categorical variables list every declared category (zero counts
    included) in declaration order; numeric variables list bins in edge
    order.  The full partition always covers every row exactly once.
    """
    var = dataset.variable(variable)
    values = dataset.column(variable)
    if var.kind == CATEGORICAL:
        counts = {c: 0 for c in var.categories or ()}
        for v in values:
            counts[v] += 1  # loader guarantees membership
        return [(SubgroupKey(variable, c), n) for c, n in counts.items()]
    if var.binning is None:
        raise MissingBinSpec(f"numeric variable {variable!r} has no bin spec")
    edges = resolve_bin_edges(var.binning, [float(v) for v in values])
    n_bins = len(edges) - 1
    counts_arr = [0] * n_bins
    for v in values:
        counts_arr[assign_bin(edges, float(v))] += 1
    return [
        (SubgroupKey(variable, format_bin_label(edges, i)), counts_arr[i])
        for i in range(n_bins)
    ]


def subgroup_of(dataset: Dataset, variable: str, value: Value) -> SubgroupKey:
    """Subgroup key a single value falls into."""
    var = dataset.variable(variable)
    if var.kind == CATEGORICAL:
        return SubgroupKey(variable, str(value))
    if var.binning is None:
        raise MissingBinSpec(f"numeric variable {variable!r} has no bin spec")
    edges = resolve_bin_edges(var.binning, [float(v) for v in dataset.column(variable)])
    return SubgroupKey(variable, format_bin_label(edges, assign_bin(edges, float(value))))


# ---------------------------------------------------------------------------
# Value parsing / formatting


def parse_value(var: VariableSchema, text: str, where: str) -> Value:
    if text == "":
        raise InvalidValue(f"missing value for {var.name!r} at {where}")
    if var.kind == CATEGORICAL:
        if text not in (var.categories or ()):
            raise InvalidValue(
                f"value {text!r} for {var.name!r} at {where} is not a declared category"
            )
        return text
    try:
        num = float(text)
    except ValueError:
        raise InvalidValue(f"value {text!r} for {var.name!r} at {where} is not numeric") from None
    if not math.isfinite(num):
        raise InvalidValue(f"value {text!r} for {var.name!r} at {where} is not finite")
    if var.kind == NUMERIC_INTEGER:
        if num != int(num):
            raise InvalidValue(f"value {text!r} for {var.name!r} at {where} is not an integer")
        return int(num)
    return num


def format_value(var: VariableSchema, value: Value) -> str:
    if var.kind == CATEGORICAL:
        return str(value)
    if var.kind == NUMERIC_INTEGER:
        return str(int(value))
    return repr(float(value))


def check_value(var: VariableSchema, value: Value) -> Value:
    """Validate an in-memory (already typed) value against its variable."""
    if var.kind == CATEGORICAL:
        if not isinstance(value, str) or value not in (var.categories or ()):
            raise InvalidValue(f"{value!r} is not a declared category of {var.name!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidValue(f"{value!r} is not numeric for {var.name!r}")
    if not math.isfinite(float(value)):
        raise InvalidValue(f"{value!r} is not finite for {var.name!r}")
    if var.kind == NUMERIC_INTEGER:
        if float(value) != int(value):
            raise InvalidValue(f"{value!r} is not an integer for {var.name!r}")
        return int(value)
    return float(value)


# ---------------------------------------------------------------------------
# Schema JSON


def schema_from_json(doc: str | bytes | list[dict[str, Any]]) -> tuple[VariableSchema, ...]:
    """Parse a schema document: a JSON array of variable declarations."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InvalidValue(f"schema is not valid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise SchemaMismatch("schema document must be a JSON array of variables")
    out = []
    for entry in doc:
        if not isinstance(entry, dict):
            raise SchemaMismatch("each schema entry must be a JSON object")
        unknown = set(entry) - {"name", "kind", "role", "categories", "binning"}
        if unknown:
            raise SchemaMismatch(f"unknown schema fields: {sorted(unknown)}")
        binning = None
        if entry.get("binning") is not None:
            b = entry["binning"]
            if not isinstance(b, dict) or "strategy" not in b:
                raise SchemaMismatch("binning must be an object with a strategy")
            unknown_b = set(b) - {"strategy", "bin_count", "edges"}
            if unknown_b:
                raise SchemaMismatch(f"unknown binning fields: {sorted(unknown_b)}")
            binning = BinSpec(
                strategy=b["strategy"],
                bin_count=b.get("bin_count"),
                edges=tuple(b["edges"]) if b.get("edges") is not None else None,
            )
        cats = entry.get("categories")
        # Numeric variables declared without binning get the default spec so
        # every loaded schema can partition each variable into subgroups.
        if binning is None and entry.get("kind") in (NUMERIC_CONTINUOUS, NUMERIC_INTEGER):
            binning = BinSpec("equal-width", bin_count=DEFAULT_BIN_COUNT)
        out.append(
            VariableSchema(
                name=entry.get("name", ""),
                kind=entry.get("kind", ""),
                role=entry.get("role", ""),
                categories=tuple(cats) if cats is not None else None,
                binning=binning,
            )
        )
    return validate_schema(out)


def schema_to_json(schema: Sequence[VariableSchema]) -> list[dict[str, Any]]:
    out: list[dict[str, Any]] = []
    for v in schema:
        entry: dict[str, Any] = {"name": v.name, "kind": v.kind, "role": v.role}
        if v.categories is not None:
            entry["categories"] = list(v.categories)
        if v.binning is not None:
            b: dict[str, Any] = {"strategy": v.binning.strategy}
            if v.binning.bin_count is not None:
                b["bin_count"] = v.binning.bin_count
            if v.binning.edges is not None:
                b["edges"] = list(v.binning.edges)
            entry["binning"] = b
        out.append(entry)
    return out


# ---------------------------------------------------------------------------
# CSV loading


def load_dataset(
    csv_bytes: bytes | str,
    schema: Sequence[VariableSchema],
    dataset_id: str | None = None,
) -> Dataset:
    """Load a UTF-8 CSV against a schema.

    The header must contain exactly the schema's variable names (any order);
    provenance columns written by exports are ignored.  Missing values are
    rejected, numeric parsing is locale-independent, and every categorical
    value must be a declared category.
    """
    schema = validate_schema(schema)
    if isinstance(csv_bytes, bytes):
        try:
            text = csv_bytes.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidValue(f"CSV is not valid UTF-8: {exc}") from None
    else:
        text = csv_bytes
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset("CSV has no header row") from None

    expected = {v.name for v in schema}
    seen: set[str] = set()
    keep: list[int] = []
    for i, col in enumerate(header):
        if col in seen:
            raise SchemaMismatch(f"duplicate column {col!r} in CSV header")
        if col in expected:
            seen.add(col)
            keep.append(i)
        elif col not in RESERVED_COLUMNS:
            raise SchemaMismatch(f"CSV column {col!r} is not declared in the schema")
    missing = expected - seen
    if missing:
        raise SchemaMismatch(f"CSV is missing schema columns: {sorted(missing)}")
    position = {header[i]: i for i in keep}

    rows: list[tuple[Value, ...]] = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise SchemaMismatch(
                f"row at line {lineno} has {len(record)} cells, header has {len(header)}"
            )
        row = tuple(
            parse_value(var, record[position[var.name]], f"line {lineno}") for var in schema
        )
        rows.append(row)
    if not rows:
        raise EmptyDataset("CSV contains a header but no data rows")

    if dataset_id is None:
        digest = hashlib.sha256()
        digest.update(text.encode("utf-8"))
        digest.update(json.dumps(schema_to_json(schema), sort_keys=True).encode("utf-8"))
        dataset_id = "ds-" + digest.hexdigest()[:12]
    return Dataset(id=dataset_id, schema=schema, rows=tuple(rows), origin=())


def dataset_to_csv(dataset: Dataset) -> str:
    """Serialize just the schema columns (no provenance) back to CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([v.name for v in dataset.schema])
    for row in dataset.rows:
        writer.writerow([format_value(var, v) for var, v in zip(dataset.schema, row)])
    return buf.getvalue()


def rows_matching(
    dataset: Dataset, row_ids: Iterable[int]
) -> list[tuple[int, tuple[Value, ...]]]:
    out = []
    n = len(dataset.rows)
    for rid in row_ids:
        if rid < 0 or rid >= n:
            raise IndexOutOfRange(f"row id {rid} out of range for {n} rows")
        out.append((rid, dataset.rows[rid]))
    return out
