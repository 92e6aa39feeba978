"""Constraint-guided synthetic sample generation by neighbor interpolation.

New samples for an underrepresented target class are produced by drawing a
base row from an eligible pool, one of its Gower-nearest neighbors within
that pool, and a single interpolation weight ``u``.  Numeric values move
along the segment between base and neighbor; categorical values snap to the
closer parent.  Because every parent already satisfies the plan's interval
constraints and intervals are convex, interpolated numeric values satisfy
them too; the validator still re-checks every emitted sample.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    InsufficientEligibleSamples,
    InvalidValue,
    KTooLarge,
    UnknownSample,
    UnknownVariable,
)
from .tabular import (
    CATEGORICAL,
    NUMERIC_INTEGER,
    ORIGIN_ORIGINAL,
    Dataset,
    Value,
    VariableSchema,
    check_value,
    format_value,
)

DEFAULT_NEIGHBOR_K = 5
DEFAULT_MAX_ATTEMPT_FACTOR = 20

STATUS_PENDING = "pending"
STATUS_KEPT = "kept"
STATUS_REMOVED = "removed"
STATUS_MODIFIED = "modified"
SAMPLE_STATUSES = (STATUS_PENDING, STATUS_KEPT, STATUS_REMOVED, STATUS_MODIFIED)


@dataclass(frozen=True)
class Interval:
    """Closed numeric interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise InvalidValue("interval bounds cannot be NaN")
        if self.lo > self.hi:
            raise InvalidValue(f"interval lo {self.lo} exceeds hi {self.hi}")

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def describe(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class AllowedSet:
    """Set of permitted category labels."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise InvalidValue("allowed set cannot be empty")
        object.__setattr__(self, "labels", tuple(sorted(set(self.labels))))

    def contains(self, value: str) -> bool:
        return value in self.labels

    def describe(self) -> str:
        return "{" + ", ".join(self.labels) + "}"


@dataclass(frozen=True)
class Constraint:
    variable: str
    rule: Interval | AllowedSet

    def satisfied_by(self, value: Value) -> bool:
        if isinstance(self.rule, Interval):
            return self.rule.contains(float(value))
        return self.rule.contains(str(value))

    def describe(self) -> str:
        return f"{self.variable} in {self.rule.describe()}"


@dataclass(frozen=True)
class AugmentationPlan:
    target_class: str
    requested_count: int
    constraints: tuple[Constraint, ...] = ()
    neighbor_k: int = DEFAULT_NEIGHBOR_K
    seed: int = 0
    max_attempt_factor: int = DEFAULT_MAX_ATTEMPT_FACTOR

    def __post_init__(self) -> None:
        if self.requested_count < 1:
            raise InvalidValue("requested_count must be at least 1")
        if self.neighbor_k < 1:
            raise InvalidValue("neighbor_k must be at least 1")
        if self.max_attempt_factor < 1:
            raise InvalidValue("max_attempt_factor must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidValue("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        names = [c.variable for c in self.constraints]
        if len(set(names)) != len(names):
            raise InvalidValue("at most one constraint per variable")

    def constraint_for(self, variable: str) -> Constraint | None:
        for c in self.constraints:
            if c.variable == variable:
                return c
        return None

    def to_json_dict(self) -> dict[str, Any]:
        constraints = []
        for c in self.constraints:
            if isinstance(c.rule, Interval):
                constraints.append({"variable": c.variable, "interval": [c.rule.lo, c.rule.hi]})
            else:
                constraints.append({"variable": c.variable, "allowed": list(c.rule.labels)})
        return {
            "target_class": self.target_class,
            "requested_count": self.requested_count,
            "constraints": constraints,
            "neighbor_k": self.neighbor_k,
            "seed": self.seed,
            "max_attempt_factor": self.max_attempt_factor,
        }

    @staticmethod
    def from_json_dict(doc: dict[str, Any]) -> "AugmentationPlan":
        if not isinstance(doc, dict):
            raise InvalidValue("plan must be a JSON object")
        unknown = set(doc) - {
            "target_class",
            "requested_count",
            "constraints",
            "neighbor_k",
            "seed",
            "max_attempt_factor",
        }
        if unknown:
            raise InvalidValue(f"unknown plan fields: {sorted(unknown)}")
        if "target_class" not in doc or "requested_count" not in doc:
            raise InvalidValue("plan needs target_class and requested_count")
        constraints = []
        for entry in doc.get("constraints", ()):
            if not isinstance(entry, dict) or "variable" not in entry:
                raise InvalidValue("each constraint needs a variable")
            has_interval = "interval" in entry
            has_allowed = "allowed" in entry
            if has_interval == has_allowed:
                raise InvalidValue(
                    f"constraint on {entry['variable']!r} needs exactly one of interval/allowed"
                )
            if has_interval:
                iv = entry["interval"]
                if not isinstance(iv, (list, tuple)) or len(iv) != 2:
                    raise InvalidValue("interval must be a [lo, hi] pair")
                rule: Interval | AllowedSet = Interval(float(iv[0]), float(iv[1]))
            else:
                labels = entry["allowed"]
                if not isinstance(labels, (list, tuple)) or not all(
                    isinstance(x, str) for x in labels
                ):
                    raise InvalidValue("allowed must be a list of labels")
                rule = AllowedSet(tuple(labels))
            constraints.append(Constraint(variable=entry["variable"], rule=rule))
        try:
            return AugmentationPlan(
                target_class=str(doc["target_class"]),
                requested_count=int(doc["requested_count"]),
                constraints=tuple(constraints),
                neighbor_k=int(doc.get("neighbor_k", DEFAULT_NEIGHBOR_K)),
                seed=int(doc.get("seed", 0)),
                max_attempt_factor=int(doc.get("max_attempt_factor", DEFAULT_MAX_ATTEMPT_FACTOR)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidValue):
                raise
            raise InvalidValue(f"malformed plan: {exc}") from None


@dataclass(frozen=True)
class Provenance:
    base_row_id: int
    neighbor_row_id: int
    u: float


@dataclass(frozen=True)
class Violation:
    variable: str
    constraint: str
    value: Value

    def describe(self) -> str:
        return f"{self.variable}={self.value!r} violates {self.constraint}"


@dataclass
class GeneratedSample:
    id: str
    values: tuple[Value, ...]
    provenance: Provenance
    status: str = STATUS_PENDING
    prediction: Any = None  # model.Prediction once annotated
    problematic: bool | None = None
    edit_history: list[tuple[str, Value, Value]] = field(default_factory=list)


@dataclass
class GeneratedBatch:
    id: str
    dataset_id: str
    plan: AugmentationPlan
    samples: list[GeneratedSample]
    produced_count: int
    attempts_used: int

    def sample(self, sample_id: str) -> GeneratedSample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise UnknownSample(f"batch {self.id!r} has no sample {sample_id!r}")


def validate_plan(plan: AugmentationPlan, schema: Sequence[VariableSchema]) -> None:
    """Check a plan against a schema: variables exist, rule kinds match."""
    by_name = {v.name: v for v in schema}
    target = next(v for v in schema if v.role == "target")
    if plan.target_class not in (target.categories or ()):
        raise InvalidValue(
            f"target class {plan.target_class!r} is not a category of {target.name!r}"
        )
    for c in plan.constraints:
        var = by_name.get(c.variable)
        if var is None:
            raise UnknownVariable(f"constraint references unknown variable {c.variable!r}")
        if var.role == "target":
            raise InvalidValue("constraints cannot target the target variable")
        if var.kind == CATEGORICAL:
            if not isinstance(c.rule, AllowedSet):
                raise InvalidValue(f"categorical variable {c.variable!r} needs an allowed set")
            undeclared = set(c.rule.labels) - set(var.categories or ())
            if undeclared:
                raise InvalidValue(
                    f"allowed set for {c.variable!r} includes undeclared labels {sorted(undeclared)}"
                )
        else:
            if not isinstance(c.rule, Interval):
                raise InvalidValue(f"numeric variable {c.variable!r} needs an interval")


def eligible_pool(dataset: Dataset, plan: AugmentationPlan) -> list[int]:
    """Row ids usable as interpolation parents, in ascending order.

    Only original rows of the plan's target class that satisfy every
    constraint qualify.
    """
    validate_plan(plan, dataset.schema)
    target_col = dataset.index_of(dataset.target.name)
    cols = {c.variable: dataset.index_of(c.variable) for c in plan.constraints}
    pool = []
    for rid in dataset.original_row_ids():
        row = dataset.rows[rid]
        if row[target_col] != plan.target_class:
            continue
        if all(c.satisfied_by(row[cols[c.variable]]) for c in plan.constraints):
            pool.append(rid)
    return pool


def validate_against(
    values: Sequence[Value], plan: AugmentationPlan, schema: Sequence[VariableSchema]
) -> list[Violation]:
    """Every way the candidate row violates the plan, the empty list if none."""
    index = {v.name: i for i, v in enumerate(schema)}
    violations = []
    target = next(v for v in schema if v.role == "target")
    if values[index[target.name]] != plan.target_class:
        violations.append(
            Violation(
                variable=target.name,
                constraint=f"{target.name} = {plan.target_class}",
                value=values[index[target.name]],
            )
        )
    for c in plan.constraints:
        v = values[index[c.variable]]
        if not c.satisfied_by(v):
            violations.append(Violation(variable=c.variable, constraint=c.describe(), value=v))
    return violations


# ---------------------------------------------------------------------------
# Gower distance and neighbors


class _PoolGeometry:
    """Vectorized Gower distance over the predictor columns of a pool."""

    def __init__(self, dataset: Dataset, pool: Sequence[int]) -> None:
        self.pool = list(pool)
        self.numeric_cols: list[np.ndarray] = []
        self.numeric_ranges: list[float] = []
        self.categorical_cols: list[list[Value]] = []
        for var in dataset.predictors:
            col = dataset.index_of(var.name)
            values = [dataset.rows[rid][col] for rid in pool]
            if var.kind == CATEGORICAL:
                self.categorical_cols.append(values)
            else:
                arr = np.asarray([float(v) for v in values])
                self.numeric_cols.append(arr)
                self.numeric_ranges.append(float(arr.max() - arr.min()))
        self.n_predictors = len(self.numeric_cols) + len(self.categorical_cols)

    def distances_from(self, pool_pos: int) -> np.ndarray:
        """Gower distance from one pool member to every pool member."""
        total = np.zeros(len(self.pool))
        for arr, rng in zip(self.numeric_cols, self.numeric_ranges):
            if rng > 0:
                total += np.abs(arr - arr[pool_pos]) / rng
            # a zero range means the column is constant over the pool: 0 distance
        for values in self.categorical_cols:
            pivot = values[pool_pos]
            total += np.asarray([0.0 if v == pivot else 1.0 for v in values])
        return total / max(self.n_predictors, 1)


def nearest_neighbors(
    dataset: Dataset, pool: Sequence[int], base_row_id: int, k: int
) -> list[int]:
    """The k nearest pool rows to the base row, excluding the base row itself.

    Distance ties break toward the smaller row id.  Rows that duplicate the
    base row's values sit at distance zero and rank first.
    """
    if base_row_id not in pool:
        raise InvalidValue(f"base row {base_row_id} is not in the pool")
    if k < 1:
        raise InvalidValue("k must be at least 1")
    if k > len(pool) - 1:
        raise KTooLarge(f"k={k} exceeds the {len(pool) - 1} other pool rows")
    geometry = _PoolGeometry(dataset, pool)
    pos = geometry.pool.index(base_row_id)
    dists = geometry.distances_from(pos)
    ids = np.asarray(geometry.pool)
    order = np.lexsort((ids, dists))
    ranked = [int(ids[i]) for i in order if int(ids[i]) != base_row_id]
    return ranked[:k]


# ---------------------------------------------------------------------------
# Generation


def interpolate_row(
    schema: Sequence[VariableSchema],
    base: Sequence[Value],
    neighbor: Sequence[Value],
    u: float,
    target_class: str,
    plan: AugmentationPlan,
) -> tuple[Value, ...]:
    """Blend two parent rows with a single shared weight ``u``.

    Continuous values take ``base + u * (neighbor - base)``; integer values
    round half-up and clamp into any interval constraint; categorical values
    copy the base below u=0.5 and the neighbor from 0.5 up.
    """
    out: list[Value] = []
    for i, var in enumerate(schema):
        if var.role == "target":
            out.append(target_class)
        elif var.kind == CATEGORICAL:
            out.append(base[i] if u < 0.5 else neighbor[i])
        else:
            x = float(base[i]) + u * (float(neighbor[i]) - float(base[i]))
            if var.kind == NUMERIC_INTEGER:
                r = math.floor(x + 0.5)
                c = plan.constraint_for(var.name)
                if c is not None and isinstance(c.rule, Interval):
                    r = min(max(r, math.ceil(c.rule.lo)), math.floor(c.rule.hi))
                out.append(int(r))
            else:
                out.append(x)
    return tuple(out)


def batch_id_for(dataset: Dataset, plan: AugmentationPlan) -> str:
    digest = hashlib.sha256()
    digest.update(dataset.id.encode("utf-8"))
    digest.update(json.dumps(plan.to_json_dict(), sort_keys=True).encode("utf-8"))
    return "batch-" + digest.hexdigest()[:12]


def generate(dataset: Dataset, plan: AugmentationPlan) -> GeneratedBatch:
    """Produce a batch of constraint-satisfying samples for the plan.

    Attempts are capped at ``requested_count * max_attempt_factor``; running
    out of attempts yields a shorter batch, not an error.  The same dataset
    and plan always reproduce the identical batch, sample ids included.
    """
    pool = eligible_pool(dataset, plan)
    if len(pool) < 2:
        raise InsufficientEligibleSamples(
            f"eligible pool has {len(pool)} row(s), need at least 2",
            pool_size=len(pool),
        )
    k = min(plan.neighbor_k, len(pool) - 1)
    rng = np.random.default_rng(plan.seed)
    batch_id = batch_id_for(dataset, plan)
    neighbor_cache: dict[int, list[int]] = {}

    samples: list[GeneratedSample] = []
    attempts = 0
    budget = plan.requested_count * plan.max_attempt_factor
    while len(samples) < plan.requested_count and attempts < budget:
        attempts += 1
        base_id = pool[int(rng.integers(0, len(pool)))]
        if base_id not in neighbor_cache:
            neighbor_cache[base_id] = nearest_neighbors(dataset, pool, base_id, k)
        neighbors = neighbor_cache[base_id]
        neighbor_id = neighbors[int(rng.integers(0, len(neighbors)))]
        u = float(rng.random())
        values = interpolate_row(
            dataset.schema,
            dataset.rows[base_id],
            dataset.rows[neighbor_id],
            u,
            plan.target_class,
            plan,
        )
        if validate_against(values, plan, dataset.schema):
            continue
        samples.append(
            GeneratedSample(
                id=f"{batch_id}-s{len(samples) + 1:04d}",
                values=values,
                provenance=Provenance(base_row_id=base_id, neighbor_row_id=neighbor_id, u=u),
            )
        )
    return GeneratedBatch(
        id=batch_id,
        dataset_id=dataset.id,
        plan=plan,
        samples=samples,
        produced_count=len(samples),
        attempts_used=attempts,
    )


# ---------------------------------------------------------------------------
# Serialization


def batch_to_csv(batch: GeneratedBatch, schema: Sequence[VariableSchema]) -> str:
    """Sample rows plus provenance columns (base_row_id, neighbor_row_id, u, status)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([v.name for v in schema] + ["base_row_id", "neighbor_row_id", "u", "status"])
    for s in batch.samples:
        writer.writerow(
            [format_value(var, v) for var, v in zip(schema, s.values)]
            + [
                str(s.provenance.base_row_id),
                str(s.provenance.neighbor_row_id),
                repr(s.provenance.u),
                s.status,
            ]
        )
    return buf.getvalue()


def sample_to_json_dict(sample: GeneratedSample, schema: Sequence[VariableSchema]) -> dict[str, Any]:
    return {
        "id": sample.id,
        "values": {var.name: v for var, v in zip(schema, sample.values)},
        "provenance": {
            "base_row_id": sample.provenance.base_row_id,
            "neighbor_row_id": sample.provenance.neighbor_row_id,
            "u": sample.provenance.u,
        },
        "status": sample.status,
        "prediction": sample.prediction.to_json_dict() if sample.prediction else None,
        "problematic": sample.problematic,
        "edit_history": [
            {"variable": var, "old": old, "new": new} for var, old, new in sample.edit_history
        ],
    }


def sample_from_json_dict(
    doc: dict[str, Any], schema: Sequence[VariableSchema]
) -> GeneratedSample:
    from .model import Prediction

    values = tuple(check_value(var, doc["values"][var.name]) for var in schema)
    sample = GeneratedSample(
        id=doc["id"],
        values=values,
        provenance=Provenance(
            base_row_id=int(doc["provenance"]["base_row_id"]),
            neighbor_row_id=int(doc["provenance"]["neighbor_row_id"]),
            u=float(doc["provenance"]["u"]),
        ),
        status=doc.get("status", STATUS_PENDING),
        problematic=doc.get("problematic"),
        edit_history=[(e["variable"], e["old"], e["new"]) for e in doc.get("edit_history", ())],
    )
    if doc.get("prediction"):
        sample.prediction = Prediction.from_json_dict(doc["prediction"])
    return sample


def batch_to_json_dict(batch: GeneratedBatch, schema: Sequence[VariableSchema]) -> dict[str, Any]:
    return {
        "id": batch.id,
        "dataset_id": batch.dataset_id,
        "plan": batch.plan.to_json_dict(),
        "samples": [sample_to_json_dict(s, schema) for s in batch.samples],
        "produced_count": batch.produced_count,
        "attempts_used": batch.attempts_used,
    }


def batch_from_json_dict(doc: dict[str, Any], schema: Sequence[VariableSchema]) -> GeneratedBatch:
    return GeneratedBatch(
        id=doc["id"],
        dataset_id=doc["dataset_id"],
        plan=AugmentationPlan.from_json_dict(doc["plan"]),
        samples=[sample_from_json_dict(s, schema) for s in doc["samples"]],
        produced_count=int(doc["produced_count"]),
        attempts_used=int(doc["attempts_used"]),
    )
