"""Expert review of generated samples: filter, inspect, edit, accept.

Samples move through a small state machine (pending, kept, removed,
modified); removal and acceptance are terminal.  No step here ever deletes a
sample, so the batch always partitions into the four statuses and an audit
log can replay the whole review.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import csv
import io

from .augment import (
    AllowedSet,
    AugmentationPlan,
    Constraint,
    GeneratedBatch,
    GeneratedSample,
    Interval,
    STATUS_KEPT,
    STATUS_MODIFIED,
    STATUS_PENDING,
    STATUS_REMOVED,
    validate_against,
)
from .errors import (
    ConstraintViolation,
    IllegalTransition,
    InvalidValue,
    UnannotatedBatch,
    UnknownSample,
    UnknownVariable,
)
from .model import Model, Prediction, predict
from .tabular import (
    Dataset,
    ORIGIN_GENERATED,
    Value,
    VariableSchema,
    check_value,
    format_value,
)

DEFAULT_CONFIDENCE_THRESHOLD = 0.6

COMPARATORS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}
_COMPARATOR_ALIASES = {"≤": "<=", "≥": ">="}


@dataclass(frozen=True)
class FilterPredicate:
    """Conjunction of clauses over sample values and annotations.

    At least one clause must be present.  Clauses over predictions
    (confidence, predicted class) require the batch to be annotated.
    """

    constraints: tuple[Constraint, ...] = ()
    confidence: tuple[str, float] | None = None  # (comparator, threshold)
    predicted_class: str | None = None

    def __post_init__(self) -> None:
        if not self.constraints and self.confidence is None and self.predicted_class is None:
            raise InvalidValue("filter predicate needs at least one clause")
        names = [c.variable for c in self.constraints]
        if len(set(names)) != len(names):
            raise InvalidValue("at most one value clause per variable")
        if self.confidence is not None:
            op, threshold = self.confidence
            op = _COMPARATOR_ALIASES.get(op, op)
            if op not in COMPARATORS:
                raise InvalidValue(f"unknown comparator {op!r}")
            if not 0.0 <= float(threshold) <= 1.0:
                raise InvalidValue("confidence threshold must lie in [0, 1]")
            object.__setattr__(self, "confidence", (op, float(threshold)))

    def needs_annotation(self) -> bool:
        return self.confidence is not None or self.predicted_class is not None

    def matches(self, sample: GeneratedSample, schema: Sequence[VariableSchema]) -> bool:
        index = {v.name: i for i, v in enumerate(schema)}
        for c in self.constraints:
            if c.variable not in index:
                raise UnknownVariable(f"filter references unknown variable {c.variable!r}")
            if not c.satisfied_by(sample.values[index[c.variable]]):
                return False
        if self.confidence is not None:
            op, threshold = self.confidence
            if not COMPARATORS[op](sample.prediction.confidence, threshold):
                return False
        if self.predicted_class is not None:
            if sample.prediction.label != self.predicted_class:
                return False
        return True

    def to_json_dict(self) -> dict[str, Any]:
        clauses: list[dict[str, Any]] = []
        for c in self.constraints:
            if isinstance(c.rule, Interval):
                clauses.append({"variable": c.variable, "interval": [c.rule.lo, c.rule.hi]})
            else:
                clauses.append({"variable": c.variable, "allowed": list(c.rule.labels)})
        out: dict[str, Any] = {"constraints": clauses}
        if self.confidence is not None:
            out["confidence"] = {"comparator": self.confidence[0], "threshold": self.confidence[1]}
        if self.predicted_class is not None:
            out["predicted_class"] = self.predicted_class
        return out

    @staticmethod
    def from_json_dict(doc: dict[str, Any]) -> "FilterPredicate":
        if not isinstance(doc, dict):
            raise InvalidValue("filter predicate must be a JSON object")
        unknown = set(doc) - {"constraints", "confidence", "predicted_class"}
        if unknown:
            raise InvalidValue(f"unknown filter fields: {sorted(unknown)}")
        constraints = []
        for entry in doc.get("constraints", ()):
            if "interval" in entry:
                lo, hi = entry["interval"]
                constraints.append(
                    Constraint(entry["variable"], Interval(float(lo), float(hi)))
                )
            elif "allowed" in entry:
                constraints.append(
                    Constraint(entry["variable"], AllowedSet(tuple(entry["allowed"])))
                )
            else:
                raise InvalidValue("each filter clause needs interval or allowed")
        confidence = None
        if doc.get("confidence") is not None:
            c = doc["confidence"]
            confidence = (c["comparator"], float(c["threshold"]))
        return FilterPredicate(
            constraints=tuple(constraints),
            confidence=confidence,
            predicted_class=doc.get("predicted_class"),
        )


def _reviewable(batch: GeneratedBatch) -> list[GeneratedSample]:
    return [s for s in batch.samples if s.status in (STATUS_PENDING, STATUS_MODIFIED)]


def filter_batch(
    batch: GeneratedBatch,
    predicate: FilterPredicate,
    schema: Sequence[VariableSchema],
) -> tuple[list[str], list[str]]:
    """Partition the reviewable (pending or modified) samples by the predicate.

    Returns (matching ids, non-matching ids), both in batch order.  Nothing
    is mutated; kept and removed samples are outside the partition.
    """
    candidates = _reviewable(batch)
    if predicate.needs_annotation():
        missing = [s.id for s in candidates if s.prediction is None]
        if missing:
            raise UnannotatedBatch(
                f"{len(missing)} sample(s) lack predictions; annotate the batch first",
                sample_ids=missing,
            )
    matching, rest = [], []
    for s in candidates:
        (matching if predicate.matches(s, schema) else rest).append(s.id)
    return matching, rest


def remove_samples(batch: GeneratedBatch, sample_ids: Sequence[str]) -> int:
    """Mark samples removed.  Removal is terminal and not idempotent.

    The whole call is validated before any status changes, so an error
    leaves the batch untouched.
    """
    targets = []
    seen: set[str] = set()
    for sid in sample_ids:
        s = batch.sample(sid)
        if s.status == STATUS_REMOVED or s.id in seen:
            raise IllegalTransition(f"sample {sid!r} is already removed")
        if s.status == STATUS_KEPT:
            raise IllegalTransition(f"sample {sid!r} was accepted and cannot be removed")
        seen.add(s.id)
        targets.append(s)
    for s in targets:
        s.status = STATUS_REMOVED
    return len(targets)


def annotate_batch(
    batch: GeneratedBatch,
    model: Model,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> int:
    """Attach a prediction to every non-removed sample.

    A sample is flagged problematic when the model disagrees with the plan's
    target class or is less confident than the threshold.
    """
    if not 0.0 <= confidence_threshold <= 1.0:
        raise InvalidValue("confidence threshold must lie in [0, 1]")
    flagged = 0
    for s in batch.samples:
        if s.status == STATUS_REMOVED:
            continue
        prediction = predict(model, s.values)
        s.prediction = prediction
        s.problematic = (
            prediction.label != batch.plan.target_class
            or prediction.confidence < confidence_threshold
        )
        flagged += 1 if s.problematic else 0
    return flagged


def _validated_edits(
    schema: Sequence[VariableSchema], edits: Sequence[tuple[str, Value]]
) -> list[tuple[int, str, Value]]:
    by_name = {v.name: (i, v) for i, v in enumerate(schema)}
    out = []
    for variable, new_value in edits:
        if variable not in by_name:
            raise UnknownVariable(f"edit references unknown variable {variable!r}")
        i, var = by_name[variable]
        out.append((i, variable, check_value(var, new_value)))
    return out


def apply_edits(
    values: tuple[Value, ...],
    schema: Sequence[VariableSchema],
    edits: Sequence[tuple[str, Value]],
) -> tuple[Value, ...]:
    new_values = list(values)
    for i, _variable, v in _validated_edits(schema, edits):
        new_values[i] = v
    return tuple(new_values)


def what_if(
    batch: GeneratedBatch,
    sample_id: str,
    edits: Sequence[tuple[str, Value]],
    model: Model,
    schema: Sequence[VariableSchema],
) -> tuple[tuple[Value, ...], Prediction, Prediction]:
    """Preview how edits would change the model's view of one sample.

    Returns (candidate values, new prediction, old prediction).  Pure:
    neither the sample nor the batch changes.  Both predictions come from
    the supplied model, so an empty edit list returns identical old and new
    predictions.
    """
    sample = batch.sample(sample_id)
    if sample.status == STATUS_REMOVED:
        raise IllegalTransition(f"sample {sample_id!r} is removed")
    candidate = apply_edits(sample.values, schema, edits)
    old = predict(model, sample.values)
    new = predict(model, candidate)
    return candidate, new, old


def commit_edit(
    batch: GeneratedBatch,
    sample_id: str,
    edits: Sequence[tuple[str, Value]],
    schema: Sequence[VariableSchema],
) -> GeneratedSample:
    """Apply edits to a pending or modified sample.

    The edited row must still satisfy the batch's plan.  Edits append to the
    sample's history and invalidate any previous annotation.
    """
    sample = batch.sample(sample_id)
    if sample.status not in (STATUS_PENDING, STATUS_MODIFIED):
        raise IllegalTransition(f"sample {sample_id!r} is {sample.status} and cannot be edited")
    validated = _validated_edits(schema, edits)
    if not validated:
        raise InvalidValue("edit needs at least one (variable, value) pair")
    new_values = list(sample.values)
    history = []
    for i, variable, v in validated:
        history.append((variable, new_values[i], v))
        new_values[i] = v
    violations = validate_against(tuple(new_values), batch.plan, schema)
    if violations:
        raise ConstraintViolation(
            "; ".join(v.describe() for v in violations),
            violations=[v.describe() for v in violations],
        )
    sample.values = tuple(new_values)
    sample.status = STATUS_MODIFIED
    sample.edit_history.extend(history)
    sample.prediction = None
    sample.problematic = None
    return sample


@dataclass
class AugmentedDataset:
    """A base dataset plus the generated samples accepted into it."""

    base: Dataset
    accepted: list[GeneratedSample]

    @property
    def row_count(self) -> int:
        return len(self.base.rows) + len(self.accepted)

    def merged(self) -> Dataset:
        """Materialize base and accepted rows as one dataset."""
        rows = list(self.base.rows) + [s.values for s in self.accepted]
        origin = list(self.base.origin) + [ORIGIN_GENERATED] * len(self.accepted)
        return Dataset(
            id=self.base.id, schema=self.base.schema, rows=tuple(rows), origin=tuple(origin)
        )


def accept_batch(
    dataset: Dataset | AugmentedDataset,
    batch: GeneratedBatch,
    sample_ids: Sequence[str],
) -> AugmentedDataset:
    """Accept pending or modified samples into the dataset.

    Accepted samples become kept; the augmented dataset's row count is the
    base count plus every sample accepted so far.
    """
    augmented = (
        dataset
        if isinstance(dataset, AugmentedDataset)
        else AugmentedDataset(base=dataset, accepted=[])
    )
    # Zero ids is legal: the augmented dataset is returned unchanged.
    targets = []
    seen: set[str] = set()
    for sid in sample_ids:
        s = batch.sample(sid)
        if s.status not in (STATUS_PENDING, STATUS_MODIFIED) or s.id in seen:
            raise IllegalTransition(f"sample {sid!r} is {s.status} and cannot be accepted")
        seen.add(s.id)
        targets.append(s)
    for s in targets:
        s.status = STATUS_KEPT
        augmented.accepted.append(s)
    return augmented


def export_csv(augmented: AugmentedDataset, include_provenance: bool) -> str:
    """Serialize base plus accepted rows to CSV.

    With provenance, four extra columns are appended (origin, base_row_id,
    neighbor_row_id, interpolation_u); original rows leave the last three
    empty.  Loading the export against the same schema reproduces the rows;
    provenance columns are ignored by the loader.
    """
    schema = augmented.base.schema
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [v.name for v in schema]
    if include_provenance:
        header += ["origin", "base_row_id", "neighbor_row_id", "interpolation_u"]
    writer.writerow(header)
    for row, origin in zip(augmented.base.rows, augmented.base.origin):
        cells = [format_value(var, v) for var, v in zip(schema, row)]
        if include_provenance:
            cells += [origin, "", "", ""]
        writer.writerow(cells)
    for s in augmented.accepted:
        cells = [format_value(var, v) for var, v in zip(schema, s.values)]
        if include_provenance:
            cells += [
                ORIGIN_GENERATED,
                str(s.provenance.base_row_id),
                str(s.provenance.neighbor_row_id),
                repr(s.provenance.u),
            ]
        writer.writerow(cells)
    return buf.getvalue()
