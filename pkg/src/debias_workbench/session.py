"""One working session: a dataset, its models, plans, batches, and audit log.

Session is the single mutation engine behind both the HTTP service and the
CLI, which is what makes the two surfaces behaviorally equivalent.  Every
state change appends one log record whose payload carries the full request,
so a session log can be replayed against the original dataset to reproduce
every artifact, exports included.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Sequence

from .augment import (
    AugmentationPlan,
    GeneratedBatch,
    batch_to_json_dict,
    eligible_pool,
    generate,
    validate_plan,
)
from .curation import (
    AugmentedDataset,
    FilterPredicate,
    accept_batch,
    annotate_batch,
    commit_edit,
    export_csv,
    filter_batch,
    remove_samples,
    what_if,
    DEFAULT_CONFIDENCE_THRESHOLD,
)
from .errors import (
    InvalidValue,
    NotFound,
    ReplayDivergence,
    StaleVersion,
    UnannotatedBatch,
)
from .metrics import BiasReport, bias_report
from .model import (
    DEFAULT_FOLDS,
    Model,
    ModelConfig,
    accuracy_by_subgroup,
    cross_validate,
    train,
)
from .tabular import Dataset, SubgroupKey, Value, subgroups

ACTIONS = (
    "loaded",
    "trained",
    "planned",
    "generated",
    "filtered",
    "removed",
    "modified",
    "what_if",
    "accepted",
    "exported",
)

Clock = Callable[[], str]


def utc_clock() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def fixed_clock(timestamp: str) -> Clock:
    """Clock that always returns the given ISO timestamp (for reproducible runs)."""
    try:
        datetime.fromisoformat(timestamp.replace("Z", "+00:00"))
    except ValueError:
        raise InvalidValue(f"{timestamp!r} is not an ISO-8601 timestamp") from None
    return lambda: timestamp


@dataclass(frozen=True)
class LogRecord:
    seq: int
    timestamp: str
    action: str
    payload: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "timestamp": self.timestamp,
                "action": self.action,
                "payload": self.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


class SessionLog:
    """Append-only, gap-free sequence of action records."""

    def __init__(self, records: Sequence[LogRecord] = ()) -> None:
        self.records: list[LogRecord] = list(records)
        self._check()

    def _check(self) -> None:
        for i, r in enumerate(self.records):
            if r.seq != i + 1:
                raise InvalidValue(f"log record {i} has seq {r.seq}, expected {i + 1}")
            if r.action not in ACTIONS:
                raise InvalidValue(f"unknown log action {r.action!r}")

    def append(self, action: str, payload: dict[str, Any], timestamp: str) -> LogRecord:
        if action not in ACTIONS:
            raise InvalidValue(f"unknown log action {action!r}")
        record = LogRecord(
            seq=len(self.records) + 1, timestamp=timestamp, action=action, payload=payload
        )
        self.records.append(record)
        return record

    def to_ndjson(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @staticmethod
    def from_ndjson(text: str) -> "SessionLog":
        records = []
        for line in text.splitlines():
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidValue(f"log line is not valid JSON: {exc}") from None
            records.append(
                LogRecord(
                    seq=int(doc["seq"]),
                    timestamp=str(doc["timestamp"]),
                    action=str(doc["action"]),
                    payload=doc.get("payload", {}),
                )
            )
        return SessionLog(records)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _edits_from_doc(edits_doc: Any) -> list[tuple[str, Value]]:
    if not isinstance(edits_doc, list):
        raise InvalidValue("edits must be a list of {variable, value} objects")
    out = []
    for entry in edits_doc:
        if not isinstance(entry, dict) or "variable" not in entry or "value" not in entry:
            raise InvalidValue("each edit needs a variable and a value")
        out.append((str(entry["variable"]), entry["value"]))
    return out


def _edits_to_doc(edits: Sequence[tuple[str, Value]]) -> list[dict[str, Any]]:
    return [{"variable": v, "value": val} for v, val in edits]


@dataclass
class TrainResult:
    model_id: str
    model: Model
    scope: str
    folds: int
    overall_accuracy: float
    accuracies: dict[str, dict[SubgroupKey, float | None]]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "model_id": self.model_id,
            "scope": self.scope,
            "folds": self.folds,
            "class_labels": list(self.model.class_labels),
            "final_loss": self.model.loss_trace[-1] if self.model.loss_trace else None,
            "overall_accuracy": self.overall_accuracy,
            "subgroup_accuracies": {
                variable: [
                    {"label": key.label, "accuracy": acc}
                    for key, acc in per_group.items()
                ]
                for variable, per_group in self.accuracies.items()
            },
        }


class Session:
    """All mutable state reachable from one loaded dataset."""

    def __init__(
        self,
        session_id: str,
        dataset: Dataset,
        *,
        clock: Clock | None = None,
        allocate: Callable[[str], str] | None = None,
    ) -> None:
        self.session_id = session_id
        self.dataset = dataset
        self.augmented = AugmentedDataset(base=dataset, accepted=[])
        self.models: dict[str, Model] = {}
        self.train_results: dict[str, TrainResult] = {}
        self.plans: dict[str, AugmentationPlan] = {}
        self.batches: dict[str, GeneratedBatch] = {}
        self.batch_plan_ids: dict[str, str] = {}
        self.batch_versions: dict[str, int] = {}
        self.dataset_version = 1
        self.log = SessionLog()
        self.clock: Clock = clock or utc_clock
        self._local_counters: dict[str, int] = {"model": 0, "plan": 0}
        self._allocate = allocate or self._allocate_local
        self.last_model_id: str | None = None
        self.last_plan_id: str | None = None
        self.last_batch_id: str | None = None

    def _allocate_local(self, kind: str) -> str:
        self._local_counters[kind] += 1
        return f"{kind[0]}{self._local_counters[kind]}"

    # -- resource lookup ----------------------------------------------------

    def model_of(self, model_id: str | None) -> tuple[str, Model]:
        mid = model_id or self.last_model_id
        if mid is None:
            raise InvalidValue("no model trained in this session yet")
        if mid not in self.models:
            raise NotFound("model", mid)
        return mid, self.models[mid]

    def plan_of(self, plan_id: str | None) -> tuple[str, AugmentationPlan]:
        pid = plan_id or self.last_plan_id
        if pid is None:
            raise InvalidValue("no plan created in this session yet")
        if pid not in self.plans:
            raise NotFound("plan", pid)
        return pid, self.plans[pid]

    def batch_of(self, batch_id: str | None) -> tuple[str, GeneratedBatch]:
        bid = batch_id or self.last_batch_id
        if bid is None:
            raise InvalidValue("no batch generated in this session yet")
        if bid not in self.batches:
            raise NotFound("batch", bid)
        return bid, self.batches[bid]

    def _check_batch_version(self, batch_id: str, expected: int | None) -> None:
        if expected is not None and expected != self.batch_versions[batch_id]:
            raise StaleVersion(
                f"batch {batch_id!r} is at version {self.batch_versions[batch_id]}, "
                f"request expected {expected}",
                current_version=self.batch_versions[batch_id],
            )

    def resolve_sample_ids(self, batch: GeneratedBatch, raw_ids: Sequence[Any]) -> list[str]:
        """Accept sample ids or 0-based positional indexes into the batch."""
        out = []
        for r in raw_ids:
            if isinstance(r, bool):
                raise InvalidValue("sample ids must be strings or integers")
            if isinstance(r, int):
                if r < 0 or r >= len(batch.samples):
                    raise InvalidValue(
                        f"sample index {r} out of range for {len(batch.samples)} samples"
                    )
                out.append(batch.samples[r].id)
            elif isinstance(r, str):
                out.append(r)
            else:
                raise InvalidValue("sample ids must be strings or integers")
        return out

    # -- reads ---------------------------------------------------------------

    def current_dataset(self) -> Dataset:
        return self.augmented.merged()

    def latest_accuracies(self) -> dict[SubgroupKey, float]:
        if self.last_model_id is None:
            return {}
        result = self.train_results[self.last_model_id]
        flat: dict[SubgroupKey, float] = {}
        for per_group in result.accuracies.values():
            for key, acc in per_group.items():
                if acc is not None:
                    flat[key] = acc
        return flat

    def bias(self, coverage_threshold: int | None = None) -> BiasReport:
        return bias_report(
            self.current_dataset(),
            coverage_threshold=coverage_threshold,
            subgroup_accuracy=self.latest_accuracies(),
        )

    def subgroups_doc(self, variable: str) -> dict[str, Any]:
        data = self.current_dataset()
        groups = subgroups(data, variable)
        counts = [n for _, n in groups]
        peak = max(counts) if counts and max(counts) > 0 else 1
        accuracies = self.latest_accuracies()
        return {
            "dataset_id": self.dataset.id,
            "variable": variable,
            "subgroups": [
                {
                    "label": key.label,
                    "count": count,
                    "representation_rate": count / peak,
                    "accuracy": accuracies.get(key),
                }
                for key, count in groups
            ],
        }

    # -- mutations (each logs one record) -------------------------------------

    def log_loaded(self, csv_text: str) -> None:
        self.log.append(
            "loaded",
            {
                "dataset_id": self.dataset.id,
                "row_count": len(self.dataset.rows),
                "csv_sha256": _sha256(csv_text),
            },
            self.clock(),
        )

    def train(
        self,
        config_doc: dict[str, Any] | None = None,
        scope: str = "original",
        folds: int = DEFAULT_FOLDS,
        model_id: str | None = None,
    ) -> TrainResult:
        if scope not in ("original", "augmented"):
            raise InvalidValue(f"unknown training scope {scope!r}")
        config = ModelConfig.from_json_dict(config_doc or {})
        data = self.dataset if scope == "original" else self.current_dataset()
        model = train(data, config)
        correct = cross_validate(data, config, folds)
        accuracies = {
            var.name: accuracy_by_subgroup(data, var.name, correct) for var in data.schema
        }
        mid = model_id or self._allocate("model")
        result = TrainResult(
            model_id=mid,
            model=model,
            scope=scope,
            folds=folds,
            overall_accuracy=float(correct.mean()),
            accuracies=accuracies,
        )
        self.models[mid] = model
        self.train_results[mid] = result
        self.last_model_id = mid
        self.log.append(
            "trained",
            {
                "model_id": mid,
                "config": config.to_json_dict(),
                "scope": scope,
                "folds": folds,
            },
            self.clock(),
        )
        return result

    def plan(
        self, plan_doc: dict[str, Any], plan_id: str | None = None
    ) -> tuple[str, AugmentationPlan, int]:
        plan = AugmentationPlan.from_json_dict(plan_doc)
        validate_plan(plan, self.dataset.schema)
        pool = eligible_pool(self.current_dataset(), plan)
        pid = plan_id or self._allocate("plan")
        self.plans[pid] = plan
        self.last_plan_id = pid
        self.log.append(
            "planned",
            {"plan_id": pid, "plan": plan.to_json_dict(), "eligible_pool_size": len(pool)},
            self.clock(),
        )
        return pid, plan, len(pool)

    def generate(self, plan_id: str | None = None) -> GeneratedBatch:
        pid, plan = self.plan_of(plan_id)
        batch = generate(self.current_dataset(), plan)
        if batch.id in self.batches:
            batch = self.batches[batch.id]  # regeneration is idempotent
        else:
            self.batches[batch.id] = batch
            self.batch_versions[batch.id] = 1
        self.batch_plan_ids[batch.id] = pid
        self.last_batch_id = batch.id
        self.log.append(
            "generated",
            {
                "plan_id": pid,
                "batch_id": batch.id,
                "produced_count": batch.produced_count,
                "attempts_used": batch.attempts_used,
            },
            self.clock(),
        )
        return batch

    def annotate(
        self,
        batch_id: str | None = None,
        model_id: str | None = None,
        confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
        expected_version: int | None = None,
    ) -> dict[str, Any]:
        bid, batch = self.batch_of(batch_id)
        mid, model = self.model_of(model_id)
        self._check_batch_version(bid, expected_version)
        flagged = annotate_batch(batch, model, confidence_threshold)
        self.batch_versions[bid] += 1
        # Annotations are recomputable from the model and never reach an
        # export, so they carry no log record of their own.
        return {
            "batch_id": bid,
            "model_id": mid,
            "confidence_threshold": confidence_threshold,
            "flagged_count": flagged,
            "version": self.batch_versions[bid],
        }

    def filter(
        self, batch_id: str | None, predicate_doc: dict[str, Any]
    ) -> tuple[list[str], list[str]]:
        bid, batch = self.batch_of(batch_id)
        predicate = FilterPredicate.from_json_dict(predicate_doc)
        matching, rest = filter_batch(batch, predicate, self.dataset.schema)
        self.log.append(
            "filtered",
            {
                "batch_id": bid,
                "predicate": predicate.to_json_dict(),
                "matching_count": len(matching),
                "non_matching_count": len(rest),
            },
            self.clock(),
        )
        return matching, rest

    def remove(
        self,
        batch_id: str | None,
        raw_sample_ids: Sequence[Any],
        expected_version: int | None = None,
    ) -> dict[str, Any]:
        bid, batch = self.batch_of(batch_id)
        self._check_batch_version(bid, expected_version)
        sample_ids = self.resolve_sample_ids(batch, raw_sample_ids)
        removed = remove_samples(batch, sample_ids)
        self.batch_versions[bid] += 1
        self.log.append(
            "removed",
            {"batch_id": bid, "sample_ids": sample_ids},
            self.clock(),
        )
        return {"batch_id": bid, "removed_count": removed, "version": self.batch_versions[bid]}

    def what_if(
        self,
        batch_id: str | None,
        sample_id: str,
        edits_doc: Any,
        model_id: str | None = None,
    ) -> dict[str, Any]:
        bid, batch = self.batch_of(batch_id)
        mid, model = self.model_of(model_id)
        sample_id = self.resolve_sample_ids(batch, [sample_id])[0]
        edits = _edits_from_doc(edits_doc)
        candidate, new, old = what_if(batch, sample_id, edits, model, self.dataset.schema)
        self.log.append(
            "what_if",
            {
                "batch_id": bid,
                "sample_id": sample_id,
                "edits": _edits_to_doc(edits),
                "model_id": mid,
            },
            self.clock(),
        )
        return {
            "batch_id": bid,
            "sample_id": sample_id,
            "model_id": mid,
            "candidate_values": {
                var.name: v for var, v in zip(self.dataset.schema, candidate)
            },
            "old_prediction": old.to_json_dict(),
            "new_prediction": new.to_json_dict(),
        }

    def edit(
        self,
        batch_id: str | None,
        sample_id: str,
        edits_doc: Any,
        expected_version: int | None = None,
    ) -> dict[str, Any]:
        bid, batch = self.batch_of(batch_id)
        self._check_batch_version(bid, expected_version)
        sample_id = self.resolve_sample_ids(batch, [sample_id])[0]
        edits = _edits_from_doc(edits_doc)
        sample = commit_edit(batch, sample_id, edits, self.dataset.schema)
        self.batch_versions[bid] += 1
        self.log.append(
            "modified",
            {"batch_id": bid, "sample_id": sample_id, "edits": _edits_to_doc(edits)},
            self.clock(),
        )
        return {
            "batch_id": bid,
            "sample_id": sample_id,
            "status": sample.status,
            "edit_count": len(sample.edit_history),
            "version": self.batch_versions[bid],
        }

    def accept(
        self,
        batch_id: str | None,
        raw_sample_ids: Sequence[Any],
        expected_version: int | None = None,
    ) -> dict[str, Any]:
        bid, batch = self.batch_of(batch_id)
        self._check_batch_version(bid, expected_version)
        sample_ids = self.resolve_sample_ids(batch, raw_sample_ids)
        self.augmented = accept_batch(self.augmented, batch, sample_ids)
        self.batch_versions[bid] += 1
        self.dataset_version += 1
        self.log.append(
            "accepted",
            {
                "batch_id": bid,
                "plan_id": self.batch_plan_ids.get(bid),
                "sample_ids": sample_ids,
                "count": len(sample_ids),
            },
            self.clock(),
        )
        return {
            "batch_id": bid,
            "accepted_count": len(sample_ids),
            "dataset_version": self.dataset_version,
            "version": self.batch_versions[bid],
            "row_count": self.augmented.row_count,
        }

    def export(self, include_provenance: bool) -> str:
        text = export_csv(self.augmented, include_provenance)
        self.log.append(
            "exported",
            {
                "provenance": include_provenance,
                "row_count": self.augmented.row_count,
                "csv_sha256": _sha256(text),
            },
            self.clock(),
        )
        return text


# ---------------------------------------------------------------------------
# Replay


@dataclass
class ReplayResult:
    session: Session
    exports: dict[int, str] = field(default_factory=dict)  # log seq -> csv text


def replay_log(dataset: Dataset, records: Sequence[LogRecord]) -> ReplayResult:
    """Re-execute a session log against its original dataset.

    Each step runs with the recorded timestamp, so a faithful replay
    reproduces the log byte-for-byte; any difference in outcome (ids, hashes,
    counts) raises ReplayDivergence.
    """
    session: Session | None = None
    result_exports: dict[int, str] = {}
    for record in records:
        payload = record.payload
        if record.action == "loaded":
            if session is not None:
                raise ReplayDivergence("log loads a dataset twice")
            if payload.get("dataset_id") != dataset.id:
                raise ReplayDivergence(
                    f"log was recorded for dataset {payload.get('dataset_id')!r}, "
                    f"got {dataset.id!r}"
                )
            session = Session("replay", dataset, clock=fixed_clock(record.timestamp))
            session.log.append("loaded", payload, record.timestamp)
            continue
        if session is None:
            raise ReplayDivergence("log does not start with a loaded record")
        session.clock = fixed_clock(record.timestamp)
        if record.action == "trained":
            session.train(
                payload.get("config"),
                payload.get("scope", "original"),
                payload.get("folds", DEFAULT_FOLDS),
                model_id=payload["model_id"],
            )
        elif record.action == "planned":
            pid, _plan, pool_size = session.plan(payload["plan"], plan_id=payload["plan_id"])
            if pool_size != payload.get("eligible_pool_size", pool_size):
                raise ReplayDivergence(
                    f"plan {pid} pool size {pool_size} != recorded "
                    f"{payload['eligible_pool_size']}"
                )
        elif record.action == "generated":
            batch = session.generate(payload["plan_id"])
            if batch.id != payload["batch_id"]:
                raise ReplayDivergence(
                    f"generated batch {batch.id}, log recorded {payload['batch_id']}"
                )
        elif record.action == "filtered":
            try:
                matching, _rest = session.filter(payload["batch_id"], payload["predicate"])
            except UnannotatedBatch:
                # Annotation carries no log record (it is derived state that
                # never reaches an export), so a prediction-clause filter may
                # not be re-executable; keep the recorded outcome.
                session.log.append("filtered", payload, record.timestamp)
            else:
                if len(matching) != payload["matching_count"]:
                    raise ReplayDivergence("filter matched a different number of samples")
        elif record.action == "removed":
            session.remove(payload["batch_id"], payload["sample_ids"])
        elif record.action == "modified":
            session.edit(payload["batch_id"], payload["sample_id"], payload["edits"])
        elif record.action == "what_if":
            session.what_if(
                payload["batch_id"],
                payload["sample_id"],
                payload["edits"],
                payload["model_id"],
            )
        elif record.action == "accepted":
            session.accept(payload["batch_id"], payload["sample_ids"])
        elif record.action == "exported":
            text = session.export(payload["provenance"])
            if _sha256(text) != payload.get("csv_sha256", _sha256(text)):
                raise ReplayDivergence("replayed export differs from the recorded hash")
            result_exports[record.seq] = text
        else:
            raise ReplayDivergence(f"unknown action {record.action!r}")
    if session is None:
        raise ReplayDivergence("log is empty")
    return ReplayResult(session=session, exports=result_exports)
