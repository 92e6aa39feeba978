"""On-disk persistence: every resource is a plain JSON or CSV document.

Layout under the store root:

    counters.json                       server-assigned id counters
    index.json                          resource id -> {kind, session}
    datasets/<did>/schema.json          declared schema
    datasets/<did>/rows.csv             original upload, byte-preserved
    datasets/<did>/meta.json
    sessions/<sid>/state.json           versions, acceptance order, pointers
    sessions/<sid>/log.ndjson           audit log
    sessions/<sid>/models/<mid>.json
    sessions/<sid>/plans/<pid>.json
    sessions/<sid>/batches/<bid>.json

A session is loaded whole, mutated in memory, and written back whole; the
tool is single-process and desk-scale by design.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

from .augment import AugmentationPlan, batch_from_json_dict, batch_to_json_dict
from .errors import InvalidValue, NotFound
from .model import Model
from .session import Clock, Session, SessionLog, TrainResult
from .tabular import Dataset, SubgroupKey, load_dataset, schema_from_json, schema_to_json


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path: Path, doc: Any) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def _train_result_to_doc(result: TrainResult) -> dict[str, Any]:
    return {
        "model_id": result.model_id,
        "scope": result.scope,
        "folds": result.folds,
        "overall_accuracy": result.overall_accuracy,
        "accuracies": {
            var: [{"label": key.label, "accuracy": acc} for key, acc in per_group.items()]
            for var, per_group in result.accuracies.items()
        },
        "model": result.model.to_json_dict(),
    }


def _train_result_from_doc(doc: dict[str, Any]) -> TrainResult:
    return TrainResult(
        model_id=doc["model_id"],
        model=Model.from_json_dict(doc["model"]),
        scope=doc["scope"],
        folds=int(doc["folds"]),
        overall_accuracy=float(doc["overall_accuracy"]),
        accuracies={
            var: {
                SubgroupKey(var, entry["label"]): entry["accuracy"]
                for entry in entries
            }
            for var, entries in doc["accuracies"].items()
        },
    )


class Store:
    def __init__(self, root: str | Path, clock: Clock | None = None) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.clock = clock

    # -- id management -------------------------------------------------------

    def _counters_path(self) -> Path:
        return self.root / "counters.json"

    def allocate(self, kind: str) -> str:
        path = self._counters_path()
        counters = _read_json(path) if path.exists() else {}
        counters[kind] = counters.get(kind, 0) + 1
        _write_json(path, counters)
        return f"{kind[0]}{counters[kind]}"

    def _index_path(self) -> Path:
        return self.root / "index.json"

    def _index(self) -> dict[str, dict[str, str]]:
        path = self._index_path()
        return _read_json(path) if path.exists() else {}

    def _register(self, entries: dict[str, dict[str, str]]) -> None:
        index = self._index()
        index.update(entries)
        _write_json(self._index_path(), index)

    # -- sessions --------------------------------------------------------------

    def create_session(self, csv_bytes: bytes, schema_bytes: bytes | str) -> Session:
        """Load an uploaded dataset and open its session."""
        schema = schema_from_json(schema_bytes)
        try:
            csv_text = csv_bytes.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidValue(f"CSV is not valid UTF-8: {exc}") from None
        number = self.allocate("dataset")[1:]
        dataset_id, session_id = f"d{number}", f"s{number}"
        dataset = load_dataset(csv_text, schema, dataset_id=dataset_id)

        ddir = self.root / "datasets" / dataset_id
        _write(ddir / "rows.csv", csv_text)
        _write_json(ddir / "schema.json", schema_to_json(schema))
        _write_json(
            ddir / "meta.json", {"dataset_id": dataset_id, "session_id": session_id}
        )
        self._register(
            {
                dataset_id: {"kind": "dataset", "session": session_id},
                session_id: {"kind": "session", "session": session_id},
            }
        )

        session = Session(
            session_id, dataset, clock=self.clock, allocate=self.allocate
        )
        session.log_loaded(csv_text)
        self.save(session)
        return session

    def session_ids(self) -> list[str]:
        sessions_dir = self.root / "sessions"
        if not sessions_dir.exists():
            return []
        return sorted(p.name for p in sessions_dir.iterdir() if p.is_dir())

    def session_for(self, kind: str, resource_id: str) -> Session:
        """Load the session owning a resource, checking the resource's kind."""
        entry = self._index().get(resource_id)
        if entry is None or entry["kind"] != kind:
            raise NotFound(kind, resource_id)
        return self.load_session(entry["session"])

    def load_session(self, session_id: str) -> Session:
        sdir = self.root / "sessions" / session_id
        if not sdir.exists():
            raise NotFound("session", session_id)
        state = _read_json(sdir / "state.json")
        dataset_id = state["dataset_id"]
        ddir = self.root / "datasets" / dataset_id
        schema = schema_from_json(_read_json(ddir / "schema.json"))
        dataset = load_dataset(
            (ddir / "rows.csv").read_text(encoding="utf-8"), schema, dataset_id=dataset_id
        )

        session = Session(session_id, dataset, clock=self.clock, allocate=self.allocate)
        session.log = SessionLog.from_ndjson(
            (sdir / "log.ndjson").read_text(encoding="utf-8")
        )
        models_dir = sdir / "models"
        if models_dir.exists():
            for path in sorted(models_dir.glob("*.json")):
                result = _train_result_from_doc(_read_json(path))
                session.models[result.model_id] = result.model
                session.train_results[result.model_id] = result
        plans_dir = sdir / "plans"
        if plans_dir.exists():
            for path in sorted(plans_dir.glob("*.json")):
                session.plans[path.stem] = AugmentationPlan.from_json_dict(_read_json(path))
        batches_dir = sdir / "batches"
        if batches_dir.exists():
            for path in sorted(batches_dir.glob("*.json")):
                batch = batch_from_json_dict(_read_json(path), dataset.schema)
                session.batches[batch.id] = batch
        session.batch_versions = {k: int(v) for k, v in state["batch_versions"].items()}
        session.batch_plan_ids = dict(state.get("batch_plan_ids", {}))
        session.dataset_version = int(state["dataset_version"])
        session.last_model_id = state.get("last_model_id")
        session.last_plan_id = state.get("last_plan_id")
        session.last_batch_id = state.get("last_batch_id")
        for ref in state["accepted"]:
            batch = session.batches[ref["batch_id"]]
            session.augmented.accepted.append(batch.sample(ref["sample_id"]))
        return session

    def save(self, session: Session) -> None:
        sdir = self.root / "sessions" / session.session_id
        accepted_refs = []
        sample_owner = {
            s.id: b.id for b in session.batches.values() for s in b.samples
        }
        for s in session.augmented.accepted:
            accepted_refs.append({"batch_id": sample_owner[s.id], "sample_id": s.id})
        _write_json(
            sdir / "state.json",
            {
                "session_id": session.session_id,
                "dataset_id": session.dataset.id,
                "dataset_version": session.dataset_version,
                "batch_versions": session.batch_versions,
                "batch_plan_ids": session.batch_plan_ids,
                "accepted": accepted_refs,
                "last_model_id": session.last_model_id,
                "last_plan_id": session.last_plan_id,
                "last_batch_id": session.last_batch_id,
            },
        )
        _write(sdir / "log.ndjson", session.log.to_ndjson())
        entries: dict[str, dict[str, str]] = {}
        for mid, result in session.train_results.items():
            _write_json(sdir / "models" / f"{mid}.json", _train_result_to_doc(result))
            entries[mid] = {"kind": "model", "session": session.session_id}
        for pid, plan in session.plans.items():
            _write_json(sdir / "plans" / f"{pid}.json", plan.to_json_dict())
            entries[pid] = {"kind": "plan", "session": session.session_id}
        for bid, batch in session.batches.items():
            _write_json(
                sdir / "batches" / f"{bid}.json",
                batch_to_json_dict(batch, session.dataset.schema),
            )
            entries[bid] = {"kind": "batch", "session": session.session_id}
        if entries:
            self._register(entries)

    def original_csv_text(self, dataset_id: str) -> str:
        path = self.root / "datasets" / dataset_id / "rows.csv"
        if not path.exists():
            raise NotFound("dataset", dataset_id)
        return path.read_text(encoding="utf-8")
