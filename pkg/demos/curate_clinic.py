"""Walk the full loop once: audit, train, generate, curate, export, replay.

Runs entirely in memory against the clinic table in demos/data/, then proves
the audit log is complete by replaying it and comparing exports byte for
byte.
"""

from __future__ import annotations

from pathlib import Path

from debias_workbench import load_dataset, replay_log, schema_from_json
from debias_workbench.session import Session, fixed_clock

DATA = Path(__file__).parent / "data"

PLAN = {
    "target_class": "high",
    "requested_count": 15,
    "constraints": [
        {"variable": "age", "interval": [40, 75]},
        {"variable": "smoker", "allowed": ["former", "current"]},
    ],
    "seed": 7,
}


def main() -> None:
    csv_text = (DATA / "clinic_rows.csv").read_text()
    schema = schema_from_json((DATA / "clinic_schema.json").read_text())
    dataset = load_dataset(csv_text, schema)

    session = Session("demo", dataset, clock=fixed_clock("2024-05-01T12:00:00.000000Z"))
    session.log_loaded(csv_text)

    result = session.train({"iterations": 200})
    print(f"trained {result.model_id}: held-out accuracy {result.overall_accuracy:.2f}")

    plan_id, _plan, pool = session.plan(PLAN)
    print(f"plan {plan_id}: {pool} eligible parent rows")

    batch = session.generate()
    print(f"batch {batch.id}: {batch.produced_count} samples, all constraint-checked")

    flagged = session.annotate()
    print(f"annotated: {flagged['flagged_count']} flagged as problematic")

    matching, _rest = session.filter(
        None, {"confidence": {"comparator": "<", "threshold": 0.7}}
    )
    print(f"{len(matching)} samples below 0.7 confidence")
    if matching:
        session.remove(None, matching[:1])
        print(f"removed {matching[0]}")

    preview = session.what_if(
        None, batch.samples[-1].id, [{"variable": "age", "value": 74}]
    )
    print(
        "what-if age=74:",
        preview["old_prediction"]["label"],
        "->",
        preview["new_prediction"]["label"],
    )

    keep = [s.id for s in batch.samples if s.status == "pending"][:8]
    accepted = session.accept(None, keep)
    print(f"accepted {accepted['accepted_count']}; dataset now {accepted['row_count']} rows")

    export = session.export(include_provenance=True)
    print(f"export: {len(export.splitlines()) - 1} rows incl. provenance columns")

    replayed = replay_log(dataset, session.log.records)
    same = list(replayed.exports.values())[-1] == export
    print(f"log replay reproduces the export byte-for-byte: {same}")


if __name__ == "__main__":
    main()
