"""Command-line surface.

Every subcommand prints a parseable JSON document on stdout (or an aligned
table with --format table) and reports failures as JSON on stderr with a
stable exit code:

    0  success
    1  validation error (bad arguments or malformed input documents)
    2  engine error (a workbench operation refused, e.g. INSUFFICIENT_ELIGIBLE_SAMPLES)
    3  I/O error

Document-valued flags accept inline JSON or ``@path`` to read a file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .errors import WorkbenchError
from .metrics import bias_report
from .session import Session, fixed_clock
from .store import Store
from .tabular import load_dataset, schema_from_json

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ENGINE = 2
EXIT_IO = 3


class _InputError(Exception):
    """User-supplied arguments or documents failed validation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _InputError(message)


def _doc_arg(value: str) -> Any:
    """Decode a document flag: inline JSON, or @path to a JSON file."""
    if value.startswith("@"):
        text = Path(value[1:]).read_text(encoding="utf-8")
    else:
        text = value
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _InputError(f"not valid JSON ({exc}): {value[:80]}") from None


def _input(fn, *args, **kwargs):
    """Run an input-parsing step; engine rejections count as validation."""
    try:
        return fn(*args, **kwargs)
    except WorkbenchError as exc:
        raise _InputError(exc.message) from None


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", help="store directory")
    common.add_argument("--data", help="CSV file")
    common.add_argument("--schema", help="schema JSON file")
    common.add_argument("--seed", type=int, help="override the seed of the config/plan")
    common.add_argument("--format", choices=["json", "table"], default="json")
    common.add_argument("--out", help="write the primary output to this file")
    common.add_argument(
        "--fixed-time", help="pin log timestamps to this ISO-8601 instant"
    )

    parser = _Parser(prog="debias-workbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", parents=[common], help="representation-bias report")
    p.add_argument("--dataset", help="dataset id inside the store")
    p.add_argument("--threshold", type=int, help="coverage threshold")

    p = sub.add_parser("train", parents=[common], help="train and evaluate a model")
    p.add_argument("--dataset", help="dataset id inside the store")
    p.add_argument("--config", help="ModelConfig JSON (inline or @file)")
    p.add_argument("--scope", choices=["original", "augmented"], default="original")
    p.add_argument("--folds", type=int, default=5)

    p = sub.add_parser("plan", parents=[common], help="create an augmentation plan")
    p.add_argument("--dataset", help="dataset id inside the store")
    p.add_argument("--plan", required=True, help="AugmentationPlan JSON (inline or @file)")

    p = sub.add_parser("generate", parents=[common], help="generate a sample batch")
    p.add_argument("--dataset", help="dataset id inside the store")
    p.add_argument("--plan-id", help="plan id (default: latest plan)")

    p = sub.add_parser("annotate", parents=[common], help="predict and flag a batch")
    p.add_argument("--batch-id", help="batch id (default: latest batch)")
    p.add_argument("--model-id", help="model id (default: latest model)")
    p.add_argument("--confidence-threshold", type=float, default=0.6)
    p.add_argument("--expected-version", type=int)

    p = sub.add_parser("filter", parents=[common], help="partition a batch by predicate")
    p.add_argument("--batch-id", help="batch id (default: latest batch)")
    p.add_argument("--predicate", required=True, help="FilterPredicate JSON (inline or @file)")

    p = sub.add_parser("remove", parents=[common], help="remove samples from a batch")
    p.add_argument("--batch-id", help="batch id (default: latest batch)")
    p.add_argument("--ids", required=True, help="JSON list of sample ids or indexes")
    p.add_argument("--expected-version", type=int)

    p = sub.add_parser("whatif", parents=[common], help="preview a sample edit")
    p.add_argument("--batch-id", help="batch id (default: latest batch)")
    p.add_argument("--sample", required=True, help="sample id or index")
    p.add_argument("--edits", required=True, help="JSON list of {variable, value}")
    p.add_argument("--model-id", help="model id (default: latest model)")

    p = sub.add_parser("edit", parents=[common], help="commit a sample edit")
    p.add_argument("--batch-id", help="batch id (default: latest batch)")
    p.add_argument("--sample", required=True, help="sample id or index")
    p.add_argument("--edits", required=True, help="JSON list of {variable, value}")
    p.add_argument("--expected-version", type=int)

    p = sub.add_parser("accept", parents=[common], help="accept samples into the dataset")
    p.add_argument("--batch-id", help="batch id (default: latest batch)")
    p.add_argument("--ids", required=True, help="JSON list of sample ids or indexes")
    p.add_argument("--expected-version", type=int)

    p = sub.add_parser("export", parents=[common], help="export the augmented dataset")
    p.add_argument("--dataset", help="dataset id inside the store")
    p.add_argument("--provenance", action="store_true")

    p = sub.add_parser("replay", parents=[common], help="run a session script")
    p.add_argument("--script", required=True, help="SessionScript JSON file")

    p = sub.add_parser("serve", parents=[common], help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)

    return parser


def _store_of(args: argparse.Namespace) -> Store:
    if not args.store:
        raise _InputError(f"{args.command} needs --store")
    clock = fixed_clock(args.fixed_time) if args.fixed_time else None
    return Store(args.store, clock=clock)


def _session_of(args: argparse.Namespace, store: Store) -> Session:
    dataset_id = getattr(args, "dataset", None)
    if dataset_id:
        return store.session_for("dataset", dataset_id)
    if args.data and args.schema:
        csv_bytes = Path(args.data).read_bytes()
        schema_bytes = Path(args.schema).read_text(encoding="utf-8")
        return _input(store.create_session, csv_bytes, schema_bytes)
    ids = store.session_ids()
    if len(ids) == 1:
        return store.load_session(ids[0])
    raise _InputError(
        "specify --dataset (or --data/--schema to load one); "
        f"the store holds {len(ids)} sessions"
    )


def _batch_session(args: argparse.Namespace, store: Store) -> tuple[Session, str | None]:
    if args.batch_id:
        return store.session_for("batch", args.batch_id), args.batch_id
    ids = store.session_ids()
    if len(ids) == 1:
        return store.load_session(ids[0]), None
    raise _InputError(f"specify --batch-id; the store holds {len(ids)} sessions")


def _sample_ref(raw: str) -> Any:
    try:
        return int(raw)
    except ValueError:
        return raw


# ---------------------------------------------------------------------------
# Command implementations


def _cmd_audit(args: argparse.Namespace) -> dict[str, Any]:
    if args.data and args.schema:
        schema = _input(schema_from_json, Path(args.schema).read_text(encoding="utf-8"))
        dataset = _input(load_dataset, Path(args.data).read_bytes(), schema)
        return bias_report(dataset, coverage_threshold=args.threshold).to_json_dict()
    store = _store_of(args)
    session = _session_of(args, store)
    return session.bias(coverage_threshold=args.threshold).to_json_dict()


def _cmd_train(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session = _session_of(args, store)
    config = _doc_arg(args.config) if args.config else {}
    if not isinstance(config, dict):
        raise _InputError("--config must be a JSON object")
    if args.seed is not None:
        config["seed"] = args.seed
    result = session.train(config, scope=args.scope, folds=args.folds)
    store.save(session)
    return result.to_json_dict()


def _cmd_plan(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session = _session_of(args, store)
    plan_doc = _doc_arg(args.plan)
    if not isinstance(plan_doc, dict):
        raise _InputError("--plan must be a JSON object")
    if args.seed is not None:
        plan_doc["seed"] = args.seed
    plan_id, _plan, pool_size = session.plan(plan_doc)
    store.save(session)
    return {"plan_id": plan_id, "eligible_pool_size": pool_size}


def _cmd_generate(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    if args.plan_id:
        session = store.session_for("plan", args.plan_id)
    else:
        session = _session_of(args, store)
    batch = session.generate(args.plan_id)
    store.save(session)
    return {
        "batch_id": batch.id,
        "produced_count": batch.produced_count,
        "attempts_used": batch.attempts_used,
        "version": session.batch_versions[batch.id],
    }


def _cmd_annotate(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session, batch_id = _batch_session(args, store)
    result = session.annotate(
        batch_id,
        model_id=args.model_id,
        confidence_threshold=args.confidence_threshold,
        expected_version=args.expected_version,
    )
    store.save(session)
    return result


def _cmd_filter(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session, batch_id = _batch_session(args, store)
    predicate = _doc_arg(args.predicate)
    matching, non_matching = session.filter(batch_id, predicate)
    store.save(session)
    return {
        "batch_id": batch_id or session.last_batch_id,
        "matching": matching,
        "non_matching": non_matching,
    }


def _cmd_remove(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session, batch_id = _batch_session(args, store)
    ids = _doc_arg(args.ids)
    if not isinstance(ids, list):
        raise _InputError("--ids must be a JSON list")
    result = session.remove(batch_id, ids, expected_version=args.expected_version)
    store.save(session)
    return result


def _cmd_whatif(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session, batch_id = _batch_session(args, store)
    result = session.what_if(
        batch_id, _sample_ref(args.sample), _doc_arg(args.edits), model_id=args.model_id
    )
    store.save(session)
    return result


def _cmd_edit(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session, batch_id = _batch_session(args, store)
    result = session.edit(
        batch_id,
        _sample_ref(args.sample),
        _doc_arg(args.edits),
        expected_version=args.expected_version,
    )
    store.save(session)
    return result


def _cmd_accept(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session, batch_id = _batch_session(args, store)
    ids = _doc_arg(args.ids)
    if not isinstance(ids, list):
        raise _InputError("--ids must be a JSON list")
    result = session.accept(batch_id, ids, expected_version=args.expected_version)
    store.save(session)
    return result


def _cmd_export(args: argparse.Namespace) -> dict[str, Any]:
    store = _store_of(args)
    session = _session_of(args, store)
    text = session.export(args.provenance)
    store.save(session)
    summary = {
        "dataset_id": session.dataset.id,
        "provenance": args.provenance,
        "row_count": session.augmented.row_count,
    }
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        summary["out"] = args.out
    else:
        summary["csv"] = text
    return summary


def run_script(store: Store, script: dict[str, Any], script_dir: Path) -> dict[str, Any]:
    """Execute a SessionScript: commands mirroring the HTTP request bodies.

    File paths inside the script (load csv/schema) resolve against the
    script's directory; export ``out`` paths resolve against the working
    directory.
    """
    if not isinstance(script, dict) or not isinstance(script.get("commands"), list):
        raise _InputError("script must be a JSON object with a 'commands' list")
    session: Session | None = None
    results: list[dict[str, Any]] = []

    def need_session() -> Session:
        if session is None:
            raise _InputError("script must load a dataset before other commands")
        return session

    for i, cmd in enumerate(script["commands"]):
        if not isinstance(cmd, dict) or "action" not in cmd:
            raise _InputError(f"command {i} needs an 'action'")
        action = cmd["action"]
        if action == "load":
            csv_path = script_dir / cmd["csv"]
            schema_path = script_dir / cmd["schema"]
            session = store.create_session(
                csv_path.read_bytes(), schema_path.read_text(encoding="utf-8")
            )
            results.append(
                {
                    "action": action,
                    "dataset_id": session.dataset.id,
                    "session_id": session.session_id,
                }
            )
            continue
        s = need_session()
        if action == "train":
            result = s.train(
                cmd.get("config"), cmd.get("scope", "original"), cmd.get("folds", 5)
            )
            results.append({"action": action, "model_id": result.model_id})
        elif action == "plan":
            plan_id, _plan, pool_size = s.plan(cmd["plan"])
            results.append(
                {"action": action, "plan_id": plan_id, "eligible_pool_size": pool_size}
            )
        elif action == "generate":
            batch = s.generate(cmd.get("plan_id"))
            results.append(
                {
                    "action": action,
                    "batch_id": batch.id,
                    "produced_count": batch.produced_count,
                    "attempts_used": batch.attempts_used,
                }
            )
        elif action == "annotate":
            summary = s.annotate(
                cmd.get("batch_id"),
                model_id=cmd.get("model_id"),
                confidence_threshold=cmd.get("confidence_threshold", 0.6),
            )
            results.append({"action": action, **summary})
        elif action == "filter":
            matching, non_matching = s.filter(cmd.get("batch_id"), cmd["predicate"])
            results.append(
                {
                    "action": action,
                    "matching_count": len(matching),
                    "non_matching_count": len(non_matching),
                }
            )
        elif action == "remove":
            summary = s.remove(cmd.get("batch_id"), cmd["ids"])
            results.append({"action": action, **summary})
        elif action == "whatif":
            summary = s.what_if(
                cmd.get("batch_id"),
                cmd["sample_id"],
                cmd.get("edits", []),
                model_id=cmd.get("model_id"),
            )
            results.append({"action": action, "sample_id": summary["sample_id"]})
        elif action == "edit":
            summary = s.edit(cmd.get("batch_id"), cmd["sample_id"], cmd.get("edits", []))
            results.append({"action": action, **summary})
        elif action == "accept":
            summary = s.accept(cmd.get("batch_id"), cmd["ids"])
            results.append({"action": action, **summary})
        elif action == "export":
            text = s.export(cmd.get("provenance", False))
            entry: dict[str, Any] = {"action": action, "row_count": s.augmented.row_count}
            if cmd.get("out"):
                Path(cmd["out"]).write_text(text, encoding="utf-8")
                entry["out"] = cmd["out"]
            results.append(entry)
        else:
            raise _InputError(f"command {i}: unknown action {action!r}")
        store.save(s)
    return {"steps": len(results), "results": results}


def _cmd_replay(args: argparse.Namespace) -> dict[str, Any]:
    script_path = Path(args.script)
    try:
        script = json.loads(script_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise _InputError(f"script is not valid JSON: {exc}") from None
    if args.store:
        store = _store_of(args)
    else:
        import tempfile

        clock = fixed_clock(args.fixed_time) if args.fixed_time else None
        store = Store(tempfile.mkdtemp(prefix="debias-workbench-"), clock=clock)
    return run_script(store, script, script_path.parent)


def _cmd_serve(args: argparse.Namespace) -> dict[str, Any]:
    import uvicorn

    from .service import create_app

    store = _store_of(args)
    uvicorn.run(create_app(store), host=args.host, port=args.port, log_level="warning")
    return {"stopped": True}


_COMMANDS = {
    "audit": _cmd_audit,
    "train": _cmd_train,
    "plan": _cmd_plan,
    "generate": _cmd_generate,
    "annotate": _cmd_annotate,
    "filter": _cmd_filter,
    "remove": _cmd_remove,
    "whatif": _cmd_whatif,
    "edit": _cmd_edit,
    "accept": _cmd_accept,
    "export": _cmd_export,
    "replay": _cmd_replay,
    "serve": _cmd_serve,
}


def _render_table(doc: Any, indent: str = "") -> str:
    if isinstance(doc, dict):
        width = max((len(str(k)) for k in doc), default=0)
        lines = []
        for k, v in doc.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}{str(k).ljust(width)}")
                lines.append(_render_table(v, indent + "  "))
            else:
                lines.append(f"{indent}{str(k).ljust(width)}  {v}")
        return "\n".join(lines)
    if isinstance(doc, list):
        return "\n".join(_render_table(v, indent + "- ") for v in doc) or f"{indent}(empty)"
    return f"{indent}{doc}"


def _emit(args: argparse.Namespace, result: dict[str, Any]) -> None:
    if getattr(args, "format", "json") == "table":
        print(_render_table(result))
    else:
        print(json.dumps(result, indent=2))
    out = getattr(args, "out", None)
    if out and args.command not in ("export",):
        Path(out).write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _InputError as exc:
        print(json.dumps({"error": {"code": "USAGE", "message": str(exc)}}), file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = _COMMANDS[args.command](args)
    except _InputError as exc:
        print(
            json.dumps({"error": {"code": "VALIDATION", "message": str(exc)}}),
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    except WorkbenchError as exc:
        print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)
        return EXIT_ENGINE
    except OSError as exc:
        print(
            json.dumps({"error": {"code": "IO_ERROR", "message": str(exc)}}), file=sys.stderr
        )
        return EXIT_IO
    _emit(args, result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
