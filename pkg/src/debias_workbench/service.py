"""HTTP service exposing the workbench over REST.

Handlers are thin: locate the owning session, call one Session method,
persist, respond.  All engine errors surface as structured ApiError JSON
with stable codes; nothing engine-raised becomes a bare 500.
"""

from __future__ import annotations

from typing import Any

from fastapi import Body, FastAPI, File, Request, Response, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .augment import batch_to_json_dict
from .errors import InvalidValue, WorkbenchError
from .session import Session
from .store import Store
from .tabular import schema_to_json


def _batch_doc(session: Session, batch_id: str) -> dict[str, Any]:
    batch = session.batches[batch_id]
    doc = batch_to_json_dict(batch, session.dataset.schema)
    doc["version"] = session.batch_versions[batch_id]
    return doc


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="debias-workbench", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(WorkbenchError)
    async def workbench_error(_request: Request, exc: WorkbenchError) -> JSONResponse:
        return JSONResponse(status_code=exc.http_status, content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def request_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": "BAD_REQUEST", "message": str(exc), "details": {}},
        )

    # -- datasets -------------------------------------------------------------

    @app.post("/datasets", status_code=201)
    async def create_dataset(
        csv: UploadFile = File(...),
        schema_file: UploadFile = File(..., alias="schema"),
    ) -> dict[str, Any]:
        csv_bytes = await csv.read()
        schema_bytes = await schema_file.read()
        session = store.create_session(csv_bytes, schema_bytes)
        return {
            "dataset_id": session.dataset.id,
            "session_id": session.session_id,
            "row_count": len(session.dataset.rows),
            "version": session.dataset_version,
        }

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str) -> dict[str, Any]:
        session = store.session_for("dataset", dataset_id)
        merged = session.current_dataset()
        return {
            "dataset_id": dataset_id,
            "session_id": session.session_id,
            "version": session.dataset_version,
            "row_count": len(merged.rows),
            "original_row_count": len(session.dataset.rows),
            "accepted_count": len(session.augmented.accepted),
            "schema": schema_to_json(merged.schema),
            "target_variable": merged.target.name,
        }

    @app.get("/datasets/{dataset_id}/bias")
    def get_bias(dataset_id: str, threshold: int | None = None) -> dict[str, Any]:
        session = store.session_for("dataset", dataset_id)
        return session.bias(coverage_threshold=threshold).to_json_dict()

    @app.get("/datasets/{dataset_id}/variables/{variable}/subgroups")
    def get_subgroups(dataset_id: str, variable: str) -> dict[str, Any]:
        session = store.session_for("dataset", dataset_id)
        return session.subgroups_doc(variable)

    @app.post("/datasets/{dataset_id}/models", status_code=201)
    def train_model(dataset_id: str, body: dict[str, Any] = Body(default={})) -> dict[str, Any]:
        session = store.session_for("dataset", dataset_id)
        if not isinstance(body, dict):
            raise InvalidValue("request body must be a JSON object")
        body = dict(body)
        scope = body.pop("scope", "original")
        folds = body.pop("folds", 5)
        if not isinstance(folds, int) or isinstance(folds, bool):
            raise InvalidValue("folds must be an integer")
        result = session.train(body, scope=scope, folds=folds)
        store.save(session)
        return result.to_json_dict()

    @app.get("/models/{model_id}")
    def get_model(model_id: str) -> dict[str, Any]:
        session = store.session_for("model", model_id)
        return session.train_results[model_id].to_json_dict()

    @app.post("/datasets/{dataset_id}/plans", status_code=201)
    def create_plan(dataset_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = store.session_for("dataset", dataset_id)
        plan_id, _plan, pool_size = session.plan(body)
        store.save(session)
        return {"plan_id": plan_id, "eligible_pool_size": pool_size}

    @app.get("/plans/{plan_id}")
    def get_plan(plan_id: str) -> dict[str, Any]:
        session = store.session_for("plan", plan_id)
        return {"plan_id": plan_id, "plan": session.plans[plan_id].to_json_dict()}

    # -- generation and curation ----------------------------------------------

    @app.post("/plans/{plan_id}/generate", status_code=201)
    def generate(plan_id: str) -> dict[str, Any]:
        session = store.session_for("plan", plan_id)
        batch = session.generate(plan_id)
        store.save(session)
        return {
            "batch_id": batch.id,
            "produced_count": batch.produced_count,
            "attempts_used": batch.attempts_used,
            "version": session.batch_versions[batch.id],
        }

    @app.get("/batches/{batch_id}")
    def get_batch(batch_id: str) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        return _batch_doc(session, batch_id)

    @app.post("/batches/{batch_id}/annotate")
    def annotate(batch_id: str, body: dict[str, Any] = Body(default={})) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        result = session.annotate(
            batch_id,
            model_id=body.get("model_id"),
            confidence_threshold=body.get("confidence_threshold", 0.6),
            expected_version=body.get("expected_version"),
        )
        store.save(session)
        return result

    @app.post("/batches/{batch_id}/filter")
    def filter_batch(batch_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        matching, non_matching = session.filter(batch_id, body)
        store.save(session)
        return {"batch_id": batch_id, "matching": matching, "non_matching": non_matching}

    @app.post("/batches/{batch_id}/remove")
    def remove(batch_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        result = session.remove(
            batch_id, _ids_of(body), expected_version=body.get("expected_version")
        )
        store.save(session)
        return result

    @app.post("/batches/{batch_id}/samples/{sample_id}/whatif")
    def whatif(
        batch_id: str, sample_id: str, body: dict[str, Any] = Body(...)
    ) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        result = session.what_if(
            batch_id, sample_id, body.get("edits", []), model_id=body.get("model_id")
        )
        store.save(session)
        return result

    @app.post("/batches/{batch_id}/samples/{sample_id}/edit")
    def edit(
        batch_id: str, sample_id: str, body: dict[str, Any] = Body(...)
    ) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        result = session.edit(
            batch_id,
            sample_id,
            body.get("edits", []),
            expected_version=body.get("expected_version"),
        )
        store.save(session)
        return result

    @app.post("/batches/{batch_id}/accept")
    def accept(batch_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = store.session_for("batch", batch_id)
        result = session.accept(
            batch_id, _ids_of(body), expected_version=body.get("expected_version")
        )
        store.save(session)
        return result

    # -- exports and logs -------------------------------------------------------

    @app.get("/datasets/{dataset_id}/export")
    def export(dataset_id: str, provenance: bool = False) -> Response:
        session = store.session_for("dataset", dataset_id)
        text = session.export(provenance)
        store.save(session)
        return Response(
            content=text,
            media_type="text/csv; charset=utf-8",
            headers={
                "Content-Disposition": f'attachment; filename="{dataset_id}-augmented.csv"'
            },
        )

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str) -> Response:
        session = store.session_for("session", session_id)
        return Response(
            content=session.log.to_ndjson(), media_type="application/x-ndjson"
        )

    return app


def _ids_of(body: dict[str, Any]) -> list[Any]:
    ids = body.get("ids")
    if not isinstance(ids, list):
        raise InvalidValue("request body needs an 'ids' list")
    return ids
