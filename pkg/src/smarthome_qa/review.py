"""HTTP review service over the refinement-record store.

Routes:
    GET  /api/records?stage=&status=&page=&page_size=
    POST /api/records/{id}/decision
    GET  /api/progress?stage=
    GET  /api/pairs/{id}
plus static serving of the built review UI at ``/`` when a bundle directory
is configured. Errors are JSON ``{code, message}`` with 404/409/422 semantics.
Intended as a localhost tool; there is no authentication.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .model import QAPair
from .refine.records import DecisionConflict, RecordStatus, RecordStore, RefinementRecord, Stage

MAX_PAGE_SIZE = 500


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


class RecordOut(BaseModel):
    id: str
    pair_id: str
    stage: str
    original: str
    proposed: str
    status: str
    final_text: Optional[str] = None
    reviewer_note: Optional[str] = None
    model_name: str
    created_at: str

    @classmethod
    def from_record(cls, record: RefinementRecord) -> "RecordOut":
        return cls(**record.to_json_dict())


class RecordPageOut(BaseModel):
    records: list[RecordOut]
    total: int
    page: int
    page_size: int


class DecisionIn(BaseModel):
    action: Literal["accept", "edit", "reject"]
    final_text: Optional[str] = None
    reviewer_note: Optional[str] = None
    expected_status: Literal["pending"] = "pending"


class ProgressOut(BaseModel):
    pending: int
    accepted: int
    edited: int
    rejected: int
    total: int


class PairOut(BaseModel):
    id: str
    source: str
    question: str
    answer: str
    version: str
    parent_id: Optional[str] = None
    provenance: str
    context: Optional[str] = None

    @classmethod
    def from_pair(cls, pair: QAPair) -> "PairOut":
        return cls(**pair.to_json_dict())


def _parse_enum(kind, raw: str, what: str):
    try:
        return kind(raw)
    except ValueError:
        raise ApiError(422, "bad_filter", f"unknown {what} {raw!r}") from None


def create_app(
    store: RecordStore,
    pairs: Optional[dict[str, QAPair]] = None,
    static_dir: Optional[str | Path] = None,
) -> FastAPI:
    app = FastAPI(title="smarthome-qa review", docs_url=None, redoc_url=None)
    pair_index = pairs or {}

    @app.exception_handler(ApiError)
    async def handle_api_error(_: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422, content={"code": "validation_error", "message": str(exc.errors())}
        )

    @app.get("/api/records", response_model=RecordPageOut)
    def list_records(
        stage: Optional[str] = None,
        status: Optional[str] = None,
        page: int = 1,
        page_size: int = 50,
    ) -> RecordPageOut:
        if not 1 <= page_size <= MAX_PAGE_SIZE:
            raise ApiError(422, "bad_filter", f"page_size must be in [1, {MAX_PAGE_SIZE}]")
        if page < 1:
            raise ApiError(422, "bad_filter", "page must be >= 1")
        stage_f = _parse_enum(Stage, stage, "stage") if stage else None
        status_f = _parse_enum(RecordStatus, status, "status") if status else None
        records = store.filtered(stage=stage_f, status=status_f)
        start = (page - 1) * page_size
        page_records = records[start : start + page_size]
        return RecordPageOut(
            records=[RecordOut.from_record(r) for r in page_records],
            total=len(records),
            page=page,
            page_size=page_size,
        )

    @app.post("/api/records/{record_id}/decision", response_model=RecordOut)
    def submit_decision(record_id: str, decision: DecisionIn) -> RecordOut:
        if decision.action == "edit":
            if not (decision.final_text or "").strip():
                raise ApiError(422, "missing_final_text", "edit decisions need final_text")
        elif decision.final_text is not None:
            raise ApiError(
                422, "unexpected_final_text", f"{decision.action} decisions must not carry final_text"
            )
        try:
            updated = store.decide(
                record_id,
                action=decision.action,
                final_text=decision.final_text,
                reviewer_note=decision.reviewer_note,
                expected_status=RecordStatus(decision.expected_status),
            )
        except KeyError:
            raise ApiError(404, "not_found", f"no record with id {record_id!r}") from None
        except DecisionConflict as exc:
            raise ApiError(409, "conflict", str(exc)) from None
        return RecordOut.from_record(updated)

    @app.get("/api/progress", response_model=ProgressOut)
    def progress(stage: Optional[str] = None) -> ProgressOut:
        stage_f = _parse_enum(Stage, stage, "stage") if stage else None
        return ProgressOut(**store.progress(stage_f))

    @app.get("/api/pairs/{pair_id}", response_model=PairOut)
    def get_pair(pair_id: str) -> PairOut:
        pair = pair_index.get(pair_id)
        if pair is None:
            raise ApiError(404, "not_found", f"no pair with id {pair_id!r}")
        return PairOut.from_pair(pair)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
