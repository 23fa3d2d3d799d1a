"""HTTP surface: POST /v1/score and GET /healthz.

For each query the masked prompt is filled, denylisted tokens are
dropped, the survivors are truncated to the requested top n, the target
label is mapped onto a single vocabulary token, and the response carries
that token's 1-based rank among the candidates (null when absent or when
the target is unmappable). Response order matches request order.
"""

from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import MASK, build_backend
from .config import ServiceConfig
from .filtering import filter_tokens
from .mapping import EntityTokenMapper

log = logging.getLogger("scorer_service")


class WireQuery(BaseModel):
    id: str
    prompt: str
    target_label: str = Field(min_length=1)


class ScoreRequest(BaseModel):
    queries: list[WireQuery]
    top_n: int = Field(ge=1)


class WireResult(BaseModel):
    id: str
    rank: Optional[int]
    top_tokens: list[str]


class ScoreResponse(BaseModel):
    results: list[WireResult]


def create_app(config: ServiceConfig, backend=None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if app.state.backend is None:
            log.info("loading model %s", config.model_id)
            app.state.backend = build_backend(config)
        app.state.mapper = EntityTokenMapper(
            app.state.backend, similarity_floor=config.similarity_floor
        )
        app.state.mapper.warm()
        yield

    app = FastAPI(title="scorer-service", lifespan=lifespan)
    app.state.config = config
    app.state.backend = backend
    app.state.mapper = None

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # protocol violations are client errors, not unprocessable entities
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/healthz")
    def healthz():
        if app.state.backend is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return {"status": "ok", "model": config.model_id}

    @app.post("/v1/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        if app.state.backend is None or app.state.mapper is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        if len(request.queries) > config.max_batch_size:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.queries)} exceeds "
                f"max_batch_size={config.max_batch_size}",
            )
        for query in request.queries:
            if query.prompt.count(MASK) != 1:
                raise HTTPException(
                    status_code=400,
                    detail=f"prompt for query {query.id!r} must contain "
                    f"exactly one {MASK}",
                )
        try:
            results = [_score_one(app, query, request.top_n) for query in request.queries]
        except HTTPException:
            raise
        except Exception as exc:  # noqa: BLE001 - model faults become 500s
            log.exception("scoring failed")
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return ScoreResponse(results=results)

    return app


def _score_one(app: FastAPI, query: WireQuery, top_n: int) -> WireResult:
    backend = app.state.backend
    config: ServiceConfig = app.state.config
    # over-fetch so that denylist removal cannot starve the top n
    raw = backend.rank_candidates(query.prompt, top_n + len(config.denylist))
    candidates = filter_tokens(raw, config.denylist)[:top_n]
    mapped = app.state.mapper.map(query.target_label)
    rank = None
    if mapped is not None:
        token, _ = mapped
        if token in candidates:
            rank = candidates.index(token) + 1
    return WireResult(id=query.id, rank=rank, top_tokens=candidates)
