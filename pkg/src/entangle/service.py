"""HTTP shell over the engine core.

Endpoints return the same records the CLI emits, so the two shells stay
interchangeable. Error responses carry a code, a message, and the request
id; success bodies stay free of per-request state so identical requests
yield identical responses across restarts under deterministic providers.
"""

from __future__ import annotations

import uuid

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .engine import Engine, EngineConfig
from .errors import (EntangleError, GenerationError, InvariantError, LibraryError,
                     ProviderError, ProviderTimeoutError)
from .scenario import SixCProfile, profile_from_record


class ProfileBody(BaseModel):
    label: str
    offensive_strength: float
    defensive_strength: float
    relational_capacity: float
    potential_energy: float
    temporal_availability: float
    contextual_fit: float
    narrative_context: str | None = None
    scale_max: float = 5.0


class SynthesizeBody(BaseModel):
    framing: str | None = None
    top_n: int | None = 3
    threshold: float | None = None
    baseline: bool = False
    profile: ProfileBody | None = None


class EvaluateBody(BaseModel):
    synthesis: str
    input_ids: list[str] | None = None
    variant_label: str = ""


class CompareBody(BaseModel):
    framing: str
    top_n: int = 3
    profile: ProfileBody | None = None


def _to_profile(body: ProfileBody | None) -> SixCProfile | None:
    if body is None:
        return None
    return profile_from_record(body.model_dump())


def create_app(engine: Engine | EngineConfig | None = None) -> FastAPI:
    """Build the service around one shared engine instance."""
    if engine is None:
        engine = Engine()
    elif isinstance(engine, EngineConfig):
        engine = Engine(engine)

    app = FastAPI(title="entangle", version=__version__)

    # The workbench is served as static files from its own origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
        expose_headers=["X-Request-ID"],
    )

    @app.middleware("http")
    async def stamp_request_id(request: Request, call_next):
        request.state.request_id = uuid.uuid4().hex
        response = await call_next(request)
        response.headers["X-Request-ID"] = request.state.request_id
        return response

    def error_response(request: Request, status: int, code: str,
                       message: str) -> JSONResponse:
        request_id = getattr(request.state, "request_id", "") or uuid.uuid4().hex
        return JSONResponse(
            status_code=status,
            content={"error": {"code": code, "message": message,
                               "request_id": request_id}},
            headers={"X-Request-ID": request_id},
        )

    @app.exception_handler(RequestValidationError)
    async def on_invalid_body(request: Request, exc: RequestValidationError):
        details = "; ".join(
            f"{'.'.join(str(loc) for loc in err.get('loc', []))}: {err.get('msg', '')}"
            for err in exc.errors())
        return error_response(request, 400, "invalid_body", details or "invalid body")

    @app.exception_handler(ProviderTimeoutError)
    async def on_provider_timeout(request: Request, exc: ProviderTimeoutError):
        return error_response(request, 504, "provider_timeout", str(exc))

    @app.exception_handler(GenerationError)
    async def on_generation_error(request: Request, exc: GenerationError):
        return error_response(request, 502, "generation_failure", str(exc))

    @app.exception_handler(ProviderError)
    async def on_provider_error(request: Request, exc: ProviderError):
        return error_response(request, 502, "provider_failure", str(exc))

    @app.exception_handler(InvariantError)
    async def on_invariant_error(request: Request, exc: InvariantError):
        return error_response(request, 422, "invariant_violation", str(exc))

    @app.exception_handler(LibraryError)
    async def on_library_error(request: Request, exc: LibraryError):
        return error_response(request, 422, "library_error", str(exc))

    @app.exception_handler(EntangleError)
    async def on_engine_error(request: Request, exc: EntangleError):
        return error_response(request, 422, "engine_error", str(exc))

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "library_count": len(engine.library),
            "embedding": {"kind": engine.embedder.kind,
                          "ready": engine.embedder.ready()},
            "generation_kind": engine.config.generation.provider_kind,
        }

    @app.get("/library")
    def library() -> dict:
        return engine.library_record()

    @app.post("/activations")
    def activations(body: ProfileBody) -> dict:
        return engine.activations(_to_profile(body)).to_record()

    @app.get("/matrix")
    def matrix(scheme: str | None = Query(default=None)) -> dict:
        return engine.matrix(scheme).to_record()

    @app.get("/graph")
    def graph(top_n: int = Query(default=3)) -> dict:
        return engine.graph(top_n).to_record()

    @app.post("/synthesize")
    def synthesize(body: SynthesizeBody) -> dict:
        top_n = None if body.threshold is not None else body.top_n
        result = engine.synthesize_run(
            framing=body.framing, top_n=top_n, threshold=body.threshold,
            baseline=body.baseline, profile=_to_profile(body.profile))
        return result.to_record()

    @app.post("/evaluate")
    def evaluate(body: EvaluateBody) -> dict:
        report = engine.evaluate_text(body.synthesis, body.input_ids,
                                      body.variant_label)
        return report.to_record()

    @app.post("/compare")
    def compare(body: CompareBody) -> dict:
        return engine.compare_run(body.framing, body.top_n,
                                  _to_profile(body.profile))

    return app
