"""FastAPI service scoring draft posts against a loaded model bundle.

Models are loaded once and shared read-only by all request handlers. A
bounded semaphore caps in-flight predictions; overflow is rejected with 503
so clients can retry instead of queueing without bound.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from ..bundle import DraftPost, ModelBundle, forecast, load_bundle
from ..errors import EmptyDraft
from .schemas import DraftRequest, ForecastResponse, HealthResponse

DEFAULT_MAX_IN_FLIGHT = 64


def create_app(bundle: ModelBundle,
               max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="postimpact", version="0.1.0")
    app.state.bundle = bundle
    app.state.limiter = threading.BoundedSemaphore(max_in_flight)
    # the companion UI may be served from another origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        versions = {k.value: v for k, v in bundle.versions().items()}
        return HealthResponse(status="ok", models=versions)

    @app.post("/predict", response_model=ForecastResponse)
    def predict(request: DraftRequest) -> ForecastResponse:
        if not app.state.limiter.acquire(blocking=False):
            raise HTTPException(status_code=503, detail="too many in-flight requests, retry",
                                headers={"Retry-After": "1"})
        try:
            draft = DraftPost(text=request.text, link_kind=request.link_kind,
                              published_at=request.published_at)
            return ForecastResponse.from_forecast(forecast(draft, bundle))
        except EmptyDraft as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        finally:
            app.state.limiter.release()

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def create_app_from_dir(bundle_dir, max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
                        static_dir: str | None = None) -> FastAPI:
    return create_app(load_bundle(bundle_dir), max_in_flight=max_in_flight,
                      static_dir=static_dir)
