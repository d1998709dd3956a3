"""HTTP front for black-box services: PNG/JPEG in, PNG out.

One app can host several models, routed by the model-id header. Budget
exhaustion surfaces as 429, oversize payloads as 413, undecodable or
wrong-shape images as 400.
"""

from __future__ import annotations

from typing import Mapping

from fastapi import FastAPI, HTTPException, Request, Response

from .images import ImageFormatError, decode_image_bytes, encode_png
from .service import BlackBoxService, BudgetExhaustedError, ShapeMismatchError

CLIENT_HEADER = "X-Client-Token"
MODEL_HEADER = "X-Model-Id"

DEFAULT_MAX_PAYLOAD = 8 * 1024 * 1024


def create_app(
    services: Mapping[str, BlackBoxService],
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD,
) -> FastAPI:
    """Wrap model services keyed by model id into one HTTP app."""
    if not services:
        raise ValueError("at least one service is required")
    app = FastAPI(title="image transform service")
    app.state.services = dict(services)
    app.state.max_payload_bytes = max_payload_bytes

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "models": sorted(app.state.services)}

    @app.post("/v1/transform")
    async def transform(request: Request) -> Response:
        client = request.headers.get(CLIENT_HEADER)
        if not client:
            raise HTTPException(400, f"missing {CLIENT_HEADER} header")
        model_id = request.headers.get(MODEL_HEADER)
        if not model_id:
            raise HTTPException(400, f"missing {MODEL_HEADER} header")
        service = app.state.services.get(model_id)
        if service is None:
            raise HTTPException(404, f"unknown model {model_id!r}")

        payload = await request.body()
        if len(payload) > app.state.max_payload_bytes:
            raise HTTPException(
                413, f"payload exceeds {app.state.max_payload_bytes} bytes"
            )
        if not payload:
            raise HTTPException(400, "empty payload")
        try:
            image = decode_image_bytes(payload)
        except ImageFormatError as exc:
            raise HTTPException(400, str(exc)) from exc

        try:
            out = service.transform(client, image)
        except BudgetExhaustedError as exc:
            raise HTTPException(429, str(exc)) from exc
        except (ShapeMismatchError, ImageFormatError) as exc:
            raise HTTPException(400, str(exc)) from exc
        return Response(content=encode_png(out), media_type="image/png")

    return app
