#!/usr/bin/env python3
"""Inference service: FastAPI backend.

Loads one checkpoint at startup and shares the model read-only across
requests. Each request decodes its own image and, for Grad-CAM, records on
its own tape in a worker thread.

Routes:
    GET  /healthz           → 200 "ok"
    POST /predict?cam=0|1   → PredictionResponse JSON
    GET  /metrics           → request counters and latency percentiles

Usage:
    python -m src.cli serve --checkpoint model.bin --bind 127.0.0.1:8000
"""

from __future__ import annotations

import base64
import logging
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse, PlainTextResponse

from src.config import get_config, parse_bind
from src.data import (
    ImageDecodeError,
    PreprocessConfig,
    decode_image,
    encode_png,
    normalize,
    resize_bilinear,
)
from src.explain import gradcam, overlay
from src.model import POSITIVE_CLASS, Model, predict_proba
from src.persistence import load_versioned
from src.tensor import Tensor

from .contracts import PredictionResponse
from .metrics import RequestMetrics

logger = logging.getLogger("service")

OVERLAY_ALPHA = 0.5


# ── helpers ───────────────────────────────────────────────────────────────────

def _ok(data: Any = None) -> dict:
    return {"success": True, "data": data, "error": None}


def _err(msg: str, status: int = 400) -> JSONResponse:
    return JSONResponse(
        {"success": False, "data": None, "error": msg},
        status_code=status,
    )


def prepare_image(model: Model, image: np.ndarray) -> tuple[np.ndarray, Tensor]:
    """Resize to the model's input size and normalise with its stored means."""
    s = model.config.input_size
    h, w = image.shape[:2]
    if h < 2 or w < 2:
        raise ImageDecodeError(f"image must be at least 2×2 pixels, got {h}×{w}")
    resized = image if image.shape[:2] == (s, s) else resize_bilinear(image, s)
    return resized, normalize(resized, PreprocessConfig(s, model.channel_means))


def predict_bytes(model: Model, body: bytes, cam: bool, model_version: str) -> PredictionResponse:
    """decode → resize → normalize → predict_proba (→ Grad-CAM overlay)."""
    resized, x = prepare_image(model, decode_image(body))
    s = model.config.input_size
    proba = predict_proba(model, Tensor.wrap(x.data.reshape(1, 3, s, s))).data[0]

    heatmap_png: Optional[str] = None
    if cam:
        target = int(np.argmax(proba))
        heat = gradcam(model, x, target)
        png = encode_png(overlay(resized, heat, OVERLAY_ALPHA))
        heatmap_png = base64.b64encode(png).decode("ascii")
    p_melanoma = float(proba[POSITIVE_CLASS])
    return PredictionResponse.from_probability(p_melanoma, model_version, heatmap_png)


# ── app factory ───────────────────────────────────────────────────────────────

def create_app(model: Model, model_version: str, max_body_bytes: Optional[int] = None) -> FastAPI:
    limit = max_body_bytes or get_config().service.max_body_bytes
    metrics = RequestMetrics()

    app = FastAPI(title="Melanoma inference", version=model_version)
    app.state.model = model
    app.state.model_version = model_version
    app.state.metrics = metrics

    @app.middleware("http")
    async def _record_timing(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - start) * 1000
        metrics.record(request.url.path, elapsed_ms, response.status_code)
        logger.debug(
            "%s %s → %d in %.1f ms",
            request.method,
            request.url.path,
            response.status_code,
            elapsed_ms,
        )
        return response

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz():
        return "ok"

    @app.get("/metrics")
    async def get_metrics():
        return _ok(metrics.get_snapshot())

    @app.post("/predict")
    async def handle_predict(request: Request, cam: int = Query(0, ge=0, le=1)):
        declared = request.headers.get("content-length", "")
        if declared.isdigit() and int(declared) > limit:
            return _err(f"body exceeds {limit} bytes", 413)

        chunks: list[bytes] = []
        size = 0
        async for chunk in request.stream():
            size += len(chunk)
            if size > limit:
                return _err(f"body exceeds {limit} bytes", 413)
            chunks.append(chunk)

        try:
            body = b"".join(chunks)
            result = await run_in_threadpool(predict_bytes, model, body, bool(cam), model_version)
        except ImageDecodeError as exc:
            return _err(str(exc), 400)
        except Exception:
            logger.exception("predict failed")
            return _err("internal error", 500)
        return result.model_dump(exclude_none=True)

    return app


# ── entry point ───────────────────────────────────────────────────────────────

def serve(checkpoint_path: str | Path, bind: Optional[str] = None) -> None:
    """Load the checkpoint (errors propagate before any socket opens) and run uvicorn."""
    import uvicorn

    config = get_config()
    model, version = load_versioned(checkpoint_path)
    host, port = parse_bind(bind) if bind else config.service.host_port()
    app = create_app(model, version, config.service.max_body_bytes)
    logger.info("Serving model %s on %s:%d", version, host, port)
    uvicorn.run(app, host=host, port=port, log_level=config.logging.level.lower())
