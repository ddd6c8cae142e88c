"""HTTP surface for the interactive editor and scripted clients.

Images travel as PNG; semantic maps as base64 paletted PNG inside JSON.
Error responses are always {"code", "message"} JSON.
"""

from __future__ import annotations

import base64
import io
import os

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from PIL import Image

from .. import constants
from ..corpus import load_record_image, load_record_parse
from ..representation import PoseSpec, SemanticMap, load_semantic_map_png, save_semantic_map_png
from .engine import GenerationRequest, InferenceEngine, ServiceError


def _png_bytes(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _parse_png_b64(semantic_map: SemanticMap) -> str:
    buf = io.BytesIO()
    save_semantic_map_png(semantic_map, buf)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _decode_parse_b64(data: str) -> SemanticMap:
    try:
        raw = base64.b64decode(data)
        return load_semantic_map_png(io.BytesIO(raw))
    except ServiceError:
        raise
    except Exception as e:
        raise ServiceError("bad_parse", f"cannot decode parse PNG: {e}") from e


def _decode_image_b64(data: str) -> np.ndarray:
    try:
        raw = base64.b64decode(data)
        return np.asarray(Image.open(io.BytesIO(raw)).convert("RGB"), dtype=np.uint8)
    except Exception as e:
        raise ServiceError("bad_image", f"cannot decode image PNG: {e}") from e


def _decode_pose(payload, image_size) -> PoseSpec:
    try:
        arr = np.asarray(payload, dtype=np.float64)
        return PoseSpec.from_array(arr, image_size)
    except (ValueError, TypeError) as e:
        raise ServiceError("bad_pose", f"invalid target pose: {e}") from e


def build_request(body: dict, image_size) -> GenerationRequest:
    mode = body.get("mode")
    if not isinstance(mode, str):
        raise ServiceError("bad_mode", "request must carry a string 'mode'")
    req = GenerationRequest(mode=mode)
    req.reference_id = body.get("reference_id")
    if body.get("target_pose") is not None:
        req.target_pose = _decode_pose(body["target_pose"], image_size)
    req.donor_id = body.get("donor_id")
    if body.get("edited_parse") is not None:
        req.edited_parse = _decode_parse_b64(body["edited_parse"])
    if body.get("image") is not None:
        req.image = _decode_image_b64(body["image"])
        if body.get("keypoints") is None or body.get("parse") is None:
            raise ServiceError("bad_upload", "uploaded images must carry keypoints and a parse")
        req.keypoints = _decode_pose(body["keypoints"], req.image.shape[:2])
        req.parse = _decode_parse_b64(body["parse"])
    return req


def create_app(engine: InferenceEngine, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="persongen")

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "checkpoint_id": engine.checkpoint_id}

    @app.get("/corpus")
    def corpus():
        records = []
        for image_id in sorted(engine.records):
            rec = engine.records[image_id]
            thumb = base64.b64encode(_png_bytes(load_record_image(rec))).decode("ascii")
            records.append({"id": image_id, "split": rec.split, "thumbnail": thumb})
        return {"records": records, "labels": list(constants.LABEL_NAMES),
                "palette": [list(c) for c in constants.LABEL_PALETTE]}

    @app.get("/record/{image_id}")
    def record(image_id: str):
        rec = engine.record(image_id)
        image = load_record_image(rec)
        parse = load_record_parse(rec)
        h, w = rec.pose.image_size
        return {
            "id": image_id,
            "image": base64.b64encode(_png_bytes(image)).decode("ascii"),
            "parse": _parse_png_b64(parse),
            "keypoints": rec.pose.to_array().tolist(),
            "image_size": [h, w],
        }

    @app.post("/generate")
    async def generate(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ServiceError("bad_json", "request body must be JSON")
        if not isinstance(body, dict):
            raise ServiceError("bad_json", "request body must be a JSON object")
        req = build_request(body, engine.config.input_resolution)
        image = engine.generate(req)
        return Response(content=_png_bytes(image), media_type="image/png")

    if frontend_dir and os.path.isdir(frontend_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")
    return app


def serve(engine: InferenceEngine, port: int = 8000, host: str = "127.0.0.1", frontend_dir=None):
    import uvicorn

    app = create_app(engine, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
