"""Inference engine and HTTP service."""

from .app import build_request, create_app, serve
from .engine import GenerationRequest, InferenceEngine, ServiceError

__all__ = [
    "GenerationRequest",
    "InferenceEngine",
    "ServiceError",
    "build_request",
    "create_app",
    "serve",
]
