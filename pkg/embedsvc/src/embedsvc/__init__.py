"""embedsvc: contextual token embeddings over HTTP, pooled server-side."""

from .app import create_app
from .model import BUILTIN_MODEL_ID, EmbeddingModel
from .pooling import pool_to_length

__all__ = ["create_app", "EmbeddingModel", "BUILTIN_MODEL_ID", "pool_to_length"]
__version__ = "0.1.0"
