"""FastAPI service speaking the embedding wire protocol.

POST /v1/embed  {"tokens": [[str, ...], ...], "out_positions": int, "dim": int}
               -> {"vectors": [[[float, ...], ...], ...], "dim": int}
GET  /v1/health -> {"status": "ok", "model": str}

400 on malformed bodies, 422 when the requested dim does not match the loaded
model, 503 while the model is still loading. Env: EMBEDSVC_MODEL selects the
model, EMBEDSVC_PORT the port.
"""

from __future__ import annotations

import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .model import EmbeddingModel


def create_app(model_name: str | None = None, eager: bool = True) -> FastAPI:
    state = {"model": None, "name": model_name or os.environ.get("EMBEDSVC_MODEL")}

    def load():
        if state["model"] is None:
            state["model"] = EmbeddingModel(state["name"])
        return state["model"]

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        load()
        yield

    app = FastAPI(title="embedsvc", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    if eager:
        load()

    @app.get("/v1/health")
    def health():
        model = state["model"]
        if model is None:
            return {"status": "loading", "model": state["name"] or "default"}
        return {"status": "ok", "model": model.name}

    @app.post("/v1/embed")
    async def embed(request: Request):
        model = state["model"]
        if model is None:
            return JSONResponse(status_code=503, content={"detail": "model is loading"})
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"detail": "body is not valid JSON"})
        problem = _validate(body)
        if problem:
            return JSONResponse(status_code=400, content={"detail": problem})
        if body["dim"] != model.dim:
            return JSONResponse(
                status_code=422,
                content={"detail": f"model dim is {model.dim}, request asked for {body['dim']}"},
            )
        if body["out_positions"] > model.max_positions:
            return JSONResponse(
                status_code=400,
                content={"detail": f"out_positions exceeds model maximum {model.max_positions}"},
            )
        vectors = model.embed_batch(body["tokens"], body["out_positions"])
        return {"vectors": vectors.tolist(), "dim": model.dim}

    return app


def _validate(body) -> str | None:
    if not isinstance(body, dict):
        return "body must be a JSON object"
    for key in ("tokens", "out_positions", "dim"):
        if key not in body:
            return f"missing field {key!r}"
    tokens = body["tokens"]
    if not isinstance(tokens, list) or not tokens:
        return "tokens must be a non-empty list of token lists"
    for i, seq in enumerate(tokens):
        if not isinstance(seq, list) or not seq:
            return f"tokens[{i}] must be a non-empty list"
        if not all(isinstance(t, str) for t in seq):
            return f"tokens[{i}] must contain only strings"
    if not isinstance(body["out_positions"], int) or body["out_positions"] <= 0:
        return "out_positions must be a positive integer"
    if not isinstance(body["dim"], int) or body["dim"] <= 0:
        return "dim must be a positive integer"
    return None


def run():
    import uvicorn

    port = int(os.environ.get("EMBEDSVC_PORT", "8901"))
    uvicorn.run(create_app(), host="0.0.0.0", port=port, log_level="warning")


if __name__ == "__main__":
    run()
