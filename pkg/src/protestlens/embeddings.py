"""Token sequences to fixed-shape embedding matrices.

Two providers: a static word-vector table loaded from a text file, and a
remote contextual-embedding service reached over HTTP. Both end in the same
place: an out_positions x dim float64 matrix per input, with longer inputs
mean-pooled down over contiguous windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import requests

from .preprocess import TokenSequence

__all__ = [
    "PAD_TOKEN",
    "EmbedConfig",
    "VectorTable",
    "EmbedServiceError",
    "TransportError",
    "ProtocolError",
    "RetriableError",
    "pad_or_truncate",
    "load_static_vectors",
    "embed_static",
    "pool_to_length",
    "embed_remote",
    "service_health",
]

PAD_TOKEN = "<pad>"

# (max_tokens, out_positions) per task, chosen experimentally upstream.
TASK_LENGTHS = {"task1": (800, 256), "task2": (100, 32)}


@dataclass(frozen=True)
class EmbedConfig:
    """Input length, pooled output length, vector dimension and provider."""

    max_tokens: int
    out_positions: int
    dim: int
    provider: str = "static"

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.out_positions <= 0 or self.max_tokens <= 0:
            raise ValueError("lengths must be positive")
        if self.out_positions > self.max_tokens:
            raise ValueError("out_positions must not exceed max_tokens")
        if self.provider not in ("static", "remote"):
            raise ValueError(f"unknown provider {self.provider!r}")

    @classmethod
    def for_task(cls, task: str, dim: int, provider: str = "static") -> "EmbedConfig":
        if task not in TASK_LENGTHS:
            raise ValueError(f"unknown task {task!r}")
        max_tokens, out_positions = TASK_LENGTHS[task]
        return cls(max_tokens, out_positions, dim, provider)


class EmbedServiceError(RuntimeError):
    """Base for failures talking to the remote embedding service."""


class TransportError(EmbedServiceError):
    """Non-success HTTP response or unreachable service."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ProtocolError(EmbedServiceError):
    """Response does not match the wire contract (shape or dim mismatch)."""


class RetriableError(EmbedServiceError):
    """Timeout; the request may be retried as-is."""


def pad_or_truncate(tokens: TokenSequence, length: int) -> TokenSequence:
    """Force the sequence to exactly ``length`` tokens.

    Longer inputs are cut at the tail; shorter ones get PAD tokens appended
    (POS tag OTHER when tags are present).
    """
    if length <= 0:
        raise ValueError("length must be positive")
    n = len(tokens)
    if n == length:
        return tokens
    if n > length:
        pos = tokens.pos[:length] if tokens.pos is not None else None
        return TokenSequence(tokens.tokens[:length], pos)
    pad = length - n
    new_tokens = tokens.tokens + (PAD_TOKEN,) * pad
    pos = tokens.pos + ("OTHER",) * pad if tokens.pos is not None else None
    return TokenSequence(new_tokens, pos)


class VectorTable:
    """token -> d-vector lookup with a single dimension for all entries."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        self.vectors = vectors
        self.dim = dim

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, token):
        return token in self.vectors

    def get(self, token) -> np.ndarray | None:
        return self.vectors.get(token)


def load_static_vectors(path) -> VectorTable:
    """Read a "token v1 ... vd" text file into a VectorTable.

    Every line must carry the same dimension; duplicates and dimension
    mismatches raise with the offending 1-based line number.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise ValueError(f"line {lineno}: no vector values for {token!r}")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ValueError(
                    f"line {lineno}: dim mismatch (expected {dim}, got {len(values)})"
                )
            if token in vectors:
                raise ValueError(f"line {lineno}: duplicate token {token!r}")
            try:
                vectors[token] = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad vector value: {exc}") from exc
    if dim is None:
        raise ValueError("vector file is empty")
    return VectorTable(vectors, dim)


def embed_static(tokens: TokenSequence, table: VectorTable, cfg: EmbedConfig) -> np.ndarray:
    """Look up each token's vector and pool down to cfg.out_positions.

    The sequence must already be padded/truncated to cfg.max_tokens. Unknown
    tokens and PAD map to the zero vector.
    """
    if table.dim != cfg.dim:
        raise ValueError(f"table dimension {table.dim} != config dim {cfg.dim}")
    if len(tokens) != cfg.max_tokens:
        raise ValueError(
            f"sequence length {len(tokens)} != cfg.max_tokens {cfg.max_tokens}; "
            "run pad_or_truncate first"
        )
    mat = np.zeros((cfg.max_tokens, cfg.dim), dtype=np.float64)
    for i, tok in enumerate(tokens.tokens):
        vec = table.get(tok)
        if vec is not None:
            mat[i] = vec
    return pool_to_length(mat, cfg.out_positions)


def pool_to_length(seq: np.ndarray, out_positions: int) -> np.ndarray:
    """Mean-pool L rows down to out_positions contiguous near-equal windows.

    Window j spans rows [j*L // out, (j+1)*L // out), so window sizes are
    floor(L/out) or ceil(L/out). out_positions == L is the identity.
    """
    seq = np.asarray(seq, dtype=np.float64)
    length = seq.shape[0]
    if out_positions <= 0:
        raise ValueError("out_positions must be positive")
    if out_positions > length:
        raise ValueError(f"cannot pool {length} rows up to {out_positions}")
    if out_positions == length:
        return seq.copy()
    bounds = [(j * length) // out_positions for j in range(out_positions + 1)]
    out = np.empty((out_positions, seq.shape[1]), dtype=np.float64)
    for j in range(out_positions):
        out[j] = seq[bounds[j] : bounds[j + 1]].mean(axis=0)
    return out


def embed_remote(
    token_batches: list[TokenSequence],
    endpoint: str,
    cfg: EmbedConfig,
    timeout: float = 60.0,
    session: requests.Session | None = None,
) -> list[np.ndarray]:
    """Fetch contextual embeddings for a batch from the embedding service.

    Sends POST {endpoint}/v1/embed with the token lists; the service pools
    server-side to cfg.out_positions. Results come back in input order, one
    out_positions x dim float64 matrix per sequence.
    """
    if not token_batches:
        raise ValueError("empty batch")
    payload = {
        "tokens": [list(seq.tokens) for seq in token_batches],
        "out_positions": cfg.out_positions,
        "dim": cfg.dim,
    }
    post = session.post if session is not None else requests.post
    try:
        resp = post(f"{endpoint.rstrip('/')}/v1/embed", json=payload, timeout=timeout)
    except requests.Timeout as exc:
        raise RetriableError(f"embedding service timed out after {timeout}s") from exc
    except requests.RequestException as exc:
        raise TransportError(f"embedding service unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(
            f"embedding service returned status {resp.status_code}", status=resp.status_code
        )
    try:
        body = resp.json()
        vectors = body["vectors"]
        got_dim = body["dim"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed response body: {exc}") from exc
    if got_dim != cfg.dim:
        raise ProtocolError(f"service dim {got_dim} != config dim {cfg.dim}")
    if len(vectors) != len(token_batches):
        raise ProtocolError(
            f"service returned {len(vectors)} matrices for {len(token_batches)} inputs"
        )
    out = []
    for i, mat in enumerate(vectors):
        arr = np.asarray(mat, dtype=np.float64)
        if arr.shape != (cfg.out_positions, cfg.dim):
            raise ProtocolError(
                f"matrix {i} has shape {arr.shape}, expected {(cfg.out_positions, cfg.dim)}"
            )
        out.append(arr)
    return out


def service_health(endpoint: str, timeout: float = 10.0) -> dict:
    """GET {endpoint}/v1/health; returns the parsed body."""
    try:
        resp = requests.get(f"{endpoint.rstrip('/')}/v1/health", timeout=timeout)
    except requests.Timeout as exc:
        raise RetriableError("health check timed out") from exc
    except requests.RequestException as exc:
        raise TransportError(f"embedding service unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(f"health returned status {resp.status_code}", status=resp.status_code)
    return resp.json()
