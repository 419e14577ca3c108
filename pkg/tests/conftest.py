"""Shared fixture builders: tiny datasets, static vector files, synthetic
separable corpora, and a stub embedding service."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from protestlens import EmbedConfig, FeatureMatrix, embed_static, load_static_vectors
from protestlens.embeddings import pad_or_truncate
from protestlens.preprocess import tokenize

SIGNAL_WORDS = ["rally", "march", "strike", "riot"]
BACKGROUND_WORDS = [f"word{i}" for i in range(40)]


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path


def write_vector_file(path, table: dict[str, list[float]]):
    with open(path, "w", encoding="utf-8") as fh:
        for token, values in table.items():
            fh.write(token + " " + " ".join(f"{v:.6f}" for v in values) + "\n")
    return path


def make_signal_vocab(dim=8, seed=7):
    """Static vectors where signal words live far from background words."""
    rng = np.random.default_rng(seed)
    table = {}
    for word in SIGNAL_WORDS:
        table[word] = list(3.0 + rng.normal(0, 0.2, size=dim))
    for word in BACKGROUND_WORDS:
        table[word] = list(rng.normal(0, 0.5, size=dim))
    return table


def make_separable_corpus(n, protest_fraction=0.2, seed=11, length=(12, 20)):
    """Synthetic sentences: protest examples carry signal words, others do not."""
    rng = np.random.default_rng(seed)
    records = []
    n_protest = int(round(n * protest_fraction))
    for i in range(n):
        label = 1 if i < n_protest else 0
        n_tokens = int(rng.integers(length[0], length[1] + 1))
        words = list(rng.choice(BACKGROUND_WORDS, size=n_tokens))
        if label == 1:
            n_signal = int(rng.integers(2, 5))
            positions = rng.choice(n_tokens, size=min(n_signal, n_tokens), replace=False)
            for p in positions:
                words[p] = SIGNAL_WORDS[int(rng.integers(0, len(SIGNAL_WORDS)))]
        records.append({"id": f"ex{i}", "text": " ".join(words), "label": label})
    order = rng.permutation(n)
    return [records[i] for i in order]


def embed_records(records, table_dict, cfg: EmbedConfig):
    """Static-embed a record list into a FeatureMatrix (rows flattened)."""
    vec = {k: np.asarray(v, dtype=np.float64) for k, v in table_dict.items()}
    from protestlens.embeddings import VectorTable

    table = VectorTable(vec, cfg.dim)
    rows = []
    labels = []
    for rec in records:
        seq = pad_or_truncate(tokenize(rec["text"]), cfg.max_tokens)
        rows.append(embed_static(seq, table, cfg).ravel())
        labels.append(rec["label"])
    return FeatureMatrix(np.vstack(rows), np.array(labels))


@pytest.fixture
def tiny_dataset(tmp_path):
    path = tmp_path / "tiny.jsonl"
    return write_jsonl(
        path,
        [
            {"id": "a", "text": "Protesters marched through the city.", "label": 1},
            {"id": "b", "text": "The festival celebrated local music.", "label": 0},
        ],
    )


class StubEmbedHandler(BaseHTTPRequestHandler):
    """Deterministic fake embedding service speaking the wire protocol."""

    mode = "ok"

    def log_message(self, *args):
        pass

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.mode == "http500":
            self.send_response(500)
            self.end_headers()
            return
        out_positions = body["out_positions"]
        dim = body["dim"] + (1 if self.mode == "wrong_dim" else 0)
        vectors = []
        for i, seq in enumerate(body["tokens"]):
            base = float(i + 1) + (0.001 * len(seq))
            vectors.append([[base + j for j in range(dim)]] * out_positions)
        payload = json.dumps({"vectors": vectors, "dim": dim}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        payload = json.dumps({"status": "ok", "model": "stub"}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def stub_service():
    server = HTTPServer(("127.0.0.1", 0), StubEmbedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    StubEmbedHandler.mode = "ok"
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
