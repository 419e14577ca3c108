"""Model checkpoint file: one-line JSON manifest, then raw float64 tensors.

The manifest (layer kinds, tensor names/shapes, seed, format version) is the
first line of the file; the remaining bytes are each parameter tensor as
little-endian 64-bit floats, row-major, in manifest order. No timestamps or
other varying fields, so identical models serialize byte-identically.
"""

from __future__ import annotations

import json

import numpy as np

__all__ = ["FORMAT_VERSION", "save_checkpoint", "load_checkpoint"]

FORMAT_VERSION = 1


def save_checkpoint(path, meta: dict, tensors: list[tuple[str, np.ndarray]]) -> None:
    manifest = {
        "format_version": FORMAT_VERSION,
        "meta": meta,
        "tensors": [{"name": name, "shape": list(arr.shape)} for name, arr in tensors],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(manifest, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for _, arr in tensors:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        header = fh.readline()
        manifest = json.loads(header.decode("utf-8"))
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {manifest.get('format_version')!r}")
        tensors: dict[str, np.ndarray] = {}
        for entry in manifest["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"checkpoint truncated at tensor {entry['name']!r}")
            tensors[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return manifest["meta"], tensors
