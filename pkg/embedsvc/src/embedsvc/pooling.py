"""Length pooling with the same windowing contract as the consuming client.

Window j spans rows [j*L // out, (j+1)*L // out): contiguous windows of size
floor(L/out) or ceil(L/out), each averaged. Inputs shorter than the target
are zero-padded first, so any word count maps to exactly out_positions rows.
"""

from __future__ import annotations

import numpy as np


def pool_to_length(rows: np.ndarray, out_positions: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    length = rows.shape[0]
    if out_positions <= 0:
        raise ValueError("out_positions must be positive")
    if length < out_positions:
        pad = np.zeros((out_positions - length, rows.shape[1]), dtype=np.float64)
        rows = np.vstack([rows, pad])
        length = out_positions
    if length == out_positions:
        return rows.copy()
    bounds = [(j * length) // out_positions for j in range(out_positions + 1)]
    out = np.empty((out_positions, rows.shape[1]), dtype=np.float64)
    for j in range(out_positions):
        out[j] = rows[bounds[j] : bounds[j + 1]].mean(axis=0)
    return out
