# From tokens to fixed-shape embedding matrices.
#
# Task 1 maps 800 input tokens to 256 pooled vectors; task 2 maps 100 to 32.
# Static embedding is a table lookup with zero vectors for unknown/PAD
# tokens, followed by mean pooling over contiguous windows. The remote
# provider (see the embedsvc service) returns contextual vectors pooled
# server-side to the same contract.

import os
import tempfile

import numpy as np

from protestlens import (
    EmbedConfig,
    embed_static,
    load_static_vectors,
    pad_or_truncate,
    pool_to_length,
    tokenize,
)

# a tiny vector file in the "token v1 ... vd" text format
vector_text = """\
protesters 1.0 0.0 0.0
marched 0.0 1.0 0.0
police 0.0 0.0 1.0
city 0.5 0.5 0.0
"""
with tempfile.NamedTemporaryFile("w", suffix=".txt", delete=False) as fh:
    fh.write(vector_text)
    vec_path = fh.name

table = load_static_vectors(vec_path)
print(f"vector table: {len(table)} tokens, dim {table.dim}")

cfg = EmbedConfig(max_tokens=8, out_positions=4, dim=table.dim)
seq = pad_or_truncate(tokenize("protesters marched past police"), cfg.max_tokens)
print("padded tokens:", seq.tokens)

matrix = embed_static(seq, table, cfg)
print("embedded shape:", matrix.shape)
print(np.round(matrix, 3))
print()

# pooling averages contiguous near-equal windows; constant rows stay put
rows = np.array([[1.0, 1.0], [3.0, 3.0], [5.0, 5.0], [7.0, 7.0]])
print("pool 4 rows -> 2:", pool_to_length(rows, 2).tolist())

# the full-scale task configurations
for task in ("task1", "task2"):
    c = EmbedConfig.for_task(task, dim=64)
    print(f"{task}: {c.max_tokens} tokens -> {c.out_positions} vectors")

os.unlink(vec_path)
