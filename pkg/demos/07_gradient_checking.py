# Verifying analytic gradients with central finite differences.
#
# Every layer's backward pass is checked against (f(x+h) - f(x-h)) / 2h in
# double precision. Max-pool is only piecewise smooth, so coordinates at a
# window tie are skipped.

import numpy as np

from protestlens.nn import (
    AttentionContext,
    BiGRU,
    BiLSTM,
    Conv1D,
    Dense,
    MaxPool1D,
    check_layer_gradients,
    grad_check,
    maxpool_tie_skip,
)

rng = np.random.default_rng(0)

cases = [
    ("dense(relu)", Dense(5, 4, "relu", rng), rng.normal(size=(3, 5)) + 0.05, None),
    ("conv1d", Conv1D(3, filters=4, kernel=3, rng=rng), rng.normal(size=(2, 9, 3)), None),
    ("maxpool1d", MaxPool1D(3), rng.normal(size=(2, 9, 2)), maxpool_tie_skip(3)),
    ("bigru", BiGRU(3, 4, rng=rng), rng.normal(size=(2, 5, 3)), None),
    ("bilstm", BiLSTM(3, 4, rng=rng), rng.normal(size=(2, 5, 3)), None),
    ("attention", AttentionContext(4, rng=rng), rng.normal(size=(2, 5, 4)), None),
]

print(f"{'layer':<12} {'max rel. error':>15}")
for name, layer, x, skip in cases:
    errors = check_layer_gradients(layer, x, rng, input_skip=skip)
    print(f"{name:<12} {max(errors.values()):>15.2e}")

# the harness itself: a quadratic has a clean analytic gradient...
print("\nf(x)=x^2 at x=3:", f"{grad_check(lambda x: (float((x**2).sum()), 2*x), np.array([3.0])):.2e}")
# ...and a deliberately wrong gradient is caught
print("wrong gradient: ", f"{grad_check(lambda x: (float((x**2).sum()), 3*x), np.array([3.0])):.2e}")
