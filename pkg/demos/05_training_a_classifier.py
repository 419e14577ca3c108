# Training the GRU+attention preset on a tiny separable problem.
#
# The three presets: model1_task1 (Conv1D stack over 256 pooled vectors),
# model1_task2 (two bidirectional GRUs + attention over 32 vectors), and
# model2_multitask (shared bidirectional LSTM with one sigmoid head per
# task). Here model1_task2 learns a synthetic two-class embedding set.

import numpy as np

from protestlens import (
    EmbedConfig,
    FeatureMatrix,
    ModelSpec,
    build_model,
    classify,
    predict_proba,
    train,
)

cfg = EmbedConfig(max_tokens=16, out_positions=8, dim=6)
rng = np.random.default_rng(1)


def separable_set(n, seed):
    r = np.random.default_rng(seed)
    y = np.array([1] * (n // 2) + [0] * (n - n // 2))
    X = r.normal(size=(n, cfg.out_positions * cfg.dim)) + 2.5 * y[:, None]
    return FeatureMatrix(X, y)


spec = ModelSpec(preset="model1_task2", embed=cfg, epochs=8, batch_size=16, seed=0)
model = build_model(spec)

print("layer stack:", " -> ".join(model.layer_kinds()))
print("shape chain:")
for kind, shape in model.shape_chain():
    print(f"  {kind:<18} {shape}")
print()

trained = train(model, separable_set(60, seed=2), spec, separable_set(24, seed=3))
for entry in trained.history:
    print(f"epoch {entry['epoch']:>2}  loss {entry['loss']:.4f}  "
          f"dev macro-F1 {entry['dev_macro_f1']:.3f}")

fresh = separable_set(2, seed=9)  # row 0 is class 1, row 1 is class 0
print()
for i in range(2):
    x = fresh.X[i].reshape(cfg.out_positions, cfg.dim)
    p = predict_proba(trained, x)
    print(f"true class {fresh.y[i]}: probability {p:.3f} -> predicted {classify(p, spec.threshold)}")
