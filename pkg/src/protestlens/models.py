"""The three classifier presets: assembly, training, prediction.

model1_task1: Conv1D stack over 256 pooled embedding vectors.
model1_task2: two bidirectional GRUs plus attention over 32 vectors.
model2_multitask: shared bidirectional LSTM trunk with one sigmoid head per
task, trained by alternating task batches.

Training is mini-batch gradient descent, deterministic for a given seed, with
best-epoch parameters (by dev macro-F1) retained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbedConfig
from .evaluation import confusion_matrix, metrics_report
from .nn import (
    AttentionContext,
    BiGRU,
    BiLSTM,
    Conv1D,
    Dense,
    Flatten,
    MaxPool1D,
    NonFiniteGradient,
    bce_grad_batch,
    bce_loss_batch,
    load_checkpoint,
    make_optimizer,
    save_checkpoint,
)
from .resample import FeatureMatrix

__all__ = [
    "PRESETS",
    "ModelSpec",
    "TrainedModel",
    "TrainingDivergence",
    "Model",
    "MultitaskModel",
    "build_model",
    "predict_proba",
    "predict_proba_batch",
    "train",
    "classify",
    "save_model",
    "load_model",
]

PRESETS = ("model1_task1", "model1_task2", "model2_multitask")

_DEFAULT_OPTIMIZER = {
    "model1_task1": "adam",
    "model1_task2": "adam",
    "model2_multitask": "rmsprop",
}


class TrainingDivergence(RuntimeError):
    """Loss or a gradient went non-finite; carries epoch/batch context."""


@dataclass(frozen=True)
class ModelSpec:
    """Preset plus everything needed to rebuild and retrain a model."""

    preset: str
    embed: EmbedConfig
    embed_task2: EmbedConfig | None = None
    optimizer: str | None = None
    lr: float = 0.001
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    threshold: float = 0.5

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be strictly inside (0, 1)")
        if self.preset == "model2_multitask" and self.embed_task2 is None:
            raise ValueError("model2_multitask needs embed configs for both tasks")

    @property
    def optimizer_kind(self) -> str:
        return self.optimizer or _DEFAULT_OPTIMIZER[self.preset]


@dataclass
class TrainedModel:
    spec: ModelSpec
    model: "Model | MultitaskModel"
    history: list[dict] = field(default_factory=list)


class Model:
    """Sequential single-head model mapping (B, L, d) to probabilities (B,)."""

    def __init__(self, layers, input_shape, preset):
        self.layers = layers
        self.input_shape = input_shape
        self.preset = preset

    def shape_chain(self):
        """Static shape propagation; raises if any layer cannot accept its input."""
        chain = [("input", self.input_shape)]
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.out_shape(shape)
            if any(s <= 0 for s in shape):
                raise ValueError(f"{layer.kind} produces empty shape {shape}")
            chain.append((layer.kind, shape))
        if shape != (1,):
            raise ValueError(f"model must end in a single probability, got {shape}")
        return chain

    def forward(self, X):
        out = X
        for layer in self.layers:
            out = layer.forward(out)
        return out[:, 0]

    def backward(self, dp):
        grad = dp[:, None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def params(self):
        return {
            f"{i}.{name}": tensor
            for i, layer in enumerate(self.layers)
            for name, tensor in layer.params.items()
        }

    def grads(self):
        return {
            f"{i}.{name}": tensor
            for i, layer in enumerate(self.layers)
            for name, tensor in layer.grads.items()
        }

    def layer_kinds(self):
        return [layer.kind for layer in self.layers]


class MultitaskModel:
    """Shared BiLSTM trunk with one sigmoid dense head per task."""

    def __init__(self, trunk, heads, input_shapes, preset):
        self.trunk = trunk
        self.heads = heads  # {"task1": Dense, "task2": Dense}
        self.input_shapes = input_shapes  # {"task1": (L1, d), "task2": (L2, d)}
        self.preset = preset

    def shape_chain(self, head="task1"):
        shape = self.input_shapes[head]
        chain = [("input", shape)]
        shape = self.trunk.out_shape(shape)
        chain.append((self.trunk.kind, shape))
        shape = self.heads[head].out_shape(shape)
        chain.append((f"head_{head}", shape))
        if shape != (1,):
            raise ValueError(f"head {head} must end in a single probability, got {shape}")
        return chain

    def forward(self, X, head):
        if head not in self.heads:
            raise ValueError(f"unknown task head {head!r}")
        hidden = self.trunk.forward(X)
        return self.heads[head].forward(hidden)[:, 0]

    def backward(self, dp, head):
        grad = self.heads[head].backward(dp[:, None])
        return self.trunk.backward(grad)

    def zero_grads(self):
        self.trunk.zero_grads()
        for h in self.heads.values():
            h.zero_grads()

    def params(self):
        out = {f"trunk.{name}": t for name, t in self.trunk.params.items()}
        for head, layer in self.heads.items():
            out.update({f"head_{head}.{name}": t for name, t in layer.params.items()})
        return out

    def grads(self):
        out = {f"trunk.{name}": t for name, t in self.trunk.grads.items()}
        for head, layer in self.heads.items():
            out.update({f"head_{head}.{name}": t for name, t in layer.grads.items()})
        return out

    def layer_kinds(self):
        return [self.trunk.kind] + [f"head_{h}" for h in sorted(self.heads)]


def build_model(spec: ModelSpec):
    """Assemble the preset's layer stack with seeded Glorot initialization."""
    rng = np.random.default_rng(spec.seed)
    d = spec.embed.dim
    if spec.preset == "model1_task1":
        L = spec.embed.out_positions
        layers = [
            Conv1D(d, filters=32, kernel=5, activation="relu", rng=rng),
            MaxPool1D(3),
            Conv1D(32, filters=32, kernel=4, activation="relu", rng=rng),
            MaxPool1D(3),
            Conv1D(32, filters=64, kernel=3, activation="relu", rng=rng),
            MaxPool1D(3),
            Flatten(),
        ]
        (n_flat,) = _propagate(layers, (L, d))
        layers.append(Dense(n_flat, 64, activation="relu", rng=rng))
        layers.append(Dense(64, 1, activation="sigmoid", rng=rng))
        model = Model(layers, (L, d), spec.preset)
    elif spec.preset == "model1_task2":
        L = spec.embed.out_positions
        layers = [
            BiGRU(d, 128, rng=rng),
            BiGRU(256, 64, rng=rng),
            AttentionContext(128, rng=rng),
            Dense(128, 64, activation="relu", rng=rng),
            Dense(64, 1, activation="sigmoid", rng=rng),
        ]
        model = Model(layers, (L, d), spec.preset)
    elif spec.preset == "model2_multitask":
        trunk = BiLSTM(d, 10, rng=rng, return_sequences=False)
        heads = {
            "task1": Dense(20, 1, activation="sigmoid", rng=rng),
            "task2": Dense(20, 1, activation="sigmoid", rng=rng),
        }
        shapes = {
            "task1": (spec.embed.out_positions, d),
            "task2": (spec.embed_task2.out_positions, d),
        }
        model = MultitaskModel(trunk, heads, shapes, spec.preset)
        model.shape_chain("task1")
        model.shape_chain("task2")
        return model
    else:
        raise ValueError(f"unknown preset {spec.preset!r}")
    model.shape_chain()
    return model


def _propagate(layers, shape):
    for layer in layers:
        shape = layer.out_shape(shape)
        if any(s <= 0 for s in shape):
            raise ValueError(
                f"{layer.kind} output shape {shape} is empty; input too short for the stack"
            )
    return shape


def _as_sequences(fm: FeatureMatrix, cfg: EmbedConfig) -> np.ndarray:
    expected = cfg.out_positions * cfg.dim
    if fm.X.shape[1] != expected:
        raise ValueError(
            f"feature width {fm.X.shape[1]} does not match {cfg.out_positions}x{cfg.dim}"
        )
    return fm.X.reshape(fm.n, cfg.out_positions, cfg.dim)


def predict_proba(model, x: np.ndarray, head: str | None = None) -> float:
    """Probability for a single (L, d) embedded sequence."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(model, TrainedModel):
        model = model.model
    if isinstance(model, MultitaskModel):
        if head is None:
            raise ValueError("multitask model needs a task head selector")
        return float(model.forward(x[None], head)[0])
    if head is not None and head not in (None, "task1", "task2"):
        raise ValueError(f"unknown head {head!r}")
    return float(model.forward(x[None])[0])


def predict_proba_batch(model, X: np.ndarray, head: str | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if isinstance(model, TrainedModel):
        model = model.model
    if isinstance(model, MultitaskModel):
        if head is None:
            raise ValueError("multitask model needs a task head selector")
        return model.forward(X, head)
    return model.forward(X)


def classify(p: float, threshold: float = 0.5) -> int:
    """1 iff p is strictly above the threshold; ties go to class 0."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be strictly inside (0, 1)")
    return 1 if p > threshold else 0


def _dev_macro_f1(model, X, y, threshold, head=None):
    probs = predict_proba_batch(model, X, head=head)
    preds = [classify(float(p), threshold) for p in probs]
    report = metrics_report(confusion_matrix(list(y), preds))
    return report.macro_f1, preds


def _snapshot(params: dict) -> dict:
    return {k: v.copy() for k, v in params.items()}


def _restore(params: dict, snapshot: dict) -> None:
    for k, v in snapshot.items():
        params[k][...] = v


def _train_batch(model, X, y, optimizer, head=None):
    """One forward/backward/update step; returns the batch mean loss."""
    probs = model.forward(X, head) if head is not None else model.forward(X)
    losses = bce_loss_batch(probs, y)
    loss = float(losses.mean())
    if not np.isfinite(loss):
        raise NonFiniteGradient("non-finite loss")
    dp = bce_grad_batch(probs, y)
    model.zero_grads()
    if head is not None:
        model.backward(dp, head)
        grads = {k: g for k, g in model.grads().items()
                 if k.startswith("trunk.") or k.startswith(f"head_{head}.")}
    else:
        model.backward(dp)
        grads = model.grads()
    params = model.params()
    optimizer.step({k: params[k] for k in grads}, grads)
    return loss


def train(model, data, spec: ModelSpec, dev, log_path=None, epoch_callback=None) -> TrainedModel:
    """Mini-batch training with per-epoch dev evaluation.

    Single-task presets take one FeatureMatrix for data and one for dev;
    the multitask preset takes (task1, task2) pairs of FeatureMatrix and
    alternates one batch per task. History records per-epoch mean loss and
    dev macro-F1; the parameters of the best dev epoch are restored at the
    end. Deterministic for a fixed spec.seed.
    """
    multitask = isinstance(model, MultitaskModel)
    optimizer = make_optimizer(spec.optimizer_kind, spec.lr)
    rng = np.random.default_rng(spec.seed)
    history: list[dict] = []

    if multitask:
        fm1, fm2 = data
        dev1, dev2 = dev
        if fm1.n == 0 or fm2.n == 0:
            raise ValueError("training data is empty")
        X1 = _as_sequences(fm1, spec.embed)
        X2 = _as_sequences(fm2, spec.embed_task2)
        D1 = _as_sequences(dev1, spec.embed)
        D2 = _as_sequences(dev2, spec.embed_task2)
    else:
        fm = data
        if fm.n == 0:
            raise ValueError("training data is empty")
        X = _as_sequences(fm, spec.embed)
        devX = _as_sequences(dev, spec.embed)
        model.shape_chain()

    best_f1 = -1.0
    best_params = _snapshot(model.params())
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        for epoch in range(1, spec.epochs + 1):
            losses = []
            try:
                if multitask:
                    order1 = rng.permutation(fm1.n)
                    order2 = rng.permutation(fm2.n)
                    b1 = [order1[i : i + spec.batch_size] for i in range(0, fm1.n, spec.batch_size)]
                    b2 = [order2[i : i + spec.batch_size] for i in range(0, fm2.n, spec.batch_size)]
                    for i in range(max(len(b1), len(b2))):
                        if i < len(b1):
                            losses.append(_train_batch(
                                model, X1[b1[i]], fm1.y[b1[i]], optimizer, head="task1"))
                        if i < len(b2):
                            losses.append(_train_batch(
                                model, X2[b2[i]], fm2.y[b2[i]], optimizer, head="task2"))
                else:
                    order = rng.permutation(fm.n)
                    for i in range(0, fm.n, spec.batch_size):
                        sel = order[i : i + spec.batch_size]
                        losses.append(_train_batch(model, X[sel], fm.y[sel], optimizer))
            except NonFiniteGradient as exc:
                raise TrainingDivergence(
                    f"epoch {epoch}, batch {len(losses) + 1}: {exc}"
                ) from exc

            mean_loss = float(np.mean(losses))
            if multitask:
                f1_1, _ = _dev_macro_f1(model, D1, dev1.y, spec.threshold, head="task1")
                f1_2, _ = _dev_macro_f1(model, D2, dev2.y, spec.threshold, head="task2")
                dev_f1 = (f1_1 + f1_2) / 2.0
            else:
                dev_f1, _ = _dev_macro_f1(model, devX, dev.y, spec.threshold)

            entry = {"epoch": epoch, "loss": mean_loss, "dev_macro_f1": dev_f1}
            history.append(entry)
            if log_fh:
                log_fh.write(json.dumps(entry, sort_keys=True) + "\n")
            if dev_f1 > best_f1:
                best_f1 = dev_f1
                best_params = _snapshot(model.params())
            if epoch_callback is not None:
                epoch_callback(epoch, model, entry)
    finally:
        if log_fh:
            log_fh.close()

    _restore(model.params(), best_params)
    return TrainedModel(spec=spec, model=model, history=history)


def _spec_to_meta(spec: ModelSpec) -> dict:
    meta = {
        "preset": spec.preset,
        "optimizer": spec.optimizer_kind,
        "lr": spec.lr,
        "epochs": spec.epochs,
        "batch_size": spec.batch_size,
        "seed": spec.seed,
        "threshold": spec.threshold,
        "embed": vars(spec.embed).copy(),
    }
    if spec.embed_task2 is not None:
        meta["embed_task2"] = vars(spec.embed_task2).copy()
    return meta


def _spec_from_meta(meta: dict) -> ModelSpec:
    embed = EmbedConfig(**meta["embed"])
    embed2 = EmbedConfig(**meta["embed_task2"]) if "embed_task2" in meta else None
    return ModelSpec(
        preset=meta["preset"],
        embed=embed,
        embed_task2=embed2,
        optimizer=meta["optimizer"],
        lr=meta["lr"],
        epochs=meta["epochs"],
        batch_size=meta["batch_size"],
        seed=meta["seed"],
        threshold=meta["threshold"],
    )


def save_model(trained: TrainedModel, path) -> None:
    """Write spec + parameters in the checkpoint format (manifest + floats)."""
    model = trained.model
    meta = _spec_to_meta(trained.spec)
    meta["layer_kinds"] = model.layer_kinds()
    tensors = sorted(model.params().items())
    save_checkpoint(path, meta, tensors)


def load_model(path) -> TrainedModel:
    """Rebuild the model from a checkpoint and load its parameters."""
    meta, tensors = load_checkpoint(path)
    spec = _spec_from_meta(meta)
    model = build_model(spec)
    params = model.params()
    if set(params) != set(tensors):
        raise ValueError("checkpoint tensors do not match the preset's parameters")
    for name, value in tensors.items():
        params[name][...] = value
    return TrainedModel(spec=spec, model=model, history=[])
