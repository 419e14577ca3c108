"""Forward/backward passes for every layer the three classifier presets need.

Two surfaces: plain functions over single examples (the reference math, handy
for hand-checked tests) and batched Layer classes used for training, which
carry parameters, cache activations on forward and accumulate gradients on
backward. Everything is float64.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "sigmoid",
    "relu",
    "softmax",
    "glorot_uniform",
    "dense_forward",
    "conv1d_forward",
    "maxpool1d_forward",
    "gru_step",
    "lstm_step",
    "bidirectional",
    "attention_context_forward",
    "init_gru_params",
    "init_lstm_params",
    "Layer",
    "Dense",
    "Conv1D",
    "MaxPool1D",
    "Flatten",
    "BiGRU",
    "BiLSTM",
    "AttentionContext",
]


_SIGMOID_LO = np.nextafter(0.0, 1.0)
_SIGMOID_HI = np.nextafter(1.0, 0.0)


def sigmoid(z):
    # clamped one ulp inside (0, 1): saturated inputs must not round to 0 or 1
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _SIGMOID_LO, _SIGMOID_HI)


def relu(z):
    return np.maximum(np.asarray(z, dtype=np.float64), 0.0)


def softmax(scores, axis=-1):
    scores = np.asarray(scores, dtype=np.float64)
    shifted = scores - scores.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


_ACTIVATIONS = {
    "identity": lambda z: np.asarray(z, dtype=np.float64),
    "relu": relu,
    "sigmoid": sigmoid,
}


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


# ---------------------------------------------------------------------------
# Functional single-example ops
# ---------------------------------------------------------------------------

def dense_forward(x, W, b, activation="identity"):
    """a(Wx + b) for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if W.shape[1] != x.shape[0]:
        raise ValueError(f"W has {W.shape[1]} columns but x has {x.shape[0]} entries")
    if b.shape[0] != W.shape[0]:
        raise ValueError(f"b has {b.shape[0]} entries but W has {W.shape[0]} rows")
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    return _ACTIVATIONS[activation](W @ x + b)


def conv1d_forward(x, filters, b):
    """Valid (no-padding) cross-correlation: (L,d) -> (L-k+1, F).

    filters has shape (F, k, d). No activation here; the enclosing model
    applies it.
    """
    x = np.asarray(x, dtype=np.float64)
    filters = np.asarray(filters, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    L, d = x.shape
    F, k, dk = filters.shape
    if dk != d:
        raise ValueError(f"filter depth {dk} != input depth {d}")
    if L < k:
        raise ValueError(f"input length {L} shorter than kernel {k}")
    windows = sliding_window_view(x, k, axis=0)  # (L-k+1, d, k)
    return np.einsum("tdk,fkd->tf", windows, filters) + b


def maxpool1d_forward(x, window):
    """Non-overlapping per-channel max over windows; remainder dropped."""
    x = np.asarray(x, dtype=np.float64)
    L = x.shape[0]
    if window <= 0:
        raise ValueError("window must be positive")
    if L < window:
        raise ValueError(f"input length {L} shorter than window {window}")
    m = L // window
    return x[: m * window].reshape(m, window, -1).max(axis=1)


def init_gru_params(rng, in_dim, units):
    p = {}
    for gate in "zrh":
        p[f"W{gate}"] = glorot_uniform(rng, (units, in_dim), in_dim, units)
        p[f"U{gate}"] = glorot_uniform(rng, (units, units), units, units)
        p[f"b{gate}"] = np.zeros(units)
    return p


def init_lstm_params(rng, in_dim, units):
    p = {}
    for gate in "ifog":
        p[f"W{gate}"] = glorot_uniform(rng, (units, in_dim), in_dim, units)
        p[f"U{gate}"] = glorot_uniform(rng, (units, units), units, units)
        p[f"b{gate}"] = np.zeros(units)
    return p


def gru_step(x_t, h_prev, params):
    """One GRU update: h_t = (1-z) * h_prev + z * h_tilde."""
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    if params["Wz"].shape[1] != x_t.shape[-1]:
        raise ValueError("input width does not match GRU parameters")
    if params["Uz"].shape[1] != h_prev.shape[-1]:
        raise ValueError("state width does not match GRU parameters")
    z = sigmoid(params["Wz"] @ x_t + params["Uz"] @ h_prev + params["bz"])
    r = sigmoid(params["Wr"] @ x_t + params["Ur"] @ h_prev + params["br"])
    h_tilde = np.tanh(params["Wh"] @ x_t + params["Uh"] @ (r * h_prev) + params["bh"])
    return (1.0 - z) * h_prev + z * h_tilde


def lstm_step(x_t, state, params):
    """One LSTM update (no peepholes); returns (h_t, c_t)."""
    h_prev, c_prev = state
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    if params["Wi"].shape[1] != x_t.shape[-1]:
        raise ValueError("input width does not match LSTM parameters")
    i = sigmoid(params["Wi"] @ x_t + params["Ui"] @ h_prev + params["bi"])
    f = sigmoid(params["Wf"] @ x_t + params["Uf"] @ h_prev + params["bf"])
    o = sigmoid(params["Wo"] @ x_t + params["Uo"] @ h_prev + params["bo"])
    g = np.tanh(params["Wg"] @ x_t + params["Ug"] @ h_prev + params["bg"])
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return h_t, c_t


def bidirectional(step_fn, params_fwd, params_bwd, x, units):
    """Forward pass over t=1..L and an independent backward pass over t=L..1.

    step_fn is gru_step or lstm_step (lstm state handled internally). Output
    row t concatenates the forward state after reading x[0..t] with the
    backward state after reading x[L-1..t]: shape (L, 2*units).
    """
    x = np.asarray(x, dtype=np.float64)
    L = x.shape[0]
    if L < 1:
        raise ValueError("sequence must have at least one step")

    def run(params, order):
        if step_fn is lstm_step:
            h, c = np.zeros(units), np.zeros(units)
            states = {}
            for t in order:
                h, c = lstm_step(x[t], (h, c), params)
                states[t] = h
        else:
            h = np.zeros(units)
            states = {}
            for t in order:
                h = step_fn(x[t], h, params)
                states[t] = h
        return states

    fwd = run(params_fwd, range(L))
    bwd = run(params_bwd, range(L - 1, -1, -1))
    return np.stack([np.concatenate([fwd[t], bwd[t]]) for t in range(L)])


def attention_context_forward(H, params):
    """Attention with a learned context vector over (L, h) hidden states.

    u_t = tanh(W h_t + b); alpha = softmax(u_t . u_c); returns the weighted
    sum of hidden states and the weights themselves.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.shape[0] < 1:
        raise ValueError("attention needs at least one position")
    u_t = np.tanh(H @ params["W"].T + params["b"])
    scores = u_t @ params["u"]
    alpha = softmax(scores)
    return alpha @ H, alpha


# ---------------------------------------------------------------------------
# Batched layer classes (leading batch axis)
# ---------------------------------------------------------------------------

class Layer:
    """Base: parameters, gradient slots, cached forward state."""

    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def out_shape(self, in_shape):
        raise NotImplementedError

    def _require_cache(self):
        if self._cache is None:
            raise RuntimeError(f"{self.kind}: backward called without a recorded forward pass")
        return self._cache


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_dim, out_dim, activation="identity", rng=None):
        super().__init__()
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.in_dim, self.out_dim, self.activation = in_dim, out_dim, activation
        rng = rng or np.random.default_rng(0)
        self.params = {
            "W": glorot_uniform(rng, (out_dim, in_dim), in_dim, out_dim),
            "b": np.zeros(out_dim),
        }
        self.zero_grads()

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"dense expects width {self.in_dim}, got {x.shape[-1]}")
        z = x @ self.params["W"].T + self.params["b"]
        y = _ACTIVATIONS[self.activation](z)
        self._cache = (x, z, y)
        return y

    def backward(self, dy):
        x, z, y = self._require_cache()
        if self.activation == "relu":
            dz = dy * (z > 0)
        elif self.activation == "sigmoid":
            dz = dy * y * (1.0 - y)
        else:
            dz = dy
        self.grads["W"] += dz.T @ x
        self.grads["b"] += dz.sum(axis=0)
        return dz @ self.params["W"]

    def out_shape(self, in_shape):
        return (self.out_dim,)


class Conv1D(Layer):
    kind = "conv1d"

    def __init__(self, in_dim, filters, kernel, activation="identity", rng=None):
        super().__init__()
        self.in_dim, self.filters, self.kernel = in_dim, filters, kernel
        self.activation = activation
        rng = rng or np.random.default_rng(0)
        fan_in, fan_out = kernel * in_dim, filters
        self.params = {
            "W": glorot_uniform(rng, (filters, kernel, in_dim), fan_in, fan_out),
            "b": np.zeros(filters),
        }
        self.zero_grads()

    def forward(self, x):
        B, L, d = x.shape
        if d != self.in_dim:
            raise ValueError(f"conv1d expects depth {self.in_dim}, got {d}")
        if L < self.kernel:
            raise ValueError(f"input length {L} shorter than kernel {self.kernel}")
        windows = sliding_window_view(x, self.kernel, axis=1)  # (B, L', d, k)
        z = np.einsum("btdk,fkd->btf", windows, self.params["W"]) + self.params["b"]
        y = _ACTIVATIONS[self.activation](z)
        self._cache = (x, windows, z, y)
        return y

    def backward(self, dy):
        x, windows, z, y = self._require_cache()
        if self.activation == "relu":
            dz = dy * (z > 0)
        elif self.activation == "sigmoid":
            dz = dy * y * (1.0 - y)
        else:
            dz = dy
        self.grads["W"] += np.einsum("btf,btdk->fkd", dz, windows)
        self.grads["b"] += dz.sum(axis=(0, 1))
        dx = np.zeros_like(x)
        Lp = dz.shape[1]
        for i in range(self.kernel):
            dx[:, i : i + Lp] += np.einsum("btf,fd->btd", dz, self.params["W"][:, i, :])
        return dx

    def out_shape(self, in_shape):
        L, d = in_shape
        return (L - self.kernel + 1, self.filters)


class MaxPool1D(Layer):
    kind = "maxpool1d"

    def __init__(self, window):
        super().__init__()
        self.window = window

    def forward(self, x):
        B, L, F = x.shape
        if L < self.window:
            raise ValueError(f"input length {L} shorter than window {self.window}")
        m = L // self.window
        trimmed = x[:, : m * self.window].reshape(B, m, self.window, F)
        idx = trimmed.argmax(axis=2)
        out = np.take_along_axis(trimmed, idx[:, :, None, :], axis=2)[:, :, 0, :]
        self._cache = (x.shape, idx, m)
        return out

    def backward(self, dy):
        shape, idx, m = self._require_cache()
        B, L, F = shape
        dtrim = np.zeros((B, m, self.window, F))
        np.put_along_axis(dtrim, idx[:, :, None, :], dy[:, :, None, :], axis=2)
        dx = np.zeros(shape)
        dx[:, : m * self.window] = dtrim.reshape(B, m * self.window, F)
        return dx

    def out_shape(self, in_shape):
        L, F = in_shape
        return (L // self.window, F)


class Flatten(Layer):
    kind = "flatten"

    def forward(self, x):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._require_cache())

    def out_shape(self, in_shape):
        n = 1
        for s in in_shape:
            n *= s
        return (n,)


def _run_gru_direction(x, params, order):
    """Batched GRU over one direction; returns per-position states + caches."""
    B, L, _ = x.shape
    H = params["bz"].shape[0]
    Xz = x @ params["Wz"].T + params["bz"]
    Xr = x @ params["Wr"].T + params["br"]
    Xh = x @ params["Wh"].T + params["bh"]
    h = np.zeros((B, H))
    out = np.zeros((B, L, H))
    caches = {}
    for t in order:
        z = sigmoid(Xz[:, t] + h @ params["Uz"].T)
        r = sigmoid(Xr[:, t] + h @ params["Ur"].T)
        rh = r * h
        hh = np.tanh(Xh[:, t] + rh @ params["Uh"].T)
        h_new = (1.0 - z) * h + z * hh
        caches[t] = (h, z, r, rh, hh)
        out[:, t] = h_new
        h = h_new
    return out, caches


def _gru_direction_backward(x, dout, params, grads, caches, order):
    B, L, _ = x.shape
    H = params["bz"].shape[0]
    dx = np.zeros_like(x)
    dh_next = np.zeros((B, H))
    for t in reversed(order):
        h_prev, z, r, rh, hh = caches[t]
        dh = dout[:, t] + dh_next
        dz = dh * (hh - h_prev)
        dhh = dh * z
        dh_prev = dh * (1.0 - z)
        dahh = dhh * (1.0 - hh * hh)
        grads["Wh"] += dahh.T @ x[:, t]
        grads["bh"] += dahh.sum(axis=0)
        grads["Uh"] += dahh.T @ rh
        dx[:, t] += dahh @ params["Wh"]
        drh = dahh @ params["Uh"]
        dr = drh * h_prev
        dh_prev += drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        for name, da in (("z", daz), ("r", dar)):
            grads[f"W{name}"] += da.T @ x[:, t]
            grads[f"b{name}"] += da.sum(axis=0)
            grads[f"U{name}"] += da.T @ h_prev
            dx[:, t] += da @ params[f"W{name}"]
            dh_prev += da @ params[f"U{name}"]
        dh_next = dh_prev
    return dx


class BiGRU(Layer):
    """Bidirectional GRU returning the full sequence: (B, L, d) -> (B, L, 2*units)."""

    kind = "gru"

    def __init__(self, in_dim, units, rng=None):
        super().__init__()
        self.in_dim, self.units = in_dim, units
        rng = rng or np.random.default_rng(0)
        fwd = init_gru_params(rng, in_dim, units)
        bwd = init_gru_params(rng, in_dim, units)
        self.params = {f"fwd_{k}": v for k, v in fwd.items()}
        self.params.update({f"bwd_{k}": v for k, v in bwd.items()})
        self.zero_grads()

    def _dir_params(self, prefix):
        return {k[len(prefix):]: v for k, v in self.params.items() if k.startswith(prefix)}

    def _dir_grads(self, prefix):
        return {k[len(prefix):]: v for k, v in self.grads.items() if k.startswith(prefix)}

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"gru expects depth {self.in_dim}, got {x.shape[-1]}")
        L = x.shape[1]
        fwd_out, fwd_cache = _run_gru_direction(x, self._dir_params("fwd_"), range(L))
        bwd_out, bwd_cache = _run_gru_direction(
            x, self._dir_params("bwd_"), range(L - 1, -1, -1)
        )
        self._cache = (x, fwd_cache, bwd_cache)
        return np.concatenate([fwd_out, bwd_out], axis=2)

    def backward(self, dy):
        x, fwd_cache, bwd_cache = self._require_cache()
        L = x.shape[1]
        H = self.units
        dx = _gru_direction_backward(
            x, dy[:, :, :H], self._dir_params("fwd_"), self._dir_grads("fwd_"),
            fwd_cache, list(range(L)),
        )
        dx += _gru_direction_backward(
            x, dy[:, :, H:], self._dir_params("bwd_"), self._dir_grads("bwd_"),
            bwd_cache, list(range(L - 1, -1, -1)),
        )
        return dx

    def out_shape(self, in_shape):
        L, _ = in_shape
        return (L, 2 * self.units)


def _run_lstm_direction(x, params, order):
    B, L, _ = x.shape
    H = params["bi"].shape[0]
    X = {g: x @ params[f"W{g}"].T + params[f"b{g}"] for g in "ifog"}
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    out = np.zeros((B, L, H))
    caches = {}
    for t in order:
        i = sigmoid(X["i"][:, t] + h @ params["Ui"].T)
        f = sigmoid(X["f"][:, t] + h @ params["Uf"].T)
        o = sigmoid(X["o"][:, t] + h @ params["Uo"].T)
        g = np.tanh(X["g"][:, t] + h @ params["Ug"].T)
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        caches[t] = (h, c, i, f, o, g, tc)
        h = o * tc
        c = c_new
        out[:, t] = h
    return out, caches


def _lstm_direction_backward(x, dout, params, grads, caches, order):
    B, L, _ = x.shape
    H = params["bi"].shape[0]
    dx = np.zeros_like(x)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in reversed(order):
        h_prev, c_prev, i, f, o, g, tc = caches[t]
        dh = dout[:, t] + dh_next
        do = dh * tc
        dc = dh * o * (1.0 - tc * tc) + dc_next
        df = dc * c_prev
        di = dc * g
        dg = dc * i
        dc_next = dc * f
        dh_prev = np.zeros((B, H))
        pre = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "g": dg * (1.0 - g * g),
        }
        for gate, da in pre.items():
            grads[f"W{gate}"] += da.T @ x[:, t]
            grads[f"b{gate}"] += da.sum(axis=0)
            grads[f"U{gate}"] += da.T @ h_prev
            dx[:, t] += da @ params[f"W{gate}"]
            dh_prev += da @ params[f"U{gate}"]
        dh_next = dh_prev
    return dx


class BiLSTM(Layer):
    """Bidirectional LSTM; with return_sequences=False emits the concatenated
    final-step states of both directions: (B, L, d) -> (B, 2*units)."""

    kind = "lstm"

    def __init__(self, in_dim, units, rng=None, return_sequences=False):
        super().__init__()
        self.in_dim, self.units = in_dim, units
        self.return_sequences = return_sequences
        rng = rng or np.random.default_rng(0)
        fwd = init_lstm_params(rng, in_dim, units)
        bwd = init_lstm_params(rng, in_dim, units)
        self.params = {f"fwd_{k}": v for k, v in fwd.items()}
        self.params.update({f"bwd_{k}": v for k, v in bwd.items()})
        self.zero_grads()

    def _dir_params(self, prefix):
        return {k[len(prefix):]: v for k, v in self.params.items() if k.startswith(prefix)}

    def _dir_grads(self, prefix):
        return {k[len(prefix):]: v for k, v in self.grads.items() if k.startswith(prefix)}

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"lstm expects depth {self.in_dim}, got {x.shape[-1]}")
        L = x.shape[1]
        fwd_out, fwd_cache = _run_lstm_direction(x, self._dir_params("fwd_"), range(L))
        bwd_out, bwd_cache = _run_lstm_direction(
            x, self._dir_params("bwd_"), range(L - 1, -1, -1)
        )
        self._cache = (x, fwd_cache, bwd_cache)
        if self.return_sequences:
            return np.concatenate([fwd_out, bwd_out], axis=2)
        # final processed step per direction: t=L-1 forward, t=0 backward
        return np.concatenate([fwd_out[:, L - 1], bwd_out[:, 0]], axis=1)

    def backward(self, dy):
        x, fwd_cache, bwd_cache = self._require_cache()
        B, L, _ = x.shape
        H = self.units
        if self.return_sequences:
            dfwd, dbwd = dy[:, :, :H], dy[:, :, H:]
        else:
            dfwd = np.zeros((B, L, H))
            dbwd = np.zeros((B, L, H))
            dfwd[:, L - 1] = dy[:, :H]
            dbwd[:, 0] = dy[:, H:]
        dx = _lstm_direction_backward(
            x, dfwd, self._dir_params("fwd_"), self._dir_grads("fwd_"),
            fwd_cache, list(range(L)),
        )
        dx += _lstm_direction_backward(
            x, dbwd, self._dir_params("bwd_"), self._dir_grads("bwd_"),
            bwd_cache, list(range(L - 1, -1, -1)),
        )
        return dx

    def out_shape(self, in_shape):
        L, _ = in_shape
        if self.return_sequences:
            return (L, 2 * self.units)
        return (2 * self.units,)


class AttentionContext(Layer):
    """Attention with learned context vector: (B, L, h) -> (B, h).

    The most recent attention weights stay readable on ``last_alpha``.
    """

    kind = "attention_context"

    def __init__(self, in_dim, rng=None, attn_dim=None):
        super().__init__()
        self.in_dim = in_dim
        self.attn_dim = attn_dim or in_dim
        rng = rng or np.random.default_rng(0)
        self.params = {
            "W": glorot_uniform(rng, (self.attn_dim, in_dim), in_dim, self.attn_dim),
            "b": np.zeros(self.attn_dim),
            "u": glorot_uniform(rng, (self.attn_dim,), self.attn_dim, 1),
        }
        self.zero_grads()
        self.last_alpha = None

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"attention expects width {self.in_dim}, got {x.shape[-1]}")
        u_t = np.tanh(x @ self.params["W"].T + self.params["b"])
        scores = u_t @ self.params["u"]
        alpha = softmax(scores, axis=1)
        out = np.einsum("bl,blh->bh", alpha, x)
        self._cache = (x, u_t, alpha)
        self.last_alpha = alpha
        return out

    def backward(self, dy):
        x, u_t, alpha = self._require_cache()
        dalpha = np.einsum("bh,blh->bl", dy, x)
        dx = alpha[:, :, None] * dy[:, None, :]
        ds = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
        du_t = ds[:, :, None] * self.params["u"]
        self.grads["u"] += (ds[:, :, None] * u_t).sum(axis=(0, 1))
        da = du_t * (1.0 - u_t * u_t)
        self.grads["W"] += np.einsum("bla,blh->ah", da, x)
        self.grads["b"] += da.sum(axis=(0, 1))
        dx += da @ self.params["W"]
        return dx

    def out_shape(self, in_shape):
        return (self.in_dim,)
