"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

__all__ = ["grad_check", "check_layer_gradients", "maxpool_tie_skip"]

DEFAULT_STEP = 1e-5


def _rel_error(analytic: float, numeric: float) -> float:
    scale = max(abs(analytic) + abs(numeric), 1e-12)
    return abs(analytic - numeric) / scale


def grad_check(fn, x: np.ndarray, step: float = DEFAULT_STEP, skip=None) -> float:
    """Compare fn's analytic gradient with central differences at x.

    fn maps an array to (scalar value, gradient array of x's shape). Returns
    the maximum relative error over all coordinates. ``skip(x, idx)`` may
    exclude coordinates where fn is not smooth (max-pool ties).
    """
    x = np.asarray(x, dtype=np.float64)
    _, analytic = fn(x)
    analytic = np.asarray(analytic, dtype=np.float64)
    if analytic.shape != x.shape:
        raise ValueError(f"gradient shape {analytic.shape} != point shape {x.shape}")
    max_err = 0.0
    for idx in np.ndindex(x.shape):
        if skip is not None and skip(x, idx):
            continue
        xp = x.copy()
        xp[idx] += step
        xm = x.copy()
        xm[idx] -= step
        numeric = (fn(xp)[0] - fn(xm)[0]) / (2.0 * step)
        max_err = max(max_err, _rel_error(float(analytic[idx]), float(numeric)))
    return max_err


def maxpool_tie_skip(window: int, step: float = DEFAULT_STEP):
    """Skip predicate for max-pool inputs: drop coordinates at a window tie."""

    def skip(x, idx):
        # x: (B, L, F); windows tile the L axis
        b, t, f = idx
        start = (t // window) * window
        chunk = x[b, start : start + window, f]
        if chunk.shape[0] < window:
            return False  # remainder position: gradient is identically zero
        top = chunk.max()
        near = np.sum(np.abs(chunk - top) <= 4.0 * step)
        return bool(near > 1 and abs(x[idx] - top) <= 4.0 * step)

    return skip


def check_layer_gradients(layer, x: np.ndarray, rng, step: float = DEFAULT_STEP,
                          input_skip=None) -> dict[str, float]:
    """Finite-difference check of one Layer's parameter and input gradients.

    Projects the layer output onto a fixed random direction to get a scalar,
    runs backward once for the analytic gradients, then perturbs every
    parameter coordinate and every input coordinate. Returns max relative
    error per parameter name plus "input".
    """
    probe = rng.standard_normal(np.asarray(layer.forward(x)).shape)

    def objective():
        return float(np.sum(layer.forward(x) * probe))

    objective()  # records the forward cache backward() needs
    layer.zero_grads()
    dx = layer.backward(probe)
    analytic_params = {k: v.copy() for k, v in layer.grads.items()}

    errors: dict[str, float] = {}
    for name, tensor in layer.params.items():
        max_err = 0.0
        for idx in np.ndindex(tensor.shape):
            orig = tensor[idx]
            tensor[idx] = orig + step
            up = objective()
            tensor[idx] = orig - step
            down = objective()
            tensor[idx] = orig
            numeric = (up - down) / (2.0 * step)
            max_err = max(max_err, _rel_error(float(analytic_params[name][idx]), numeric))
        errors[name] = max_err

    max_err = 0.0
    for idx in np.ndindex(x.shape):
        if input_skip is not None and input_skip(x, idx):
            continue
        orig = x[idx]
        x[idx] = orig + step
        up = objective()
        x[idx] = orig - step
        down = objective()
        x[idx] = orig
        numeric = (up - down) / (2.0 * step)
        max_err = max(max_err, _rel_error(float(dx[idx]), numeric))
    errors["input"] = max_err
    return errors
