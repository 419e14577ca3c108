"""Binary cross-entropy (log loss), the training objective for all presets."""

from __future__ import annotations

import numpy as np

__all__ = ["BCE_EPS", "bce_loss", "bce_loss_batch", "bce_grad_batch"]

BCE_EPS = 1e-7


def bce_loss(p: float, y: int) -> float:
    """-[y ln p + (1-y) ln(1-p)] with p clipped to [eps, 1-eps]."""
    p = min(max(float(p), BCE_EPS), 1.0 - BCE_EPS)
    return -(y * np.log(p) + (1 - y) * np.log(1.0 - p))


def bce_loss_batch(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-example losses for probability and label vectors."""
    p = np.clip(np.asarray(p, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    y = np.asarray(y, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def bce_grad_batch(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d(mean loss)/dp, with the same clipping as the loss."""
    p = np.clip(np.asarray(p, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    y = np.asarray(y, dtype=np.float64)
    return (-(y / p) + (1.0 - y) / (1.0 - p)) / p.shape[0]
