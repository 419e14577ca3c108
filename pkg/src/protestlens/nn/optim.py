"""RMSProp and Adam parameter updates over named tensor dictionaries."""

from __future__ import annotations

import numpy as np

__all__ = ["NonFiniteGradient", "RMSProp", "Adam", "make_optimizer"]


class NonFiniteGradient(RuntimeError):
    """A gradient contained nan/inf; training must abort with a diagnostic."""


def _check_finite(grads: dict):
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in {name!r}")


class RMSProp:
    """theta <- theta - lr * g / (sqrt(cache) + eps), cache an EMA of g^2."""

    kind = "rmsprop"

    def __init__(self, lr=0.001, rho=0.9, eps=1e-7):
        self.lr, self.rho, self.eps = lr, rho, eps
        self.cache: dict[str, np.ndarray] = {}

    def step(self, params: dict, grads: dict):
        _check_finite(grads)
        for name, g in grads.items():
            if name not in self.cache:
                self.cache[name] = np.zeros_like(g)
            c = self.cache[name]
            c *= self.rho
            c += (1.0 - self.rho) * g * g
            params[name] -= self.lr * g / (np.sqrt(c) + self.eps)


class Adam:
    """Bias-corrected first/second moment update."""

    kind = "adam"

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict, grads: dict):
        _check_finite(grads)
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def make_optimizer(kind: str, lr: float):
    if kind == "rmsprop":
        return RMSProp(lr=lr)
    if kind == "adam":
        return Adam(lr=lr)
    raise ValueError(f"unknown optimizer {kind!r}")
