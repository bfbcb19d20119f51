"""Optimizers over named parameter dicts of ndtape tensors."""

from __future__ import annotations

import numpy as np

from .ndtape import Tensor

__all__ = ["Adam", "Sgd", "zero_grads"]


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None


class Adam:
    """Per-parameter adaptive step sizes from first/second moment estimates."""

    def __init__(self, params: dict[str, Tensor], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for k, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            m = self.m[k]
            v = self.v[k]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p.data -= (self.lr * (m / c1) /
                       (np.sqrt(v / c2) + self.eps)).astype(np.float32)
        zero_grads(self.params)


class Sgd:
    """Plain stochastic gradient descent, optionally with per-name step sizes."""

    def __init__(self, params: dict[str, Tensor], lr: float = 1e-2,
                 lr_overrides: dict[str, float] | None = None):
        self.params = params
        self.lr = lr
        self.lr_overrides = lr_overrides or {}

    def step(self) -> None:
        for k, p in self.params.items():
            if p.grad is None:
                continue
            lr = self.lr_overrides.get(k, self.lr)
            p.data -= (lr * p.grad).astype(np.float32)
        zero_grads(self.params)
