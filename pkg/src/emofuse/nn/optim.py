"""Adam/AdamW and reduce-on-plateau scheduling.

Adam couples weight decay into the gradient (stage-2 adapters); AdamW applies
it as a decoupled shrink on the weights before the moment-based update
(stage-3 fusion).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, NumericError


class Adam:
    decoupled = False

    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        if lr <= 0:
            raise ConfigError("learning rate must be positive")
        if weight_decay < 0:
            raise ConfigError("weight decay must be non-negative")
        self.params = params  # dict name -> ndarray, updated in place
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for k, w in self.params.items():
            g = grads[k]
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient for parameter {k!r}")
            if self.weight_decay != 0.0:
                if self.decoupled:
                    w -= self.lr * self.weight_decay * w
                else:
                    g = g + self.weight_decay * w
            m = self.m[k]
            v = self.v[k]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            w -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


class AdamW(Adam):
    decoupled = True


class PlateauScheduler:
    """Multiply lr by `factor` after more than `patience` epochs without
    improvement; the counter resets on each reduction and each improvement."""

    def __init__(self, optimizer, factor=0.1, patience=5, mode="max"):
        if not 0.0 < factor < 1.0:
            raise ConfigError("plateau factor must be in (0,1)")
        if mode not in ("max", "min"):
            raise ConfigError("plateau mode must be 'max' or 'min'")
        self.optimizer = optimizer
        self.factor = factor
        self.patience = patience
        self.mode = mode
        self.best = -math.inf if mode == "max" else math.inf
        self.num_bad = 0

    def _improved(self, metric):
        return metric > self.best if self.mode == "max" else metric < self.best

    def step(self, metric):
        if not math.isfinite(metric):
            raise NumericError("plateau metric must be finite")
        if self._improved(metric):
            self.best = metric
            self.num_bad = 0
            return
        self.num_bad += 1
        if self.num_bad > self.patience:
            self.optimizer.lr *= self.factor
            self.num_bad = 0
