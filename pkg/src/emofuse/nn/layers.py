"""Dense layers with explicit forward/backward passes.

Everything is plain numpy. Each layer keeps its parameters in `params` and
accumulates gradients into `grads`; `backward` consumes the upstream gradient
and returns the gradient w.r.t. the layer input. Caches from the last forward
call are kept on the instance, so a layer instance is single-stream: one
forward, then at most one backward.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, DimensionError, DataError


def sigmoid(x):
    # piecewise form avoids overflow for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x):
    return np.maximum(x, 0.0)


def silu(x):
    return x * sigmoid(x)


def silu_grad(x):
    s = sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


def softplus(x):
    # exact for moderate x, linear branch for large x where log1p(exp(x)) overflows
    return np.where(x > 30.0, x, np.log1p(np.exp(np.minimum(x, 30.0))))


def assert_finite(x, what="tensor"):
    if not np.all(np.isfinite(x)):
        from ..errors import NumericError

        raise NumericError(f"non-finite values in {what}")


class Module:
    """Base: parameter/gradient dicts plus train/eval mode."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.training = True

    def zero_grad(self):
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)

    def train(self, mode=True):
        self.training = mode
        return self

    def eval(self):
        return self.train(False)

    def astype(self, dtype):
        for k in self.params:
            self.params[k] = self.params[k].astype(dtype)
        self.zero_grad()
        return self


class Linear(Module):
    """y = x W^T + b with W of shape (out, in)."""

    def __init__(self, in_dim, out_dim, rng=None, bias=True, dtype=np.float32):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        rng = rng if rng is not None else np.random.default_rng(0)
        k = 1.0 / np.sqrt(in_dim)
        self.params["W"] = rng.uniform(-k, k, size=(out_dim, in_dim)).astype(dtype)
        if bias:
            self.params["b"] = rng.uniform(-k, k, size=out_dim).astype(dtype)
        self.zero_grad()

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise DimensionError(
                f"linear expects input dim {self.in_dim}, got {x.shape[-1]}"
            )
        self._x = x
        y = x @ self.params["W"].T
        if "b" in self.params:
            y = y + self.params["b"]
        return y

    def backward(self, dy):
        x = self._x
        self.grads["W"] += dy.T @ x
        if "b" in self.params:
            self.grads["b"] += dy.sum(axis=0)
        return dy @ self.params["W"]


class BatchNorm1d(Module):
    """Per-feature batch normalization with running statistics."""

    def __init__(self, num_features, momentum=0.1, eps=1e-5, dtype=np.float32):
        super().__init__()
        if eps <= 0:
            raise ConfigError("batchnorm eps must be positive")
        if not 0.0 < momentum < 1.0:
            raise ConfigError("batchnorm momentum must be in (0,1)")
        self.num_features = num_features
        self.momentum = momentum
        self.eps = eps
        self.params["gamma"] = np.ones(num_features, dtype=dtype)
        self.params["beta"] = np.zeros(num_features, dtype=dtype)
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)
        self.zero_grad()

    def forward(self, x):
        if x.shape[1] != self.num_features:
            raise DimensionError(
                f"batchnorm expects {self.num_features} features, got {x.shape[1]}"
            )
        if self.training:
            n = x.shape[0]
            if n < 2:
                raise DataError("batchnorm training requires batch size >= 2")
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            # running variance tracked unbiased, normalization uses biased var
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (
                (1 - self.momentum) * self.running_var + self.momentum * var * n / (n - 1)
            )
            self._std = np.sqrt(var + self.eps)
            self._xhat = (x - mean) / self._std
        else:
            self._std = np.sqrt(self.running_var + self.eps)
            self._xhat = (x - self.running_mean) / self._std
        return self.params["gamma"] * self._xhat + self.params["beta"]

    def backward(self, dy):
        xhat, std = self._xhat, self._std
        self.grads["gamma"] += (dy * xhat).sum(axis=0)
        self.grads["beta"] += dy.sum(axis=0)
        g = self.params["gamma"] / std
        if self.training:
            dxc = dy - dy.mean(axis=0) - xhat * (dy * xhat).mean(axis=0)
            return g * dxc
        return g * dy

    def astype(self, dtype):
        super().astype(dtype)
        self.running_mean = self.running_mean.astype(dtype)
        self.running_var = self.running_var.astype(dtype)
        return self


class ReLU(Module):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class Dropout(Module):
    """Inverted dropout; identity in eval mode or at rate 0."""

    def __init__(self, rate, rng=None):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0,1), got {rate}")
        self.rate = rate
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def forward(self, x):
        if not self.training or self.rate == 0.0:
            self._scale = None
            return x
        keep = self.rng.random(x.shape) >= self.rate
        self._scale = keep.astype(x.dtype) / (1.0 - self.rate)
        return x * self._scale

    def backward(self, dy):
        if self._scale is None:
            return dy
        return dy * self._scale
