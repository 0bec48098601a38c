"""Single selective state-space (Mamba-style) block in numpy.

Forward path: in_proj splits into a main branch x and gate z; x goes through
a depthwise causal conv and SiLU, then data-dependent (delta, B, C) are
projected from it; the selective scan runs the discretized recurrence

    h_t = exp(delta_t A) * h_{t-1} + delta_t B_t u_t
    y_t = C_t . h_t + D * u_t

(zero-order hold for A, Euler for B) per channel and state. The gated output
y * silu(z) is projected back to d_model. Every stage has a matching backward
so the whole block is finite-difference checkable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError, NumericError
from ..nn.layers import sigmoid, silu, silu_grad, softplus
from ..nn.layers import Module


@dataclass
class MambaConfig:
    d_model: int
    d_state: int = 64
    expand: int = 2
    d_conv: int = 4

    def __post_init__(self):
        if self.d_conv < 1:
            raise ConfigError("d_conv must be >= 1")
        if self.d_model < 1 or self.d_state < 1 or self.expand < 1:
            raise ConfigError("d_model, d_state and expand must be positive")

    @property
    def d_inner(self):
        return self.expand * self.d_model

    @property
    def dt_rank(self):
        return math.ceil(self.d_model / 16)


def depthwise_causal_conv(u, kernel, bias):
    """Per-channel causal conv: y_t = sum_k w[c,k] u[t-K+1+k, c] + b[c].

    Zero left-padding; position t never sees inputs after t.
    """
    u = np.asarray(u)
    t_len, d = u.shape
    k = kernel.shape[1]
    if kernel.shape[0] != d:
        raise DimensionError("conv kernel channel count mismatch")
    out = np.zeros_like(u)
    for j in range(k):
        shift = k - 1 - j  # how far in the past tap j reads
        if shift == 0:
            out += kernel[:, j] * u
        elif shift < t_len:
            out[shift:] += kernel[:, j] * u[:-shift]
    return out + bias


def depthwise_causal_conv_backward(dy, u, kernel):
    """Gradients (du, dkernel, dbias) for the causal depthwise conv."""
    t_len, d = u.shape
    k = kernel.shape[1]
    du = np.zeros_like(u)
    dw = np.zeros_like(kernel)
    for j in range(k):
        shift = k - 1 - j
        if shift == 0:
            dw[:, j] = (dy * u).sum(axis=0)
            du += kernel[:, j] * dy
        elif shift < t_len:
            dw[:, j] = (dy[shift:] * u[:-shift]).sum(axis=0)
            du[:-shift] += kernel[:, j] * dy[shift:]
    db = dy.sum(axis=0)
    return du, dw, db


def selective_scan(u, delta, A, B, C, D, cache=None):
    """Run the discretized selective recurrence over one sequence.

    Shapes: u, delta (T, d_inner); A (d_inner, d_state); B, C (T, d_state);
    D (d_inner,). Returns y (T, d_inner). If `cache` is a dict, the
    intermediate states needed for the backward pass are stored there.
    """
    u = np.asarray(u)
    delta = np.asarray(delta)
    if np.any(delta <= 0):
        raise NumericError("selective scan requires strictly positive delta")
    if np.any(A >= 0):
        raise NumericError("selective scan requires strictly negative A")
    t_len, d_inner = u.shape
    d_state = A.shape[1]

    # all-timestep discretization factors, then a cheap sequential recurrence
    da = np.exp(delta[:, :, None] * A[None, :, :])  # (T, d_inner, d_state)
    bu = delta[:, :, None] * B[:, None, :] * u[:, :, None]
    h = np.zeros((d_inner, d_state), dtype=u.dtype)
    hs = np.empty((t_len, d_inner, d_state), dtype=u.dtype)
    y = np.empty_like(u)
    for t in range(t_len):
        h = da[t] * h + bu[t]
        hs[t] = h
        y[t] = h @ C[t]
    y += D * u
    if cache is not None:
        cache.update(u=u, delta=delta, A=A, B=B, C=C, D=D, da=da, hs=hs)
    return y


def selective_scan_backward(dy, cache):
    """Backward of `selective_scan` given upstream dy and the forward cache."""
    u, delta, A, B, C, D = (cache[k] for k in ("u", "delta", "A", "B", "C", "D"))
    da, hs = cache["da"], cache["hs"]
    t_len, d_inner = u.shape

    du = D * dy
    ddelta = np.zeros_like(delta)
    dA = np.zeros_like(A)
    dB = np.zeros_like(B)
    dC = np.zeros_like(C)
    dD = (dy * u).sum(axis=0)

    carry = np.zeros_like(hs[0])  # dL/dh_t contribution flowing from t+1
    for t in range(t_len - 1, -1, -1):
        dh = dy[t][:, None] * C[t][None, :] + carry
        dC[t] = hs[t].T @ dy[t]
        h_prev = hs[t - 1] if t > 0 else 0.0
        d_da = dh * h_prev  # grad w.r.t. exp(delta A)
        ddelta[t] += (d_da * A * da[t]).sum(axis=1)
        dA += d_da * delta[t][:, None] * da[t]
        # bu_t = delta_t * B_t * u_t
        dhB = dh @ B[t]  # (d_inner,)
        ddelta[t] += dhB * u[t]
        du[t] += dhB * delta[t]
        dB[t] = dh.T @ (delta[t] * u[t])
        carry = da[t] * dh
    return du, ddelta, dA, dB, dC, dD


def selective_scan_reference(u, delta, A, B, C, D):
    """Naive per-timestep, per-channel, per-state loop. Oracle only."""
    t_len, d_inner = u.shape
    d_state = A.shape[1]
    h = [[0.0] * d_state for _ in range(d_inner)]
    y = np.zeros_like(np.asarray(u, dtype=np.float64))
    for t in range(t_len):
        for c in range(d_inner):
            acc = 0.0
            for n in range(d_state):
                h[c][n] = (
                    math.exp(delta[t, c] * A[c, n]) * h[c][n]
                    + delta[t, c] * B[t, n] * u[t, c]
                )
                acc += C[t, n] * h[c][n]
            y[t, c] = acc + D[c] * u[t, c]
    return y


class MambaBlock(Module):
    """One selective-SSM block: in_proj -> conv/SiLU -> scan -> gate -> out_proj."""

    def __init__(self, config, rng=None, dtype=np.float32):
        super().__init__()
        self.config = config
        rng = rng if rng is not None else np.random.default_rng(0)
        d_model, d_inner = config.d_model, config.d_inner
        d_state, d_conv, dt_rank = config.d_state, config.d_conv, config.dt_rank

        def uniform(shape, fan_in):
            k = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-k, k, size=shape).astype(dtype)

        p = self.params
        p["W_in"] = uniform((2 * d_inner, d_model), d_model)
        p["conv_w"] = uniform((d_inner, d_conv), d_conv)
        p["conv_b"] = uniform((d_inner,), d_conv)
        p["W_x"] = uniform((dt_rank + 2 * d_state, d_inner), d_inner)
        dt_std = dt_rank**-0.5
        p["W_dt"] = rng.uniform(-dt_std, dt_std, size=(d_inner, dt_rank)).astype(dtype)
        # bias chosen so softplus(b_dt) lands in [dt_min, dt_max]
        dt_min, dt_max = 1e-3, 0.1
        dt = np.exp(
            rng.uniform(math.log(dt_min), math.log(dt_max), size=d_inner)
        ).clip(min=1e-4)
        p["b_dt"] = (dt + np.log(-np.expm1(-dt))).astype(dtype)
        p["A_log"] = np.log(
            np.broadcast_to(np.arange(1, d_state + 1, dtype=np.float64), (d_inner, d_state))
        ).astype(dtype)
        p["D"] = np.ones(d_inner, dtype=dtype)
        p["W_out"] = uniform((d_model, d_inner), d_inner)
        self.zero_grad()

    def forward(self, seq):
        """seq: (T, d_model) -> (T, d_model). Caches for one backward call."""
        cfg = self.config
        if seq.ndim != 2 or seq.shape[1] != cfg.d_model:
            raise ConfigError(
                f"block expects (T,{cfg.d_model}) input, got {seq.shape}"
            )
        p = self.params
        c = self._cache = {"seq": seq}
        xz = seq @ p["W_in"].T
        x, z = xz[:, : cfg.d_inner], xz[:, cfg.d_inner :]
        c["x"], c["z"] = x, z
        xc = depthwise_causal_conv(x, p["conv_w"], p["conv_b"])
        c["xc"] = xc
        xa = silu(xc)
        c["xa"] = xa
        dbl = xa @ p["W_x"].T
        r, n = cfg.dt_rank, cfg.d_state
        draw, b_in, c_in = dbl[:, :r], dbl[:, r : r + n], dbl[:, r + n :]
        c["draw"] = draw
        dt_pre = draw @ p["W_dt"].T + p["b_dt"]
        c["dt_pre"] = dt_pre
        delta = softplus(dt_pre)
        A = -np.exp(p["A_log"])
        scan_cache = {}
        y = selective_scan(xa, delta, A, b_in, c_in, p["D"], cache=scan_cache)
        c["scan"] = scan_cache
        g = y * silu(z)
        c["y"], c["g"] = y, g
        return g @ p["W_out"].T

    def backward(self, dout):
        cfg, p, c = self.config, self.params, self._cache
        g, y, z = c["g"], c["y"], c["z"]
        self.grads["W_out"] += dout.T @ g
        dg = dout @ p["W_out"]
        dy = dg * silu(z)
        dz = dg * y * silu_grad(z)

        dxa_scan, ddelta, dA, dB, dC, dD = selective_scan_backward(dy, c["scan"])
        self.grads["D"] += dD
        self.grads["A_log"] += dA * c["scan"]["A"]  # dA/dA_log = A

        ddt_pre = ddelta * sigmoid(c["dt_pre"])
        self.grads["W_dt"] += ddt_pre.T @ c["draw"]
        self.grads["b_dt"] += ddt_pre.sum(axis=0)
        ddraw = ddt_pre @ p["W_dt"]

        ddbl = np.concatenate([ddraw, dB, dC], axis=1)
        self.grads["W_x"] += ddbl.T @ c["xa"]
        dxa = dxa_scan + ddbl @ p["W_x"]

        dxc = dxa * silu_grad(c["xc"])
        dx, dw, db = depthwise_causal_conv_backward(dxc, c["x"], p["conv_w"])
        self.grads["conv_w"] += dw
        self.grads["conv_b"] += db

        dxz = np.concatenate([dx, dz], axis=1)
        self.grads["W_in"] += dxz.T @ c["seq"]
        return dxz @ p["W_in"]
