"""Cross-entropy with per-class weights and label smoothing."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, LabelError


def log_softmax(logits):
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def weighted_smoothed_ce(logits, targets, class_weights=None, smoothing=0.0):
    """Batch loss and gradient w.r.t. logits.

    Target distribution per sample is (1-eps) * onehot + eps/K. Per-sample
    losses are averaged with weights w_i = class_weights[target_i], normalized
    by the weight sum (not the batch size), so a uniform weight vector
    reproduces plain mean cross-entropy.
    """
    logits = np.asarray(logits)
    targets = np.asarray(targets, dtype=np.int64)
    n, k = logits.shape
    if not 0.0 <= smoothing < 1.0:
        raise ConfigError(f"label smoothing must be in [0,1), got {smoothing}")
    if targets.min(initial=0) < 0 or targets.max(initial=0) >= k:
        raise LabelError(f"target index outside [0,{k})")
    if class_weights is None:
        class_weights = np.ones(k, dtype=logits.dtype)
    else:
        class_weights = np.asarray(class_weights, dtype=logits.dtype)
        if class_weights.shape != (k,) or np.any(class_weights <= 0):
            raise ConfigError("class weights must be K positive values")

    logp = log_softmax(logits)
    q = np.full((n, k), smoothing / k, dtype=logits.dtype)
    q[np.arange(n), targets] += 1.0 - smoothing
    per_sample = -(q * logp).sum(axis=1)
    w = class_weights[targets]
    wsum = w.sum()
    loss = float((w * per_sample).sum() / wsum)

    p = np.exp(logp)
    dlogits = (w / wsum)[:, None] * (p - q)
    return loss, dlogits
