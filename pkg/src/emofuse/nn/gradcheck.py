"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NumericError


@dataclass
class GradCheckResult:
    max_abs_err: float
    max_rel_err: float
    worst_index: tuple  # (param name, flat index)


def grad_check(loss_and_grad, params, eps=1e-5, rel_floor=1e-6, sample=None, rng=None):
    """Compare analytic gradients against central finite differences.

    `loss_and_grad(params)` returns (scalar loss, dict of gradients matching
    `params`). Parameters should be float64 for meaningful tolerances.
    Relative error uses max(|numeric|, rel_floor) as denominator so near-zero
    coordinates degrade to an absolute comparison. With `sample` set, only
    that many randomly chosen coordinates per tensor are perturbed — the only
    practical option for networks with >10^4 parameters.
    """
    loss0, grads = loss_and_grad(params)
    if not math.isfinite(loss0):
        raise NumericError("loss is non-finite at the evaluation point")
    if sample is not None and rng is None:
        rng = np.random.default_rng(0)
    max_abs = 0.0
    max_rel = 0.0
    worst = (None, -1)
    for name, w in params.items():
        flat = w.reshape(-1)
        gflat = np.asarray(grads[name]).reshape(-1)
        if sample is not None and flat.size > sample:
            indices = rng.choice(flat.size, size=sample, replace=False)
        else:
            indices = range(flat.size)
        for i in indices:
            orig = flat[i]
            flat[i] = orig + eps
            lp, _ = loss_and_grad(params)
            flat[i] = orig - eps
            lm, _ = loss_and_grad(params)
            flat[i] = orig
            if not (math.isfinite(lp) and math.isfinite(lm)):
                raise NumericError("loss became non-finite during perturbation")
            num = (lp - lm) / (2.0 * eps)
            abs_err = abs(gflat[i] - num)
            rel_err = abs_err / max(abs(num), rel_floor)
            if abs_err > max_abs:
                max_abs = abs_err
            if rel_err > max_rel:
                max_rel = rel_err
                worst = (name, i)
    return GradCheckResult(max_abs, max_rel, worst)
