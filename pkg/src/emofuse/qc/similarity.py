"""Text and embedding similarity measures used by the QC filters."""

from __future__ import annotations

import numpy as np

from ..errors import DataError, DimensionError


def levenshtein_distance(a, b):
    """Character-level edit distance, iterative two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_similarity(a, b):
    """1 - d(a,b)/max(|a|,|b|) on lowercased strings; two empties score 1.0.

    Punctuation and whitespace are kept: length mismatch is exactly the signal
    the alignment filter needs.
    """
    a = a.lower()
    b = b.lower()
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / longest


def cosine_similarity(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionError(f"cosine: shapes differ {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DataError("cosine similarity undefined for zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))
