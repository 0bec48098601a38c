"""Face-speaker validation: speaker profiles, best-match selection, offset search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .similarity import cosine_similarity

MAX_PROFILE_SAMPLES = 15


@dataclass
class SpeakerProfile:
    speaker_id: str
    mean_embedding: "np.ndarray"
    sample_count: int


@dataclass
class FaceCandidate:
    frame_time: float
    offset: float
    embedding: "np.ndarray"


@dataclass
class FaceMatch:
    candidate: FaceCandidate
    similarity: float
    offset: float


def build_speaker_profile(samples, speaker_id):
    """Arithmetic mean of up to 15 sample embeddings; not re-normalized."""
    if len(samples) == 0:
        raise DataError(f"speaker {speaker_id!r}: no profile samples")
    if len(samples) > MAX_PROFILE_SAMPLES:
        raise DataError(
            f"speaker {speaker_id!r}: {len(samples)} samples exceeds the "
            f"{MAX_PROFILE_SAMPLES}-sample cap"
        )
    stacked = np.stack([np.asarray(s, dtype=np.float64) for s in samples])
    return SpeakerProfile(speaker_id, stacked.mean(axis=0), len(samples))


def match_face(candidates, profile, threshold=0.3):
    """Highest-similarity candidate at or above threshold, or None.

    Ties resolve to the earliest candidate in list order.
    """
    best = None
    best_sim = -2.0
    for cand in candidates:
        sim = cosine_similarity(cand.embedding, profile.mean_embedding)
        if sim >= threshold and sim > best_sim:
            best = cand
            best_sim = sim
    if best is None:
        return None
    return FaceMatch(best, best_sim, best.offset)


def offset_search(frames, profile, threshold=0.3, offsets=None):
    """Try each offset in order, returning the first successful match.

    `frames` maps offset -> candidate list. Offsets absent from `frames` are
    skipped; the default order is the standard (0, -0.25, +0.25, -0.5, +0.5).
    """
    from .config import DEFAULT_OFFSETS

    order = offsets if offsets is not None else DEFAULT_OFFSETS
    for off in order:
        cands = frames.get(off)
        if not cands:
            continue
        match = match_face(cands, profile, threshold)
        if match is not None:
            return match
    return None
