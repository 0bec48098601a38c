"""Audio-text alignment gate: compare original transcripts with ASR output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from .config import QcConfig
from .similarity import cosine_similarity, levenshtein_similarity


@dataclass
class AlignmentInput:
    utterance_id: str
    original_text: str
    asr_text: str
    emb_original: "np.ndarray"
    emb_asr: "np.ndarray"


@dataclass
class AlignmentReport:
    cosine: float | None
    levenshtein: float | None
    decision: str  # "keep" | "reject"
    reason: str  # "pass" | "empty_asr" | "low_cosine" | "low_levenshtein"


def check_alignment(inp, cfg=None):
    """Keep iff ASR text is nonempty and both similarities clear their
    thresholds; the reason names the first failing check (cosine first)."""
    cfg = cfg or QcConfig()
    if inp.asr_text == "":
        return AlignmentReport(None, None, "reject", "empty_asr")
    emb_o = np.asarray(inp.emb_original)
    emb_a = np.asarray(inp.emb_asr)
    if emb_o.shape != emb_a.shape:
        raise DimensionError(
            f"{inp.utterance_id}: embedding dims differ {emb_o.shape} vs {emb_a.shape}"
        )
    cos = cosine_similarity(emb_o, emb_a)
    lev = levenshtein_similarity(inp.original_text, inp.asr_text)
    if cos < cfg.cos_threshold:
        return AlignmentReport(cos, lev, "reject", "low_cosine")
    if lev < cfg.lev_threshold:
        return AlignmentReport(cos, lev, "reject", "low_levenshtein")
    return AlignmentReport(cos, lev, "keep", "pass")
