"""Token-frame alignment, modality concatenation, and masked pooling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DimensionError

TEXT_DIM = 768
ADAPTED_DIM = 128


@dataclass
class FusedSequence:
    tokens: "np.ndarray"  # (T, d_model)
    mask: "np.ndarray"  # (T,) bool, valid positions form a prefix
    utterance_id: str = ""
    label: int | None = None

    @property
    def n_valid(self):
        return int(self.mask.sum())


def align_tokens_to_frames(n_tokens, n_frames):
    """Contiguous group sizes partitioning n_tokens over n_frames.

    The remainder goes to the earliest groups, e.g. (15, 4) -> [4, 4, 4, 3].
    """
    if n_tokens < 1 or n_frames < 1:
        raise DataError("token and frame counts must be >= 1")
    if n_tokens < n_frames:
        raise DataError(
            f"cannot align {n_tokens} tokens to {n_frames} frames (fewer tokens)"
        )
    base, rem = divmod(n_tokens, n_frames)
    return [base + 1] * rem + [base] * (n_frames - rem)


def frame_index_per_token(n_tokens, n_frames):
    sizes = align_tokens_to_frames(n_tokens, n_frames)
    idx = np.repeat(np.arange(n_frames), sizes)
    return idx


def fuse_utterance(text_tokens=None, face_frames=None, speaker=None, modalities=("text",)):
    """Concatenate per-token features for the requested modality set.

    Text-bearing configs emit one fused vector per text token; the face-only
    and face+speaker configs emit one vector per video frame; speaker-only is
    a length-1 sequence.
    """
    modalities = tuple(modalities)
    use_text = "text" in modalities
    use_face = "face" in modalities
    use_speaker = "speaker" in modalities
    if not (use_text or use_face or use_speaker):
        raise DataError("at least one modality required")

    if use_text:
        if text_tokens is None:
            raise DataError("text modality requested but no token embeddings given")
        text_tokens = np.asarray(text_tokens)
        if text_tokens.ndim != 2 or text_tokens.shape[1] != TEXT_DIM:
            raise DimensionError(
                f"token embeddings must be (T,{TEXT_DIM}), got {text_tokens.shape}"
            )
    if use_face:
        if face_frames is None:
            raise DataError("face modality requested but no frame embeddings given")
        face_frames = np.asarray(face_frames)
        if face_frames.ndim != 2 or face_frames.shape[1] != ADAPTED_DIM:
            raise DimensionError(
                f"face frames must be (F,{ADAPTED_DIM}), got {face_frames.shape}"
            )
    if use_speaker:
        if speaker is None:
            raise DataError("speaker modality requested but no embedding given")
        speaker = np.asarray(speaker).reshape(-1)
        if speaker.shape[0] != ADAPTED_DIM:
            raise DimensionError(
                f"speaker embedding must be {ADAPTED_DIM}-d, got {speaker.shape[0]}"
            )

    parts = []
    if use_text:
        n_tok = text_tokens.shape[0]
        parts.append(text_tokens)
        if use_face:
            n_frames = face_frames.shape[0]
            if n_tok < n_frames:
                # degenerate short utterance: truncate to the first T frames
                face_frames = face_frames[:n_tok]
                n_frames = n_tok
            idx = frame_index_per_token(n_tok, n_frames)
            parts.append(face_frames[idx])
        if use_speaker:
            parts.append(np.broadcast_to(speaker, (n_tok, ADAPTED_DIM)))
    elif use_face:
        n_frames = face_frames.shape[0]
        parts.append(face_frames)
        if use_speaker:
            parts.append(np.broadcast_to(speaker, (n_frames, ADAPTED_DIM)))
    else:
        parts.append(speaker.reshape(1, ADAPTED_DIM))

    tokens = np.concatenate(parts, axis=1)
    mask = np.ones(tokens.shape[0], dtype=bool)
    return FusedSequence(tokens=tokens, mask=mask)


def fused_dim(modalities):
    modalities = set(modalities)
    if "text" in modalities:
        return TEXT_DIM + ADAPTED_DIM * (("face" in modalities) + ("speaker" in modalities))
    dim = ADAPTED_DIM * (("face" in modalities) + ("speaker" in modalities))
    if dim == 0:
        raise DataError("at least one modality required")
    return dim


def masked_mean_pool(seq, mask):
    seq = np.asarray(seq)
    mask = np.asarray(mask, dtype=bool)
    n = int(mask.sum())
    if n == 0:
        raise DataError("masked mean pool over zero valid positions")
    return seq[mask].sum(axis=0) / n


def pad_sequence(seq, target_len):
    """Right-pad with zero tokens; mask marks them invalid."""
    t, d = seq.tokens.shape
    if target_len < t:
        raise DataError("target length shorter than the sequence")
    tokens = np.zeros((target_len, d), dtype=seq.tokens.dtype)
    tokens[:t] = seq.tokens
    mask = np.zeros(target_len, dtype=bool)
    mask[:t] = seq.mask
    return FusedSequence(tokens, mask, seq.utterance_id, seq.label)
