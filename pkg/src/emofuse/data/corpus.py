"""Assembling model-ready arrays from a manifest + embedding store."""

from __future__ import annotations

import json

import numpy as np

from ..errors import DataError
from ..fusion.align import fuse_utterance
from ..qc.faces import build_speaker_profile
from .labels import label_index
from .manifest import EmbeddingStore


def load_profiles(store, profiles_index):
    """profiles_index: speaker -> embedding ref (or a path to profiles.json)."""
    if isinstance(profiles_index, (str, bytes)) or hasattr(profiles_index, "read_text"):
        with open(profiles_index) as fh:
            profiles_index = json.load(fh)
    profiles = {}
    for speaker, ref in profiles_index.items():
        rows = store.resolve(ref, owner=f"profile:{speaker}")
        rows = np.atleast_2d(rows)
        profiles[speaker] = build_speaker_profile(list(rows), speaker)
    return profiles


def _face_rows(rec, store):
    rows = []
    for ref in rec.face_emb_refs:
        r = store.resolve(ref, owner=rec.utterance_id)
        rows.append(np.atleast_2d(r))
    if not rows:
        raise DataError(f"record {rec.utterance_id!r} has no face embeddings")
    return np.concatenate(rows, axis=0)


def adapter_dataset(records, store, modality, scheme):
    """(X, y) of raw 512-d embeddings for adapter training.

    Face: every verified frame is one sample with the utterance label.
    Speaker: one sample per utterance.
    """
    xs, ys = [], []
    for rec in records:
        cls = label_index(rec.emotion, scheme)
        if modality == "face":
            frames = _face_rows(rec, store)
            xs.append(frames)
            ys.extend([cls] * frames.shape[0])
        elif modality == "speaker":
            xs.append(np.atleast_2d(store.resolve(rec.speaker_emb_ref, owner=rec.utterance_id)))
            ys.append(cls)
        else:
            raise DataError(f"unknown adapter modality {modality!r}")
    if not xs:
        raise DataError("no records to build an adapter dataset from")
    return np.concatenate(xs, axis=0).astype(np.float32), np.asarray(ys, dtype=np.int64)


def fused_dataset(records, store, modalities, scheme, face_adapter=None, speaker_adapter=None):
    """List of FusedSequence plus integer labels for the fusion classifier.

    Raw 512-d face/speaker embeddings pass through the given adapters to the
    128-d space before concatenation.
    """
    modalities = tuple(modalities)
    sequences, ys = [], []
    for rec in records:
        text_tokens = face_frames = speaker_vec = None
        if "text" in modalities:
            text_tokens = np.atleast_2d(
                store.resolve(rec.token_emb_ref, owner=rec.utterance_id)
            )
        if "face" in modalities:
            if face_adapter is None:
                raise DataError("face modality requires a trained face adapter")
            face_frames = face_adapter.transform(_face_rows(rec, store))
        if "speaker" in modalities:
            if speaker_adapter is None:
                raise DataError("speaker modality requires a trained speaker adapter")
            raw = np.atleast_2d(store.resolve(rec.speaker_emb_ref, owner=rec.utterance_id))
            speaker_vec = speaker_adapter.transform(raw)[0]
        seq = fuse_utterance(text_tokens, face_frames, speaker_vec, modalities)
        seq.utterance_id = rec.utterance_id
        seq.label = label_index(rec.emotion, scheme)
        sequences.append(seq)
        ys.append(seq.label)
    return sequences, np.asarray(ys, dtype=np.int64)


def split_records(records, split):
    return [r for r in records if r.split == split]


__all__ = [
    "EmbeddingStore",
    "adapter_dataset",
    "fused_dataset",
    "load_profiles",
    "split_records",
]
