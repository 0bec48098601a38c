"""Seeded synthetic corpus generator for desk-scale end-to-end runs.

Generates a manifest plus EMB1 files laid out like a real quality-controlled
corpus: per-token 768-d text embeddings, per-frame 512-d raw face embeddings,
one 512-d speaker embedding per utterance, pooled text/ASR embeddings for the
alignment gate, per-speaker face profiles, and channel metadata.

Class structure: each emotion class gets a random mean direction per modality
scaled by `separation`; utterance vectors are that mean plus N(0, noise^2).
Face and speaker vectors additionally carry a strong per-speaker identity
component so face-profile matching behaves like the real pipeline.
`signal_modalities` controls which modalities carry class signal at all; the
others collapse to pure identity+noise (used for ablation corpora).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .emb1 import write_emb1
from .labels import scheme_labels
from .manifest import UtteranceRecord, write_manifest

TEXT_DIM = 768
RAW_DIM = 512

FILES = {
    "tokens": "token_emb.emb1",
    "text": "text_emb.emb1",
    "asr": "asr_emb.emb1",
    "face": "face_raw.emb1",
    "speaker": "speaker_raw.emb1",
    "profiles": "profile_emb.emb1",
}


@dataclass
class SynthConfig:
    scheme: str = "meld7"
    train_per_class: int = 100
    val_per_class: int = 20
    test_per_class: int = 0
    separation: float = 1.0
    noise: float = 0.1
    token_range: tuple = (5, 20)
    frame_range: tuple = (1, 6)
    speaker_pool: int = 12
    profile_samples: int = 5
    identity_scale: float = 4.0  # multiple of `separation` for identity vectors
    signal_modalities: tuple = ("text", "face", "speaker")
    seed: int = 0

    def __post_init__(self):
        if self.separation <= 0 or self.noise <= 0:
            raise ConfigError("separation and noise must be positive")
        if self.train_per_class < 1 or self.val_per_class < 0 or self.test_per_class < 0:
            raise ConfigError("per-class counts must be non-negative (train >= 1)")


def _unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _class_means(rng, n_classes, dim, scale, active):
    if not active:
        return np.zeros((n_classes, dim))
    return np.stack([_unit(rng, dim) * scale for _ in range(n_classes)])


def synth_generate(cfg, out_dir):
    """Write the corpus under `out_dir`; returns the record list.

    Pure function of `cfg`: identical configs produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    labels = scheme_labels(cfg.scheme)
    k = len(labels)
    s = cfg.separation
    sig = set(cfg.signal_modalities)

    text_means = _class_means(rng, k, TEXT_DIM, s, "text" in sig)
    face_means = _class_means(rng, k, RAW_DIM, s, "face" in sig)
    speaker_means = _class_means(rng, k, RAW_DIM, s, "speaker" in sig)

    ident_scale = cfg.identity_scale * s
    face_ident = np.stack([_unit(rng, RAW_DIM) * ident_scale for _ in range(cfg.speaker_pool)])
    voice_ident = np.stack([_unit(rng, RAW_DIM) * ident_scale for _ in range(cfg.speaker_pool)])

    token_rows, face_rows, speaker_rows = [], [], []
    text_rows, asr_rows = [], []
    records = []
    channel_layouts = [(6, None), (1, None), (2, "energies")]

    plan = []
    for split, per_class in (
        ("train", cfg.train_per_class),
        ("dev", cfg.val_per_class),
        ("test", cfg.test_per_class),
    ):
        for cls in range(k):
            for j in range(per_class):
                plan.append((split, cls, j))

    for i, (split, cls, j) in enumerate(plan):
        spk = int(rng.integers(cfg.speaker_pool))
        n_tok = int(rng.integers(cfg.token_range[0], cfg.token_range[1] + 1))
        n_frm = int(rng.integers(cfg.frame_range[0], cfg.frame_range[1] + 1))
        n_frm = min(n_frm, n_tok)

        toks = text_means[cls] + cfg.noise * rng.standard_normal((n_tok, TEXT_DIM))
        pooled = toks.mean(axis=0)
        frames = (
            face_ident[spk]
            + face_means[cls]
            + cfg.noise * rng.standard_normal((n_frm, RAW_DIM))
        )
        voice = (
            voice_ident[spk]
            + speaker_means[cls]
            + cfg.noise * rng.standard_normal(RAW_DIM)
        )

        tok_start = len(token_rows)
        token_rows.extend(toks)
        face_start = len(face_rows)
        face_rows.extend(frames)
        speaker_rows.append(voice)
        text_rows.append(pooled)
        asr_rows.append(pooled)

        frame_times = [0.5 + t for t in range(n_frm)]
        channels, energy_kind = channel_layouts[i % len(channel_layouts)]
        energies = None
        if energy_kind == "energies":
            e = rng.uniform(0.1, 2.0, size=2)
            energies = [float(v) for v in e]

        text = f"utterance {labels[cls]} {split} {j}"
        records.append(
            UtteranceRecord(
                utterance_id=f"u{i:05d}",
                dialogue_id=f"dlg{i % 25:03d}",
                split=split,
                speaker=f"spk{spk:02d}",
                emotion=labels[cls],
                text=text,
                asr_text=text,
                text_emb_ref={"file": FILES["text"], "start": i},
                asr_emb_ref={"file": FILES["asr"], "start": i},
                token_emb_ref={"file": FILES["tokens"], "start": tok_start, "count": n_tok},
                face_emb_refs=[
                    {"file": FILES["face"], "start": face_start, "count": n_frm}
                ],
                frame_times=frame_times,
                face_candidates=[
                    {
                        "frame_time": frame_times[t],
                        "offset": 0.0,
                        "ref": {"file": FILES["face"], "start": face_start + t},
                    }
                    for t in range(n_frm)
                ],
                speaker_emb_ref={"file": FILES["speaker"], "start": i},
                channel_count=channels,
                channel_energies=energies,
            )
        )

    # per-speaker face profile samples (identity + random class flavor + noise)
    profile_rows = []
    profile_index = {}
    for spk in range(cfg.speaker_pool):
        start = len(profile_rows)
        for _ in range(cfg.profile_samples):
            cls = int(rng.integers(k))
            profile_rows.append(
                face_ident[spk]
                + face_means[cls]
                + cfg.noise * rng.standard_normal(RAW_DIM)
            )
        profile_index[f"spk{spk:02d}"] = {
            "file": FILES["profiles"],
            "start": start,
            "count": cfg.profile_samples,
        }

    write_emb1(np.asarray(token_rows, dtype=np.float32), out / FILES["tokens"])
    write_emb1(np.asarray(text_rows, dtype=np.float32), out / FILES["text"])
    write_emb1(np.asarray(asr_rows, dtype=np.float32), out / FILES["asr"])
    write_emb1(np.asarray(face_rows, dtype=np.float32), out / FILES["face"])
    write_emb1(np.asarray(speaker_rows, dtype=np.float32), out / FILES["speaker"])
    write_emb1(np.asarray(profile_rows, dtype=np.float32), out / FILES["profiles"])
    with open(out / "profiles.json", "w") as fh:
        json.dump(profile_index, fh, indent=2, sort_keys=True)
    write_manifest(records, out / "manifest.jsonl")
    return records
