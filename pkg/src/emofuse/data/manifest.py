"""Utterance manifest (JSONL) and embedding-reference resolution.

A manifest line is one JSON object per utterance. Embedding references are
dicts {"file": <emb1 path relative to corpus root>, "start": row, "count": n};
"count" defaults to 1. Unknown fields round-trip untouched via `extra`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from ..errors import LabelError, ManifestError
from .emb1 import read_emb1
from .labels import label_index, scheme_labels

KNOWN_FIELDS = (
    "utterance_id",
    "dialogue_id",
    "split",
    "speaker",
    "emotion",
    "text",
    "asr_text",
    "text_emb_ref",
    "asr_emb_ref",
    "token_emb_ref",
    "face_candidates",
    "face_emb_refs",
    "frame_times",
    "speaker_emb_ref",
    "channel_count",
    "channel_energies",
    "selected_channel",
)

SPLITS = ("train", "dev", "test")


@dataclass
class UtteranceRecord:
    utterance_id: str
    dialogue_id: str
    split: str
    speaker: str
    emotion: str
    text: str = ""
    asr_text: str | None = None
    text_emb_ref: dict | None = None
    asr_emb_ref: dict | None = None
    token_emb_ref: dict | None = None
    face_candidates: list = field(default_factory=list)
    face_emb_refs: list = field(default_factory=list)
    frame_times: list = field(default_factory=list)
    speaker_emb_ref: dict | None = None
    channel_count: int | None = None
    channel_energies: list | None = None
    selected_channel: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        extra = d.pop("extra")
        required = {"utterance_id", "dialogue_id", "split", "speaker", "emotion", "text"}
        d = {k: v for k, v in d.items() if k in required or (v is not None and v != [])}
        d.update(extra)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line):
        raw = json.loads(line)
        known = {k: raw.pop(k) for k in list(raw) if k in KNOWN_FIELDS}
        return cls(extra=raw, **known)


def validate_records(records, scheme=None):
    seen = set()
    for rec in records:
        if rec.utterance_id in seen:
            raise ManifestError(f"duplicate utterance_id {rec.utterance_id!r}")
        seen.add(rec.utterance_id)
        if rec.split not in SPLITS:
            raise ManifestError(
                f"record {rec.utterance_id!r}: split {rec.split!r} not in {SPLITS}"
            )
        if scheme is not None and rec.emotion not in scheme_labels(scheme):
            raise LabelError(
                f"record {rec.utterance_id!r}: emotion {rec.emotion!r} invalid "
                f"for scheme {scheme}"
            )
    return records


def read_manifest(path, scheme=None):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(UtteranceRecord.from_json(line))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    return validate_records(records, scheme=scheme)


def write_manifest(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


class EmbeddingStore:
    """Resolves embedding references against EMB1 files under a corpus root."""

    def __init__(self, root):
        self.root = Path(root)
        self._cache: dict[str, "np.ndarray"] = {}

    def _matrix(self, filename):
        if filename not in self._cache:
            path = self.root / filename
            if not path.exists():
                raise ManifestError(f"embedding file not found: {path}")
            self._cache[filename] = read_emb1(path)
        return self._cache[filename]

    def resolve(self, ref, owner="?"):
        """Return the rows for a reference; a single-row ref yields shape (dim,)."""
        if not isinstance(ref, dict) or "file" not in ref or "start" not in ref:
            raise ManifestError(f"record {owner!r}: malformed embedding ref {ref!r}")
        mat = self._matrix(ref["file"])
        start = int(ref["start"])
        count = int(ref.get("count", 1))
        if start < 0 or start + count > mat.shape[0]:
            raise ManifestError(
                f"record {owner!r}: ref rows [{start},{start + count}) outside "
                f"{ref['file']} with {mat.shape[0]} rows"
            )
        rows = mat[start : start + count]
        return rows[0] if count == 1 and "count" not in ref else rows
