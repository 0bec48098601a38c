"""Whole-corpus QC: disambiguation -> alignment -> face validation -> channels.

A record survives only if it passes every stage; the report counts rejections
by reason and preserves the identity verified + rejected = original per split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import DataError, ManifestError
from .alignment import AlignmentInput, check_alignment
from .channels import select_channel_index
from .config import QcConfig
from .faces import FaceCandidate, offset_search
from .speakers import disambiguate_speakers

REASONS = (
    "multi_speaker",
    "empty_asr",
    "low_cosine",
    "low_levenshtein",
    "no_face",
    "unsupported_channels",
)


@dataclass
class QcReport:
    per_split: dict = field(default_factory=dict)

    def _split(self, split):
        return self.per_split.setdefault(
            split, {"original": 0, "verified": 0, "rejected": {r: 0 for r in REASONS}}
        )

    def add_kept(self, split):
        s = self._split(split)
        s["original"] += 1
        s["verified"] += 1

    def add_rejected(self, split, reason):
        s = self._split(split)
        s["original"] += 1
        s["rejected"][reason] += 1

    def totals(self):
        out = {"original": 0, "verified": 0, "rejected": {r: 0 for r in REASONS}}
        for s in self.per_split.values():
            out["original"] += s["original"]
            out["verified"] += s["verified"]
            for r in REASONS:
                out["rejected"][r] += s["rejected"][r]
        return out

    def to_json(self):
        return json.dumps({"splits": self.per_split, "totals": self.totals()}, indent=2)

    def to_text(self):
        lines = ["QC report", "========="]
        for split in sorted(self.per_split):
            s = self.per_split[split]
            lines.append(
                f"{split}: original={s['original']} verified={s['verified']}"
            )
            for r in REASONS:
                if s["rejected"][r]:
                    lines.append(f"  rejected[{r}] = {s['rejected'][r]}")
        t = self.totals()
        lines.append(f"total: original={t['original']} verified={t['verified']}")
        return "\n".join(lines)


def _check_faces(rec, store, profiles, cfg):
    """Returns (ok, matched refs, frame times) for one record."""
    if profiles is None:
        return True, rec.face_emb_refs, rec.frame_times
    profile = profiles.get(rec.speaker) or profiles.get(rec.extra.get("raw_speaker", ""))
    if profile is None:
        raise DataError(f"record {rec.utterance_id!r}: no profile for {rec.speaker!r}")
    by_frame: dict[float, dict] = {}
    for cand in rec.face_candidates:
        emb = store.resolve(cand["ref"], owner=rec.utterance_id)
        fc = FaceCandidate(cand["frame_time"], cand.get("offset", 0.0), emb)
        by_frame.setdefault(fc.frame_time, {}).setdefault(fc.offset, []).append(
            (fc, cand["ref"])
        )
    refs, times = [], []
    for frame_time in sorted(by_frame):
        frames = {off: [fc for fc, _ in pairs] for off, pairs in by_frame[frame_time].items()}
        match = offset_search(frames, profile, cfg.face_threshold, cfg.offsets)
        if match is None:
            continue
        ref = next(
            r
            for fc, r in by_frame[frame_time][match.offset]
            if fc is match.candidate
        )
        refs.append(ref)
        times.append(frame_time)
    return bool(refs), refs, times


def run_qc(records, store, cfg=None, profiles=None):
    """Run every stage over `records`; returns (verified records, QcReport).

    `store` resolves embedding references; `profiles` maps speaker id ->
    SpeakerProfile (None skips face validation, e.g. audio-text-only corpora).
    """
    cfg = cfg or QcConfig()
    report = QcReport()

    for rec in records:
        rec.extra.setdefault("raw_speaker", rec.speaker)
    kept, dropped = disambiguate_speakers(list(records), cfg)
    for rec in dropped:
        report.add_rejected(rec.split, "multi_speaker")

    verified = []
    for rec in kept:
        # alignment gate (only when the record carries ASR information)
        if rec.asr_text is not None:
            if rec.asr_text != "":
                if rec.text_emb_ref is None or rec.asr_emb_ref is None:
                    raise ManifestError(
                        f"record {rec.utterance_id!r}: ASR text present but "
                        "text/asr embedding refs missing"
                    )
                emb_o = store.resolve(rec.text_emb_ref, owner=rec.utterance_id)
                emb_a = store.resolve(rec.asr_emb_ref, owner=rec.utterance_id)
            else:
                emb_o = emb_a = None
            rep = check_alignment(
                AlignmentInput(rec.utterance_id, rec.text, rec.asr_text, emb_o, emb_a),
                cfg,
            )
            if rep.decision != "keep":
                report.add_rejected(rec.split, rep.reason)
                continue

        # face-speaker validation
        if profiles is not None and (rec.face_candidates or rec.face_emb_refs):
            ok, refs, times = _check_faces(rec, store, profiles, cfg)
            if not ok:
                report.add_rejected(rec.split, "no_face")
                continue
            rec.face_emb_refs = refs
            rec.frame_times = times

        # channel selection
        if rec.channel_count is not None:
            try:
                rec.selected_channel = select_channel_index(
                    rec.channel_count, rec.channel_energies
                )
            except DataError:
                report.add_rejected(rec.split, "unsupported_channels")
                continue

        report.add_kept(rec.split)
        verified.append(rec)
    return verified, report
