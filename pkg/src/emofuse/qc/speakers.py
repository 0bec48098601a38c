"""Speaker disambiguation: drop multi-speaker entries, split shared names."""

from __future__ import annotations

from .config import QcConfig


def is_multi_speaker(name, cfg):
    if name in cfg.multi_speaker_blocklist:
        return True
    return any(marker in name for marker in cfg.conjunction_markers)


def disambiguate_speakers(records, cfg=None):
    """Returns (relabeled records, dropped records).

    A raw name used in more than one dialogue becomes "{name}_d{dialogue_id}";
    names unique to one dialogue stay as-is. Records are mutated in place.
    """
    cfg = cfg or QcConfig()
    kept, dropped = [], []
    for rec in records:
        (dropped if is_multi_speaker(rec.speaker, cfg) else kept).append(rec)

    dialogues_by_name: dict[str, set] = {}
    for rec in kept:
        dialogues_by_name.setdefault(rec.speaker, set()).add(rec.dialogue_id)
    for rec in kept:
        if len(dialogues_by_name[rec.speaker]) > 1:
            rec.speaker = f"{rec.speaker}_d{rec.dialogue_id}"
    return kept, dropped
