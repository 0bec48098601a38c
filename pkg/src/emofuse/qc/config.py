"""QC thresholds and knobs, defaulting to the production values."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError

DEFAULT_BLOCKLIST = frozenset({"All", "Guys", "Everyone", "Both"})
DEFAULT_CONJUNCTIONS = (" and ", ",", " & ")
DEFAULT_OFFSETS = (0.0, -0.25, 0.25, -0.5, 0.5)


@dataclass
class QcConfig:
    cos_threshold: float = 0.25
    lev_threshold: float = 0.3
    face_threshold: float = 0.3
    offsets: tuple = DEFAULT_OFFSETS
    multi_speaker_blocklist: frozenset = DEFAULT_BLOCKLIST
    conjunction_markers: tuple = DEFAULT_CONJUNCTIONS

    def __post_init__(self):
        for name in ("cos_threshold", "lev_threshold", "face_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0,1], got {v}")
