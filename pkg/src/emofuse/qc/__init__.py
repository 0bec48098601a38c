from .alignment import AlignmentInput, AlignmentReport, check_alignment
from .channels import channel_energies, select_audio_channel, select_channel_index
from .config import QcConfig
from .faces import (
    FaceCandidate,
    FaceMatch,
    SpeakerProfile,
    build_speaker_profile,
    match_face,
    offset_search,
)
from .pipeline import QcReport, REASONS, run_qc
from .similarity import cosine_similarity, levenshtein_distance, levenshtein_similarity
from .speakers import disambiguate_speakers

__all__ = [
    "AlignmentInput",
    "AlignmentReport",
    "FaceCandidate",
    "FaceMatch",
    "QcConfig",
    "QcReport",
    "REASONS",
    "SpeakerProfile",
    "build_speaker_profile",
    "channel_energies",
    "check_alignment",
    "cosine_similarity",
    "disambiguate_speakers",
    "levenshtein_distance",
    "levenshtein_similarity",
    "match_face",
    "offset_search",
    "run_qc",
    "select_audio_channel",
    "select_channel_index",
]
