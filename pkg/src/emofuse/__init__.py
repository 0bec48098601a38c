"""Quality-controlled multimodal emotion recognition toolkit.

Embeddings in, labels out: QC filtering of utterance manifests, unimodal
MLP adapters, and a selective state-space fusion classifier, all trained
deterministically on numpy.
"""

from .adapters import AdapterNet, EmotionAdapter, adapter_forward, extract_adapted
from .fusion import (
    FusedSequence,
    FusionModel,
    MambaBlock,
    MambaConfig,
    MambaFusionClassifier,
    align_tokens_to_frames,
    fuse_utterance,
    masked_mean_pool,
    selective_scan,
)
from .metrics import ConfusionMatrix, accuracy, confusion, render_report, weighted_f1
from .qc import QcConfig, check_alignment, levenshtein_similarity, run_qc

__version__ = "0.1.0"

__all__ = [
    "AdapterNet",
    "ConfusionMatrix",
    "EmotionAdapter",
    "FusedSequence",
    "FusionModel",
    "MambaBlock",
    "MambaConfig",
    "MambaFusionClassifier",
    "QcConfig",
    "accuracy",
    "adapter_forward",
    "align_tokens_to_frames",
    "check_alignment",
    "confusion",
    "extract_adapted",
    "fuse_utterance",
    "levenshtein_similarity",
    "masked_mean_pool",
    "render_report",
    "run_qc",
    "selective_scan",
    "weighted_f1",
]
