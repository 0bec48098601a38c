from .align import (
    ADAPTED_DIM,
    TEXT_DIM,
    FusedSequence,
    align_tokens_to_frames,
    frame_index_per_token,
    fuse_utterance,
    fused_dim,
    masked_mean_pool,
    pad_sequence,
)
from .mamba import (
    MambaBlock,
    MambaConfig,
    depthwise_causal_conv,
    depthwise_causal_conv_backward,
    selective_scan,
    selective_scan_backward,
    selective_scan_reference,
)
from .model import (
    FusionModel,
    MambaFusionClassifier,
    fusion_forward,
    write_history_csv,
)

__all__ = [
    "ADAPTED_DIM",
    "TEXT_DIM",
    "FusedSequence",
    "FusionModel",
    "MambaBlock",
    "MambaConfig",
    "MambaFusionClassifier",
    "align_tokens_to_frames",
    "depthwise_causal_conv",
    "depthwise_causal_conv_backward",
    "frame_index_per_token",
    "fuse_utterance",
    "fused_dim",
    "fusion_forward",
    "masked_mean_pool",
    "pad_sequence",
    "selective_scan",
    "selective_scan_backward",
    "selective_scan_reference",
    "write_history_csv",
]
