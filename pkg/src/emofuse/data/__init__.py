from .adp1 import read_adp1, write_adp1
from .emb1 import read_emb1, write_emb1
from .labels import (
    IEMOCAP4,
    IEMOCAP4_LABELS,
    MELD7,
    MELD7_LABELS,
    MELD_CLASS_WEIGHTS,
    label_index,
    map_label,
    merge_iemocap_labels,
    scheme_labels,
)
from .manifest import (
    EmbeddingStore,
    UtteranceRecord,
    read_manifest,
    validate_records,
    write_manifest,
)
from .synth import SynthConfig, synth_generate
from .corpus import adapter_dataset, fused_dataset, load_profiles, split_records

__all__ = [
    "EmbeddingStore",
    "IEMOCAP4",
    "IEMOCAP4_LABELS",
    "MELD7",
    "MELD7_LABELS",
    "MELD_CLASS_WEIGHTS",
    "SynthConfig",
    "UtteranceRecord",
    "adapter_dataset",
    "fused_dataset",
    "label_index",
    "load_profiles",
    "map_label",
    "merge_iemocap_labels",
    "read_adp1",
    "read_emb1",
    "read_manifest",
    "scheme_labels",
    "split_records",
    "synth_generate",
    "validate_records",
    "write_adp1",
    "write_emb1",
    "write_manifest",
]
