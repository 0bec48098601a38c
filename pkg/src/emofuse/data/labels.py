"""Emotion label schemes and synonym mapping.

Class-index order is the single source of truth here: the MELD loss weight
vector [15, 15, 6, 1, 3, 6, 4] is aligned with MELD7_LABELS.
"""

from __future__ import annotations

from ..errors import LabelError

MELD7 = "meld7"
IEMOCAP4 = "iemocap4"

MELD7_LABELS = ["surprise", "fear", "disgust", "happiness", "sadness", "anger", "neutral"]
IEMOCAP4_LABELS = ["angry", "sad", "neutral", "happy"]

SCHEME_LABELS = {MELD7: MELD7_LABELS, IEMOCAP4: IEMOCAP4_LABELS}

MELD_CLASS_WEIGHTS = [15.0, 15.0, 6.0, 1.0, 3.0, 6.0, 4.0]

_MELD7_SYNONYMS = {
    "joy": "happiness",
    "happy": "happiness",
    "sad": "sadness",
    "angry": "anger",
    "surprised": "surprise",
    "fearful": "fear",
    "disgusted": "disgust",
}

_IEMOCAP4_SYNONYMS = {
    "anger": "angry",
    "sadness": "sad",
    "happiness": "happy",
}


def scheme_labels(scheme):
    try:
        return SCHEME_LABELS[scheme]
    except KeyError:
        raise LabelError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEME_LABELS)}")


def merge_iemocap_labels(label):
    """Fold 'excited' into 'happy'; reject labels outside the 4-class set."""
    canonical = _IEMOCAP4_SYNONYMS.get(label, label)
    if canonical == "excited":
        return "happy"
    if canonical not in IEMOCAP4_LABELS:
        raise LabelError(
            f"label {label!r} not in the 4-class scheme; accepted: "
            f"{IEMOCAP4_LABELS + ['excited']}"
        )
    return canonical


def map_label(raw, scheme):
    """Map a raw label string to its canonical form for `scheme`."""
    labels = scheme_labels(scheme)
    low = raw.strip().lower()
    if scheme == MELD7:
        canonical = _MELD7_SYNONYMS.get(low, low)
        if canonical in labels:
            return canonical
        raise LabelError(
            f"label {raw!r} not mappable to {scheme}; accepted: {labels}"
        )
    try:
        return merge_iemocap_labels(low)
    except LabelError:
        raise LabelError(
            f"label {raw!r} not mappable to {scheme}; accepted: "
            f"{labels + ['excited']}"
        )


def label_index(label, scheme):
    labels = scheme_labels(scheme)
    try:
        return labels.index(label)
    except ValueError:
        raise LabelError(f"label {label!r} invalid for scheme {scheme}")
