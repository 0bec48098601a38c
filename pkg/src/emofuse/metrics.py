"""Confusion matrices, accuracy, weighted/macro F1, and report rendering."""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .data.labels import scheme_labels

CSV_HEADER = ["label", "support", "precision", "recall", "f1", "per_class_accuracy"]


@dataclass
class ConfusionMatrix:
    counts: "np.ndarray"  # (K, K) ints, rows = gold, cols = predicted
    labels: list

    @property
    def total(self):
        return int(self.counts.sum())

    def supports(self):
        return self.counts.sum(axis=1)


def confusion(golds, preds, scheme):
    labels = scheme_labels(scheme)
    if len(golds) != len(preds):
        raise DataError(f"gold/pred length mismatch: {len(golds)} vs {len(preds)}")
    k = len(labels)
    index = {lab: i for i, lab in enumerate(labels)}

    def to_idx(v):
        if isinstance(v, str):
            if v not in index:
                raise DataError(f"label {v!r} invalid for scheme {scheme}")
            return index[v]
        v = int(v)
        if not 0 <= v < k:
            raise DataError(f"class index {v} outside [0,{k})")
        return v

    counts = np.zeros((k, k), dtype=np.int64)
    for g, p in zip(golds, preds):
        counts[to_idx(g), to_idx(p)] += 1
    return ConfusionMatrix(counts, list(labels))


def confusion_from_indices(golds, preds, n_classes):
    """Confusion matrix over integer class indices (labels are stringified)."""
    if len(golds) != len(preds):
        raise DataError(f"gold/pred length mismatch: {len(golds)} vs {len(preds)}")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for g, p in zip(golds, preds):
        counts[int(g), int(p)] += 1
    return ConfusionMatrix(counts, [str(i) for i in range(n_classes)])


def _prf(cm):
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, support, out=np.zeros_like(tp), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return precision, recall, f1, support


def accuracy(cm):
    if cm.total == 0:
        raise DataError("accuracy undefined for an empty confusion matrix")
    return float(np.trace(cm.counts) / cm.total)


def weighted_f1(cm):
    if cm.total == 0:
        raise DataError("weighted F1 undefined for an empty confusion matrix")
    _, _, f1, support = _prf(cm)
    return float((support / cm.total * f1).sum())


def macro_f1(cm):
    if cm.total == 0:
        raise DataError("macro F1 undefined for an empty confusion matrix")
    _, _, f1, _ = _prf(cm)
    return float(f1.mean())


def accuracy_weighted_f1_from_labels(golds, preds, scheme):
    cm = confusion(golds, preds, scheme)
    return accuracy(cm), weighted_f1(cm)


def render_report(cm, scheme=None):
    """Human-readable text plus a machine-parseable CSV string.

    Text shows the row-normalized confusion matrix in percent (1 decimal) and
    per-class accuracy; the CSV carries precision/recall/F1 per class and a
    trailing summary row with overall accuracy and weighted F1.
    """
    labels = cm.labels if scheme is None else scheme_labels(scheme)
    precision, recall, f1, support = _prf(cm)
    acc = accuracy(cm)
    wf1 = weighted_f1(cm)

    width = max(len(l) for l in labels) + 2
    lines = ["confusion matrix (row %, gold x predicted)"]
    lines.append(" " * width + " ".join(f"{l[:7]:>7}" for l in labels))
    for i, lab in enumerate(labels):
        row = cm.counts[i]
        s = row.sum()
        pct = (100.0 * row / s) if s else np.zeros(len(labels))
        lines.append(f"{lab:<{width}}" + " ".join(f"{v:7.1f}" for v in pct))
    lines.append("")
    for i, lab in enumerate(labels):
        cls_acc = 100.0 * recall[i]
        lines.append(f"{lab:<{width}} acc={cls_acc:5.1f}%  support={int(support[i])}")
    lines.append("")
    lines.append(f"overall accuracy: {100.0 * acc:.1f}%")
    lines.append(f"weighted F1:      {100.0 * wf1:.1f}%")
    text = "\n".join(lines)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_HEADER)
    for i, lab in enumerate(labels):
        writer.writerow(
            [
                lab,
                int(support[i]),
                f"{precision[i]:.6f}",
                f"{recall[i]:.6f}",
                f"{f1[i]:.6f}",
                f"{recall[i]:.6f}",
            ]
        )
    writer.writerow(["__overall__", cm.total, "", "", f"{wf1:.6f}", f"{acc:.6f}"])
    return text, buf.getvalue()


def parse_report_csv(csv_text):
    """Re-parse a report CSV into (per-class rows, overall accuracy, weighted F1)."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    if not rows or rows[0] != CSV_HEADER:
        raise DataError("unexpected report CSV header")
    per_class = []
    overall = None
    for row in rows[1:]:
        if row[0] == "__overall__":
            overall = (float(row[5]), float(row[4]))
        else:
            per_class.append(
                {
                    "label": row[0],
                    "support": int(row[1]),
                    "precision": float(row[2]),
                    "recall": float(row[3]),
                    "f1": float(row[4]),
                    "per_class_accuracy": float(row[5]),
                }
            )
    if overall is None:
        raise DataError("report CSV missing summary row")
    return per_class, overall[0], overall[1]
