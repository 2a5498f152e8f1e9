"""Per-class IoU, precision, recall and mIoU over three classes.

Dataset-level numbers micro-average: confusion counts are accumulated over
all documents before any ratio is computed.  Vacuous 0/0 ratios count as 1.0
(a class absent from both prediction and truth is segmented perfectly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .imagecore import NUM_CLASSES

CLASS_NAMES = ("background", "printed", "handwritten")


@dataclass
class MetricsReport:
    iou: tuple[float, float, float]
    precision: tuple[float, float, float]
    recall: tuple[float, float, float]
    miou: float


def confusion(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """3x3 pixel counts; rows are ground truth, columns are prediction."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction {pred.shape} and truth {truth.shape} dimensions differ")
    idx = truth.astype(np.int64).ravel() * NUM_CLASSES + pred.astype(np.int64).ravel()
    counts = np.bincount(idx, minlength=NUM_CLASSES * NUM_CLASSES)
    return counts.reshape(NUM_CLASSES, NUM_CLASSES)


def _ratio(num: float, den: float) -> float:
    return 1.0 if den == 0 else num / den


def report(counts: np.ndarray) -> MetricsReport:
    counts = np.asarray(counts, dtype=np.int64)
    iou, prec, rec = [], [], []
    for c in range(NUM_CLASSES):
        tp = counts[c, c]
        fp = counts[:, c].sum() - tp
        fn = counts[c, :].sum() - tp
        iou.append(_ratio(tp, tp + fp + fn))
        prec.append(_ratio(tp, tp + fp))
        rec.append(_ratio(tp, tp + fn))
    return MetricsReport(
        iou=tuple(iou),
        precision=tuple(prec),
        recall=tuple(rec),
        miou=float(np.mean(iou)),
    )


def mean_iou(class_ious) -> float:
    """mIoU is the arithmetic mean of the three class IoUs, background included."""
    return float(np.mean(list(class_ious)))


def report_to_json(rep: MetricsReport) -> str:
    payload = {
        "miou": rep.miou,
        "classes": {
            name: {"iou": rep.iou[c], "precision": rep.precision[c], "recall": rep.recall[c]}
            for c, name in enumerate(CLASS_NAMES)
        },
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def report_to_table(rep: MetricsReport) -> str:
    lines = [f"{'class':<12} {'mIoU':>6} {'IoU':>6} {'Prec.':>6} {'Recall':>6}"]
    for c, name in enumerate(CLASS_NAMES):
        miou = f"{rep.miou:.3f}" if c == 0 else ""
        lines.append(
            f"{name:<12} {miou:>6} {rep.iou[c]:>6.3f} {rep.precision[c]:>6.3f} {rep.recall[c]:>6.3f}"
        )
    return "\n".join(lines)
