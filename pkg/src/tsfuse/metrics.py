"""Confusion-matrix bookkeeping and the evaluation measures: per-class IoU,
mean IoU over the 17 non-background classes, and binary change IoU on
changed pixels. Matrices merge by integer addition, so per-worker
accumulation followed by a sum is exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data.classes import IGNORE_LABEL, LAND_USE


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (K, K) int64, rows = ground truth, cols = prediction
    ignore_label: int = IGNORE_LABEL

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")

    @classmethod
    def zeros(cls, num_classes: int, ignore_label: int = IGNORE_LABEL) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64), ignore_label)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    def copy(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts.copy(), self.ignore_label)


def accumulate(cm: ConfusionMatrix, pred, gt) -> ConfusionMatrix:
    """Add per-pixel (gt, pred) counts, skipping ignored ground truth."""
    p = np.asarray(getattr(pred, "grid", pred))
    g = np.asarray(getattr(gt, "grid", gt))
    if p.shape != g.shape:
        raise ValueError(f"prediction {p.shape} and ground truth {g.shape} shapes differ")
    k = cm.num_classes
    if p.size and (p.min() < 0 or p.max() >= k or g.min() < 0 or g.max() >= k):
        raise ValueError(f"labels out of range for a {k}-class matrix")
    keep = g != cm.ignore_label
    idx = g[keep].astype(np.int64) * k + p[keep].astype(np.int64)
    cm.counts += np.bincount(idx, minlength=k * k).reshape(k, k)
    return cm


def merge(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    if a.num_classes != b.num_classes:
        raise ValueError("cannot merge confusion matrices of different sizes")
    return ConfusionMatrix(a.counts + b.counts, a.ignore_label)


def iou_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """IoU for classes 1..K-1; NaN marks classes absent from both pred and gt."""
    c = cm.counts
    tp = np.diag(c).astype(np.float64)
    fp = c.sum(axis=0) - tp
    fn = c.sum(axis=1) - tp
    union = tp + fp + fn
    with np.errstate(invalid="ignore", divide="ignore"):
        iou = np.where(union > 0, tp / union, np.nan)
    return iou[1:]


def mean_iou(cm: ConfusionMatrix) -> float:
    ious = iou_per_class(cm)
    defined = ious[~np.isnan(ious)]
    if defined.size == 0:
        raise ValueError("every class is undefined; cannot compute a mean IoU")
    return float(defined.mean())


def binary_change_iou(pred_change, gt_change, threshold: float = 0.5) -> float:
    """IoU of the changed class. Float predictions are treated as logits and
    thresholded at sigmoid(logit) > threshold; integer/bool predictions are
    used as masks. Two empty masks score 1.0."""
    p = np.asarray(getattr(pred_change, "grid", pred_change))
    g = np.asarray(getattr(gt_change, "grid", gt_change)).astype(bool)
    if np.issubdtype(p.dtype, np.floating):
        logit_threshold = float(np.log(threshold / (1.0 - threshold)))
        p = p > logit_threshold
    else:
        p = p.astype(bool)
    if p.shape != g.shape:
        raise ValueError(f"prediction {p.shape} and ground truth {g.shape} shapes differ")
    union = int(np.logical_or(p, g).sum())
    if union == 0:
        return 1.0
    return float(np.logical_and(p, g).sum() / union)


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------

def per_class_rows(cm: ConfusionMatrix):
    ious = iou_per_class(cm)
    for value in range(1, cm.num_classes):
        iou = ious[value - 1]
        yield value, LAND_USE.name_of(value) if value < 18 else str(value), iou


def write_report_csv(path, cm: ConfusionMatrix) -> None:
    with open(path, "w") as f:
        f.write("label_value,class_name,iou\n")
        for value, name, iou in per_class_rows(cm):
            cell = "" if np.isnan(iou) else repr(float(iou))
            f.write(f"{value},{name},{cell}\n")


def write_summary(path, summary: dict) -> None:
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def read_summary(path) -> dict:
    with open(path) as f:
        return json.load(f)
