"""The four-term training objective: cross-entropy on both snapshot
segmentations, cross-entropy on the geographically aligned series
segmentation against the first-snapshot labels, and binary cross-entropy
on the change map, combined as l1 + l2 + lT + 2*lc by default.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import functional as F
from .autograd import Tensor, as_tensor
from .data.classes import IGNORE_LABEL
from .geo import AlignmentSpec, center_crop_window

DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, 2.0)  # (w1, w2, wT, wc)


@dataclass(frozen=True)
class LossBreakdown:
    l1_seg: float
    l2_seg: float
    lT_seg: float
    l_change: float
    total: float
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS

    CSV_HEADER = "l1_seg,l2_seg,lT_seg,l_change,total"

    def csv_row(self) -> str:
        return f"{self.l1_seg!r},{self.l2_seg!r},{self.lT_seg!r},{self.l_change!r},{self.total!r}"


def _batched_logits(logits) -> Tensor:
    logits = as_tensor(logits)
    if logits.ndim == 3:
        return F.reshape(logits, (1,) + tuple(logits.shape))
    if logits.ndim != 4:
        raise ValueError(f"logits must be (K,H,W) or (B,K,H,W), got {tuple(logits.shape)}")
    return logits


def _batched_target(target, hw) -> np.ndarray:
    grid = getattr(target, "grid", target)
    grid = np.asarray(grid)
    if grid.ndim == 2:
        grid = grid[None]
    if grid.shape[1:] != hw:
        raise ValueError(f"target grid {grid.shape[1:]} does not match logits {hw}")
    return grid


def seg_loss(logits, target, ignore_label: int = IGNORE_LABEL) -> Tensor:
    """Mean per-pixel cross-entropy over pixels whose label != ignore_label."""
    logits = _batched_logits(logits)
    grid = _batched_target(target, tuple(logits.shape[2:]))
    if logits.shape[0] != grid.shape[0]:
        raise ValueError("batch sizes of logits and targets differ")
    if ignore_label is not None and not (grid != ignore_label).any():
        warnings.warn("every pixel carries the ignore label; segmentation loss is 0",
                      RuntimeWarning)
    return F.cross_entropy_logits(logits, grid, ignore_label)


def change_loss(change_logit, target, ignore_mask=None) -> Tensor:
    """Mean binary cross-entropy with sigmoid semantics."""
    logits = as_tensor(change_logit)
    if logits.ndim == 3:
        logits = F.reshape(logits, (1,) + tuple(logits.shape))
    grid = _batched_target(target, tuple(logits.shape[2:]))
    return F.bce_logits(logits, grid[:, None], mask=ignore_mask)


def series_supervision_target(series_logits, spec: AlignmentSpec, label_size) -> Tensor:
    """Center-crop the series logits to the high-res footprint and upsample
    them to the label grid; the result is scored against the T1 labels."""
    logits = _batched_logits(series_logits)
    h, w = logits.shape[2], logits.shape[3]
    win = center_crop_window(spec, (h, w))
    rs, cs = win.slices()
    cropped = F.slice_nd(logits, (slice(None), slice(None), rs, cs))
    return F.upsample_bilinear(cropped, tuple(label_size))


def total_loss(outputs, y1, y2, spec: AlignmentSpec | None = None,
               weights=DEFAULT_WEIGHTS, ignore_label: int = IGNORE_LABEL,
               change_excludes_background: bool = False) -> tuple[LossBreakdown, Tensor]:
    """Weighted sum of the four terms; returns the breakdown (floats for
    logging) and the differentiable total."""
    w1, w2, wt, wc = (float(x) for x in weights)
    y1g = np.asarray(getattr(y1, "grid", y1))
    y2g = np.asarray(getattr(y2, "grid", y2))
    if y1g.ndim == 2:
        y1g, y2g = y1g[None], y2g[None]

    l1 = seg_loss(outputs.seg_t1, y1g, ignore_label)
    l2 = seg_loss(outputs.seg_t2, y2g, ignore_label)
    if outputs.seg_series is not None:
        if spec is None:
            raise ValueError("series logits present but no alignment spec given")
        aligned = series_supervision_target(outputs.seg_series, spec, y1g.shape[1:])
        lt = seg_loss(aligned, y1g, ignore_label)
    else:
        lt = Tensor(np.asarray(0.0, dtype=outputs.seg_t1.dtype))

    change_target = (y1g != y2g).astype(np.float32)
    mask = None
    if change_excludes_background:
        mask = ((y1g != ignore_label) & (y2g != ignore_label))[:, None]
    lc = change_loss(outputs.change, change_target, ignore_mask=mask)

    total = w1 * l1 + w2 * l2 + wt * lt + wc * lc
    breakdown = LossBreakdown(l1_seg=l1.item(), l2_seg=l2.item(), lT_seg=lt.item(),
                              l_change=lc.item(), total=total.item(),
                              weights=(w1, w2, wt, wc))
    return breakdown, total
