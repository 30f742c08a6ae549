"""Binary change labels from a pair of class maps: 1 wherever the two
label values differ, 0 where they agree."""
from __future__ import annotations

import numpy as np

from .types import ChangeLabel, LabelMap


def derive_change_label(y1: LabelMap, y2: LabelMap) -> ChangeLabel:
    a, b = y1.grid, y2.grid
    if a.shape != b.shape:
        raise ValueError(f"label maps must share a shape to compare: "
                         f"{a.shape} vs {b.shape}")
    return ChangeLabel((a != b).astype(np.uint8))
