"""Seeded-random train/val/test splits over patch records."""
from __future__ import annotations

import numpy as np

from .types import SplitManifest

DEFAULT_RATIOS = (0.7, 0.1, 0.2)  # train / val / test


def build_splits(samples, ratios=DEFAULT_RATIOS, changed_only: bool = False,
                 region_filter: str | None = None, seed: int = 0,
                 name: str = "default") -> SplitManifest:
    """Partition samples into disjoint train/val/test id lists.

    `samples` is any iterable of records with .id, .region_tag and
    .has_change (PatchSample or PatchInfo). When changed_only is set,
    samples without a single changed pixel are dropped before splitting.
    """
    r = tuple(float(x) for x in ratios)
    if len(r) != 3 or any(x < 0 for x in r):
        raise ValueError(f"ratios must be three nonnegative numbers, got {ratios}")
    if abs(sum(r) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1 (got {sum(r)!r})")

    pool = list(samples)
    if region_filter is not None:
        pool = [s for s in pool if s.region_tag == region_filter]
    if changed_only:
        pool = [s for s in pool if s.has_change]
    if not pool:
        raise ValueError("no samples left after filtering; cannot build a split")

    ids = sorted(s.id for s in pool)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    shuffled = [ids[i] for i in order]

    n = len(shuffled)
    b1 = int(np.floor(r[0] * n))
    b2 = int(np.floor((r[0] + r[1]) * n))
    return SplitManifest(name=name,
                         train=shuffled[:b1],
                         val=shuffled[b1:b2],
                         test=shuffled[b2:],
                         changed_only=changed_only)
