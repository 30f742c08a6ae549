"""Core record types for one dataset sample and for split manifests."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geo import AlignmentSpec, footprint_of

REGION_TAGS = ("A", "B")


@dataclass
class LabelMap:
    grid: np.ndarray  # (H, W) integers in 0..17

    def __post_init__(self):
        self.grid = np.asarray(self.grid)
        if self.grid.ndim != 2:
            raise ValueError(f"label map must be 2-D, got shape {self.grid.shape}")
        if not np.issubdtype(self.grid.dtype, np.integer):
            raise ValueError(f"label map must be integer, got {self.grid.dtype}")
        if self.grid.size and (self.grid.min() < 0 or self.grid.max() > 17):
            raise ValueError("label values must lie in 0..17")

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    @property
    def width(self) -> int:
        return self.grid.shape[1]


@dataclass
class ChangeLabel:
    grid: np.ndarray  # (H, W) in {0, 1}

    def __post_init__(self):
        self.grid = np.asarray(self.grid)
        if self.grid.ndim != 2:
            raise ValueError(f"change label must be 2-D, got shape {self.grid.shape}")
        bad = np.setdiff1d(np.unique(self.grid), [0, 1])
        if bad.size:
            raise ValueError(f"change label must be binary, found values {bad}")


@dataclass
class HighResImage:
    bands: np.ndarray  # (3, H, W) reals in [0, 1]
    resolution_m: float

    def __post_init__(self):
        self.bands = np.asarray(self.bands)
        if self.bands.ndim != 3 or self.bands.shape[0] != 3:
            raise ValueError(f"expected 3 bands (3,H,W), got shape {self.bands.shape}")
        if not (0.2 <= self.resolution_m <= 0.5):
            raise ValueError(f"high-res resolution must be in [0.2, 0.5] m/px, "
                             f"got {self.resolution_m}")

    @property
    def size(self) -> tuple[int, int]:
        return self.bands.shape[1], self.bands.shape[2]


@dataclass
class TimeSeriesStack:
    frames: np.ndarray  # (T, C, h, w)
    timestamps: np.ndarray  # (T,) month indices, strictly increasing
    resolution_m: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        self.timestamps = np.asarray(self.timestamps)
        if self.frames.ndim != 4:
            raise ValueError(f"time series must be (T,C,h,w), got {self.frames.shape}")
        if self.timestamps.shape != (self.frames.shape[0],):
            raise ValueError("timestamps length must equal the number of frames")
        if self.frames.shape[0] > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if self.resolution_m <= 0:
            raise ValueError("time-series resolution must be positive")

    @property
    def size(self) -> tuple[int, int]:
        return self.frames.shape[2], self.frames.shape[3]


@dataclass
class PatchSample:
    id: str
    t1: HighResImage
    t2: HighResImage
    y1: LabelMap
    y2: LabelMap
    series: TimeSeriesStack
    alignment: AlignmentSpec
    region_tag: str = "A"

    def __post_init__(self):
        if self.region_tag not in REGION_TAGS:
            raise ValueError(f"region_tag must be one of {REGION_TAGS}")
        shapes = {self.t1.size, self.t2.size,
                  (self.y1.height, self.y1.width), (self.y2.height, self.y2.width)}
        if len(shapes) != 1:
            raise ValueError(f"t1/t2/y1/y2 must share one pixel grid, got {shapes}")
        hr = footprint_of(self.t1.size, self.t1.resolution_m,
                          (self.alignment.hr_footprint.center_x,
                           self.alignment.hr_footprint.center_y))
        ts = footprint_of(self.series.size, self.series.resolution_m,
                          (self.alignment.ts_footprint.center_x,
                           self.alignment.ts_footprint.center_y))
        for got, stored, tag in ((hr, self.alignment.hr_footprint, "high-res"),
                                 (ts, self.alignment.ts_footprint, "time-series")):
            if not (np.isclose(got.extent_x, stored.extent_x)
                    and np.isclose(got.extent_y, stored.extent_y)):
                raise ValueError(f"{tag} footprint does not match its pixel grid")

    @property
    def has_change(self) -> bool:
        return bool(np.any(self.y1.grid != self.y2.grid))


@dataclass
class SplitManifest:
    name: str
    train: list[str]
    val: list[str]
    test: list[str]
    changed_only: bool = False

    def __post_init__(self):
        parts = [set(self.train), set(self.val), set(self.test)]
        total = sum(len(p) for p in parts)
        if len(set().union(*parts)) != total:
            raise ValueError("train/val/test must be pairwise disjoint")

    def part(self, which: str) -> list[str]:
        if which not in ("train", "val", "test"):
            raise ValueError(f"unknown split part {which!r}")
        return getattr(self, which)


@dataclass(frozen=True)
class PatchInfo:
    """Lightweight record from a dataset scan (meta.txt only)."""
    id: str
    region_tag: str
    changed_pixels: int
    root: str = field(default="", compare=False)

    @property
    def has_change(self) -> bool:
        return self.changed_pixels > 0
