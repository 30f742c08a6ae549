"""Footprint geometry linking high-res patches to their enclosing
low-res time-series patches, and the integer crop windows derived from it.

A high-res patch sits centered inside a larger time-series patch (the
generator default makes the enclosing footprint 5x larger per axis). Crop
window sizes use round-half-up and offsets use floor, a documented
convention: the exact window for ratio 0.2 of a 128-px grid is 25.6 px,
so some rounding rule has to be picked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GeoFootprint:
    center_x: float
    center_y: float
    extent_x: float
    extent_y: float

    def __post_init__(self):
        if self.extent_x <= 0 or self.extent_y <= 0:
            raise ValueError(f"footprint extents must be positive, got "
                             f"({self.extent_x}, {self.extent_y})")


@dataclass(frozen=True)
class AlignmentSpec:
    hr_footprint: GeoFootprint
    ts_footprint: GeoFootprint

    def __post_init__(self):
        hr, ts = self.hr_footprint, self.ts_footprint
        if not (math.isclose(hr.center_x, ts.center_x, rel_tol=0, abs_tol=1e-6)
                and math.isclose(hr.center_y, ts.center_y, rel_tol=0, abs_tol=1e-6)):
            raise ValueError("footprints must share a center")
        if not (0 < self.ratio_x <= 1 and 0 < self.ratio_y <= 1):
            raise ValueError(f"high-res footprint must be contained in the "
                             f"time-series footprint (ratios {self.ratio_x}, {self.ratio_y})")

    @property
    def ratio_x(self) -> float:
        return self.hr_footprint.extent_x / self.ts_footprint.extent_x

    @property
    def ratio_y(self) -> float:
        return self.hr_footprint.extent_y / self.ts_footprint.extent_y


@dataclass(frozen=True)
class CropWindow:
    row_start: int
    col_start: int
    rows: int
    cols: int

    def slices(self) -> tuple[slice, slice]:
        return (slice(self.row_start, self.row_start + self.rows),
                slice(self.col_start, self.col_start + self.cols))


def footprint_of(size_px, resolution_m: float, center=(0.0, 0.0)) -> GeoFootprint:
    """Ground footprint of a square (or rows, cols) pixel grid."""
    if isinstance(size_px, (tuple, list)):
        rows, cols = size_px
    else:
        rows = cols = size_px
    if rows <= 0 or cols <= 0 or resolution_m <= 0:
        raise ValueError(f"size and resolution must be positive "
                         f"(got size={size_px}, resolution={resolution_m})")
    return GeoFootprint(center_x=float(center[0]), center_y=float(center[1]),
                        extent_x=cols * resolution_m, extent_y=rows * resolution_m)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def center_crop_window(spec: AlignmentSpec, source_size_px) -> CropWindow:
    """Centered window covering the high-res footprint inside a source grid
    that spans the time-series footprint."""
    if isinstance(source_size_px, (tuple, list)):
        src_rows, src_cols = source_size_px
    else:
        src_rows = src_cols = source_size_px
    if src_rows <= 0 or src_cols <= 0:
        raise ValueError(f"source size must be positive, got {source_size_px}")
    rows = max(1, _round_half_up(src_rows * spec.ratio_y))
    cols = max(1, _round_half_up(src_cols * spec.ratio_x))
    if rows > src_rows or cols > src_cols:
        raise ValueError("crop window exceeds the source grid")
    return CropWindow(row_start=(src_rows - rows) // 2,
                      col_start=(src_cols - cols) // 2,
                      rows=rows, cols=cols)
