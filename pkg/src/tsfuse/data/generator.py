"""Deterministic synthetic patch generator.

Reproduces the dataset geometry without real imagery: piecewise-constant
polygonal (nearest-seed) class maps over the enclosing time-series
footprint, high-res RGB rendered as palette color plus noise, and a
monthly multi-band series whose per-pixel values follow class-conditioned
seasonal signatures. Changed cells switch class at a random month inside
the series, so the stack carries information about both classes and
change timing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geo import AlignmentSpec, footprint_of
from .classes import LAND_USE
from .types import HighResImage, LabelMap, PatchSample, TimeSeriesStack


@dataclass(frozen=True)
class GeneratorConfig:
    hr_size: int = 512
    hr_resolution_m: float = 0.5
    ts_size: int = 128
    footprint_scale: float = 5.0  # time-series extent / high-res extent
    frames: int = 25
    bands: int = 14
    num_classes: int = 18
    change_fraction: float = 0.25
    cells_per_window: float = 6.0  # expected polygon count inside the hr window
    snr: float = 4.0
    background_freq: float = 0.02
    class_frequencies: tuple[float, ...] | None = None
    signature_seed: int = 7

    def __post_init__(self):
        if not (0.0 <= self.change_fraction <= 1.0):
            raise ValueError(f"change_fraction must be in [0, 1], got {self.change_fraction}")
        if not (2 <= self.num_classes <= 18):
            raise ValueError(f"num_classes must be in 2..18, got {self.num_classes}")
        if min(self.hr_size, self.ts_size, self.frames, self.bands) < 1:
            raise ValueError("grid sizes, frames, and bands must be positive")
        if self.footprint_scale < 1.0:
            raise ValueError("footprint_scale must be >= 1 so the high-res window "
                             "fits inside the series footprint")

    @property
    def ts_resolution_m(self) -> float:
        return self.footprint_scale * self.hr_size * self.hr_resolution_m / self.ts_size


def class_frequencies(config: GeneratorConfig, region_tag: str) -> np.ndarray:
    """Sampling weights over labels 0..num_classes-1; region B reverses the
    non-background ramp so the two regions have shifted class mixes."""
    if config.class_frequencies is not None:
        f = np.asarray(config.class_frequencies, dtype=np.float64)
        if f.shape != (config.num_classes,) or f.min() < 0 or f.sum() <= 0:
            raise ValueError("class_frequencies must be a nonnegative vector over all labels")
        return f / f.sum()
    k = config.num_classes
    ramp = np.linspace(1.0, 3.0, k - 1)
    if region_tag == "B":
        ramp = ramp[::-1]
    f = np.concatenate([[config.background_freq * ramp.sum() / (1 - config.background_freq)],
                        ramp])
    return f / f.sum()


def class_signatures(config: GeneratorConfig) -> np.ndarray:
    """Per-class per-band monthly signatures, shared by every patch.

    Shape (num_classes, bands, frames): a base reflectance plus a seasonal
    sinusoid keyed to the month index."""
    rng = np.random.default_rng(config.signature_seed)
    k, c, t = config.num_classes, config.bands, config.frames
    base = rng.uniform(0.1, 0.9, (k, c))
    amp = rng.uniform(0.05, 0.3, (k, c))
    phase = rng.uniform(0.0, 2 * np.pi, (k, c))
    months = np.arange(t)
    return (base[:, :, None]
            + amp[:, :, None] * np.sin(2 * np.pi * months[None, None] / 12.0
                                       + phase[:, :, None])).astype(np.float32)


def _nearest_cell(size: int, extent: float, seeds_xy: np.ndarray) -> np.ndarray:
    """Nearest-seed index per pixel of a centered square grid (chunked)."""
    res = extent / size
    coords = -extent / 2 + (np.arange(size) + 0.5) * res
    out = np.empty((size, size), dtype=np.int32)
    chunk = max(1, (1 << 22) // (seeds_xy.shape[0] * size))
    for r0 in range(0, size, chunk):
        r1 = min(size, r0 + chunk)
        dy = coords[r0:r1, None, None] - seeds_xy[None, None, :, 1]
        dx = coords[None, :, None] - seeds_xy[None, None, :, 0]
        out[r0:r1] = np.argmin(dx * dx + dy * dy, axis=2)
    return out


def generate_patch(seed: int, config: GeneratorConfig = GeneratorConfig(),
                   region_tag: str = "A", patch_id: str | None = None) -> PatchSample:
    rng = np.random.default_rng(seed)
    hr_fp = footprint_of(config.hr_size, config.hr_resolution_m)
    ts_fp = footprint_of(config.ts_size, config.ts_resolution_m)
    alignment = AlignmentSpec(hr_fp, ts_fp)

    area_ratio = (ts_fp.extent_x * ts_fp.extent_y) / (hr_fp.extent_x * hr_fp.extent_y)
    n_cells = max(2, round(config.cells_per_window * area_ratio))
    seeds_xy = np.column_stack([
        rng.uniform(-ts_fp.extent_x / 2, ts_fp.extent_x / 2, n_cells),
        rng.uniform(-ts_fp.extent_y / 2, ts_fp.extent_y / 2, n_cells),
    ])
    freqs = class_frequencies(config, region_tag)
    c1 = rng.choice(config.num_classes, size=n_cells, p=freqs).astype(np.uint8)

    cell_hr = _nearest_cell(config.hr_size, hr_fp.extent_x, seeds_xy)
    cell_ts = _nearest_cell(config.ts_size, ts_fp.extent_x, seeds_xy)

    # flip whole cells, chasing the requested changed-pixel share of the hr
    # window; a cell is flipped only if it moves the achieved share closer
    # to the target (granularity is one polygon). Context cells outside the
    # window then flip at the achieved rate so the surroundings change too.
    counts = np.bincount(cell_hr.ravel(), minlength=n_cells)
    target = config.change_fraction * config.hr_size ** 2
    order = rng.permutation(n_cells)
    c2 = c1.copy()
    changed_cells = np.zeros(n_cells, dtype=bool)

    def flip(cell):
        old = int(c1[cell])
        if old == 0:
            new = int(rng.integers(1, config.num_classes))
        elif config.num_classes > 2:
            new = int(rng.integers(1, config.num_classes - 1))
            if new >= old:
                new += 1
        else:
            new = 0  # two-label corner case: background is the only alternative
        c2[cell] = new
        changed_cells[cell] = True

    acc = 0
    for cell in order:
        if counts[cell] == 0:
            continue
        if acc >= target:
            break
        if acc + counts[cell] - target <= target - acc:
            flip(cell)
            acc += counts[cell]
    achieved = acc / config.hr_size ** 2
    context = [c for c in order if counts[c] == 0]
    for cell in context[:int(round(achieved * len(context)))]:
        flip(cell)

    y1 = c1[cell_hr]
    y2 = c2[cell_hr]

    palette = (LAND_USE.palette().astype(np.float32) / 255.0)
    sigma_hr = 0.25 / config.snr
    t1 = palette[y1].transpose(2, 0, 1) + rng.standard_normal(
        (3, config.hr_size, config.hr_size)).astype(np.float32) * sigma_hr
    t2 = palette[y2].transpose(2, 0, 1) + rng.standard_normal(
        (3, config.hr_size, config.hr_size)).astype(np.float32) * sigma_hr
    t1 = np.clip(t1, 0.0, 1.0)
    t2 = np.clip(t2, 0.0, 1.0)

    change_month = rng.integers(1, config.frames, size=n_cells) if config.frames > 1 \
        else np.ones(n_cells, dtype=np.int64)
    change_month = np.where(changed_cells, change_month, config.frames)

    sig = class_signatures(config)
    month_of_cell = change_month[cell_ts]
    frames = np.empty((config.frames, config.bands, config.ts_size, config.ts_size),
                      dtype=np.float32)
    ts_c1 = c1[cell_ts]
    ts_c2 = c2[cell_ts]
    for t in range(config.frames):
        cls_t = np.where(month_of_cell <= t, ts_c2, ts_c1)
        frames[t] = np.moveaxis(sig[cls_t, :, t], -1, 0)
    sigma_ts = 0.2 / config.snr
    frames += rng.standard_normal(frames.shape).astype(np.float32) * sigma_ts

    return PatchSample(
        id=patch_id or f"patch_{seed:08d}",
        t1=HighResImage(t1, config.hr_resolution_m),
        t2=HighResImage(t2, config.hr_resolution_m),
        y1=LabelMap(y1),
        y2=LabelMap(y2),
        series=TimeSeriesStack(frames, np.arange(config.frames, dtype=np.int64),
                               config.ts_resolution_m),
        alignment=alignment,
        region_tag=region_tag,
    )


def generate_dataset(root, count: int, config: GeneratorConfig = GeneratorConfig(),
                     seed: int = 0, region_b_fraction: float = 0.5) -> list[str]:
    """Write `count` patches under `root`; the tail fraction gets region B."""
    from .io import write_patch

    ids = []
    first_b = int(round(count * (1.0 - region_b_fraction)))
    for i in range(count):
        region = "A" if i < first_b else "B"
        sample = generate_patch(seed + i, config, region_tag=region,
                                patch_id=f"patch_{i:05d}")
        write_patch(sample, root)
        ids.append(sample.id)
    return ids
