"""On-disk dataset layout.

One directory per patch:
    <root>/<patch_id>/{t1.img, t2.img, y1.lbl, y2.lbl, series.ts, meta.txt}

Binary files are raw little-endian C-order arrays; meta.txt is the sidecar
header holding key=value lines (shapes, dtypes, resolutions, footprints,
region tag, timestamps, changed-pixel count). Split manifests live at
<root>/splits/<name>.{train,val,test}, one id per line.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..geo import AlignmentSpec, GeoFootprint
from .types import (HighResImage, LabelMap, PatchInfo, PatchSample, SplitManifest,
                    TimeSeriesStack)

_ARRAY_FILES = {
    "t1": "t1.img",
    "t2": "t2.img",
    "y1": "y1.lbl",
    "y2": "y2.lbl",
    "series": "series.ts",
}


class PatchIOError(IOError):
    def __init__(self, field: str, path, reason: str):
        self.field = field
        super().__init__(f"patch field {field!r} ({path}): {reason}")


def _fmt_floats(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def write_patch(sample: PatchSample, root) -> Path:
    root = Path(root)
    pdir = root / sample.id
    pdir.mkdir(parents=True, exist_ok=True)
    arrays = {
        "t1": np.ascontiguousarray(sample.t1.bands, dtype="<f4"),
        "t2": np.ascontiguousarray(sample.t2.bands, dtype="<f4"),
        "y1": np.ascontiguousarray(sample.y1.grid, dtype="<u1" if sample.y1.grid.dtype.itemsize == 1 else "<i8"),
        "y2": np.ascontiguousarray(sample.y2.grid, dtype="<u1" if sample.y2.grid.dtype.itemsize == 1 else "<i8"),
        "series": np.ascontiguousarray(sample.series.frames, dtype="<f4"),
    }
    meta = {
        "id": sample.id,
        "region_tag": sample.region_tag,
        "hr_resolution_m": repr(float(sample.t1.resolution_m)),
        "ts_resolution_m": repr(float(sample.series.resolution_m)),
        "timestamps": ",".join(str(int(t)) for t in sample.series.timestamps),
        "hr_center": _fmt_floats((sample.alignment.hr_footprint.center_x,
                                  sample.alignment.hr_footprint.center_y)),
        "hr_extent": _fmt_floats((sample.alignment.hr_footprint.extent_x,
                                  sample.alignment.hr_footprint.extent_y)),
        "ts_center": _fmt_floats((sample.alignment.ts_footprint.center_x,
                                  sample.alignment.ts_footprint.center_y)),
        "ts_extent": _fmt_floats((sample.alignment.ts_footprint.extent_x,
                                  sample.alignment.ts_footprint.extent_y)),
        "changed_pixels": str(int(np.count_nonzero(sample.y1.grid != sample.y2.grid))),
    }
    for field, arr in arrays.items():
        meta[f"{field}_shape"] = ",".join(str(s) for s in arr.shape)
        meta[f"{field}_dtype"] = arr.dtype.str
        arr.tofile(pdir / _ARRAY_FILES[field])
    with open(pdir / "meta.txt", "w") as f:
        for k in sorted(meta):
            f.write(f"{k}={meta[k]}\n")
    return pdir


def _parse_meta(path: Path) -> dict[str, str]:
    meta = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, _, v = line.partition("=")
        meta[k] = v
    return meta


def _read_array(pdir: Path, field: str, meta: dict[str, str]) -> np.ndarray:
    fname = _ARRAY_FILES[field]
    path = pdir / fname
    if not path.exists():
        raise PatchIOError(field, path, "file missing")
    try:
        shape = tuple(int(s) for s in meta[f"{field}_shape"].split(","))
        dtype = np.dtype(meta[f"{field}_dtype"])
    except KeyError as e:
        raise PatchIOError(field, pdir / "meta.txt", f"missing header key {e}") from e
    arr = np.fromfile(path, dtype=dtype)
    expected = int(np.prod(shape))
    if arr.size != expected:
        raise PatchIOError(field, path,
                           f"expected {expected} elements for shape {shape}, found {arr.size}")
    return arr.reshape(shape)


def read_patch(root, patch_id: str) -> PatchSample:
    pdir = Path(root) / patch_id
    meta_path = pdir / "meta.txt"
    if not meta_path.exists():
        raise PatchIOError("meta", meta_path, "file missing")
    meta = _parse_meta(meta_path)
    t1 = _read_array(pdir, "t1", meta)
    t2 = _read_array(pdir, "t2", meta)
    y1 = _read_array(pdir, "y1", meta)
    y2 = _read_array(pdir, "y2", meta)
    series = _read_array(pdir, "series", meta)
    hr_cx, hr_cy = (float(v) for v in meta["hr_center"].split(","))
    hr_ex, hr_ey = (float(v) for v in meta["hr_extent"].split(","))
    ts_cx, ts_cy = (float(v) for v in meta["ts_center"].split(","))
    ts_ex, ts_ey = (float(v) for v in meta["ts_extent"].split(","))
    alignment = AlignmentSpec(GeoFootprint(hr_cx, hr_cy, hr_ex, hr_ey),
                              GeoFootprint(ts_cx, ts_cy, ts_ex, ts_ey))
    timestamps = np.array([int(t) for t in meta["timestamps"].split(",")], dtype=np.int64)
    return PatchSample(
        id=meta["id"],
        t1=HighResImage(t1, float(meta["hr_resolution_m"])),
        t2=HighResImage(t2, float(meta["hr_resolution_m"])),
        y1=LabelMap(y1),
        y2=LabelMap(y2),
        series=TimeSeriesStack(series, timestamps, float(meta["ts_resolution_m"])),
        alignment=alignment,
        region_tag=meta["region_tag"],
    )


def scan_dataset(root) -> list[PatchInfo]:
    """Cheap metadata-only scan, sorted by patch id."""
    root = Path(root)
    infos = []
    if not root.exists():
        raise FileNotFoundError(f"dataset root {root} does not exist")
    for pdir in sorted(root.iterdir()):
        meta_path = pdir / "meta.txt"
        if not pdir.is_dir() or not meta_path.exists():
            continue
        meta = _parse_meta(meta_path)
        infos.append(PatchInfo(id=meta["id"], region_tag=meta["region_tag"],
                               changed_pixels=int(meta.get("changed_pixels", "0")),
                               root=str(root)))
    return infos


def save_manifest(manifest: SplitManifest, root) -> None:
    sdir = Path(root) / "splits"
    sdir.mkdir(parents=True, exist_ok=True)
    for part in ("train", "val", "test"):
        with open(sdir / f"{manifest.name}.{part}", "w") as f:
            for pid in manifest.part(part):
                f.write(pid + "\n")


def load_manifest(root, name: str) -> SplitManifest:
    sdir = Path(root) / "splits"
    parts = {}
    for part in ("train", "val", "test"):
        path = sdir / f"{name}.{part}"
        if not path.exists():
            raise FileNotFoundError(f"split file {path} does not exist")
        parts[part] = [line.strip() for line in path.read_text().splitlines() if line.strip()]
    return SplitManifest(name=name, **parts)
