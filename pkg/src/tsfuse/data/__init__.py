from .change import derive_change_label
from .classes import IGNORE_LABEL, LAND_USE, NUM_CLASSES, ClassSystem
from .generator import GeneratorConfig, class_signatures, generate_dataset, generate_patch
from .io import (PatchIOError, load_manifest, read_patch, save_manifest, scan_dataset,
                 write_patch)
from .splits import DEFAULT_RATIOS, build_splits
from .types import (ChangeLabel, HighResImage, LabelMap, PatchInfo, PatchSample,
                    SplitManifest, TimeSeriesStack)

__all__ = [
    "ChangeLabel", "ClassSystem", "DEFAULT_RATIOS", "GeneratorConfig", "HighResImage",
    "IGNORE_LABEL", "LAND_USE", "LabelMap", "NUM_CLASSES", "PatchIOError", "PatchInfo",
    "PatchSample", "SplitManifest", "TimeSeriesStack", "build_splits",
    "class_signatures", "derive_change_label", "generate_dataset", "generate_patch",
    "load_manifest", "read_patch", "save_manifest", "scan_dataset", "write_patch",
]
