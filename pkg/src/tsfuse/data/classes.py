"""The 18-value land-use class system (17 classes + background 0).

Label values, names, and palette colors are the dataset's published class
table; synthetic high-res imagery renders each class as its palette color
plus noise.
"""
from __future__ import annotations

from dataclasses import dataclass

_TABLE = (
    (0, "Background", "FFFFFF"),
    (1, "Traffic land", "E98585"),
    (2, "Inland water", "089AE6"),
    (3, "Residential land", "FF001E"),
    (4, "Cropland", "7ED321"),
    (5, "Agriculture construction", "877E14"),
    (6, "Blank", "5E2F04"),
    (7, "Industrial land", "0A524D"),
    (8, "Orchard", "B8E986"),
    (9, "Park", "DBAAE6"),
    (10, "Public management", "FFC702"),
    (11, "Commercial land", "FCE805"),
    (12, "Public construction", "F56B00"),
    (13, "Special land", "F3E5B0"),
    (14, "Forest", "036400"),
    (15, "Storage", "7F7B7F"),
    (16, "wetland", "34CDF9"),
    (17, "Grass", "12E3B4"),
)


@dataclass(frozen=True)
class ClassSystem:
    classes: tuple[tuple[int, str, tuple[int, int, int]], ...]

    def __post_init__(self):
        values = [v for v, _, _ in self.classes]
        if len(self.classes) != 18 or values != list(range(18)):
            raise ValueError("class system must list label values 0..17 exactly once")
        if self.classes[0][1].lower() != "background":
            raise ValueError("label 0 must be the background class")

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def name_of(self, value: int) -> str:
        return self.classes[value][1]

    def color_of(self, value: int) -> tuple[int, int, int]:
        return self.classes[value][2]

    def palette(self):
        import numpy as np

        return np.array([c for _, _, c in self.classes], dtype=np.uint8)


def _hex(rgb: str) -> tuple[int, int, int]:
    return tuple(int(rgb[i:i + 2], 16) for i in (0, 2, 4))


LAND_USE = ClassSystem(tuple((v, n, _hex(c)) for v, n, c in _TABLE))

NUM_CLASSES = LAND_USE.num_classes
IGNORE_LABEL = 0
