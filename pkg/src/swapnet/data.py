"""IDX dataset ingestion, class filtering, and seeded stratified splitting.

The loader speaks the MNIST IDX container format (big-endian u32 header
fields, magic 0x803 for image files and 0x801 for label files), which also
covers Fashion MNIST and Extended MNIST.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Malformed IDX input; ``field`` names the offending header item."""

    def __init__(self, message: str, field: str):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class LabeledImage:
    pixels: np.ndarray  # (rows, cols) uint8
    label: int


@dataclass(frozen=True)
class FilteredDataset:
    """Class-filtered samples with labels remapped to contiguous indices."""

    samples: list[LabeledImage]
    class_map: dict[int, int]  # original label -> contiguous class index


@dataclass(frozen=True)
class DatasetSplit:
    train: list[LabeledImage]
    test: list[LabeledImage]
    class_map: dict[int, int]


def _read_exact(handle, count: int, path: Path, field: str) -> bytes:
    data = handle.read(count)
    if len(data) != count:
        raise IdxFormatError(f"{path}: truncated while reading {field}", field)
    return data


def load_idx(images_path: str | Path, labels_path: str | Path) -> list[LabeledImage]:
    """Read paired IDX image/label files into labeled images."""
    images_path = Path(images_path)
    labels_path = Path(labels_path)

    with open(images_path, "rb") as handle:
        magic, count, rows, cols = struct.unpack(
            ">IIII", _read_exact(handle, 16, images_path, "header")
        )
        if magic != IMAGES_MAGIC:
            raise IdxFormatError(
                f"{images_path}: bad image magic 0x{magic:08x}", "magic"
            )
        raw = _read_exact(handle, count * rows * cols, images_path, "pixels")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)

    with open(labels_path, "rb") as handle:
        magic, label_count = struct.unpack(
            ">II", _read_exact(handle, 8, labels_path, "header")
        )
        if magic != LABELS_MAGIC:
            raise IdxFormatError(
                f"{labels_path}: bad label magic 0x{magic:08x}", "magic"
            )
        labels = np.frombuffer(
            _read_exact(handle, label_count, labels_path, "labels"), dtype=np.uint8
        )

    if count != label_count:
        raise IdxFormatError(
            f"{images_path}: {count} images but {label_count} labels", "count"
        )
    return [LabeledImage(pixels[i], int(labels[i])) for i in range(count)]


def filter_classes(data: list[LabeledImage], classes: list[int]) -> FilteredDataset:
    """Keep only ``classes``, remapping labels ascending to 0..k-1."""
    if not classes:
        raise ValueError("class list must be nonempty")
    if len(set(classes)) != len(classes):
        raise ValueError(f"class list has duplicates: {classes}")
    class_map = {label: index for index, label in enumerate(sorted(classes))}
    kept = [
        LabeledImage(item.pixels, class_map[item.label])
        for item in data
        if item.label in class_map
    ]
    present = {item.label for item in kept}
    missing = [c for c in sorted(classes) if class_map[c] not in present]
    if missing:
        raise ValueError(f"no samples found for classes {missing}")
    return FilteredDataset(kept, class_map)


def split_and_cap(
    data: FilteredDataset,
    test_fraction: float,
    per_class_cap: int | None = None,
    seed: int = 0,
) -> DatasetSplit:
    """Seeded stratified train/test split with an optional training cap."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[LabeledImage]] = {}
    for item in data.samples:
        by_class.setdefault(item.label, []).append(item)

    train: list[LabeledImage] = []
    test: list[LabeledImage] = []
    for label in sorted(by_class):
        items = by_class[label]
        order = rng.permutation(len(items))
        test_count = int(round(len(items) * test_fraction))
        test.extend(items[i] for i in order[:test_count])
        kept = [items[i] for i in order[test_count:]]
        if per_class_cap is not None:
            if per_class_cap > len(kept):
                warnings.warn(
                    f"class {label}: cap {per_class_cap} exceeds the "
                    f"{len(kept)} available training samples; using all"
                )
            kept = kept[:per_class_cap]
        train.extend(kept)
    return DatasetSplit(train, test, data.class_map)


def to_arrays(items: list[LabeledImage]) -> tuple[np.ndarray, np.ndarray]:
    """Flatten images to a (n, rows*cols) float array plus a label vector."""
    if not items:
        return np.zeros((0, 0)), np.zeros(0, dtype=int)
    pixels = np.stack([item.pixels.reshape(-1) for item in items]).astype(float)
    labels = np.array([item.label for item in items], dtype=int)
    return pixels, labels
