import struct
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))


def write_idx_pair(directory, images, labels, stem="train"):
    """Write a (n, rows, cols) uint8 array and labels as an IDX file pair."""
    directory = Path(directory)
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    count, rows, cols = images.shape
    images_path = directory / f"{stem}-images-idx3-ubyte"
    labels_path = directory / f"{stem}-labels-idx1-ubyte"
    images_path.write_bytes(
        struct.pack(">IIII", 0x803, count, rows, cols) + images.tobytes()
    )
    labels_path.write_bytes(struct.pack(">II", 0x801, count) + labels.tobytes())
    return images_path, labels_path


def synthetic_binary_images(per_class=12, side=4, seed=0):
    """Two easily separable classes: dim noise vs bright blocks."""
    rng = np.random.default_rng(seed)
    dark = rng.integers(0, 60, size=(per_class, side, side))
    bright = rng.integers(180, 256, size=(per_class, side, side))
    images = np.concatenate([dark, bright]).astype(np.uint8)
    labels = np.array([0] * per_class + [1] * per_class, dtype=np.uint8)
    return images, labels
