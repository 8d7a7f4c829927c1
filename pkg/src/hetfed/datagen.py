"""Dataset construction: synthetic Gaussian-cluster data, IDX files, triggers."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .rng import substream

# class means sit on a sphere of this radius; together with sigma it sets
# how much neighbouring classes overlap
CLASS_MEAN_RADIUS = 2.0

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass
class Sample:
    features: np.ndarray  # (d,) float64
    label: int


@dataclass
class Dataset:
    """Feature matrix plus labels; samples are rows."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    num_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must be one per feature row")
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def sample(self, i: int) -> Sample:
        return Sample(self.features[i].copy(), int(self.labels[i]))

    def subset(self, indices: np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.num_classes)


@dataclass(frozen=True)
class TriggerPattern:
    """Feature positions pinned to fixed values, plus the class they buy."""

    entries: tuple  # ((index, value), ...)
    target_class: int

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple((int(i), float(v)) for i, v in self.entries)
        )
        if not self.entries:
            raise ValueError("trigger pattern needs at least one entry")
        idxs = [i for i, _ in self.entries]
        if len(set(idxs)) != len(idxs):
            raise ValueError(f"trigger indices must be distinct, got {idxs}")
        if any(i < 0 for i in idxs):
            raise ValueError("trigger indices must be non-negative")
        if self.target_class < 0:
            raise ValueError("target class must be non-negative")

    @property
    def indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.entries], dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.entries], dtype=np.float64)


def gen_synthetic(num_classes: int, num_features: int, samples_per_class: int,
                  sigma: float, seed: int) -> Dataset:
    """Gaussian cluster per class, means on a radius-2 sphere.

    Each class mean is a unit direction drawn from the class's own seeded
    stream, scaled to CLASS_MEAN_RADIUS, so the geometry depends only on
    (class, seed). Samples are ordered class by class.
    """
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    if num_features < 1:
        raise ValueError(f"num_features must be >= 1, got {num_features}")
    if samples_per_class < 1:
        raise ValueError(f"samples_per_class must be >= 1, got {samples_per_class}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    feats = np.empty((num_classes * samples_per_class, num_features))
    labels = np.empty(num_classes * samples_per_class, dtype=np.int64)
    for k in range(num_classes):
        rng = substream(seed, k)
        direction = rng.standard_normal(num_features)
        norm = np.linalg.norm(direction)
        if norm == 0.0:  # astronomically unlikely, but keep the mean defined
            direction[0] = 1.0
            norm = 1.0
        mean = CLASS_MEAN_RADIUS * direction / norm
        block = slice(k * samples_per_class, (k + 1) * samples_per_class)
        feats[block] = mean + sigma * rng.standard_normal((samples_per_class, num_features))
        labels[block] = k
    return Dataset(feats, labels, num_classes)


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated IDX file while reading {what}")
    return buf


def load_idx(images_path: str, labels_path: str) -> Dataset:
    """Load an IDX image/label file pair (big-endian, pixels scaled to [0, 1])."""
    with open(images_path, "rb") as f:
        magic, n, rows, cols = struct.unpack(">IIII", _read_exact(f, 16, "image header"))
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(f"bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}")
        raw = _read_exact(f, n * rows * cols, "image data")
        if f.read(1):
            raise FormatError("trailing bytes after image data")
    with open(labels_path, "rb") as f:
        magic, n_lab = struct.unpack(">II", _read_exact(f, 8, "label header"))
        if magic != IDX_LABEL_MAGIC:
            raise FormatError(f"bad label magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}")
        lab_raw = _read_exact(f, n_lab, "label data")
        if f.read(1):
            raise FormatError("trailing bytes after label data")
    if n != n_lab:
        raise FormatError(f"image count {n} does not match label count {n_lab}")
    feats = np.frombuffer(raw, dtype=np.uint8).astype(np.float64).reshape(n, rows * cols) / 255.0
    labels = np.frombuffer(lab_raw, dtype=np.uint8).astype(np.int64)
    num_classes = max(2, int(labels.max()) + 1) if n else 2
    return Dataset(feats, labels, num_classes)


def split_train_test(ds: Dataset, test_fraction: float, seed: int):
    """Disjoint, exhaustive (train, test) split by seeded shuffle."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if len(ds) < 2:
        raise ValueError("need at least 2 samples to split")
    perm = substream(seed).permutation(len(ds))
    n_test = int(round(len(ds) * test_fraction))
    n_test = min(max(n_test, 1), len(ds) - 1)
    return ds.subset(perm[n_test:]), ds.subset(perm[:n_test])


def apply_trigger(s: Sample, p: TriggerPattern) -> Sample:
    """Copy of `s` with trigger features pinned and the label replaced."""
    if p.indices.max() >= s.features.shape[0]:
        raise ValueError(
            f"trigger index {int(p.indices.max())} out of range for {s.features.shape[0]} features"
        )
    feats = s.features.copy()
    feats[p.indices] = p.values
    return Sample(feats, p.target_class)


def apply_trigger_to_matrix(X: np.ndarray, p: TriggerPattern) -> np.ndarray:
    """Vectorized apply_trigger over rows; labels are the caller's business."""
    if p.indices.max() >= X.shape[1]:
        raise ValueError(
            f"trigger index {int(p.indices.max())} out of range for {X.shape[1]} features"
        )
    out = X.copy()
    out[:, p.indices] = p.values
    return out
