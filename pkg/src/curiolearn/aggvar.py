"""Incremental per-class centroid clustering with streaming diagonal variance.

Each class holds a growing list of centroids. A new vector either updates the
nearest centroid of its class (when closer than the distance threshold) by a
count-weighted mean, or becomes a fresh centroid. Second moments are carried
per dimension with Welford's recurrence, so every centroid's mean and
unbiased variance match a batch recomputation over the vectors assigned to
it. Classes never interact: inserting into one class cannot touch another.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoModelError, PackCorruptionError, PackFormatError, ValidationError

SNAPSHOT_MAGIC = b"CBCLMS01"
_SNAP_HEADER = struct.Struct("<IId")
_CLASS_HEADER = struct.Struct("<II")
_COUNT = struct.Struct("<I")


@dataclass
class Centroid:
    """Running mean, per-dimension sum of squared deviations, sample count."""

    mean: np.ndarray
    m2: np.ndarray
    count: int

    def variance(self) -> np.ndarray:
        """Unbiased per-dimension variance; zero vector for a single sample."""
        if self.count < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.count - 1)


@dataclass
class ClassModel:
    class_id: int
    centroids: list[Centroid] = field(default_factory=list)
    total_count: int = 0
    # row i mirrors centroids[i].mean; kept in sync by the insert path so
    # nearest-centroid queries are one vectorized distance computation
    _means: np.ndarray | None = field(default=None, repr=False, compare=False)

    def means_matrix(self) -> np.ndarray:
        if self._means is None or self._means.shape[0] != len(self.centroids):
            self._means = np.stack([c.mean for c in self.centroids])
        return self._means


class ModelStore:
    """All per-class centroid models plus the shared distance threshold.

    Single-writer: inserts are order-dependent and strictly sequential.
    Queries are read-only and safe between write phases.
    """

    def __init__(self, dimension: int, distance_threshold: float):
        if dimension < 1:
            raise ValidationError(f"dimension must be >= 1, got {dimension}")
        if distance_threshold < 0:
            raise ValidationError(
                f"distance threshold must be >= 0, got {distance_threshold}")
        self.dimension = dimension
        self.distance_threshold = distance_threshold
        self.models: dict[int, ClassModel] = {}

    def class_ids(self) -> list[int]:
        return sorted(self.models)

    @property
    def num_centroids(self) -> int:
        return sum(len(m.centroids) for m in self.models.values())

    def _check_vector(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dimension,):
            raise ValidationError(
                f"vector shape {x.shape} does not match dimension {self.dimension}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("vector contains non-finite values")
        return x


def agg_var_insert(store: ModelStore, class_id: int, x: np.ndarray) -> None:
    """Fold one vector into its class model.

    Distance strictly below the threshold updates the nearest centroid of
    the class (ties to the lowest index); otherwise the vector becomes a new
    centroid with zero variance and count 1.
    """
    x = store._check_vector(x)
    model = store.models.get(class_id)
    if model is None:
        model = ClassModel(
            class_id, [Centroid(x.copy(), np.zeros_like(x), 1)], total_count=1)
        model._means = x.copy().reshape(1, -1)
        store.models[class_id] = model
        return

    means = model.means_matrix()
    deltas = means - x
    sq_dists = np.einsum("ij,ij->i", deltas, deltas)
    nearest = int(np.argmin(sq_dists))
    if float(np.sqrt(sq_dists[nearest])) < store.distance_threshold:
        c = model.centroids[nearest]
        old_mean = c.mean
        new_mean = (c.count * old_mean + x) / (c.count + 1)
        c.m2 = c.m2 + (x - old_mean) * (x - new_mean)
        c.mean = new_mean
        c.count += 1
        means[nearest] = new_mean
    else:
        model.centroids.append(Centroid(x.copy(), np.zeros_like(x), 1))
        model._means = np.vstack([means, x])
    model.total_count += 1


def learn_object(store: ModelStore, class_id: int, views: np.ndarray) -> None:
    """Insert every view of a labeled object, in order."""
    views = np.asarray(views)
    if views.ndim != 2 or views.shape[0] < 1:
        raise ValidationError("views must be a nonempty 2-D array")
    for row in views:
        agg_var_insert(store, class_id, row)


def closest_centroid(store: ModelStore, x: np.ndarray) -> tuple[int, int, float]:
    """(class_id, centroid_index, distance) of the globally nearest centroid.

    Ties break to the lower class_id, then the lower centroid index.
    """
    x = store._check_vector(x)
    best: tuple[int, int, float] | None = None
    for class_id in store.class_ids():
        means = store.models[class_id].means_matrix()
        deltas = means - x
        sq_dists = np.einsum("ij,ij->i", deltas, deltas)
        index = int(np.argmin(sq_dists))
        dist = float(np.sqrt(sq_dists[index]))
        if best is None or dist < best[2]:
            best = (class_id, index, dist)
    if best is None:
        raise NoModelError("store has no centroids")
    return best


def class_statistics(store: ModelStore) -> list[tuple[int, int, int]]:
    """Per learned class: (class_id, num_centroids, total sample count)."""
    return [
        (cid, len(store.models[cid].centroids), store.models[cid].total_count)
        for cid in store.class_ids()
    ]


def save_model_store(store: ModelStore, path: Path | str) -> None:
    """Snapshot the store to a little-endian binary file.

    Layout: magic ``CBCLMS01``, u32 dimension, u32 num_classes, f64 distance
    threshold; per class (ascending class_id): u32 class_id, u32 n_centroids;
    per centroid: u32 count, d binary32 mean, d binary32 m2.
    """
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(_SNAP_HEADER.pack(
            store.dimension, len(store.models), store.distance_threshold))
        for class_id in store.class_ids():
            model = store.models[class_id]
            fh.write(_CLASS_HEADER.pack(class_id, len(model.centroids)))
            for c in model.centroids:
                fh.write(_COUNT.pack(c.count))
                fh.write(c.mean.astype("<f4").tobytes())
                fh.write(c.m2.astype("<f4").tobytes())


def load_model_store(path: Path | str) -> ModelStore:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < len(SNAPSHOT_MAGIC) or data[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise PackFormatError(f"{path}: bad model snapshot magic")
    offset = len(SNAPSHOT_MAGIC)
    if len(data) < offset + _SNAP_HEADER.size:
        raise PackCorruptionError(f"{path}: truncated snapshot header")
    dimension, num_classes, threshold = _SNAP_HEADER.unpack_from(data, offset)
    offset += _SNAP_HEADER.size
    store = ModelStore(dimension, threshold)
    row_bytes = 4 * dimension
    for _ in range(num_classes):
        if len(data) < offset + _CLASS_HEADER.size:
            raise PackCorruptionError(f"{path}: truncated class header at byte {offset}")
        class_id, n_centroids = _CLASS_HEADER.unpack_from(data, offset)
        offset += _CLASS_HEADER.size
        if class_id in store.models:
            raise ValidationError(f"{path}: duplicate class_id {class_id}")
        if n_centroids < 1:
            raise ValidationError(f"{path}: class {class_id} has no centroids")
        centroids = []
        total = 0
        for _ in range(n_centroids):
            need = _COUNT.size + 2 * row_bytes
            if len(data) < offset + need:
                raise PackCorruptionError(f"{path}: truncated centroid at byte {offset}")
            (count,) = _COUNT.unpack_from(data, offset)
            offset += _COUNT.size
            if count < 1:
                raise ValidationError(f"{path}: centroid count {count} < 1")
            mean = np.frombuffer(data, "<f4", dimension, offset).astype(np.float64)
            offset += row_bytes
            m2 = np.frombuffer(data, "<f4", dimension, offset).astype(np.float64)
            offset += row_bytes
            if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(m2))):
                raise ValidationError(f"{path}: non-finite centroid values")
            if np.any(m2 < 0):
                raise ValidationError(f"{path}: negative squared deviations")
            centroids.append(Centroid(mean, m2, count))
            total += count
        store.models[class_id] = ClassModel(class_id, centroids, total)
    if offset != len(data):
        raise PackCorruptionError(f"{path}: {len(data) - offset} trailing bytes")
    return store
