"""Feature-pack datasets: binary I/O, synthetic generation, splits, schedules.

A feature pack is a single little-endian binary file holding per-object view
embeddings:

    magic   8 bytes ASCII ``CBCLFP01``
    header  u32 dimension d, u32 num_classes N, u32 num_objects M
    records M times: u32 object_id, u32 class_id, u32 session_id,
            u32 n_images, then n_images * d IEEE-754 binary32 values
            (row-major, one row per image)

An optional sidecar ``<pack>.names.json`` carries an array of N class-name
strings. Loading then writing a valid pack is byte-identical.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PackCorruptionError, PackFormatError, ValidationError

PACK_MAGIC = b"CBCLFP01"
_HEADER = struct.Struct("<III")
_RECORD_HEADER = struct.Struct("<IIII")
_U32_MAX = 0xFFFFFFFF


@dataclass
class ObjectInstance:
    """One physical object: its views and the oracle-held true label.

    ``views`` is an (n_views, d) float32 array; every view is one embedding.
    """

    object_id: int
    class_id: int
    session_id: int
    views: np.ndarray

    @property
    def num_views(self) -> int:
        return self.views.shape[0]


@dataclass
class Dataset:
    dimension: int
    num_classes: int
    objects: list[ObjectInstance] = field(default_factory=list)
    class_names: list[str] | None = None

    def validate(self) -> None:
        """Raise ValidationError on any invariant violation."""
        if self.dimension < 1:
            raise ValidationError(f"dimension must be >= 1, got {self.dimension}")
        if self.num_classes < 1:
            raise ValidationError(f"num_classes must be >= 1, got {self.num_classes}")
        if self.class_names is not None and len(self.class_names) != self.num_classes:
            raise ValidationError(
                f"{len(self.class_names)} class names for {self.num_classes} classes"
            )
        seen_ids: set[int] = set()
        for obj in self.objects:
            for name, value in (
                ("object_id", obj.object_id),
                ("class_id", obj.class_id),
                ("session_id", obj.session_id),
            ):
                if not 0 <= value <= _U32_MAX:
                    raise ValidationError(f"{name}={value} outside u32 range")
            if obj.object_id in seen_ids:
                raise ValidationError(f"duplicate object_id {obj.object_id}")
            seen_ids.add(obj.object_id)
            if obj.class_id >= self.num_classes:
                raise ValidationError(
                    f"object {obj.object_id}: class_id {obj.class_id} "
                    f">= num_classes {self.num_classes}"
                )
            if obj.views.ndim != 2 or obj.views.shape[0] < 1:
                raise ValidationError(
                    f"object {obj.object_id}: views must be a nonempty 2-D array"
                )
            if obj.views.shape[1] != self.dimension:
                raise ValidationError(
                    f"object {obj.object_id}: view dimension {obj.views.shape[1]} "
                    f"!= dataset dimension {self.dimension}"
                )
            if not np.all(np.isfinite(obj.views)):
                raise ValidationError(
                    f"object {obj.object_id}: views contain non-finite values"
                )

    @property
    def num_images(self) -> int:
        return sum(obj.num_views for obj in self.objects)

    def sessions(self) -> set[int]:
        return {obj.session_id for obj in self.objects}


@dataclass
class IncrementBatch:
    increment_index: int
    candidates: list[ObjectInstance]


@dataclass
class SynthConfig:
    """Two-level Gaussian hierarchy: class center -> instance sub-center ->
    per-view noise. Instances of a class stay tighter than the class spread,
    which is what makes distance-based uncertainty scoring meaningful."""

    num_classes: int = 10
    instances_per_class: int = 50
    views_per_instance: int = 5
    dimension: int = 32
    class_center_spread: float = 1.5
    intra_class_spread: float = 1.0
    view_noise: float = 1.5
    num_sessions: int = 5

    def validate(self) -> None:
        for name in ("num_classes", "instances_per_class", "views_per_instance",
                     "dimension", "num_sessions"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("class_center_spread", "intra_class_spread"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.view_noise < 0:
            raise ValidationError(f"view_noise must be >= 0, got {self.view_noise}")


def names_sidecar_path(path: Path | str) -> Path:
    return Path(str(path) + ".names.json")


def write_feature_pack(dataset: Dataset, path: Path | str) -> None:
    """Serialize a dataset; ``read_feature_pack`` inverts it bit-exactly."""
    dataset.validate()
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(PACK_MAGIC)
        fh.write(_HEADER.pack(dataset.dimension, dataset.num_classes, len(dataset.objects)))
        for obj in dataset.objects:
            fh.write(_RECORD_HEADER.pack(
                obj.object_id, obj.class_id, obj.session_id, obj.num_views))
            fh.write(np.ascontiguousarray(obj.views, dtype="<f4").tobytes())
    if dataset.class_names is not None:
        names_sidecar_path(path).write_text(
            json.dumps(dataset.class_names, indent=2) + "\n")


def read_feature_pack(path: Path | str) -> Dataset:
    """Parse a feature pack, validating structure and invariants.

    Raises PackFormatError for a bad magic, PackCorruptionError for a
    truncated or oversized payload, ValidationError for inconsistent content
    (dimension 0, class_id out of range, duplicate ids, non-finite values).
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < len(PACK_MAGIC):
        raise PackCorruptionError(f"{path}: file shorter than magic ({len(data)} bytes)")
    if data[:len(PACK_MAGIC)] != PACK_MAGIC:
        raise PackFormatError(
            f"{path}: bad magic {data[:len(PACK_MAGIC)]!r}, expected {PACK_MAGIC!r}")
    offset = len(PACK_MAGIC)
    if len(data) < offset + _HEADER.size:
        raise PackCorruptionError(f"{path}: truncated header at byte {len(data)}")
    dim, num_classes, num_objects = _HEADER.unpack_from(data, offset)
    offset += _HEADER.size
    if dim < 1:
        raise ValidationError(f"{path}: dimension {dim} < 1")
    if num_classes < 1:
        raise ValidationError(f"{path}: num_classes {num_classes} < 1")

    objects: list[ObjectInstance] = []
    seen_ids: set[int] = set()
    row_bytes = 4 * dim
    for index in range(num_objects):
        if len(data) < offset + _RECORD_HEADER.size:
            raise PackCorruptionError(
                f"{path}: truncated record header for object {index} at byte {offset}")
        object_id, class_id, session_id, n_images = _RECORD_HEADER.unpack_from(data, offset)
        offset += _RECORD_HEADER.size
        if n_images < 1:
            raise ValidationError(f"{path}: object {object_id} has n_images {n_images} < 1")
        if class_id >= num_classes:
            raise ValidationError(
                f"{path}: object {object_id} class_id {class_id} >= {num_classes}")
        if object_id in seen_ids:
            raise ValidationError(f"{path}: duplicate object_id {object_id}")
        seen_ids.add(object_id)
        payload = n_images * row_bytes
        if len(data) < offset + payload:
            raise PackCorruptionError(
                f"{path}: truncated payload for object {object_id} at byte {offset} "
                f"(need {payload} bytes, have {len(data) - offset})")
        views = np.frombuffer(data, dtype="<f4", count=n_images * dim, offset=offset)
        views = views.reshape(n_images, dim).copy()
        offset += payload
        if not np.all(np.isfinite(views)):
            raise ValidationError(f"{path}: object {object_id} has non-finite values")
        objects.append(ObjectInstance(object_id, class_id, session_id, views))
    if offset != len(data):
        raise PackCorruptionError(
            f"{path}: {len(data) - offset} trailing bytes after last record")

    class_names = None
    sidecar = names_sidecar_path(path)
    if sidecar.exists():
        class_names = json.loads(sidecar.read_text())
        if not isinstance(class_names, list) or len(class_names) != num_classes:
            raise ValidationError(
                f"{sidecar}: expected a list of {num_classes} class names")
    ds = Dataset(dim, num_classes, objects, class_names)
    ds.validate()
    return ds


def synth_generate(cfg: SynthConfig, seed: int) -> Dataset:
    """Generate a synthetic dataset; a pure function of (cfg, seed).

    Session ids are assigned round-robin over ``cfg.num_sessions`` by
    instance index within each class, so ``split_by_session`` applies
    uniformly to synthetic and real packs.
    """
    cfg.validate()
    if seed < 0:
        raise ValidationError(f"seed must be >= 0, got {seed}")
    rng = np.random.default_rng(seed)
    objects: list[ObjectInstance] = []
    object_id = 0
    for class_id in range(cfg.num_classes):
        center = rng.normal(0.0, cfg.class_center_spread, size=cfg.dimension)
        for instance in range(cfg.instances_per_class):
            sub_center = center + rng.normal(
                0.0, cfg.intra_class_spread, size=cfg.dimension)
            views = sub_center + rng.normal(
                0.0, cfg.view_noise, size=(cfg.views_per_instance, cfg.dimension))
            objects.append(ObjectInstance(
                object_id=object_id,
                class_id=class_id,
                session_id=instance % cfg.num_sessions,
                views=views.astype(np.float32),
            ))
            object_id += 1
    ds = Dataset(cfg.dimension, cfg.num_classes, objects)
    ds.validate()
    return ds


def split_by_session(dataset: Dataset, test_sessions: set[int]) -> tuple[Dataset, Dataset]:
    """Partition objects by session tag into (train, test).

    The test half must be nonempty, leave a nonempty train half, and retain
    every class (the evaluation protocol scores all classes from the start).
    """
    present = dataset.sessions()
    missing = set(test_sessions) - present
    if missing:
        raise ValidationError(f"test sessions {sorted(missing)} not present in dataset")
    train_objs = [o for o in dataset.objects if o.session_id not in test_sessions]
    test_objs = [o for o in dataset.objects if o.session_id in test_sessions]
    if not train_objs:
        raise ValidationError("split leaves an empty train set")
    if not test_objs:
        raise ValidationError("split leaves an empty test set")
    test_classes = {o.class_id for o in test_objs}
    if len(test_classes) != dataset.num_classes:
        absent = sorted(set(range(dataset.num_classes)) - test_classes)
        raise ValidationError(f"test split is missing classes {absent}")
    train = Dataset(dataset.dimension, dataset.num_classes, train_objs, dataset.class_names)
    test = Dataset(dataset.dimension, dataset.num_classes, test_objs, dataset.class_names)
    return train, test


def make_increments(train: Dataset, m: int, seed: int) -> list[IncrementBatch]:
    """Chunk a seeded permutation of the training objects into batches of m.

    Every object appears in exactly one batch; the last batch may be smaller.
    """
    if m < 1:
        raise ValidationError(f"batch size m must be >= 1, got {m}")
    if not train.objects:
        raise ValidationError("cannot schedule increments over an empty train set")
    if seed < 0:
        raise ValidationError(f"seed must be >= 0, got {seed}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(train.objects))
    batches = []
    for index, start in enumerate(range(0, len(order), m)):
        candidates = [train.objects[i] for i in order[start:start + m]]
        batches.append(IncrementBatch(index, candidates))
    return batches


def oracle_label(obj: ObjectInstance) -> int:
    """Ground-truth label for a selected object (automated labeling stand-in)."""
    return obj.class_id
