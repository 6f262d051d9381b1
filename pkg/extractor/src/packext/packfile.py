"""Feature-pack binary format: writer and verifying reader.

Little-endian layout shared with the learning component:

    magic   8 bytes ASCII ``CBCLFP01``
    header  u32 dimension d, u32 num_classes N, u32 num_objects M
    records M times: u32 object_id, u32 class_id, u32 session_id,
            u32 n_images, then n_images * d IEEE-754 binary32 values

Optional sidecar ``<pack>.names.json``: array of N class-name strings.
This module is self-contained so the extractor and the learner only share
the bytes on disk.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PACK_MAGIC = b"CBCLFP01"
_HEADER = struct.Struct("<III")
_RECORD = struct.Struct("<IIII")


class PackError(Exception):
    """Structural or content violation; message carries the byte offset."""


@dataclass
class PackRecord:
    object_id: int
    class_id: int
    session_id: int
    features: np.ndarray  # (n_images, d) float32


@dataclass
class PackSummary:
    dimension: int
    num_classes: int
    num_objects: int
    num_images: int
    objects_per_class: dict[int, int]
    class_names: list[str] | None


def names_sidecar_path(path: Path | str) -> Path:
    return Path(str(path) + ".names.json")


def write_pack(
    records: list[PackRecord],
    dimension: int,
    num_classes: int,
    path: Path | str,
    class_names: list[str] | None = None,
) -> None:
    seen = set()
    for rec in records:
        if rec.object_id in seen:
            raise PackError(f"duplicate object_id {rec.object_id}")
        seen.add(rec.object_id)
        if rec.class_id >= num_classes:
            raise PackError(
                f"object {rec.object_id}: class_id {rec.class_id} >= {num_classes}")
        if rec.features.ndim != 2 or rec.features.shape[1] != dimension:
            raise PackError(
                f"object {rec.object_id}: features shape {rec.features.shape} "
                f"does not match dimension {dimension}")
        if rec.features.shape[0] < 1:
            raise PackError(f"object {rec.object_id}: no images")
        if not np.all(np.isfinite(rec.features)):
            raise PackError(f"object {rec.object_id}: non-finite features")
    with open(path, "wb") as fh:
        fh.write(PACK_MAGIC)
        fh.write(_HEADER.pack(dimension, num_classes, len(records)))
        for rec in records:
            fh.write(_RECORD.pack(rec.object_id, rec.class_id,
                                  rec.session_id, rec.features.shape[0]))
            fh.write(np.ascontiguousarray(rec.features, dtype="<f4").tobytes())
    if class_names is not None:
        if len(class_names) != num_classes:
            raise PackError(
                f"{len(class_names)} class names for {num_classes} classes")
        names_sidecar_path(path).write_text(json.dumps(class_names, indent=2) + "\n")


def read_pack(path: Path | str) -> tuple[PackSummary, list[PackRecord]]:
    """Parse and validate a pack; PackError messages include byte offsets."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < len(PACK_MAGIC) + _HEADER.size:
        raise PackError(f"byte {len(data)}: file shorter than the 20-byte header")
    if data[:len(PACK_MAGIC)] != PACK_MAGIC:
        raise PackError(f"byte 0: bad magic {data[:len(PACK_MAGIC)]!r}")
    offset = len(PACK_MAGIC)
    dimension, num_classes, num_objects = _HEADER.unpack_from(data, offset)
    offset += _HEADER.size
    if dimension < 1:
        raise PackError(f"byte 8: dimension {dimension} < 1")
    if num_classes < 1:
        raise PackError(f"byte 12: num_classes {num_classes} < 1")

    records: list[PackRecord] = []
    seen: set[int] = set()
    per_class: dict[int, int] = {}
    num_images = 0
    for index in range(num_objects):
        if len(data) < offset + _RECORD.size:
            raise PackError(f"byte {offset}: truncated header of record {index}")
        object_id, class_id, session_id, n_images = _RECORD.unpack_from(data, offset)
        offset += _RECORD.size
        if n_images < 1:
            raise PackError(f"byte {offset - 4}: record {index} has no images")
        if class_id >= num_classes:
            raise PackError(
                f"byte {offset - 12}: class_id {class_id} >= {num_classes}")
        if object_id in seen:
            raise PackError(f"byte {offset - 16}: duplicate object_id {object_id}")
        seen.add(object_id)
        payload = 4 * n_images * dimension
        if len(data) < offset + payload:
            raise PackError(
                f"byte {offset}: truncated payload of record {index} "
                f"(need {payload} bytes, have {len(data) - offset})")
        features = np.frombuffer(
            data, "<f4", n_images * dimension, offset).reshape(n_images, dimension)
        offset += payload
        if not np.all(np.isfinite(features)):
            raise PackError(f"byte {offset - payload}: non-finite feature values")
        per_class[class_id] = per_class.get(class_id, 0) + 1
        num_images += n_images
        records.append(PackRecord(object_id, class_id, session_id, features.copy()))
    if offset != len(data):
        raise PackError(f"byte {offset}: {len(data) - offset} trailing bytes")

    class_names = None
    sidecar = names_sidecar_path(path)
    if sidecar.exists():
        class_names = json.loads(sidecar.read_text())
        if not isinstance(class_names, list) or len(class_names) != num_classes:
            raise PackError(f"{sidecar}: expected {num_classes} class names")
    summary = PackSummary(dimension, num_classes, num_objects,
                          num_images, per_class, class_names)
    return summary, records
