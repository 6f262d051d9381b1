"""Directory-tree parsing for image corpora.

Two layouts are understood, both yielding one record per (object, session)
pair with record ids ``object_number * 1000 + session_ordinal``:

* ``core50``: ``root/s<session>/o<object>/*.png``, objects numbered 1..50,
  object number mapping to its category as five consecutive objects per
  class. Session ordinal is the session number.
* ``generic``: ``root/<class>/<object>/<session>/<images>``. Classes and
  objects are ordered by name; the session ordinal is the position of the
  session directory in sorted order (its id is parsed from the name when
  the name is purely digits).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}

CORE50_CATEGORIES = [
    "plug_adapters", "mobile_phones", "scissors", "light_bulbs", "cans",
    "glasses", "balls", "markers", "cups", "remote_controls",
]
CORE50_OBJECTS_PER_CLASS = 5

_SESSION_DIR = re.compile(r"^s(\d+)$")
_OBJECT_DIR = re.compile(r"^o(\d+)$")


class LayoutError(Exception):
    pass


@dataclass
class ObjectSessionGroup:
    """One record to extract: every image of one object in one session."""

    object_id: int
    class_id: int
    session_id: int
    images: list[Path]


def _image_files(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def record_id(object_number: int, session_ordinal: int) -> int:
    if not 0 <= session_ordinal < 1000:
        raise LayoutError(f"session ordinal {session_ordinal} outside [0, 1000)")
    return object_number * 1000 + session_ordinal


def scan_core50(root: Path) -> tuple[list[ObjectSessionGroup], int, list[str]]:
    """Groups, class count, and class names for a CORe-50 style tree."""
    root = Path(root)
    session_dirs = []
    for entry in sorted(root.iterdir()):
        match = _SESSION_DIR.match(entry.name)
        if entry.is_dir() and match:
            session_dirs.append((int(match.group(1)), entry))
    if not session_dirs:
        raise LayoutError(f"{root}: no s<N> session directories found")
    session_dirs.sort()

    groups: list[ObjectSessionGroup] = []
    max_class = -1
    for session_number, session_dir in session_dirs:
        for entry in sorted(session_dir.iterdir()):
            match = _OBJECT_DIR.match(entry.name)
            if not (entry.is_dir() and match):
                continue
            object_number = int(match.group(1))
            class_id = (object_number - 1) // CORE50_OBJECTS_PER_CLASS
            max_class = max(max_class, class_id)
            groups.append(ObjectSessionGroup(
                object_id=record_id(object_number, session_number),
                class_id=class_id,
                session_id=session_number,
                images=_image_files(entry),
            ))
    if max_class < 0:
        raise LayoutError(f"{root}: no o<N> object directories found")
    num_classes = max_class + 1
    names = [CORE50_CATEGORIES[c] if c < len(CORE50_CATEGORIES) else f"class_{c}"
             for c in range(num_classes)]
    groups.sort(key=lambda g: g.object_id)
    return groups, num_classes, names


def scan_generic(root: Path) -> tuple[list[ObjectSessionGroup], int, list[str]]:
    """Groups, class count, and class names for a class/object/session tree."""
    root = Path(root)
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise LayoutError(f"{root}: no class directories found")
    groups: list[ObjectSessionGroup] = []
    object_number = 0
    for class_id, class_dir in enumerate(class_dirs):
        object_dirs = sorted(p for p in class_dir.iterdir() if p.is_dir())
        if not object_dirs:
            raise LayoutError(f"{class_dir}: no object directories found")
        for object_dir in object_dirs:
            object_number += 1
            session_dirs = sorted(p for p in object_dir.iterdir() if p.is_dir())
            if not session_dirs:
                raise LayoutError(f"{object_dir}: no session directories found")
            for ordinal, session_dir in enumerate(session_dirs):
                session_id = int(session_dir.name) if session_dir.name.isdigit() \
                    else ordinal
                groups.append(ObjectSessionGroup(
                    object_id=record_id(object_number, ordinal),
                    class_id=class_id,
                    session_id=session_id,
                    images=_image_files(session_dir),
                ))
    return groups, len(class_dirs), [p.name for p in class_dirs]


def scan_layout(root: Path, layout: str):
    if layout == "core50":
        return scan_core50(root)
    if layout == "generic":
        return scan_generic(root)
    raise LayoutError(f"unknown layout {layout!r}")
