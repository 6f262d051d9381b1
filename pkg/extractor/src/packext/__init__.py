"""Image corpus to feature-pack extraction with a frozen CNN backbone."""

from .layouts import (
    CORE50_CATEGORIES,
    LayoutError,
    ObjectSessionGroup,
    scan_core50,
    scan_generic,
    scan_layout,
)
from .packfile import (
    PACK_MAGIC,
    PackError,
    PackRecord,
    PackSummary,
    read_pack,
    write_pack,
)

__version__ = "0.1.0"
