from .core import (
    FORMAT_NAME,
    FORMAT_VERSION,
    Index,
    IndexBuilder,
    IndexConfig,
    Paragraph,
    RetrievedPassage,
    build_index,
    segment_document,
)
from . import kernels

__all__ = [
    "FORMAT_NAME",
    "FORMAT_VERSION",
    "Index",
    "IndexBuilder",
    "IndexConfig",
    "Paragraph",
    "RetrievedPassage",
    "build_index",
    "segment_document",
    "kernels",
]
