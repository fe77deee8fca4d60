"""
Tools Module - File output shared by every package.
Checkpoint and report writers live in tools.checkpoint and tools.report_tools
and are imported from there, since they depend on the model packages.
"""

from .file_tools import (
    atomic_write_bytes,
    atomic_write_text,
    read_text,
    file_digest,
    describe_file,
    list_files,
)

__all__ = [
    "atomic_write_bytes",
    "atomic_write_text",
    "read_text",
    "file_digest",
    "describe_file",
    "list_files",
]
