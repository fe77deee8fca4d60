"""
File Tools - Atomic file output and content digests.
Every artifact the toolkit produces goes through these helpers, so each output
file is either fully written or absent.
"""

import hashlib
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Union

PathLike = Union[str, Path]

DIGEST_CHUNK = 1 << 20


def atomic_write_bytes(file_path: PathLike, content: bytes) -> Path:
    """
    Write bytes to a file atomically.
    Uses temp file + rename so readers never observe a partial file.

    Args:
        file_path: Destination path
        content: Bytes to write

    Returns:
        Path: The written path
    """
    target = Path(file_path)
    target.parent.mkdir(parents=True, exist_ok=True)

    fd = None
    temp_path = None
    try:
        fd, temp_path = tempfile.mkstemp(
            dir=target.parent,
            prefix='.tmp_',
            suffix=target.suffix
        )
        with os.fdopen(fd, 'wb') as f:
            fd = None  # fd is now owned by the file object
            f.write(content)
            f.flush()
            os.fsync(f.fileno())

        os.replace(temp_path, target)
        temp_path = None

    except Exception:
        if fd is not None:
            os.close(fd)
        if temp_path is not None and os.path.exists(temp_path):
            os.unlink(temp_path)
        raise

    return target


def atomic_write_text(file_path: PathLike, content: str) -> Path:
    """Write UTF-8 text atomically with LF line endings preserved."""
    return atomic_write_bytes(file_path, content.encode("utf-8"))


def read_text(file_path: PathLike) -> str:
    """
    Read a UTF-8 text file without newline translation.

    Raises:
        FileNotFoundError: If the file doesn't exist
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return f.read()


def file_digest(file_path: PathLike) -> str:
    """SHA-256 hex digest of a file's bytes."""
    sha = hashlib.sha256()
    with open(file_path, 'rb') as f:
        while True:
            chunk = f.read(DIGEST_CHUNK)
            if not chunk:
                break
            sha.update(chunk)
    return sha.hexdigest()


def describe_file(file_path: PathLike) -> Dict[str, Any]:
    """
    Digest and metadata for a file, as recorded in run manifests.

    Args:
        file_path: Path to the file

    Returns:
        dict: path, exists, size, sha256, modified
    """
    path = Path(file_path)

    if not path.exists():
        return {
            "path": str(path),
            "exists": False,
            "size": 0,
            "sha256": None
        }

    return {
        "path": str(path),
        "exists": True,
        "size": path.stat().st_size,
        "sha256": file_digest(path),
        "modified": datetime.fromtimestamp(path.stat().st_mtime).isoformat()
    }


def list_files(directory: PathLike, pattern: str = "*") -> List[str]:
    """
    List files in a directory, skipping temp files left by interrupted writes.

    Args:
        directory: Directory to search
        pattern: Glob pattern

    Returns:
        List[str]: Sorted file paths
    """
    dir_path = Path(directory)

    if not dir_path.exists():
        return []

    return sorted(
        str(f) for f in dir_path.glob(pattern)
        if f.is_file() and not f.name.startswith(".tmp_")
    )
