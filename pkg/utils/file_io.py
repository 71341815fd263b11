"""
Utility module for reading input files and writing report files atomically.
"""
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Union

from core.errors import EmptyInputError
from utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, os.PathLike]


def read_text_file(file_path: PathLike) -> str:
    """
    Read a UTF-8 text file (a leading byte-order mark is dropped).

    Args:
        file_path: Path to the file

    Returns:
        File contents as a string

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file is not valid UTF-8
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as handle:
            return handle.read()
    except UnicodeDecodeError as e:
        raise ValueError(f"{file_path} is not valid UTF-8: {e}")


def decode_source(source: Union[bytes, str]) -> str:
    """Decode a byte stream as UTF-8; strings pass through unchanged."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8-sig")
        except UnicodeDecodeError as e:
            raise ValueError(f"input is not valid UTF-8: {e}")
    if not source.strip():
        raise EmptyInputError("input is empty")
    return source


def write_text_atomic(file_path: PathLike, text: str) -> Path:
    """Write text through a temporary sibling file and rename it into place."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


@contextmanager
def staged_output(output_dir: PathLike) -> Iterator[Path]:
    """
    Yield a staging directory; on success its files are moved into output_dir.

    If the body raises, the staging directory is removed and output_dir is
    left exactly as it was, so a failed run never leaves partial reports.
    """
    target = Path(output_dir)
    parent = target.parent if str(target.parent) else Path(".")
    parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.staging.", dir=parent))
    try:
        yield staging
        target.mkdir(parents=True, exist_ok=True)
        for item in sorted(staging.iterdir()):
            os.replace(item, target / item.name)
        logger.debug(f"Committed staged outputs to {target}")
    finally:
        shutil.rmtree(staging, ignore_errors=True)
