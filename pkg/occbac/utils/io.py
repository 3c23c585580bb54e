"""
File helpers: atomic writes and the fixed number format used in CSV output.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_number(value: float) -> str:
    """Format a float with 12 significant digits and a period separator."""
    return format(float(value), ".12g")


def atomic_write(path: PathLike, writer: Callable[[Path], None]) -> Path:
    """
    Write a file through a temporary sibling and rename it into place.

    Args:
        path: Final destination
        writer: Callable receiving the temporary path; must create the file

    Returns:
        The destination path
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    os.close(fd)
    tmp_path = Path(tmp_name)
    try:
        writer(tmp_path)
        os.replace(tmp_path, target)
    except BaseException:
        tmp_path.unlink(missing_ok=True)
        raise
    logger.debug(f"Wrote {target}")
    return target


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Atomically write ``text`` (UTF-8, ``\\n`` newlines) to ``path``."""

    def _write(tmp: Path) -> None:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)

    return atomic_write(path, _write)
