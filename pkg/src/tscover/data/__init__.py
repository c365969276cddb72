"""Bundled parity-check matrices and recorded swap plans."""

from importlib import resources
from pathlib import Path

from ..code import SparseBitMatrix, read_alist

_CODES = {
    "tanner": "tanner_155.alist",
    "margulis": "margulis_2640.alist",
    "mackay-504": "mackay_504.alist",
    "mackay-1008": "mackay_1008.alist",
}


def bundled_codes() -> list[str]:
    return sorted(_CODES)


def data_path(filename: str) -> Path:
    return Path(str(resources.files(__name__) / filename))


def load_code(name_or_path) -> SparseBitMatrix:
    """A bundled code by short name (``tanner``, ``margulis``, ...) or any alist file."""
    key = str(name_or_path)
    if key in _CODES:
        return read_alist(data_path(_CODES[key]))
    return read_alist(name_or_path)
