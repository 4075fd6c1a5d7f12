"""Portable float map (PFM) reading and writing.

PFM stores rows bottom-to-top; in memory we keep images top-to-bottom.  The
writer always emits little-endian color files with scale -1.0 and a canonical
header, so identical images produce identical bytes and write -> read is
bitwise lossless for finite non-negative float32 data.
"""

import numpy as np

from .errors import DomainError
from .transfer import validate_linear_image


class PfmFormatError(ValueError):
    """The file is not a well-formed PFM or violates the pixel contract."""


def _read_token(f) -> bytes:
    """Read one whitespace-delimited header token."""
    tok = b""
    while True:
        c = f.read(1)
        if not c:
            raise PfmFormatError("unexpected end of file in PFM header")
        if c in b" \t\r\n":
            if tok:
                return tok
            continue
        tok += c


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into an H x W x 3 float32 array (top-to-bottom rows).

    Grayscale ("Pf") files are promoted to 3 identical channels.  NaN,
    infinite, and negative samples are rejected so pipeline errors surface at
    the file boundary.
    """
    with open(path, "rb") as f:
        magic = _read_token(f)
        if magic == b"PF":
            channels = 3
        elif magic == b"Pf":
            channels = 1
        else:
            raise PfmFormatError(f"bad PFM magic {magic!r} in {path}")
        try:
            width = int(_read_token(f))
            height = int(_read_token(f))
            scale = float(_read_token(f))
        except ValueError as exc:
            raise PfmFormatError(f"malformed PFM header in {path}: {exc}") from exc
        if width <= 0 or height <= 0:
            raise PfmFormatError(f"bad PFM dimensions {width}x{height} in {path}")
        if scale == 0:
            raise PfmFormatError(f"PFM scale must be nonzero in {path}")

        count = width * height * channels
        payload = f.read(4 * count)
        if len(payload) != 4 * count:
            raise PfmFormatError(
                f"truncated PFM payload in {path}: expected {4 * count} bytes, "
                f"got {len(payload)}"
            )
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(payload, dtype=dtype).astype(np.float32)

    data = data.reshape(height, width, channels)[::-1]  # bottom-to-top on disk
    if channels == 1:
        data = np.repeat(data, 3, axis=2)
    if np.isnan(data).any():
        raise PfmFormatError(f"PFM {path} contains NaN samples")
    if not np.isfinite(data).all():
        raise PfmFormatError(f"PFM {path} contains non-finite samples")
    if (data < 0).any():
        raise PfmFormatError(f"PFM {path} contains negative samples")
    return np.ascontiguousarray(data)


def write_pfm(img, path) -> None:
    """Write an H x W x 3 float32 image as little-endian color PFM."""
    try:
        arr = validate_linear_image(img)
    except DomainError as exc:
        raise PfmFormatError(str(exc)) from exc
    arr = np.asarray(arr, dtype=np.float32)
    height, width, _ = arr.shape
    with open(path, "wb") as f:
        f.write(b"PF\n%d %d\n-1.0\n" % (width, height))
        f.write(np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes())
