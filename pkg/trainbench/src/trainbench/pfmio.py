"""Minimal PFM reader/writer for the dataset interchange format.

Independent of the dataset producer's implementation on purpose: the format
(little-endian color PFM, bottom-to-top rows, canonical header) is the
interchange contract, and the parity tests exercise it through real files.
"""

import numpy as np


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    try:
        magic, dims, scale_line, payload = blob.split(b"\n", 3)
        width, height = (int(t) for t in dims.split())
        scale = float(scale_line)
    except ValueError as exc:
        raise ValueError(f"malformed PFM header in {path}") from exc
    channels = {b"PF": 3, b"Pf": 1}.get(magic)
    if channels is None:
        raise ValueError(f"bad PFM magic {magic!r} in {path}")
    dtype = "<f4" if scale < 0 else ">f4"
    count = width * height * channels
    data = np.frombuffer(payload[: 4 * count], dtype=dtype)
    if data.size != count:
        raise ValueError(f"truncated PFM payload in {path}")
    img = data.astype(np.float32).reshape(height, width, channels)[::-1]
    if channels == 1:
        img = np.repeat(img, 3, axis=2)
    return np.ascontiguousarray(img)


def write_pfm(img, path) -> None:
    arr = np.asarray(img, dtype=np.float32)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"PFM writer expects H x W x 3, got {arr.shape}")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise ValueError("PFM writer expects finite non-negative samples")
    height, width, _ = arr.shape
    with open(path, "wb") as f:
        f.write(b"PF\n%d %d\n-1.0\n" % (width, height))
        f.write(np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes())
