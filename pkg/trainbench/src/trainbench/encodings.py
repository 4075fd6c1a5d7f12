"""Differentiable tensor versions of the four pixel encodings.

These mirror the dataset producer's scalar definitions; the parity tests pin
them to the exported PFM fixtures at 1e-6.  Clamps use the standard
subgradient, so out-of-range regions receive zero gradient.
"""

import math

import torch

REFERENCE_MAX = 10000.0
PQ_M1 = 2610.0 / 16384.0
PQ_M2 = 2523.0 / 4096.0 * 128.0
PQ_C1 = 3424.0 / 4096.0
PQ_C2 = 2413.0 / 4096.0 * 32.0
PQ_C3 = 2392.0 / 4096.0 * 32.0
PU21_A = 0.001908
PU21_B = 0.0078
PU21_LMIN = math.log2(0.005)
PU21_VMAX = PU21_A * (math.log2(REFERENCE_MAX) - PU21_LMIN) ** 2 + PU21_B * (
    math.log2(REFERENCE_MAX) - PU21_LMIN
)


def encode_tensor(x: torch.Tensor, encoding: dict, peak: float = 4000.0,
                  black_level: float = 0.005) -> torch.Tensor:
    """Relative-linear tensor -> encoded tensor (clamp, then encode)."""
    name = encoding["name"]
    if name == "linear":
        return x.clamp(0.0, 1.0)
    if name == "mulaw":
        mu = float(encoding.get("mu", 5000.0))
        return torch.log1p(mu * x.clamp(0.0, 1.0)) / math.log1p(mu)
    lum = (x * peak).clamp(black_level, peak)
    if name == "pq":
        yp = (lum / REFERENCE_MAX) ** PQ_M1
        return ((PQ_C1 + PQ_C2 * yp) / (1.0 + PQ_C3 * yp)) ** PQ_M2
    if name == "pu21":
        t = torch.log2(lum) - PU21_LMIN
        return PU21_A * t * t + PU21_B * t
    raise ValueError(f"unknown encoding {name!r}")


def decode_tensor(v: torch.Tensor, encoding: dict, peak: float = 4000.0) -> torch.Tensor:
    """Encoded tensor -> relative-linear tensor (code values clamped to range)."""
    name = encoding["name"]
    if name == "linear":
        return v.clamp(0.0, 1.0)
    if name == "mulaw":
        mu = float(encoding.get("mu", 5000.0))
        return torch.expm1(v.clamp(0.0, 1.0) * math.log1p(mu)) / mu
    if name == "pq":
        vp = v.clamp(1e-30, 1.0) ** (1.0 / PQ_M2)
        num = (vp - PQ_C1).clamp(min=0.0)
        lum = REFERENCE_MAX * (num / (PQ_C2 - PQ_C3 * vp)) ** (1.0 / PQ_M1)
        return lum / peak
    if name == "pu21":
        vv = v.clamp(0.0, PU21_VMAX)
        disc = PU21_B * PU21_B + 4.0 * PU21_A * vv
        lum = torch.exp2((2.0 * PU21_A * PU21_LMIN - PU21_B + torch.sqrt(disc)) / (2.0 * PU21_A))
        return lum / peak
    raise ValueError(f"unknown encoding {name!r}")
