"""Pixel-value transfer functions for HDR/RAW imagery.

Four encodings are supported:

* ``linear``  -- identity on relative linear values in [0, 1];
* ``mulaw``   -- logarithmic companding of relative values in [0, 1];
* ``pq``      -- the SMPTE ST 2084 perceptual quantizer, defined on absolute
  luminance in [0, 10000] cd/m^2;
* ``pu21``    -- a perceptually uniform transform expressed as a quadratic in
  log2-luminance, defined on absolute luminance in [0.005, 10000] cd/m^2.

Relative values are tied to absolute luminance through a :class:`DisplayModel`
(``absolute = relative * peak``).  Scalar functions keep strict domains and do
no clamping; image-level helpers clamp first and then encode, so out-of-range
pixels are absorbed at the image level.

Scalar math runs in float64.  Image buffers are float32 with float64
intermediates (the pu21 log/exponent chain loses too much precision if
round-tripped in float32).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError

# Encoding-domain luminance ceiling, cd/m^2 (shared by pq and pu21).
REFERENCE_MAX = 10000.0

# ST 2084 inverse-EOTF constants.
PQ_M1 = 2610.0 / 16384.0
PQ_M2 = 2523.0 / 4096.0 * 128.0
PQ_C1 = 3424.0 / 4096.0
PQ_C2 = 2413.0 / 4096.0 * 32.0
PQ_C3 = 2392.0 / 4096.0 * 32.0

# Quadratic-in-log2-luminance fit of the pu21 curve (banding model, no glare).
PU21_A = 0.001908
PU21_B = 0.0078
PU21_LMIN = math.log2(0.005)

ENCODING_NAMES = ("linear", "mulaw", "pq", "pu21")


@dataclass(frozen=True)
class DisplayModel:
    """Maps relative linear pixel values to absolute luminance.

    ``black_level`` and ``peak`` are in cd/m^2; ``absolute(1.0) == peak``.
    The encoding-domain ceiling stays at ``REFERENCE_MAX`` regardless of the
    working peak, so encoded pq/pu21 values do not reach 1 under a 4000-nit
    peak.
    """

    black_level: float = 0.005
    peak: float = 4000.0
    reference_max: float = field(default=REFERENCE_MAX, init=False)

    def __post_init__(self):
        if not (0.0 < self.black_level < self.peak <= self.reference_max):
            raise ContractError(
                "display model requires 0 < black_level < peak <= "
                f"{self.reference_max}; got black_level={self.black_level}, "
                f"peak={self.peak}"
            )

    def absolute(self, relative):
        """Relative linear value(s) -> absolute luminance in cd/m^2."""
        return np.asarray(relative, dtype=np.float64) * self.peak

    def relative(self, absolute):
        """Absolute luminance in cd/m^2 -> relative linear value(s)."""
        return np.asarray(absolute, dtype=np.float64) / self.peak


@dataclass(frozen=True)
class Encoding:
    """A pixel encoding tag: one of ``linear``, ``mulaw``, ``pq``, ``pu21``.

    ``mu`` is only meaningful for the mulaw encoding.
    """

    name: str
    mu: float = 5000.0

    def __post_init__(self):
        if self.name not in ENCODING_NAMES:
            raise ContractError(
                f"unknown encoding {self.name!r}; expected one of {ENCODING_NAMES}"
            )
        if self.name == "mulaw" and not self.mu > 0:
            raise DomainError(f"mulaw requires mu > 0, got {self.mu}")

    @property
    def is_absolute(self) -> bool:
        """True for encodings that operate on absolute luminance (pq, pu21)."""
        return self.name in ("pq", "pu21")

    def to_dict(self) -> dict:
        d = {"name": self.name}
        if self.name == "mulaw":
            d["mu"] = self.mu
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Encoding":
        return cls(d["name"], mu=d.get("mu", 5000.0))


LINEAR = Encoding("linear")
MULAW = Encoding("mulaw")
PQ = Encoding("pq")
PU21 = Encoding("pu21")


def parse_encoding(name: str, mu: float = 5000.0) -> Encoding:
    """Build an :class:`Encoding` from a (case-insensitive) name."""
    key = name.strip().lower().replace("μ", "mu").replace("-law", "law").replace("mu-", "mu")
    aliases = {"mu": "mulaw", "mulaw": "mulaw", "linear": "linear", "pq": "pq", "pu21": "pu21"}
    if key not in aliases:
        raise ContractError(f"unknown encoding {name!r}; expected one of {ENCODING_NAMES}")
    return Encoding(aliases[key], mu=mu)


@dataclass
class EncodedImage:
    """An H x W x 3 float32 buffer of encoded values plus its encoding tag."""

    data: np.ndarray
    encoding: Encoding

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ContractError(
                f"encoded image must be H x W x 3, got shape {self.data.shape}"
            )

    @property
    def shape(self):
        return self.data.shape


def validate_linear_image(img, allow_negative: bool = False) -> np.ndarray:
    """Check the linear-image contract: H x W x 3, finite, non-negative.

    Returns the array as float (no copy when already floating).
    """
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ContractError(f"linear image must be H x W x 3, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise DomainError("linear image contains non-finite values")
    if not allow_negative and np.any(arr < 0):
        raise DomainError("linear image contains negative values")
    return arr


# ---------------------------------------------------------------------------
# Scalar transfer functions (float64, strict domains, vectorized over arrays)
# ---------------------------------------------------------------------------

def _as_f64(x):
    return np.asarray(x, dtype=np.float64)


def encode_mulaw(l, mu: float = 5000.0):
    """log(1 + mu*l) / log(1 + mu) for relative linear l in [0, 1]."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    l = _as_f64(l)
    if np.any(l < 0) or np.any(l > 1):
        raise DomainError("mulaw input must lie in [0, 1]")
    out = np.log1p(mu * l) / np.log1p(mu)
    return float(out) if out.ndim == 0 else out


def decode_mulaw(v, mu: float = 5000.0):
    """Inverse of :func:`encode_mulaw`: ((1 + mu)^v - 1) / mu."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    v = _as_f64(v)
    if np.any(v < 0) or np.any(v > 1):
        raise DomainError("mulaw code value must lie in [0, 1]")
    out = np.expm1(v * np.log1p(mu)) / mu
    return float(out) if out.ndim == 0 else out


def encode_pu21(L):
    """a*(log2 L - Lmin)^2 + b*(log2 L - Lmin) on L in [0.005, 10000] cd/m^2."""
    L = _as_f64(L)
    if np.any(L < 0.005) or np.any(L > REFERENCE_MAX):
        raise DomainError("pu21 luminance must lie in [0.005, 10000] cd/m^2")
    x = np.log2(L) - PU21_LMIN
    out = PU21_A * x * x + PU21_B * x
    return float(out) if out.ndim == 0 else out


PU21_VMAX = PU21_A * (math.log2(REFERENCE_MAX) - PU21_LMIN) ** 2 + PU21_B * (
    math.log2(REFERENCE_MAX) - PU21_LMIN
)


def decode_pu21(V):
    """Closed-form inverse of :func:`encode_pu21`."""
    V = _as_f64(V)
    if np.any(V < 0) or np.any(V > PU21_VMAX * (1 + 1e-12)):
        raise DomainError(f"pu21 code value must lie in [0, {PU21_VMAX:.6f}]")
    disc = PU21_B * PU21_B + 4.0 * PU21_A * V  # >= b^2 > 0 for V >= 0
    out = np.exp2((2.0 * PU21_A * PU21_LMIN - PU21_B + np.sqrt(disc)) / (2.0 * PU21_A))
    return float(out) if out.ndim == 0 else out


def encode_pq(L):
    """ST 2084 inverse EOTF on absolute luminance L in [0, 10000] cd/m^2.

    Note the output never reaches 0: encode_pq(0) == c1**m2 > 0.
    """
    L = _as_f64(L)
    if np.any(L < 0) or np.any(L > REFERENCE_MAX):
        raise DomainError("pq luminance must lie in [0, 10000] cd/m^2")
    yp = (L / REFERENCE_MAX) ** PQ_M1
    out = ((PQ_C1 + PQ_C2 * yp) / (1.0 + PQ_C3 * yp)) ** PQ_M2
    return float(out) if out.ndim == 0 else out


def decode_pq(V):
    """ST 2084 EOTF: code value in (0, 1] -> absolute luminance in cd/m^2."""
    V = _as_f64(V)
    if np.any(V <= 0) or np.any(V > 1):
        raise DomainError("pq code value must lie in (0, 1]")
    vp = V ** (1.0 / PQ_M2)
    num = np.maximum(vp - PQ_C1, 0.0)  # code values below encode_pq(0) map to 0
    out = REFERENCE_MAX * (num / (PQ_C2 - PQ_C3 * vp)) ** (1.0 / PQ_M1)
    return float(out) if out.ndim == 0 else out


def derivative(encoding: Encoding, x):
    """Analytic derivative dV/dinput of a scalar encoder at ``x``.

    ``x`` is in the encoder's own input domain (absolute cd/m^2 for pq/pu21,
    relative [0, 1] for linear/mulaw).  Points where the derivative is
    singular (pq at L=0) are rejected.
    """
    x = _as_f64(x)
    if encoding.name == "linear":
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("linear input must lie in [0, 1]")
        out = np.ones_like(x)
    elif encoding.name == "mulaw":
        mu = encoding.mu
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("mulaw input must lie in [0, 1]")
        out = mu / ((1.0 + mu * x) * np.log1p(mu))
    elif encoding.name == "pu21":
        if np.any(x < 0.005) or np.any(x > REFERENCE_MAX):
            raise DomainError("pu21 luminance must lie in [0.005, 10000] cd/m^2")
        out = (2.0 * PU21_A * (np.log2(x) - PU21_LMIN) + PU21_B) / (x * np.log(2.0))
    elif encoding.name == "pq":
        if np.any(x <= 0) or np.any(x > REFERENCE_MAX):
            raise DomainError("pq derivative is defined on (0, 10000] cd/m^2")
        y = x / REFERENCE_MAX
        u = y ** PQ_M1
        f = (PQ_C1 + PQ_C2 * u) / (1.0 + PQ_C3 * u)
        dfdu = (PQ_C2 - PQ_C1 * PQ_C3) / (1.0 + PQ_C3 * u) ** 2
        dudy = PQ_M1 * y ** (PQ_M1 - 1.0)
        out = PQ_M2 * f ** (PQ_M2 - 1.0) * dfdu * dudy / REFERENCE_MAX
    else:  # pragma: no cover - Encoding validates names
        raise ContractError(f"unknown encoding {encoding.name!r}")
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Image-level encode/decode (clamp-then-encode; float32 buffers)
# ---------------------------------------------------------------------------

def encode_image(img, encoding: Encoding, display: DisplayModel = DisplayModel()) -> EncodedImage:
    """Encode a relative-linear H x W x 3 image.

    Pixels are clamped before encoding: to [black_level, peak] in absolute
    units for pq/pu21, to [0, 1] in relative units for linear/mulaw.  Negative
    or over-range pixels are therefore absorbed here rather than rejected.
    """
    arr = validate_linear_image(img, allow_negative=True)
    arr = np.asarray(arr, dtype=np.float64)
    if encoding.is_absolute:
        absolute = np.clip(arr * display.peak, display.black_level, display.peak)
        if encoding.name == "pq":
            coded = encode_pq(absolute)
        else:
            coded = encode_pu21(absolute)
    else:
        rel = np.clip(arr, 0.0, 1.0)
        coded = rel if encoding.name == "linear" else encode_mulaw(rel, encoding.mu)
    return EncodedImage(np.asarray(coded, dtype=np.float32), encoding)


def decode_image(img: EncodedImage, display: DisplayModel = DisplayModel()) -> np.ndarray:
    """Invert :func:`encode_image`, returning relative linear float32 values."""
    coded = np.asarray(img.data, dtype=np.float64)
    enc = img.encoding
    if enc.name == "linear":
        linear = coded
    elif enc.name == "mulaw":
        linear = decode_mulaw(np.clip(coded, 0.0, 1.0), enc.mu)
    elif enc.name == "pq":
        linear = decode_pq(np.clip(coded, np.finfo(np.float64).tiny, 1.0)) / display.peak
    else:
        linear = decode_pu21(np.clip(coded, 0.0, PU21_VMAX)) / display.peak
    return np.asarray(linear, dtype=np.float32)


# ---------------------------------------------------------------------------
# Curve export
# ---------------------------------------------------------------------------

def encoding_curve_table(points: int = 256, mu: float = 5000.0):
    """Sample all four encodings over log-spaced luminance 0.005 .. 10000.

    Returns ``(luminance, columns)`` with columns keyed by encoding name.
    Relative-domain encodings (linear, mulaw) are fed luminance / 10000, the
    plotting convention used when all curves share an absolute-luminance axis.
    """
    if points < 2:
        raise ContractError("curve table needs at least 2 points")
    lum = np.logspace(math.log10(0.005), math.log10(REFERENCE_MAX), points)
    lum[0], lum[-1] = 0.005, REFERENCE_MAX  # guard logspace rounding at the ends
    rel = lum / REFERENCE_MAX
    return lum, {
        "linear": rel,
        "mulaw": encode_mulaw(rel, mu),
        "pq": encode_pq(lum),
        "pu21": encode_pu21(lum),
    }


def write_curve_csv(path, points: int = 256, mu: float = 5000.0) -> None:
    """Write the encoding curves as CSV: luminance_cd_m2, linear, mulaw, pq, pu21."""
    lum, cols = encoding_curve_table(points, mu)
    with open(path, "w", encoding="ascii") as f:
        f.write("luminance_cd_m2,linear,mulaw,pq,pu21\n")
        for i in range(len(lum)):
            f.write(
                f"{lum[i]:.9g},{cols['linear'][i]:.9g},{cols['mulaw'][i]:.9g},"
                f"{cols['pq'][i]:.9g},{cols['pu21'][i]:.9g}\n"
            )
