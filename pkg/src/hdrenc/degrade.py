"""Physically plausible degradations, applied in linear color space only.

Camera noise follows the heteroscedastic Gaussian approximation of a
photon + readout model: Var(n) = k*x + sigma_r^2.  Randomness comes from the
counter-based Philox generator keyed by an explicit 64-bit seed, so outputs
are bitwise reproducible regardless of scheduling.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .transfer import EncodedImage, validate_linear_image


@dataclass(frozen=True)
class NoiseParams:
    """Photon gain k (variance per unit signal), readout std, and seed."""

    k: float = 0.01
    sigma_r: float = 0.002
    seed: int = 0

    def __post_init__(self):
        if self.k < 0 or self.sigma_r < 0:
            raise ContractError("noise parameters must be non-negative")
        if self.k == 0 and self.sigma_r == 0:
            raise ContractError("at least one of k, sigma_r must be positive")


@dataclass(frozen=True)
class BlurParams:
    """Isotropic Gaussian blur; kernel radius defaults to ceil(3*sigma)."""

    sigma: float = 8.0
    kernel_radius: int = 0  # 0 -> ceil(3*sigma)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ContractError("blur sigma must be positive")

    @property
    def radius(self) -> int:
        return self.kernel_radius if self.kernel_radius > 0 else math.ceil(3 * self.sigma)


def _reject_encoded(img):
    if isinstance(img, EncodedImage):
        raise ContractError(
            "degradations model physical light transport and only apply to "
            "linear images, not encoded ones"
        )


def add_camera_noise(img, params: NoiseParams) -> np.ndarray:
    """Add zero-mean Gaussian noise with per-pixel variance k*x + sigma_r^2.

    The result is clamped to >= 0 (no negative light) and returned as
    float32.  Identical (img, params) always produce bitwise-identical
    output.
    """
    _reject_encoded(img)
    x = validate_linear_image(img).astype(np.float64)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(params.seed)))
    std = np.sqrt(params.k * x + params.sigma_r ** 2)
    noisy = x + rng.standard_normal(x.shape) * std
    return np.maximum(noisy, 0.0).astype(np.float32)


def gaussian_kernel_1d(sigma: float, radius: int) -> np.ndarray:
    """Normalized 1-D Gaussian taps on [-radius, radius]."""
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_blur(img, params: BlurParams = BlurParams()) -> np.ndarray:
    """Separable Gaussian blur with reflect (symmetric) boundary handling."""
    _reject_encoded(img)
    from scipy.ndimage import convolve1d

    x = validate_linear_image(img).astype(np.float64)
    g = gaussian_kernel_1d(params.sigma, params.radius)
    out = convolve1d(x, g, axis=0, mode="reflect")
    out = convolve1d(out, g, axis=1, mode="reflect")
    return out.astype(np.float32)


def downsample_bilinear(img, factor: int = 4) -> np.ndarray:
    """Downsample by an integer factor with an area-consistent bilinear scheme.

    The source is box-prefiltered with a width-``factor`` average and then
    bilinearly sampled at destination centers ((i+0.5)*f - 0.5).  For integer
    factors with divisible dimensions those sample positions align exactly
    with the prefilter grid, so the scheme reduces to the exact f x f block
    mean, which is how it is computed here.
    """
    _reject_encoded(img)
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ContractError(f"factor must be a positive integer, got {factor!r}")
    x = validate_linear_image(img).astype(np.float64)
    h, w, c = x.shape
    if h % factor or w % factor:
        raise ContractError(
            f"image dimensions {h}x{w} are not divisible by factor {factor}"
        )
    blocks = x.reshape(h // factor, factor, w // factor, factor, c)
    return blocks.mean(axis=(1, 3)).astype(np.float32)
