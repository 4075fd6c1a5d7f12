"""Full-reference quality metrics adapted to HDR content.

Standard PSNR and SSIM assume display-encoded inputs, so both metrics here
first push the linear images through the pu21 encoding: PSNR is computed on
the encoded RGB values, SSIM on the luma of the encoded pixels.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .degrade import gaussian_kernel_1d
from .errors import ContractError
from .transfer import PU21, DisplayModel, encode_image

PSNR_CAP_DB = 120.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)  # BT.709, applied to encoded channels


@dataclass(frozen=True)
class MetricScore:
    """One metric value for one image."""

    metric: str  # "pu_psnr" | "pu_ssim"
    value: float
    image_id: str


def _encoded_pair(test, ref, display):
    a = encode_image(test, PU21, display).data.astype(np.float64)
    b = encode_image(ref, PU21, display).data.astype(np.float64)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def pu_psnr(test, ref, display: DisplayModel = DisplayModel()) -> float:
    """PSNR over pu21-encoded RGB values.

    Parameters
    ----------
    test, ref : array_like
      Relative-linear H x W x 3 images.
    display : DisplayModel
      Maps relative values to the absolute units the encoding needs.

    Returns
    -------
    float
      10*log10(1 / MSE) in dB, with the encoded-value peak taken as 1.0.
      Capped at 120 dB; identical images return exactly the cap.
    """
    a, b = _encoded_pair(test, ref, display)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB)


def _ssim_window_size(h: int, w: int) -> int:
    side = min(h, w, SSIM_WINDOW)
    if side % 2 == 0:
        side -= 1
    if side < 3:
        raise ContractError(f"image {h}x{w} too small for SSIM (needs >= 3 px per side)")
    return side


def pu_ssim(test, ref, display: DisplayModel = DisplayModel()) -> float:
    """SSIM on the luma channel of pu21-encoded pixels.

    Parameters
    ----------
    test, ref : array_like
      Relative-linear H x W x 3 images.
    display : DisplayModel

    Returns
    -------
    float
      Mean local SSIM over Gaussian-weighted windows (11 x 11, sigma 1.5;
      the window shrinks to the largest odd size that fits when an image is
      smaller than 11 px per side).  Only fully valid window positions are
      averaged (no padding).  Dynamic range is 1.0 in encoded units, so
      C1 = 0.01^2 and C2 = 0.03^2.
    """
    a, b = _encoded_pair(test, ref, display)
    h, w, _ = a.shape
    win = _ssim_window_size(h, w)
    radius = win // 2
    weights = gaussian_kernel_1d(SSIM_SIGMA, radius)

    la = a @ LUMA_WEIGHTS
    lb = b @ LUMA_WEIGHTS

    def smooth(arr):
        out = convolve1d(arr, weights, axis=0, mode="reflect")
        out = convolve1d(out, weights, axis=1, mode="reflect")
        return out[radius:h - radius, radius:w - radius]

    mu_a = smooth(la)
    mu_b = smooth(lb)
    var_a = smooth(la * la) - mu_a * mu_a
    var_b = smooth(lb * lb) - mu_b * mu_b
    cov = smooth(la * lb) - mu_a * mu_b

    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(np.mean(ssim_map))
