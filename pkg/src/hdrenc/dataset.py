"""Dataset preparation: splits, exposure handling, and training-pair assembly.

The pipeline is a deterministic function of (source images, seeds, config).
Every randomized stage derives its stream from an explicit seed, and
per-image streams are derived from (seed, image id) so results do not depend
on processing order.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .degrade import BlurParams, NoiseParams, add_camera_noise, downsample_bilinear, gaussian_blur
from .errors import ContractError
from .loss import Condition
from .metrics import LUMA_WEIGHTS
from .transfer import DisplayModel, EncodedImage, encode_image, validate_linear_image

TASKS = ("denoise", "deblur", "superres4x")
SR_FACTOR = 4


def derive_seed(seed: int, *tokens) -> int:
    """Stable 64-bit sub-seed from a base seed and identifying tokens."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for tok in tokens:
        h.update(b"/")
        h.update(str(tok).encode())
    return int.from_bytes(h.digest()[:8], "little")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ContractError(f"split fractions must sum to 1, got {total}")


def split_dataset(ids, spec: SplitSpec = SplitSpec()):
    """Deterministic shuffled partition into (train, val, test) id lists.

    Sizes are round(train_frac*n), round(val_frac*n), and the remainder.
    """
    ids = list(ids)
    if len(ids) < 5:
        raise ContractError(f"need at least 5 ids to split, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ContractError("duplicate ids in dataset")
    order = sorted(ids)
    _rng(spec.seed).shuffle(order)
    n = len(order)
    n_train = round(spec.train_frac * n)
    n_val = round(spec.val_frac * n)
    return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]


def mean_luminance_nits(img, display: DisplayModel) -> float:
    """Mean BT.709 luminance of a relative-linear image, in cd/m^2."""
    arr = validate_linear_image(img).astype(np.float64)
    return float(np.mean(arr @ np.asarray(LUMA_WEIGHTS))) * display.peak


def normalize_exposure(img, target_mean_nits: float, display: DisplayModel = DisplayModel()):
    """Scale an image so its mean luminance equals ``target_mean_nits``."""
    if not target_mean_nits > 0:
        raise ContractError("target mean luminance must be positive")
    arr = validate_linear_image(img).astype(np.float64)
    current = mean_luminance_nits(arr, display)
    if current == 0.0:
        raise ContractError("cannot normalize an all-black image")
    return (arr * (target_mean_nits / current)).astype(np.float32)


@dataclass(frozen=True)
class ExposureAugmentSpec:
    count: int = 5
    low: float = 0.1
    high: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ContractError("exposure count must be >= 0")
        if not 0 < self.low <= self.high:
            raise ContractError("exposure range must satisfy 0 < low <= high")


def draw_exposure_coeffs(spec: ExposureAugmentSpec) -> np.ndarray:
    """The i.i.d. uniform exposure coefficients a spec will apply."""
    return _rng(spec.seed).uniform(spec.low, spec.high, size=spec.count)


def augment_exposures(img, spec: ExposureAugmentSpec = ExposureAugmentSpec()):
    """Return [img] plus ``count`` copies scaled by uniform exposure coefficients."""
    arr = validate_linear_image(img).astype(np.float32)
    out = [arr]
    for coeff in draw_exposure_coeffs(spec):
        out.append((arr * np.float32(coeff)).astype(np.float32))
    return out


@dataclass
class TrainingPair:
    """An encoded (input, target) pair plus its condition and provenance."""

    input: EncodedImage
    target: EncodedImage
    condition_label: str
    provenance: dict


def degrade_for_task(task: str, clean, noise: NoiseParams = NoiseParams(),
                     blur: BlurParams = BlurParams(), sr_factor: int = SR_FACTOR):
    """Apply the task's degradation in linear space."""
    if task not in TASKS:
        raise ContractError(f"unknown task {task!r}; expected one of {TASKS}")
    if task == "denoise":
        return add_camera_noise(clean, noise)
    if task == "deblur":
        return gaussian_blur(clean, blur)
    return downsample_bilinear(clean, sr_factor)


def materialize_pairs(task: str, clean, condition: Condition,
                      display: DisplayModel = DisplayModel(),
                      noise: NoiseParams = NoiseParams(),
                      blur: BlurParams = BlurParams(),
                      sr_factor: int = SR_FACTOR,
                      image_id: str = "") -> TrainingPair:
    """Degrade in linear space, then encode input and target per the condition.

    The ordering is load-bearing: physical degradations are only plausible on
    linear values, so encoding always comes after the degradation.
    """
    arr = validate_linear_image(clean)
    degraded = degrade_for_task(task, arr, noise=noise, blur=blur, sr_factor=sr_factor)
    enc_in = encode_image(degraded, condition.encoding, display)
    enc_target = encode_image(arr, condition.encoding, display)
    provenance = {"image_id": image_id, "task": task}
    if task == "denoise":
        provenance["noise"] = {"k": noise.k, "sigma_r": noise.sigma_r, "seed": noise.seed}
    elif task == "deblur":
        provenance["blur"] = {"sigma": blur.sigma, "radius": blur.radius}
    else:
        provenance["sr_factor"] = sr_factor
    return TrainingPair(enc_in, enc_target, condition.label, provenance)


def extract_patches(img, size: int = 64, count: int = 1, seed: int = 0):
    """Random ``size`` x ``size`` crops, deterministic given the seed."""
    arr = validate_linear_image(img)
    h, w, _ = arr.shape
    if h < size or w < size:
        raise ContractError(f"image {h}x{w} smaller than patch size {size}")
    rng = _rng(seed)
    patches = []
    for _ in range(count):
        top = int(rng.integers(0, h - size + 1))
        left = int(rng.integers(0, w - size + 1))
        patches.append(np.ascontiguousarray(arr[top:top + size, left:left + size]))
    return patches
