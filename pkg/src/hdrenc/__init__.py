"""Perceptual display encodings, losses, degradations, HDR-adapted metrics,
and a statistical evaluation protocol for image restoration on HDR/RAW data.
"""

from .errors import ContractError, DomainError
from .transfer import (
    LINEAR,
    MULAW,
    PQ,
    PU21,
    DisplayModel,
    EncodedImage,
    Encoding,
    decode_image,
    decode_mulaw,
    decode_pq,
    decode_pu21,
    derivative,
    encode_image,
    encode_mulaw,
    encode_pq,
    encode_pu21,
    parse_encoding,
)
from .loss import (
    Condition,
    LossSpec,
    condition_registry,
    get_condition,
    loss_encoded_l1,
    loss_l1,
    loss_smape,
)
from .degrade import (
    BlurParams,
    NoiseParams,
    add_camera_noise,
    downsample_bilinear,
    gaussian_blur,
)
from .metrics import MetricScore, pu_psnr, pu_ssim
from .dataset import (
    ExposureAugmentSpec,
    SplitSpec,
    TrainingPair,
    augment_exposures,
    extract_patches,
    materialize_pairs,
    normalize_exposure,
    split_dataset,
)
from .stats import (
    ScoreMatrix,
    SignificanceGroups,
    median_table,
    paired_ttest,
    pairwise_ttests,
    significance_groups,
    student_t_cdf,
)
from .pfm import PfmFormatError, read_pfm, write_pfm

__version__ = "0.1.0"

__all__ = [
    "BlurParams",
    "Condition",
    "ContractError",
    "DisplayModel",
    "DomainError",
    "EncodedImage",
    "Encoding",
    "ExposureAugmentSpec",
    "LINEAR",
    "LossSpec",
    "MULAW",
    "MetricScore",
    "NoiseParams",
    "PQ",
    "PU21",
    "PfmFormatError",
    "ScoreMatrix",
    "SignificanceGroups",
    "SplitSpec",
    "TrainingPair",
    "add_camera_noise",
    "augment_exposures",
    "condition_registry",
    "decode_image",
    "decode_mulaw",
    "decode_pq",
    "decode_pu21",
    "derivative",
    "downsample_bilinear",
    "encode_image",
    "encode_mulaw",
    "encode_pq",
    "encode_pu21",
    "extract_patches",
    "gaussian_blur",
    "get_condition",
    "loss_encoded_l1",
    "loss_l1",
    "loss_smape",
    "materialize_pairs",
    "median_table",
    "normalize_exposure",
    "paired_ttest",
    "pairwise_ttests",
    "parse_encoding",
    "pu_psnr",
    "pu_ssim",
    "read_pfm",
    "significance_groups",
    "split_dataset",
    "student_t_cdf",
    "write_pfm",
]
