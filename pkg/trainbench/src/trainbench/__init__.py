"""Desk-scale benchmark: a toy restoration CNN trained under every
(pixel encoding, loss) condition of a prepared dataset manifest."""

from .data import Manifest, generate_synthetic_patches
from .encodings import decode_tensor, encode_tensor
from .losses import condition_loss, encoded_l1, l1, smape
from .model import ResidualCNN, build_model
from .train import TrainSpec, run_grid, train_condition

__version__ = "0.1.0"

__all__ = [
    "Manifest",
    "ResidualCNN",
    "TrainSpec",
    "build_model",
    "condition_loss",
    "decode_tensor",
    "encode_tensor",
    "encoded_l1",
    "generate_synthetic_patches",
    "l1",
    "run_grid",
    "smape",
    "train_condition",
]
