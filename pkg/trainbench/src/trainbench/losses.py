"""Training losses, dispatched from a manifest condition entry.

Conditions whose data is perceptually encoded train with a plain L1 on the
encoded tensors.  Linear-data conditions apply their configured loss to the
linear tensors: plain L1, L1 after a perceptual encoding (values clamped,
clamped regions get zero gradient), or SMAPE.
"""

import torch

from .encodings import encode_tensor


def l1(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    return (pred - target).abs().mean()


def encoded_l1(pred: torch.Tensor, target: torch.Tensor, encoding: dict,
               peak: float, black_level: float) -> torch.Tensor:
    return l1(
        encode_tensor(pred, encoding, peak, black_level),
        encode_tensor(target, encoding, peak, black_level),
    )


def smape(pred: torch.Tensor, target: torch.Tensor, eps: float = 1e-3) -> torch.Tensor:
    return ((pred - target).abs() / (pred.abs() + target.abs() + eps)).mean()


def condition_loss(condition: dict, peak: float, black_level: float):
    """Build ``loss(pred, target)`` for one manifest condition entry."""
    spec = condition["loss"]
    kind = spec["kind"]
    if kind == "l1":
        return l1
    if kind == "encoded_l1":
        encoding = spec["encoding"]
        return lambda p, t: encoded_l1(p, t, encoding, peak, black_level)
    if kind == "smape":
        eps = float(spec.get("eps", 1e-3))
        return lambda p, t: smape(p, t, eps)
    raise ValueError(f"unknown loss kind {kind!r}")
