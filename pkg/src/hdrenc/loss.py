"""Loss functions over image pairs, and the registry of training conditions.

All losses reduce with the MEAN over elements (not the sum), which makes the
values resolution-invariant.  ``encoded_l1`` first pushes both images through
a perceptual encoding (clamping out-of-range pixels, see
:func:`~hdrenc.transfer.encode_image`), then takes the plain L1.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError
from .transfer import DisplayModel, EncodedImage, Encoding, LINEAR, MULAW, PQ, PU21, encode_image

DEFAULT_SMAPE_EPS = 1e-3


def _pair_arrays(pred, ref):
    """Unpack (possibly Encoded) images, enforcing shape/tag agreement."""
    if isinstance(pred, EncodedImage) != isinstance(ref, EncodedImage):
        raise ContractError("cannot mix encoded and linear images in one loss")
    if isinstance(pred, EncodedImage):
        if pred.encoding != ref.encoding:
            raise ContractError(
                f"encoding mismatch: {pred.encoding.name} vs {ref.encoding.name}"
            )
        a, b = pred.data, ref.data
    else:
        a, b = np.asarray(pred), np.asarray(ref)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)


def loss_l1(pred, ref) -> float:
    """Mean absolute difference over all elements."""
    a, b = _pair_arrays(pred, ref)
    return float(np.mean(np.abs(a - b)))


def loss_encoded_l1(pred, ref, encoding: Encoding, display: DisplayModel = DisplayModel()) -> float:
    """L1 between perceptually encoded images.

    Out-of-range pixels in either input (including negatives) are clamped by
    the image-level encoder before the difference is taken.
    """
    a = encode_image(pred, encoding, display)
    b = encode_image(ref, encoding, display)
    return loss_l1(a, b)


def loss_smape(pred, ref, eps: float = DEFAULT_SMAPE_EPS) -> float:
    """Symmetric mean absolute percentage error.

    mean(|pred - ref| / (|pred| + |ref| + eps)); bounded above by 1 for
    eps > 0.  Computed on relative linear values.
    """
    if not eps > 0:
        raise ContractError(f"smape eps must be positive, got {eps}")
    a, b = _pair_arrays(pred, ref)
    return float(np.mean(np.abs(a - b) / (np.abs(a) + np.abs(b) + eps)))


@dataclass(frozen=True)
class LossSpec:
    """A loss tag: plain ``l1``, ``encoded_l1`` (with an encoding), or ``smape``."""

    kind: str  # "l1" | "encoded_l1" | "smape"
    encoding: Optional[Encoding] = None
    eps: float = DEFAULT_SMAPE_EPS

    def __post_init__(self):
        if self.kind not in ("l1", "encoded_l1", "smape"):
            raise ContractError(f"unknown loss kind {self.kind!r}")
        if self.kind == "encoded_l1" and self.encoding is None:
            raise ContractError("encoded_l1 needs an encoding")
        if not self.eps > 0:
            raise ContractError("smape eps must be positive")

    def __call__(self, pred, ref, display: DisplayModel = DisplayModel()) -> float:
        if self.kind == "l1":
            return loss_l1(pred, ref)
        if self.kind == "encoded_l1":
            return loss_encoded_l1(pred, ref, self.encoding, display)
        return loss_smape(pred, ref, self.eps)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "encoded_l1":
            d["encoding"] = self.encoding.to_dict()
        if self.kind == "smape":
            d["eps"] = self.eps
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LossSpec":
        enc = Encoding.from_dict(d["encoding"]) if "encoding" in d else None
        return cls(d["kind"], encoding=enc, eps=d.get("eps", DEFAULT_SMAPE_EPS))


@dataclass(frozen=True)
class Condition:
    """One (pixel encoding, loss function) training configuration."""

    label: str
    encoding: Encoding
    loss: LossSpec

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "encoding": self.encoding.to_dict(),
            "loss": self.loss.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Condition":
        return cls(d["label"], Encoding.from_dict(d["encoding"]), LossSpec.from_dict(d["loss"]))


_L1 = LossSpec("l1")


def condition_registry() -> list:
    """The eight tested (encoding, loss) combinations.

    Data encoded with a perceptual transform is paired with a plain L1 loss;
    linear data is paired with L1, an encoded L1, or SMAPE.
    """
    return [
        Condition("PU21-L1", PU21, _L1),
        Condition("PQ-L1", PQ, _L1),
        Condition("Mu-L1", MULAW, _L1),
        Condition("Linear-L1", LINEAR, _L1),
        Condition("Linear-PQ", LINEAR, LossSpec("encoded_l1", PQ)),
        Condition("Linear-PU21", LINEAR, LossSpec("encoded_l1", PU21)),
        Condition("Linear-Mu", LINEAR, LossSpec("encoded_l1", MULAW)),
        Condition("Linear-SMAPE", LINEAR, LossSpec("smape")),
    ]


def normalize_condition_label(label: str) -> str:
    """Map label spellings (``μ-L1``, ``mu-l1``, ...) onto registry labels."""
    key = label.strip().replace("μ", "Mu").replace("µ", "Mu").lower()
    for cond in condition_registry():
        if cond.label.lower() == key:
            return cond.label
    raise ContractError(
        f"unknown condition {label!r}; expected one of "
        f"{[c.label for c in condition_registry()]}"
    )


def get_condition(label: str) -> Condition:
    """Look up a registry condition by (normalized) label."""
    canonical = normalize_condition_label(label)
    for cond in condition_registry():
        if cond.label == canonical:
            return cond
    raise AssertionError("unreachable")  # normalize already validated
