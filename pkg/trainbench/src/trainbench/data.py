"""Manifest-driven data access and the synthetic HDR patch generator."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pfmio import read_pfm, write_pfm


@dataclass
class Manifest:
    root: Path
    raw: dict

    @classmethod
    def load(cls, path) -> "Manifest":
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            return cls(path.parent, json.load(f))

    @property
    def task(self) -> str:
        return self.raw["task"]

    @property
    def display(self) -> dict:
        return self.raw["display"]

    @property
    def conditions(self) -> list:
        return self.raw["conditions"]

    def condition(self, label: str) -> dict:
        for cond in self.conditions:
            if cond["label"] == label:
                return cond
        raise KeyError(f"condition {label!r} not in manifest")

    def items(self, split: str, label: str):
        """(item_id, input_path, target_path) for one split and condition."""
        out = []
        for entry in self.raw["images"]:
            if entry["split"] != split:
                continue
            for exp in entry["exposures"]:
                pair = exp["pairs"][label]
                out.append((
                    f"{entry['image_id']}_e{exp['index']}",
                    self.root / pair["input"],
                    self.root / pair["target"],
                ))
        return out

    def load_split(self, split: str, label: str):
        """Load a split's pairs as float32 arrays: (ids, inputs, targets)."""
        ids, inputs, targets = [], [], []
        for item_id, in_path, tgt_path in self.items(split, label):
            ids.append(item_id)
            inputs.append(read_pfm(in_path))
            targets.append(read_pfm(tgt_path))
        return ids, inputs, targets


def generate_synthetic_patches(out_dir, count: int = 2000, size: int = 64,
                               seed: int = 0, exposure_decades: float = 4.0) -> int:
    """Write a synthetic HDR patch set as linear PFM files.

    Each patch is a smooth random field with some step structure, scaled by a
    log-uniform per-patch exposure spanning ``exposure_decades`` orders of
    magnitude, so the set mixes very dark and bright content the way linear
    HDR data does.
    """
    import torch

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    for k in range(count):
        coarse = rng.uniform(0.05, 1.0, size=(1, 3, 5, 5))
        smooth = torch.nn.functional.interpolate(
            torch.from_numpy(coarse), size=(size, size),
            mode="bilinear", align_corners=True,
        )
        patch = smooth[0].permute(1, 2, 0).numpy().copy()

        # step edges give the denoiser structure to preserve
        n_edges = int(rng.integers(1, 4))
        for _ in range(n_edges):
            pos = int(rng.integers(size // 8, size - size // 8))
            gain = rng.uniform(0.3, 1.7)
            if rng.uniform() < 0.5:
                patch[:pos] *= gain
            else:
                patch[:, :pos] *= gain

        exposure = 10.0 ** rng.uniform(-exposure_decades, 0.0)
        patch = np.clip(patch * exposure, 0.0, 1.0).astype(np.float32)
        write_pfm(patch, out_dir / f"patch{k:05d}.pfm")
    return count
