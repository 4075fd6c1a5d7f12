"""Training driver: one condition at a time, or the full 8-condition grid.

Every condition trains the same architecture from the same seed with the
same schedule; only the data encoding and the loss differ (plus the
documented option of a lower learning rate for the linear-data family, which
otherwise tends to diverge).  A condition whose loss goes non-finite is
recorded as failed; the grid carries on.
"""

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .data import Manifest
from .encodings import decode_tensor
from .losses import condition_loss, l1
from .model import build_model
from .pfmio import read_pfm, write_pfm


@dataclass
class TrainSpec:
    depth: int = 8
    width: int = 32
    steps: int = 600
    batch_size: int = 16
    crop: int = 32  # random training crop; 0 trains on full patches
    lr: float = 1e-4
    linear_lr_scale: float = 1.0  # set to 0.1 to train linear-data conditions 10x slower
    seed: int = 0
    log_every: int = 50


def _condition_lr(spec: TrainSpec, condition: dict) -> float:
    if condition["encoding"]["name"] == "linear":
        return spec.lr * spec.linear_lr_scale
    return spec.lr


def _stack_batch(inputs, targets, picks, crops, crop):
    xs, ys = [], []
    for idx, (top, left) in zip(picks, crops):
        x, y = inputs[idx], targets[idx]
        if crop:
            x = x[top:top + crop, left:left + crop]
            y = y[top:top + crop, left:left + crop]
        xs.append(torch.from_numpy(np.ascontiguousarray(x.transpose(2, 0, 1))))
        ys.append(torch.from_numpy(np.ascontiguousarray(y.transpose(2, 0, 1))))
    return torch.stack(xs), torch.stack(ys)


def _train_loop(model, optimizer, loss_fn, inputs, targets, spec: TrainSpec):
    """Runs the step loop; returns (status, final_loss, sampled_curve)."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(spec.seed)))
    h, w, _ = inputs[0].shape
    crop = spec.crop if spec.crop and spec.crop < min(h, w) else 0
    curve = []
    final = math.nan
    for step in range(spec.steps):
        picks = rng.integers(0, len(inputs), size=spec.batch_size)
        if crop:
            tops = rng.integers(0, h - crop + 1, size=spec.batch_size)
            lefts = rng.integers(0, w - crop + 1, size=spec.batch_size)
            crops = list(zip(tops, lefts))
        else:
            crops = [(0, 0)] * spec.batch_size
        x, y = _stack_batch(inputs, targets, picks, crops, crop)
        optimizer.zero_grad()
        loss = loss_fn(model(x), y)
        value = float(loss.detach())
        if not math.isfinite(value):
            return "failed", value, curve
        loss.backward()
        optimizer.step()
        final = value
        if step % spec.log_every == 0 or step == spec.steps - 1:
            curve.append([step, value])
    return "ok", final, curve


def train_condition(manifest: Manifest, label: str, spec: TrainSpec, out_dir) -> dict:
    """Train one condition and write reconstructed test images as linear PFM."""
    condition = manifest.condition(label)
    display = manifest.display
    encoding = condition["encoding"]
    task = manifest.task

    _, train_in, train_tgt = manifest.load_split("train", label)
    if not train_in:
        raise ValueError(f"manifest has no training items for {label!r}")

    model = build_model(spec.depth, spec.width, task, spec.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=_condition_lr(spec, condition))
    if encoding["name"] == "linear":
        loss_fn = condition_loss(condition, display["peak"], display["black_level"])
    else:
        loss_fn = l1  # data is already perceptually encoded

    start = time.perf_counter()
    status, final_loss, curve = _train_loop(model, optimizer, loss_fn,
                                            train_in, train_tgt, spec)
    train_time = time.perf_counter() - start

    out_dir = Path(out_dir)
    written = 0
    if status == "ok":
        cond_dir = out_dir / label
        cond_dir.mkdir(parents=True, exist_ok=True)
        model.eval()
        with torch.no_grad():
            for item_id, in_path, _ in manifest.items("test", label):
                x = torch.from_numpy(read_pfm(in_path).transpose(2, 0, 1))[None]
                pred = model(x)[0].double()
                linear = decode_tensor(pred, encoding, display["peak"])
                recon = linear.clamp(0.0, 1.0).permute(1, 2, 0).numpy()
                write_pfm(recon.astype(np.float32), cond_dir / f"{item_id}.pfm")
                written += 1

    return {
        "condition": label,
        "status": status,
        "final_loss": final_loss if math.isfinite(final_loss) else None,
        "loss_curve": curve,
        "lr": _condition_lr(spec, condition),
        "seed": spec.seed,
        "steps": spec.steps,
        "train_time_s": round(train_time, 3),
        "test_images_written": written,
    }


def run_grid(manifest: Manifest, spec: TrainSpec, out_dir, labels=None) -> dict:
    """Train every condition and stage a directory tree ready for evaluation.

    Writes refs/ (clean linear test images) plus one reconstruction
    directory per condition, and a run_log.json.  Individual failures do not
    abort the grid.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = labels or [c["label"] for c in manifest.conditions]

    _write_reference_images(manifest, out_dir / "refs")

    results = []
    for label in labels:
        try:
            results.append(train_condition(manifest, label, spec, out_dir))
        except Exception as exc:  # keep the grid alive, mirror failed runs
            results.append({"condition": label, "status": "failed",
                            "error": str(exc)})
        entry = results[-1]
        print(f"[{entry['status']:>6}] {label}: final_loss={entry.get('final_loss')}")

    log = {"spec": asdict(spec), "task": manifest.task,
           "display": manifest.display, "conditions": results}
    with open(out_dir / "run_log.json", "w", encoding="ascii") as f:
        json.dump(log, f, indent=1, sort_keys=True)
        f.write("\n")
    return log


def _write_reference_images(manifest: Manifest, refs_dir: Path) -> None:
    """Decode each test target back to linear and stage it for evaluation.

    A linear-encoding condition is preferred (its targets are the clean
    linear pixels verbatim); otherwise targets decode through float64.
    """
    refs_dir.mkdir(parents=True, exist_ok=True)
    label = manifest.conditions[0]["label"]
    for cond in manifest.conditions:
        if cond["encoding"]["name"] == "linear":
            label = cond["label"]
            break
    encoding = manifest.condition(label)["encoding"]
    peak = manifest.display["peak"]
    for item_id, _, tgt_path in manifest.items("test", label):
        coded = torch.from_numpy(read_pfm(tgt_path).transpose(2, 0, 1)).double()
        linear = decode_tensor(coded, encoding, peak).clamp(0.0, 1.0)
        write_pfm(linear.permute(1, 2, 0).numpy().astype(np.float32),
                  refs_dir / f"{item_id}.pfm")
