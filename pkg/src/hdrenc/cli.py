"""Command-line frontend.

Subcommands: encode, decode, degrade, prepare, evaluate, report, curves.
Every command is a pure function of its files, flags and config: all seeds
are explicit, nothing reads the clock or the network, and reruns produce
bitwise-identical outputs.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import stats as st
from .degrade import BlurParams, NoiseParams, add_camera_noise, downsample_bilinear, gaussian_blur
from .errors import ContractError
from .loss import condition_registry, get_condition
from .metrics import pu_psnr, pu_ssim
from .pfm import read_pfm, write_pfm
from .transfer import DisplayModel, EncodedImage, decode_image, encode_image, parse_encoding, write_curve_csv

ENCODING_CHOICES = ("linear", "mulaw", "pq", "pu21")
METRIC_FUNCS = {"pu_psnr": pu_psnr, "pu_ssim": pu_ssim}


# ---------------------------------------------------------------------------
# Pipeline configuration (key = value file, flags win over file values)
# ---------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    input_dir: str = ""
    output_dir: str = ""
    task: str = "denoise"
    condition: str = "all"  # registry label, or "all"
    seed: int = 0
    peak: float = 4000.0
    black_level: float = 0.005
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    exposure_count: int = 5
    exposure_low: float = 0.1
    exposure_high: float = 0.9
    augment_splits: str = "test"  # comma-separated split names
    noise_k: float = 0.01
    noise_sigma_r: float = 0.002
    blur_sigma: float = 8.0
    sr_factor: int = 4
    normalize_nits: float = 0.0  # 0 disables exposure normalization

    @classmethod
    def load(cls, path=None, overrides=None) -> "PipelineConfig":
        values = {}
        if path is not None:
            values.update(parse_config_file(path))
        for key, val in (overrides or {}).items():
            if val is not None:
                values[key] = val
        cfg = cls()
        valid = {f.name: f.type for f in fields(cls)}
        for key, val in values.items():
            if key not in valid:
                raise ContractError(f"unknown config key {key!r}")
            current = getattr(cfg, key)
            if isinstance(current, bool):  # pragma: no cover - no bool keys yet
                val = str(val).lower() in ("1", "true", "yes")
            elif isinstance(current, int):
                val = int(val)
            elif isinstance(current, float):
                val = float(val)
            else:
                val = str(val)
            setattr(cfg, key, val)
        return cfg

    def display(self) -> DisplayModel:
        return DisplayModel(black_level=self.black_level, peak=self.peak)

    def conditions(self):
        if self.condition.strip().lower() == "all":
            return condition_registry()
        return [get_condition(label) for label in self.condition.split(",")]


def parse_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ContractError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


# ---------------------------------------------------------------------------
# Simple file commands
# ---------------------------------------------------------------------------

def _display_from_args(args) -> DisplayModel:
    return DisplayModel(black_level=args.black_level, peak=args.peak)


def cmd_encode(args) -> int:
    if args.curve_csv:
        write_curve_csv(args.curve_csv, points=args.points, mu=args.mu)
        return 0
    if not args.input or not args.output:
        raise ContractError("encode needs INPUT and OUTPUT (or --curve-csv)")
    img = read_pfm(args.input)
    enc = encode_image(img, parse_encoding(args.encoding, mu=args.mu), _display_from_args(args))
    write_pfm(enc.data, args.output)
    return 0


def cmd_decode(args) -> int:
    coded = read_pfm(args.input)
    encoding = parse_encoding(args.encoding, mu=args.mu)
    linear = decode_image(EncodedImage(coded, encoding), _display_from_args(args))
    write_pfm(linear, args.output)
    return 0


def cmd_degrade(args) -> int:
    img = read_pfm(args.input)
    if args.op == "noise":
        out = add_camera_noise(img, NoiseParams(k=args.k, sigma_r=args.sigma_r, seed=args.seed))
    elif args.op == "blur":
        out = gaussian_blur(img, BlurParams(sigma=args.sigma))
    else:
        out = downsample_bilinear(img, args.factor)
    write_pfm(out, args.output)
    return 0


def cmd_curves(args) -> int:
    write_curve_csv(args.output, points=args.points, mu=args.mu)
    return 0


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------

def _discover_images(input_dir: Path):
    if not input_dir.is_dir():
        raise ContractError(f"input directory {input_dir} does not exist")
    files = sorted(input_dir.glob("*.pfm"))
    if not files:
        raise ContractError(f"no .pfm files found in {input_dir}")
    return {f.stem: f for f in files}


def cmd_prepare(args) -> int:
    overrides = {
        key: getattr(args, key)
        for key in ("input_dir", "output_dir", "task", "condition", "seed")
    }
    cfg = PipelineConfig.load(args.config, overrides)
    if not cfg.input_dir or not cfg.output_dir:
        raise ContractError("prepare needs input_dir and output_dir (config or flags)")
    if cfg.task not in ds.TASKS:
        raise ContractError(f"unknown task {cfg.task!r}; expected one of {ds.TASKS}")

    display = cfg.display()
    conditions = cfg.conditions()
    encodings = {}
    for cond in conditions:
        encodings.setdefault(cond.encoding.name, cond.encoding)

    sources = _discover_images(Path(cfg.input_dir))
    train, val, test = ds.split_dataset(
        sorted(sources),
        ds.SplitSpec(cfg.train_frac, cfg.val_frac, cfg.test_frac,
                     seed=ds.derive_seed(cfg.seed, "split")),
    )
    split_of = {i: "train" for i in train}
    split_of.update({i: "val" for i in val})
    split_of.update({i: "test" for i in test})
    augment_splits = {s.strip() for s in cfg.augment_splits.split(",") if s.strip()}

    out_dir = Path(cfg.output_dir)
    data_dir = out_dir / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for image_id in sorted(sources):
        split = split_of[image_id]
        img = read_pfm(sources[image_id])
        if cfg.normalize_nits > 0:
            img = ds.normalize_exposure(img, cfg.normalize_nits, display)
        coeffs = [1.0]
        if split in augment_splits and cfg.exposure_count > 0:
            spec = ds.ExposureAugmentSpec(
                count=cfg.exposure_count, low=cfg.exposure_low, high=cfg.exposure_high,
                seed=ds.derive_seed(cfg.seed, "exposure", image_id),
            )
            coeffs += [float(c) for c in ds.draw_exposure_coeffs(spec)]

        exposures = []
        for k, coeff in enumerate(coeffs):
            exposed = (img.astype(np.float64) * coeff).astype(np.float32)
            noise = NoiseParams(k=cfg.noise_k, sigma_r=cfg.noise_sigma_r,
                                seed=ds.derive_seed(cfg.seed, "noise", image_id, k))
            blur = BlurParams(sigma=cfg.blur_sigma)
            # One degradation per exposure, shared by every condition: the
            # controlled design varies only encoding and loss.
            degraded = ds.degrade_for_task(cfg.task, exposed, noise=noise, blur=blur,
                                           sr_factor=cfg.sr_factor)
            enc_paths = {}
            for name, encoding in encodings.items():
                stem = f"{image_id}_e{k}_{name}"
                in_rel = f"data/{stem}_in.pfm"
                tgt_rel = f"data/{stem}_tgt.pfm"
                write_pfm(encode_image(degraded, encoding, display).data, out_dir / in_rel)
                write_pfm(encode_image(exposed, encoding, display).data, out_dir / tgt_rel)
                enc_paths[name] = {"input": in_rel, "target": tgt_rel}
            exposures.append({
                "index": k,
                "coeff": coeff,
                "noise_seed": noise.seed if cfg.task == "denoise" else None,
                "pairs": {c.label: enc_paths[c.encoding.name] for c in conditions},
            })
        entries.append({"image_id": image_id, "split": split,
                        "task": cfg.task, "exposures": exposures})

    manifest = {
        "config": {k: v for k, v in asdict(cfg).items() if k != "output_dir"},
        "display": {"black_level": display.black_level, "peak": display.peak},
        "task": cfg.task,
        "seeds": {"root": cfg.seed, "split": ds.derive_seed(cfg.seed, "split")},
        "conditions": [c.to_dict() for c in conditions],
        "splits": {"train": train, "val": val, "test": test},
        "images": entries,
    }
    with open(out_dir / "manifest.json", "w", encoding="ascii") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"prepared {len(entries)} images -> {out_dir / 'manifest.json'}")
    return 0


# ---------------------------------------------------------------------------
# evaluate / report
# ---------------------------------------------------------------------------

def _aligned_stems(ref_dir: Path, test_dirs: dict):
    ref_stems = sorted(p.stem for p in ref_dir.glob("*.pfm"))
    if not ref_stems:
        raise ContractError(f"no .pfm files found in reference dir {ref_dir}")
    problems = []
    for label, d in test_dirs.items():
        stems = set(p.stem for p in Path(d).glob("*.pfm"))
        missing = sorted(set(ref_stems) - stems)
        extra = sorted(stems - set(ref_stems))
        if missing:
            problems.append(f"{label}: missing {missing}")
        if extra:
            problems.append(f"{label}: unexpected {extra}")
    if problems:
        raise ContractError("misaligned file sets:\n  " + "\n  ".join(problems))
    return ref_stems


def _parse_label_dirs(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ContractError(f"expected LABEL=DIR, got {item!r}")
        label, d = item.split("=", 1)
        out[label] = d
    return out


def cmd_evaluate(args) -> int:
    test_dirs = _parse_label_dirs(args.test)
    if not test_dirs:
        raise ContractError("evaluate needs at least one --test LABEL=DIR")
    ref_dir = Path(args.ref)
    stems = _aligned_stems(ref_dir, test_dirs)
    display = _display_from_args(args)
    metric_names = [m.strip() for m in args.metrics.split(",") if m.strip()]
    for name in metric_names:
        if name not in METRIC_FUNCS:
            raise ContractError(f"unknown metric {name!r}; expected {sorted(METRIC_FUNCS)}")

    refs = {s: read_pfm(ref_dir / f"{s}.pfm") for s in stems}
    labels = list(test_dirs)
    score_arrays = {name: np.zeros((len(labels), len(stems))) for name in metric_names}
    for ci, label in enumerate(labels):
        d = Path(test_dirs[label])
        for si, stem in enumerate(stems):
            test_img = read_pfm(d / f"{stem}.pfm")
            for name in metric_names:
                score_arrays[name][ci, si] = METRIC_FUNCS[name](test_img, refs[stem], display)

    matrices = {
        name: st.ScoreMatrix(labels, score_arrays[name], image_ids=stems)
        for name in metric_names
    }
    if args.external:
        for name, path in _parse_label_dirs(args.external).items():
            matrices[name] = _load_external_scores(path, labels, stems)
    report = st.build_report(matrices, alpha=args.alpha, bonferroni=args.bonferroni)
    _write_report_files(report, Path(args.out_dir))
    return 0


def _load_external_scores(path, labels, stems) -> "st.ScoreMatrix":
    """Externally computed per-image scores: {condition: {image_id: value}}."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    rows = []
    for label in labels:
        if label not in raw:
            raise ContractError(f"external scores {path} lack condition {label!r}")
        try:
            rows.append([float(raw[label][s]) for s in stems])
        except KeyError as exc:
            raise ContractError(f"external scores {path} lack image {exc} for {label!r}")
    return st.ScoreMatrix(list(labels), np.asarray(rows), image_ids=list(stems))


def _write_report_files(report: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    st.write_report_json(report, out_dir / "report.json")
    st.write_median_csv(report, out_dir / "medians.csv")
    for name in report["metrics"]:
        st.write_violin_csv(report, name, out_dir / f"violin_{name}.csv")
    print(f"wrote report -> {out_dir / 'report.json'}")


def cmd_report(args) -> int:
    with open(args.scores, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if "metrics" not in raw:
        raise ContractError(f"{args.scores} is not a report/scores JSON (no 'metrics' key)")
    matrices = {}
    for name, data in raw["metrics"].items():
        conditions = data["conditions"]
        scores = np.asarray([data["scores"][c] for c in conditions])
        matrices[name] = st.ScoreMatrix(conditions, scores, image_ids=data.get("image_ids"))
    report = st.build_report(matrices, alpha=args.alpha, bonferroni=args.bonferroni)
    _write_report_files(report, Path(args.out_dir))
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_display_flags(p):
    p.add_argument("--peak", type=float, default=4000.0, help="display peak, cd/m^2")
    p.add_argument("--black-level", type=float, default=0.005, help="display black level, cd/m^2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdrenc",
        description="Perceptual display encodings and an evaluation protocol "
                    "for HDR/RAW image restoration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a linear PFM image (or dump the curve table)")
    p.add_argument("input", nargs="?", help="input linear .pfm")
    p.add_argument("output", nargs="?", help="output encoded .pfm")
    p.add_argument("--encoding", choices=ENCODING_CHOICES, default="pu21")
    p.add_argument("--mu", type=float, default=5000.0, help="mulaw companding constant")
    _add_display_flags(p)
    p.add_argument("--curve-csv", metavar="PATH", help="write the encoding curve table instead")
    p.add_argument("--points", type=int, default=256, help="curve table sample count")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode an encoded PFM image back to linear")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--encoding", choices=ENCODING_CHOICES, required=True)
    p.add_argument("--mu", type=float, default=5000.0)
    _add_display_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("degrade", help="apply a physical degradation in linear space")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--op", choices=("noise", "blur", "downsample"), required=True)
    p.add_argument("--k", type=float, default=0.01, help="photon gain (noise)")
    p.add_argument("--sigma-r", type=float, default=0.002, help="readout std (noise)")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--sigma", type=float, default=8.0, help="blur sigma, px")
    p.add_argument("--factor", type=int, default=4, help="downsample factor")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("prepare", help="materialize a training dataset + manifest")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--input-dir", dest="input_dir")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--task", choices=ds.TASKS, dest="task")
    p.add_argument("--condition", help="registry label(s, comma separated) or 'all'")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("evaluate", help="score reconstructions against references")
    p.add_argument("--ref", required=True, help="directory of reference linear .pfm files")
    p.add_argument("--test", action="append", default=[], metavar="LABEL=DIR",
                   help="per-condition directory of reconstructions (repeatable)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--metrics", default="pu_psnr,pu_ssim")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bonferroni", action="store_true")
    p.add_argument("--external", action="append", default=[], metavar="NAME=JSON",
                   help="merge externally computed per-image scores")
    _add_display_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="rebuild report files from a scores JSON")
    p.add_argument("scores", help="report.json or compatible scores JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bonferroni", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("curves", help="write the encoding curve table as CSV")
    p.add_argument("output")
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--mu", type=float, default=5000.0)
    p.set_defaults(func=cmd_curves)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ContractError, OSError, ValueError) as exc:
        print(f"hdrenc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
