"""trainbench CLI.

``synth`` writes a synthetic HDR patch set (linear PFM files) that the
dataset-preparation tool can consume; ``run`` trains the toy network under
manifest conditions and stages reconstructions for the evaluation tool.

A key = value config file mirroring the training spec can seed either
command; flags win over file values.
"""

import argparse
import sys
from dataclasses import fields

import torch

from .data import Manifest, generate_synthetic_patches
from .train import TrainSpec, run_grid


def parse_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


def build_spec(args) -> TrainSpec:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for f in fields(TrainSpec):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    spec = TrainSpec()
    for key, val in values.items():
        if not hasattr(spec, key):
            raise ValueError(f"unknown config key {key!r}")
        setattr(spec, key, type(getattr(spec, key))(val))
    return spec


def cmd_synth(args) -> int:
    n = generate_synthetic_patches(args.out_dir, count=args.count, size=args.size,
                                   seed=args.seed, exposure_decades=args.decades)
    print(f"wrote {n} patches -> {args.out_dir}")
    return 0


def cmd_run(args) -> int:
    torch.set_num_threads(args.threads)
    manifest = Manifest.load(args.manifest)
    spec = build_spec(args)
    labels = None
    if args.conditions and args.conditions.lower() != "all":
        labels = [c.strip() for c in args.conditions.split(",")]
    log = run_grid(manifest, spec, args.out_dir, labels=labels)
    failed = [c["condition"] for c in log["conditions"] if c["status"] != "ok"]
    if failed:
        print(f"failed conditions: {failed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trainbench",
        description="Toy restoration-network benchmark over (encoding, loss) conditions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic HDR patch set (linear PFM)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=2000)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decades", type=float, default=4.0,
                   help="orders of magnitude the per-patch exposure spans")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="train the condition grid from a prepared manifest")
    p.add_argument("--manifest", required=True, help="manifest.json from dataset preparation")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--conditions", default="all", help="comma-separated labels, or 'all'")
    p.add_argument("--config", help="key = value file mirroring the training spec")
    p.add_argument("--threads", type=int, default=1)
    for f in fields(TrainSpec):
        p.add_argument(f"--{f.name.replace('_', '-')}", type=type(f.default), default=None)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"trainbench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
