"""Script entry: train the reference net on an IDX dataset, dump snapshots."""

import argparse
import sys
from pathlib import Path

from .capture import AdapterError, DivergenceError, ExtractionConfig, load_idx_pair, run_training_capture


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snapshot-adapter",
        description="Capture conv-filter snapshots during training as TFL1 + manifest.",
    )
    parser.add_argument("--images", required=True, help="IDX image file (optionally .gz)")
    parser.add_argument("--labels", required=True, help="IDX label file (optionally .gz)")
    parser.add_argument("--out", required=True, help="output directory for tensors + manifest.json")
    parser.add_argument("--layer", default="conv1", help="conv layer to capture (default conv1)")
    parser.add_argument("--activation", choices=["pre", "post"], default="pre",
                        help="dump conv output before or after ReLU (default pre)")
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--cadence", default="1",
                        help="'N' = every N updates, or comma list of update counts (-1 = last)")
    parser.add_argument("--batch-size", type=int, default=256)
    parser.add_argument("--lr", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--limit", type=int, default=None, help="train on the first N images only")
    parser.add_argument("--max-batches", type=int, default=None)
    parser.add_argument("--feature-maps", action="store_true", help="also dump per-category feature maps")
    parser.add_argument("--categories", help="comma-separated labels for feature-map dumps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cadence = int(args.cadence) if "," not in args.cadence else [int(s) for s in args.cadence.split(",")]
    try:
        images, labels = load_idx_pair(args.images, args.labels)
        if args.limit:
            images, labels = images[: args.limit], labels[: args.limit]
        config = ExtractionConfig(
            out_dir=Path(args.out),
            layer=args.layer,
            activation=args.activation,
            categories=tuple(int(c) for c in args.categories.split(",")) if args.categories else None,
            dump_feature_maps=args.feature_maps,
        )
        manifest = run_training_capture(
            images,
            labels,
            epochs=args.epochs,
            cadence=cadence,
            config=config,
            batch_size=args.batch_size,
            lr=args.lr,
            seed=args.seed,
            max_batches=args.max_batches,
        )
    except DivergenceError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"manifest written to {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
