"""embextract: train a small extractor and export EMB1 feature files.

Subcommands:
    extract       run a model over a dataset and write EMB1 (+ sidecar)
    train-extract train tinycnn on a shapes dataset (optionally with injected
                  label noise), then extract features with the noisy labels
    inject-noise  corrupt the label block of an existing EMB1 file
"""

from __future__ import annotations

import argparse
import sys

from .emb1 import read_emb1, write_emb1
from .extract import ExtractorConfig, extract, load_images
from .models import build_model
from .noise import inject_label_noise
from .train import train_model

def _add_common(p):
    p.add_argument("--model", default="tinycnn",
                   choices=["tinycnn", "resnet18", "resnet34"])
    p.add_argument("--weights")
    p.add_argument("--dataset", default="shapes")
    p.add_argument("--split", default="train")
    p.add_argument("--layer", default="penultimate",
                   choices=["penultimate", "logits"])
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--device", default="cpu")
    p.add_argument("--out", required=True)
    p.add_argument("--shapes-k", type=int, default=8)
    p.add_argument("--shapes-per-class", type=int, default=150)
    p.add_argument("--shapes-seed", type=int, default=1)

def _config(args) -> ExtractorConfig:
    return ExtractorConfig(
        model=args.model, weights=args.weights, dataset=args.dataset,
        split=args.split, layer=args.layer, batch_size=args.batch_size,
        device=args.device, out=args.out, shapes_k=args.shapes_k,
        shapes_per_class=args.shapes_per_class, shapes_seed=args.shapes_seed,
    )

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embextract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="export features with a (pre)trained model")
    _add_common(p)

    p = sub.add_parser("train-extract",
                       help="train tinycnn on shapes, then export features")
    _add_common(p)
    p.add_argument("--noise-frac", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=1)
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--train-seed", type=int, default=1)

    p = sub.add_parser("inject-noise", help="corrupt labels inside an EMB1 file")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--frac", type=float, required=True)
    p.add_argument("--seed", type=int, default=1)

    args = parser.parse_args(argv)

    if args.command == "extract":
        sidecar = extract(_config(args))
        print(f"wrote {args.out}: n={sidecar['n']} dim={sidecar['dim']} "
              f"k={sidecar['k']}")
        return 0

    if args.command == "train-extract":
        cfg = _config(args)
        images, labels = load_images(cfg)
        train_labels = labels
        if args.noise_frac > 0:
            train_labels, mask = inject_label_noise(
                labels, args.noise_frac, args.noise_seed
            )
            print(f"injected noise on {int(mask.sum())}/{labels.size} labels",
                  file=sys.stderr)
        model = build_model(cfg.model, num_classes=int(labels.max()) + 1)
        history = train_model(
            model, images, train_labels, epochs=args.epochs, lr=args.lr,
            weight_decay=args.weight_decay, seed=args.train_seed,
            device=cfg.device,
        )
        print(f"train accuracy by epoch: "
              f"{[round(a, 3) for a in history['accuracy']]}", file=sys.stderr)
        sidecar = extract(cfg, model=model, images=images, labels=train_labels)
        print(f"wrote {args.out}: n={sidecar['n']} dim={sidecar['dim']} "
              f"k={sidecar['k']}")
        return 0

    if args.command == "inject-noise":
        feats, labels, k = read_emb1(args.input)
        if labels is None:
            print("input has no labels", file=sys.stderr)
            return 2
        corrupted, mask = inject_label_noise(labels, args.frac, args.seed, k=k)
        write_emb1(args.out, feats, labels=corrupted, k=k)
        print(f"wrote {args.out}: corrupted {int(mask.sum())}/{labels.size}")
        return 0

    return 1

if __name__ == "__main__":
    sys.exit(main())
