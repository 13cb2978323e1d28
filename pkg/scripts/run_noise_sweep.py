#!/usr/bin/env python3
"""Sweep label-noise levels on synthetic data and tabulate filter quality
plus downstream nearest-centroid accuracy before/after denoising.

Example:
    python3 scripts/run_noise_sweep.py --noise 0.0 0.2 0.4 0.6 --seeds 5 \
        --center-mode chain --fit mean --csv sweep.csv
"""

import argparse
import csv
import sys

import numpy as np

from densefilter import (
    DenoiseParams,
    SynthConfig,
    denoise,
    generate,
    nearest_centroid_accuracy,
    split_train_test,
)


def run_cell(noise, seed, args):
    cfg = SynthConfig(
        k=args.k,
        per_class=args.train_per_class + args.test_per_class,
        dim=args.dim,
        class_sep=args.class_sep,
        noise_frac=noise,
        seed=seed,
        center_mode=args.center_mode,
    )
    ds, truth = generate(cfg)
    train, test, noise_mask = split_train_test(ds, truth, args.train_per_class)
    params = DenoiseParams(
        eps=args.eps, min_pts=args.min_pts, kde_h=args.kde_h,
        kde_h_mode=args.kde_h_mode,
    )
    before = nearest_centroid_accuracy(
        train, train.labeled_indices(), test, fit=args.fit
    )
    out = denoise(train, params)
    after = nearest_centroid_accuracy(train, out.kept, test, fit=args.fit)
    rm = out.removed.mask(train.n)
    km = out.kept.mask(train.n)
    noisy = noise_mask.sum()
    return {
        "noise": noise,
        "seed": seed,
        "removed_fraction": rm.sum() / train.n,
        "recall": (rm & noise_mask).sum() / noisy if noisy else float("nan"),
        "precision": (rm & noise_mask).sum() / rm.sum() if rm.sum() else float("nan"),
        "residual": (km & noise_mask).sum() / km.sum(),
        "acc_before": before,
        "acc_after": after,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, nargs="+", default=[0.0, 0.2, 0.4, 0.6])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--class-sep", type=float, default=6.0)
    ap.add_argument("--train-per-class", type=int, default=400)
    ap.add_argument("--test-per-class", type=int, default=200)
    ap.add_argument("--center-mode", choices=["simplex", "random", "chain"],
                    default="simplex")
    ap.add_argument("--fit", choices=["median", "mean"], default="median")
    ap.add_argument("--eps", type=float, default=5.0)
    ap.add_argument("--min-pts", type=int, default=30)
    ap.add_argument("--kde-h", type=float, default=0.3)
    ap.add_argument("--kde-h-mode", choices=["absolute", "relative"],
                    default="absolute")
    ap.add_argument("--csv", help="write per-run rows to this CSV")
    args = ap.parse_args()

    rows = [
        run_cell(noise, seed, args)
        for noise in args.noise
        for seed in range(1, args.seeds + 1)
    ]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.csv}", file=sys.stderr)

    print(f"{'noise':>6} {'removed':>8} {'recall':>7} {'precis':>7} "
          f"{'residual':>8} {'before':>7} {'after':>7} {'gain':>6}")
    for noise in args.noise:
        cell = [r for r in rows if r["noise"] == noise]
        mean = lambda key: float(np.nanmean([r[key] for r in cell]))  # noqa: E731
        print(
            f"{noise:>6.2f} {mean('removed_fraction'):>8.3f} {mean('recall'):>7.3f} "
            f"{mean('precision'):>7.3f} {mean('residual'):>8.4f} "
            f"{mean('acc_before'):>7.4f} {mean('acc_after'):>7.4f} "
            f"{100 * (mean('acc_after') - mean('acc_before')):>+6.2f}"
        )


if __name__ == "__main__":
    main()
