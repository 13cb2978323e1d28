#!/usr/bin/env python3
"""Sweep the ambiguity tolerance eta and tabulate coverage vs selective
accuracy on a noisy synthetic test set (train once, calibrate once).

Example:
    python3 scripts/run_coverage_sweep.py --targets 1.0 0.95 0.9 0.85 0.8 --csv cov.csv
"""

import argparse
import csv
import sys


from densefilter import (
    DenoiseParams,
    SynthConfig,
    calibrate,
    denoise,
    eta_for_coverage,
    filter_testset,
    generate,
)
from densefilter.abstain import AbstainCalibration


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--targets", type=float, nargs="+",
                    default=[1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7])
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--class-sep", type=float, default=4.0)
    ap.add_argument("--train-per-class", type=int, default=400)
    ap.add_argument("--test-per-class", type=int, default=600)
    ap.add_argument("--test-noise", type=float, default=0.1)
    ap.add_argument("--ood-count", type=int, default=0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--eps", type=float, default=5.0)
    ap.add_argument("--min-pts", type=int, default=30)
    ap.add_argument("--csv", help="write rows to this CSV")
    args = ap.parse_args()

    train, _ = generate(SynthConfig(
        k=args.k, per_class=args.train_per_class, dim=args.dim,
        class_sep=args.class_sep, seed=args.seed,
    ))
    outcome = denoise(train, DenoiseParams(eps=args.eps, min_pts=args.min_pts))
    cal = calibrate(train, outcome, eta=0.0)
    test, _ = generate(SynthConfig(
        k=args.k, per_class=args.test_per_class, dim=args.dim,
        class_sep=args.class_sep, noise_frac=args.test_noise,
        ood_count=args.ood_count, seed=args.seed + 1000,
    ))

    rows = []
    for target in sorted(args.targets, reverse=True):
        try:
            eta, realized = eta_for_coverage(test, cal, target)
        except Exception as exc:
            print(f"target {target}: {exc}", file=sys.stderr)
            continue
        swept = AbstainCalibration(centroids=cal.centroids, tau=cal.tau, eta=eta)
        _, summary = filter_testset(test, swept)
        rows.append({
            "target": target,
            "eta": eta,
            "coverage": summary["coverage"],
            "selective_accuracy": summary["selective_accuracy"],
            "abstain_ood": summary["counts"]["abstain_ood"],
            "abstain_ambiguous": summary["counts"]["abstain_ambiguous"],
        })

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.csv}", file=sys.stderr)

    print(f"{'target':>7} {'eta':>9} {'coverage':>9} {'accuracy':>9} "
          f"{'ood':>5} {'ambig':>6}")
    for r in rows:
        print(f"{r['target']:>7.2f} {r['eta']:>9.4f} {r['coverage']:>9.4f} "
              f"{r['selective_accuracy']:>9.4f} {r['abstain_ood']:>5} "
              f"{r['abstain_ambiguous']:>6}")


if __name__ == "__main__":
    main()
