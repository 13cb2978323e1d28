"""Command-line front door: densefilter denoise|calibrate|abstain|synth|report|validate.

Every artifact embeds the effective config under a "config" key; pointing
--config at such a file (or at a bare config JSON) reruns the command with
those values, and explicit flags override the file. Exit codes: 0 success,
1 usage error, 2 data error, 3 pipeline error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import abstain as abst
from . import report as rep
from .dataset import (
    EmbeddingDataset,
    load_dataset,
    load_index_file,
    save_dataset,
    save_index_file,
)
from .denoise import DenoiseParams, denoise, denoise_report
from .errors import DataError, DensefilterError, PipelineError
from .synth import SynthConfig, generate, load_ground_truth, save_ground_truth

SUMMARY_SCHEMA = "densefilter-summary/1"


class UsageError(DensefilterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        raise UsageError(message)


def _load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise DataError(f"{path}: config must be a JSON object")
    if "schema" in obj and isinstance(obj.get("config"), dict):
        return obj["config"]  # rerun straight from a report/summary snapshot
    return obj


def _merge_config(defaults: dict, args: argparse.Namespace) -> dict:
    provided = vars(args)
    cfg = dict(defaults)
    config_path = provided.pop("config", None)
    if config_path:
        file_cfg = _load_config_file(config_path)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    cfg.update({k: v for k, v in provided.items() if k != "command"})
    return cfg


def _require(cfg: dict, key: str) -> None:
    if cfg.get(key) is None:
        raise UsageError(f"missing required option --{key.replace('_', '-')}")


def _write_json(obj: dict, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- synth

SYNTH_DEFAULTS = {
    "out": None,
    "truth_out": None,
    "format": "binary",
    "k": 10,
    "per_class": 500,
    "dim": 16,
    "class_sep": 6.0,
    "within_std": 1.0,
    "noise_frac": 0.0,
    "ood_count": 0,
    "seed": 1,
    "center_mode": "simplex",
    "noise_mode": "uniform",
}


def cmd_synth(cfg: dict) -> int:
    _require(cfg, "out")
    synth_cfg = SynthConfig(
        k=cfg["k"],
        per_class=cfg["per_class"],
        dim=cfg["dim"],
        class_sep=cfg["class_sep"],
        within_std=cfg["within_std"],
        noise_frac=cfg["noise_frac"],
        ood_count=cfg["ood_count"],
        seed=cfg["seed"],
        center_mode=cfg["center_mode"],
        noise_mode=cfg["noise_mode"],
    )
    ds, truth = generate(synth_cfg)
    save_dataset(ds, cfg["out"], format=cfg["format"])
    if cfg["truth_out"]:
        save_ground_truth(truth, cfg["truth_out"], synth_cfg)
    print(f"wrote {cfg['out']}: n={ds.n} dim={ds.dim} k={ds.k}")
    return 0


# ---------------------------------------------------------------- denoise

DENOISE_DEFAULTS = {
    "input": None,
    "out_dir": None,
    "format": "binary",
    "eps": None,
    "min_pts": None,
    "kde_h": 0.3,
    "kde_h_mode": "absolute",
    "kde_grid_size": 512,
    "min_rel_height": 0.01,
    "otsu_bins": 256,
    "min_class_size": 2,
    "min_filter_size": None,
    "l2_normalize": False,
    "threads": 1,
    "truth": None,
    "timings": False,
    "seed": 1,
}


def cmd_denoise(cfg: dict) -> int:
    import os

    for key in ("input", "out_dir", "eps", "min_pts"):
        _require(cfg, key)
    t0 = time.perf_counter()
    ds = load_dataset(cfg["input"], format=cfg["format"])
    params = DenoiseParams(
        eps=cfg["eps"],
        min_pts=cfg["min_pts"],
        kde_h=cfg["kde_h"],
        kde_h_mode=cfg["kde_h_mode"],
        kde_grid_size=cfg["kde_grid_size"],
        peak_min_rel_height=cfg["min_rel_height"],
        otsu_bins=cfg["otsu_bins"],
        min_class_size=cfg["min_class_size"],
        min_filter_size=cfg["min_filter_size"],
        l2_normalize=cfg["l2_normalize"],
        threads=cfg["threads"],
    )
    t1 = time.perf_counter()
    outcome = denoise(ds, params)
    t2 = time.perf_counter()

    noise_mask = labels = None
    if cfg["truth"]:
        truth = load_ground_truth(cfg["truth"])
        noise_mask, labels = truth.noise_mask, ds.labels
    timings = None
    if cfg["timings"]:
        timings = {"load_s": t1 - t0, "denoise_s": t2 - t1}
    report = denoise_report(
        outcome, config=cfg, noise_mask=noise_mask, labels=labels, timings=timings
    )

    os.makedirs(cfg["out_dir"], exist_ok=True)
    save_index_file(outcome.kept, os.path.join(cfg["out_dir"], "kept.idx"))
    save_index_file(outcome.removed, os.path.join(cfg["out_dir"], "removed.idx"))
    _write_json(report, os.path.join(cfg["out_dir"], "report.json"))
    print(
        f"kept {len(outcome.kept)} / removed {len(outcome.removed)} "
        f"of {len(outcome.kept) + len(outcome.removed)} labeled samples"
    )
    for p in outcome.profiles:
        for w in p.warnings:
            print(f"warning: class {p.class_id}: {w}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- calibrate

CALIBRATE_DEFAULTS = {
    "input": None,
    "format": "binary",
    "report": None,
    "kept": None,
    "no_denoise": False,
    "eta": 0.0,
    "ambiguity_sign": "prose",
    "l2_normalize": False,
    "out": None,
}


def cmd_calibrate(cfg: dict) -> int:
    _require(cfg, "input")
    _require(cfg, "out")
    ds = load_dataset(cfg["input"], format=cfg["format"])
    if ds.labels is None:
        raise DataError("calibration requires a labeled dataset")
    literal = cfg["ambiguity_sign"] == "literal"

    if cfg["report"]:
        report = rep.load_report(cfg["report"])
        cal = _calibration_from_report(ds, report, cfg["eta"], literal, cfg.get("kept"))
    else:
        if cfg["no_denoise"]:
            kept = ds.labeled_indices()
        elif cfg["kept"]:
            kept = load_index_file(cfg["kept"], n=ds.n)
        else:
            raise UsageError("need one of --report, --kept, or --no-denoise")
        cal = abst.calibrate_from_kept(
            ds, kept, eta=cfg["eta"], l2_normalize=cfg["l2_normalize"],
            ambiguity_literal=literal,
        )
    abst.save_calibration(cal, cfg["out"], config=cfg)
    print(f"wrote {cfg['out']}: k={cal.k} eta={cal.eta}")
    return 0


def _calibration_from_report(
    ds: EmbeddingDataset, report: dict, eta: float, literal: bool, kept_path
) -> abst.AbstainCalibration:
    """Rebuild tau from a denoise report's centroids and removal lists."""
    from .geometry import distances_to_point, l2_normalize_rows

    if report["dataset"]["n"] != ds.n or report["dataset"]["k"] != ds.k:
        raise DataError("report does not match the dataset")
    l2 = bool(report["config"].get("l2_normalize", False))
    features = l2_normalize_rows(ds.features) if l2 else ds.features
    if kept_path:
        kept_mask = load_index_file(kept_path, n=ds.n).mask(ds.n)
    else:
        kept_mask = ds.labeled_indices().mask(ds.n)
        for c in report["classes"]:
            kept_mask[np.asarray(c["removed_indices"], dtype=np.int64)] = False
    cents = np.asarray([c["centroid"] for c in report["classes"]], dtype=np.float64)
    tau = np.empty(ds.k, dtype=np.float64)
    for c in report["classes"]:
        j = c["class_id"]
        rows = np.flatnonzero((ds.labels == j) & kept_mask)
        if rows.size == 0:
            raise PipelineError(f"class {j} has no kept samples")
        tau[j] = float(distances_to_point(features[rows], cents[j]).max())
    return abst.AbstainCalibration(
        centroids=cents, tau=tau, eta=eta, l2_normalize=l2, ambiguity_literal=literal
    )


# ---------------------------------------------------------------- abstain

ABSTAIN_DEFAULTS = {
    "input": None,
    "format": "binary",
    "calibration": None,
    "out_dir": None,
    "eta": None,
    "target_coverage": None,
    "tau_override": None,
    "ambiguity_sign": None,
    "seed": 1,
}


def cmd_abstain(cfg: dict) -> int:
    import os

    for key in ("input", "calibration", "out_dir"):
        _require(cfg, key)
    test = load_dataset(cfg["input"], format=cfg["format"])
    cal = abst.load_calibration(cfg["calibration"])
    if cfg["tau_override"] is not None:
        tau = float(cfg["tau_override"])
        cal = abst.AbstainCalibration(
            centroids=cal.centroids,
            tau=np.full(cal.k, tau),
            eta=cal.eta,
            l2_normalize=cal.l2_normalize,
            ambiguity_literal=cal.ambiguity_literal,
        )
    if cfg["ambiguity_sign"] is not None:
        cal = abst.AbstainCalibration(
            centroids=cal.centroids, tau=cal.tau, eta=cal.eta,
            l2_normalize=cal.l2_normalize,
            ambiguity_literal=cfg["ambiguity_sign"] == "literal",
        )
    if cfg["eta"] is not None:
        cal = abst.AbstainCalibration(
            centroids=cal.centroids, tau=cal.tau, eta=float(cfg["eta"]),
            l2_normalize=cal.l2_normalize, ambiguity_literal=cal.ambiguity_literal,
        )
    realized = None
    if cfg["target_coverage"] is not None:
        eta, realized = abst.eta_for_coverage(test, cal, cfg["target_coverage"])
        cal = abst.AbstainCalibration(
            centroids=cal.centroids, tau=cal.tau, eta=eta,
            l2_normalize=cal.l2_normalize, ambiguity_literal=cal.ambiguity_literal,
        )
    decisions, summary = abst.filter_testset(test, cal)
    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": cfg,
        **summary,
    }
    if realized is not None:
        summary["target_coverage"] = cfg["target_coverage"]
        summary["coverage_at_eta"] = realized

    os.makedirs(cfg["out_dir"], exist_ok=True)
    abst.decisions_to_csv(decisions, os.path.join(cfg["out_dir"], "decisions.csv"))
    _write_json(summary, os.path.join(cfg["out_dir"], "summary.json"))
    acc = summary["selective_accuracy"]
    print(
        f"coverage {summary['coverage']:.4f}"
        + (f", selective accuracy {acc:.4f}" if acc is not None else "")
    )
    return 0


# ---------------------------------------------------------------- report

REPORT_DEFAULTS = {"report": None, "hist_dir": None}


def cmd_report(cfg: dict) -> int:
    _require(cfg, "report")
    report = rep.load_report(cfg["report"])
    print(rep.render_denoise_table(report))
    if cfg["hist_dir"]:
        written = rep.export_class_csvs(report, cfg["hist_dir"])
        print(f"wrote {len(written)} CSV files to {cfg['hist_dir']}")
    return 0


# ---------------------------------------------------------------- validate

VALIDATE_DEFAULTS = {"input": None, "format": "binary"}


def cmd_validate(cfg: dict) -> int:
    _require(cfg, "input")
    ds = load_dataset(cfg["input"], format=cfg["format"])
    import tempfile
    import os

    fd, tmp = tempfile.mkstemp(suffix=".emb1")
    os.close(fd)
    try:
        save_dataset(ds, tmp, format="binary")
        with open(tmp, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
    finally:
        os.unlink(tmp)
    labels = "none" if ds.labels is None else f"k={ds.k}"
    print(f"ok n={ds.n} dim={ds.dim} labels={labels} sha256={digest}")
    return 0


# ---------------------------------------------------------------- wiring

_COMMANDS = {
    "synth": (cmd_synth, SYNTH_DEFAULTS),
    "denoise": (cmd_denoise, DENOISE_DEFAULTS),
    "calibrate": (cmd_calibrate, CALIBRATE_DEFAULTS),
    "abstain": (cmd_abstain, ABSTAIN_DEFAULTS),
    "report": (cmd_report, REPORT_DEFAULTS),
    "validate": (cmd_validate, VALIDATE_DEFAULTS),
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="densefilter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("synth", help="generate a synthetic labeled embedding file")
    p.add_argument("--out", default=S)
    p.add_argument("--truth-out", dest="truth_out", default=S)
    p.add_argument("--format", choices=["binary", "csv"], default=S)
    p.add_argument("--k", type=int, default=S)
    p.add_argument("--per-class", dest="per_class", type=int, default=S)
    p.add_argument("--dim", type=int, default=S)
    p.add_argument("--class-sep", dest="class_sep", type=float, default=S)
    p.add_argument("--within-std", dest="within_std", type=float, default=S)
    p.add_argument("--noise-frac", dest="noise_frac", type=float, default=S)
    p.add_argument("--ood-count", dest="ood_count", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--center-mode", dest="center_mode",
                   choices=["simplex", "random", "chain"], default=S)
    p.add_argument("--noise-mode", dest="noise_mode",
                   choices=["uniform", "always_wrong"], default=S)
    p.add_argument("--config", default=S)

    p = sub.add_parser("denoise", help="stage 1: filter label noise from training data")
    p.add_argument("--input", default=S)
    p.add_argument("--out-dir", dest="out_dir", default=S)
    p.add_argument("--format", choices=["binary", "csv"], default=S)
    p.add_argument("--eps", type=float, default=S)
    p.add_argument("--min-pts", dest="min_pts", type=int, default=S)
    p.add_argument("--kde-h", dest="kde_h", type=float, default=S)
    p.add_argument("--kde-h-mode", dest="kde_h_mode",
                   choices=["absolute", "relative"], default=S)
    p.add_argument("--kde-grid-size", dest="kde_grid_size", type=int, default=S)
    p.add_argument("--min-rel-height", dest="min_rel_height", type=float, default=S)
    p.add_argument("--otsu-bins", dest="otsu_bins", type=int, default=S)
    p.add_argument("--min-class-size", dest="min_class_size", type=int, default=S)
    p.add_argument("--min-filter-size", dest="min_filter_size", type=int, default=S)
    p.add_argument("--l2-normalize", dest="l2_normalize", action="store_true",
                   default=S)
    p.add_argument("--threads", type=int, default=S)
    p.add_argument("--truth", default=S)
    p.add_argument("--timings", action="store_true", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--config", default=S)

    p = sub.add_parser("calibrate", help="stage 2 setup: centroids, tau and eta")
    p.add_argument("--input", default=S)
    p.add_argument("--format", choices=["binary", "csv"], default=S)
    p.add_argument("--report", default=S)
    p.add_argument("--kept", default=S)
    p.add_argument("--no-denoise", dest="no_denoise", action="store_true", default=S)
    p.add_argument("--eta", type=float, default=S)
    p.add_argument("--ambiguity-sign", dest="ambiguity_sign",
                   choices=["prose", "literal"], default=S)
    p.add_argument("--l2-normalize", dest="l2_normalize", action="store_true",
                   default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--config", default=S)

    p = sub.add_parser("abstain", help="stage 2: predict or abstain on test data")
    p.add_argument("--input", default=S)
    p.add_argument("--format", choices=["binary", "csv"], default=S)
    p.add_argument("--calibration", default=S)
    p.add_argument("--out-dir", dest="out_dir", default=S)
    p.add_argument("--eta", type=float, default=S)
    p.add_argument("--target-coverage", dest="target_coverage", type=float, default=S)
    p.add_argument("--tau-override", dest="tau_override", type=float, default=S)
    p.add_argument("--ambiguity-sign", dest="ambiguity_sign",
                   choices=["prose", "literal"], default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--config", default=S)

    p = sub.add_parser("report", help="render a report as a table, export CSVs")
    p.add_argument("--report", default=S)
    p.add_argument("--hist-dir", dest="hist_dir", default=S)
    p.add_argument("--config", default=S)

    p = sub.add_parser("validate", help="load a dataset and print its checksum")
    p.add_argument("--input", default=S)
    p.add_argument("--format", choices=["binary", "csv"], default=S)
    p.add_argument("--config", default=S)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler, defaults = _COMMANDS[args.command]
        cfg = _merge_config(defaults, args)
        return handler(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse -h
        return 0 if exc.code in (None, 0) else int(exc.code)


if __name__ == "__main__":
    sys.exit(main())
