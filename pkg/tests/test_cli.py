import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from densefilter.cli import main

SYNTH = [
    "synth", "--k", "5", "--per-class", "200", "--dim", "16",
    "--class-sep", "6", "--seed", "3",
]
DENOISE_FLAGS = ["--eps", "5.0", "--min-pts", "30", "--kde-h", "0.3"]


def run(argv):
    return main([str(a) for a in argv])


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run(SYNTH + ["--noise-frac", "0.2", "--out", root / "train.emb1",
                        "--truth-out", root / "train.truth.json"]) == 0
    assert run(SYNTH + ["--seed", "90", "--ood-count", "40",
                        "--out", root / "test.emb1",
                        "--truth-out", root / "test.truth.json"]) == 0
    assert run(["denoise", "--input", root / "train.emb1",
                "--out-dir", root / "dn", "--truth", root / "train.truth.json"]
               + DENOISE_FLAGS) == 0
    assert run(["calibrate", "--input", root / "train.emb1",
                "--report", root / "dn" / "report.json",
                "--eta", "0.0", "--out", root / "cal.json"]) == 0
    return root


class TestSynth:
    def test_same_seed_identical_files(self, tmp_path):
        a, b = tmp_path / "a.emb1", tmp_path / "b.emb1"
        assert run(SYNTH + ["--out", a]) == 0
        assert run(SYNTH + ["--out", b]) == 0
        assert sha(a) == sha(b)

    def test_different_seed_differs(self, tmp_path):
        a, b = tmp_path / "a.emb1", tmp_path / "b.emb1"
        assert run(SYNTH + ["--out", a]) == 0
        assert run(SYNTH + ["--seed", "4", "--out", b]) == 0
        assert sha(a) != sha(b)

    def test_csv_format_end_to_end(self, tmp_path):
        csv_in = tmp_path / "t.csv"
        assert run(["synth", "--k", "3", "--per-class", "80", "--dim", "4",
                    "--class-sep", "6", "--format", "csv", "--out", csv_in]) == 0
        assert csv_in.read_text().splitlines()[0] == "f0,f1,f2,f3,label"
        assert run(["denoise", "--input", csv_in, "--format", "csv",
                    "--out-dir", tmp_path / "dn", "--eps", "2.5",
                    "--min-pts", "10"]) == 0


class TestDenoise:
    def test_clean_input_removes_nothing(self, tmp_path):
        # 400/class keeps isolated tail samples below the 1% peak floor
        assert run(SYNTH + ["--per-class", "400", "--out", tmp_path / "c.emb1"]) == 0
        assert run(["denoise", "--input", tmp_path / "c.emb1",
                    "--out-dir", tmp_path / "dn"] + DENOISE_FLAGS) == 0
        assert (tmp_path / "dn" / "removed.idx").read_text() == ""

    def test_missing_input_exit_2(self, capsys):
        code = run(["denoise", "--input", "/nonexistent.emb1", "--out-dir", "/tmp/x"]
                   + DENOISE_FLAGS)
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_missing_required_flag_exit_1(self, capsys):
        assert run(["denoise", "--input", "/nonexistent.emb1",
                    "--out-dir", "/tmp/x"]) == 1

    def test_noisy_report_recall(self, workdir):
        report = json.loads((workdir / "dn" / "report.json").read_text())
        assert report["ground_truth_scores"]["overall"]["recall"] >= 0.85

    def test_rerun_from_report_config_byte_identical(self, workdir, tmp_path):
        report_path = workdir / "dn" / "report.json"
        before = {p.name: sha(p) for p in (workdir / "dn").iterdir()}
        assert run(["denoise", "--config", report_path]) == 0
        after = {p.name: sha(p) for p in (workdir / "dn").iterdir()}
        assert before == after

    def test_flag_overrides_config_file(self, workdir, tmp_path):
        cfg = {"input": str(workdir / "train.emb1"), "eps": 5.0, "min_pts": 30,
               "out_dir": str(tmp_path / "dn1")}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert run(["denoise", "--config", cfg_path,
                    "--out-dir", tmp_path / "dn2"]) == 0
        assert (tmp_path / "dn2" / "report.json").exists()
        assert not (tmp_path / "dn1").exists()

    def test_unknown_config_key_exit_1(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps({"bogus": 1}))
        assert run(["denoise", "--config", cfg_path]) == 1


class TestCalibrate:
    def test_eta_recorded_verbatim(self, workdir):
        cal = json.loads((workdir / "cal.json").read_text())
        assert cal["eta"] == 0.0
        assert cal["schema"] == "densefilter-calibration/1"

    def test_kept_out_of_range_exit_2(self, workdir, tmp_path):
        bad = tmp_path / "bad.idx"
        bad.write_text("999999\n")
        code = run(["calibrate", "--input", workdir / "train.emb1",
                    "--kept", bad, "--out", tmp_path / "cal.json"])
        assert code == 2

    def test_no_denoise_mode(self, workdir, tmp_path):
        assert run(["calibrate", "--input", workdir / "train.emb1", "--no-denoise",
                    "--eta", "0.1", "--out", tmp_path / "cal.json"]) == 0
        cal = json.loads((tmp_path / "cal.json").read_text())
        assert cal["k"] == 5 and len(cal["centroids"]) == 5

    def test_calibration_roundtrip_same_decisions(self, workdir, tmp_path):
        out1, out2 = tmp_path / "ab1", tmp_path / "ab2"
        for out in (out1, out2):
            assert run(["abstain", "--input", workdir / "test.emb1",
                        "--calibration", workdir / "cal.json",
                        "--out-dir", out]) == 0
        assert sha(out1 / "decisions.csv") == sha(out2 / "decisions.csv")


class TestAbstain:
    def test_tau_inf_eta_zero_coverage_one(self, workdir, tmp_path):
        out = tmp_path / "ab"
        assert run(["abstain", "--input", workdir / "test.emb1",
                    "--calibration", workdir / "cal.json",
                    "--tau-override", "inf", "--eta", "0", "--out-dir", out]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["coverage"] == 1.0

    def test_planted_ood_abstained(self, workdir, tmp_path):
        out = tmp_path / "ab"
        assert run(["abstain", "--input", workdir / "test.emb1",
                    "--calibration", workdir / "cal.json", "--out-dir", out]) == 0
        truth = json.loads((workdir / "test.truth.json").read_text())
        rows = (out / "decisions.csv").read_text().splitlines()[1:]
        for i in truth["ood_indices"]:
            assert rows[i].split(",")[1] == "abstain_ood"

    def test_eta_sweep_coverage_non_increasing(self, workdir, tmp_path):
        coverages = []
        for i, eta in enumerate(np.linspace(0, 3, 7)):
            out = tmp_path / f"ab{i}"
            assert run(["abstain", "--input", workdir / "test.emb1",
                        "--calibration", workdir / "cal.json",
                        "--eta", eta, "--out-dir", out]) == 0
            coverages.append(json.loads((out / "summary.json").read_text())["coverage"])
        assert all(a >= b for a, b in zip(coverages, coverages[1:]))

    def test_target_coverage(self, workdir, tmp_path):
        out = tmp_path / "ab"
        assert run(["abstain", "--input", workdir / "test.emb1",
                    "--calibration", workdir / "cal.json",
                    "--target-coverage", "0.8", "--out-dir", out]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["coverage"] <= 0.8
        assert summary["coverage_at_eta"] == summary["coverage"]

    def test_unreachable_target_exit_3(self, workdir, tmp_path):
        code = run(["abstain", "--input", workdir / "test.emb1",
                    "--calibration", workdir / "cal.json",
                    "--target-coverage", "0.999999", "--out-dir", tmp_path / "x"])
        assert code == 3


class TestReportCmd:
    def test_table_on_stdout(self, workdir, capsys):
        assert run(["report", "--report", workdir / "dn" / "report.json"]) == 0
        out = capsys.readouterr().out
        assert "class" in out and "verdict" in out and "totals:" in out

    def test_histogram_csvs_sum_to_member_counts(self, workdir, tmp_path, capsys):
        assert run(["report", "--report", workdir / "dn" / "report.json",
                    "--hist-dir", tmp_path / "csv"]) == 0
        report = json.loads((workdir / "dn" / "report.json").read_text())
        for c in report["classes"]:
            hist = tmp_path / "csv" / f"hist_class{c['class_id']}.csv"
            if c["otsu"] is None:
                assert not hist.exists()
                continue
            rows = hist.read_text().splitlines()[1:]
            total = sum(int(r.split(",")[2]) for r in rows)
            assert total == c["counts"]["members"]
            kde_csv = tmp_path / "csv" / f"kde_class{c['class_id']}.csv"
            assert len(kde_csv.read_text().splitlines()) == 513


class TestValidate:
    def test_checksum_matches_file(self, workdir, capsys):
        assert run(["validate", "--input", workdir / "train.emb1"]) == 0
        out = capsys.readouterr().out
        digest = out.strip().split("sha256=")[1]
        assert digest == sha(workdir / "train.emb1")


class TestConsoleEntrypoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "densefilter", "synth",
             "--out", str(tmp_path / "s.emb1"), "--k", "2", "--per-class", "20",
             "--dim", "3"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert "n=40" in proc.stdout

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "densefilter", "frobnicate"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 1
