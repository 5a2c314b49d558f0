import json
import math

import numpy as np
import pytest

from lpseries import verify
from lpseries.basis import RadialBasis, build_radial_basis
from lpseries.cli import main
from lpseries.quadrature import build_grid
from lpseries.specfun import bessel_zeros


def run_cli(*argv):
    return main(list(argv))


class TestBasisCommand:
    def test_zero_column_and_p2(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli(
            "basis", "--dim", "2", "--nmax", "3", "--p", "2", "--out", str(out)
        ) == 0
        lines = (out / "basis.csv").read_text().splitlines()
        assert lines[0].startswith("n,z_n,beta_n,sup_norm")
        assert lines[1].startswith("1,2.404825")
        for row in lines[1:]:
            p2 = float(row.split(",")[-1])
            assert p2 == pytest.approx(1.0, abs=1e-6)

    def test_seventeen_digit_format(self, tmp_path):
        out = tmp_path / "run"
        run_cli("basis", "--dim", "2", "--nmax", "1", "--out", str(out))
        z_field = (out / "basis.csv").read_text().splitlines()[1].split(",")[1]
        assert len(z_field.replace(".", "").lstrip("0")) >= 16
        assert float(z_field) == pytest.approx(2.404825557695773, rel=1e-12)

    def test_rerun_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_cli("basis", "--dim", "3", "--nmax", "4", "--out", str(a))
        run_cli("basis", "--dim", "3", "--nmax", "4", "--out", str(b))
        assert (a / "basis.csv").read_bytes() == (b / "basis.csv").read_bytes()
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()

    def test_write_once(self, tmp_path):
        out = tmp_path / "run"
        run_cli("basis", "--dim", "2", "--nmax", "2", "--out", str(out))
        with pytest.raises(SystemExit, match="refusing to overwrite"):
            run_cli("basis", "--dim", "2", "--nmax", "2", "--out", str(out))

    def test_manifest_contents(self, tmp_path):
        out = tmp_path / "run"
        run_cli("basis", "--dim", "2", "--nmax", "2", "--out", str(out))
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "basis"
        assert manifest["master_seed"] == 20260101
        assert manifest["config"]["nmax"] == 2
        assert any(p.endswith("basis.csv") for p in manifest["outputs"])


class TestSampleCommand:
    def test_field_csv_and_manifest(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "sample",
            "--dim",
            "2",
            "--nmax",
            "8",
            "--seq",
            "powerlaw:1:1",
            "--master-seed",
            "42",
            "--out",
            str(out),
        )
        lines = (out / "field.csv").read_text().splitlines()
        assert lines[0] == "r,re,im"
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["sequence"] == {
            "kind": "powerlaw",
            "a": 1.0,
            "alpha": 1.0,
        }
        assert len(lines) - 1 == manifest["config"]["grid_nodes"]

    def test_seeded_rerun_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run_cli(
                "sample", "--nmax", "8", "--master-seed", "7", "--out", str(out)
            )
        assert (a / "field.csv").read_bytes() == (b / "field.csv").read_bytes()


class TestAnalysisCommands:
    def test_classify_json(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "classify",
            "--family",
            "constant",
            "--p",
            "10",
            "--ladder",
            "16,32,64,128,256",
            "--out",
            str(out),
        )
        payload = json.loads((out / "classify.json").read_text())
        assert payload["verdict"] == "convergent"
        assert len(payload["ladder"]) == 5
        assert payload["ladder"][0]["N"] == 16
        assert "M_N" in payload["ladder"][0]

    def test_alpha_star_json(self, tmp_path):
        out = tmp_path / "run"
        run_cli("alpha-star", "--dim", "4", "--seq", "powerlaw:1:1", "--out", str(out))
        payload = json.loads((out / "alpha_star.json").read_text())
        assert payload["alpha_star"] == pytest.approx(2.0, abs=0.05)
        assert payload["divergence_exponent_bound"] == pytest.approx(4.0, abs=0.15)

    def test_pcr_constant_family(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "pcr",
            "--family",
            "constant",
            "--ladder",
            "16,32,64,128,256",
            "--out",
            str(out),
        )
        payload = json.loads((out / "pcr.json").read_text())
        assert payload["p_upper_infinite"] is True
        assert payload["p_lower"] == 20.0

    def test_expected_norm_with_mc(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "expected-norm",
            "--dim",
            "2",
            "--nmax",
            "20",
            "--p",
            "4",
            "--seeds",
            "500",
            "--out",
            str(out),
        )
        payload = json.loads((out / "expected_norm.json").read_text())
        assert payload["mc_mean"] == pytest.approx(
            payload["M_N"], abs=3.5 * payload["mc_standard_error"]
        )

    def test_adversarial_not_found_payload(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "adversarial",
            "--dim",
            "2",
            "--p",
            "3",
            "--targets",
            "1",
            "--ncap",
            "2000",
            "--out",
            str(out),
        )
        payload = json.loads((out / "adversarial.json").read_text())
        assert payload["found"] is False

    def test_fernique_csv(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "fernique",
            "--nmax",
            "20",
            "--seeds",
            "200",
            "--eps-ladder",
            "0,0.001",
            "--out",
            str(out),
        )
        lines = (out / "fernique.csv").read_text().splitlines()
        assert lines[0] == "eps,mean_exp"
        assert lines[1] == "0,1"

    def test_gibbs_outputs(self, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "gibbs", "--nmax", "16", "--seeds", "400", "--out", str(out)
        )
        stats = json.loads((out / "gibbs_stability.json").read_text())
        assert 0.0 < stats["N"]["mean"] < 1.0
        assert stats["2N"]["n_modes"] == 32
        hist = (out / "gibbs_hist_16.csv").read_text().splitlines()
        total = sum(int(row.split(",")[2]) for row in hist[1:])
        assert total == 400


class TestConfigFile:
    def test_config_fills_defaults_flags_win(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nmax = 3\ndim = 3\n# comment\n")
        out = tmp_path / "a"
        run_cli("basis", "--config", str(cfg), "--out", str(out))
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["nmax"] == 3
        assert manifest["config"]["dim"] == 3
        out2 = tmp_path / "b"
        run_cli("basis", "--config", str(cfg), "--dim", "2", "--out", str(out2))
        manifest2 = json.loads((out2 / "manifest.json").read_text())
        assert manifest2["config"]["dim"] == 2
        assert manifest2["config"]["nmax"] == 3

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        with pytest.raises(SystemExit, match="unknown config key"):
            run_cli("basis", "--config", str(cfg), "--out", str(tmp_path / "x"))


class TestVerifyCommand:
    def test_subset_passes_and_reports(self, tmp_path, capsys):
        out = tmp_path / "v"
        code = run_cli(
            "verify",
            "--checks",
            "c01_zero_accuracy,c05_gaussian_moments",
            "--out",
            str(out),
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "PASS c01_zero_accuracy" in printed
        report = json.loads((out / "verify_report.json").read_text())
        assert report["all_passed"] is True
        assert "runtime" not in json.dumps(report["checks"][0]["measured"]).replace(
            "runtime_cap_s", ""
        )
        timings = json.loads((out / "verify_timings.json").read_text())
        assert set(timings) == {"c01_zero_accuracy", "c05_gaussian_moments"}

    def test_reports_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run_cli(
                "verify",
                "--checks",
                "c05_gaussian_moments,c09_alpha_star",
                "--master-seed",
                "777",
                "--out",
                str(out),
            )
        assert (a / "verify_report.json").read_bytes() == (
            b / "verify_report.json"
        ).read_bytes()

    def test_unknown_check_rejected(self, tmp_path):
        with pytest.raises(SystemExit, match="unknown check ids"):
            run_cli("verify", "--checks", "c99_nope")

    def test_corrupted_normalizers_fail_named_check(self):
        zt = bessel_zeros(0.0, 30)
        grid = build_grid(2, float(zt.zeros[-1]))
        good = build_radial_basis(2, 30, grid)
        corrupt = RadialBasis(
            d=2,
            nu=0.0,
            zeros=good.zeros,
            normalizers=good.normalizers * 1.05,
            n_max=30,
        )
        passed, _, measured = verify.check_orthonormality(0, basis_override=corrupt)
        assert passed is False
        assert measured["d2_max_offdiag"] > 1e-6

    def test_failed_check_lists_expected_vs_measured(self, tmp_path, capsys):
        results = verify.run_checks(["c01_zero_accuracy"], master_seed=1)
        r = results[0]
        assert r.check_id == "c01_zero_accuracy"
        assert "first_zero" in r.measured
        assert "bisection_oracle" in r.measured
        assert r.expected


def test_out_required_for_data_commands():
    with pytest.raises(SystemExit, match="--out is required"):
        run_cli("basis", "--nmax", "2")
