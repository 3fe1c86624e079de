"""Command line entry points: exit codes, report shapes, determinism."""

import json
from pathlib import Path

import pytest

from filtration_lab.cli import CHECKS, main

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "filtration_lab" / "fixtures"
BIN1 = str(FIXTURES / "bin1.json")
TER1_GA = str(FIXTURES / "ter1_ga.json")
TER1_GB = str(FIXTURES / "ter1_gb.json")


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv, "--format", "json")
    return code, json.loads(out), err


class TestRun:
    def test_ga_selected_checks_pass(self, capsys):
        code, report, _ = run_json(
            capsys, "run", TER1_GA, "--checks", "drift,multiplier")
        assert code == 0
        assert report["verdict"] == "pass"
        assert [c["name"] for c in report["checks"]] == ["drift", "multiplier"]
        assert all(c["status"] == "pass" for c in report["checks"])
        assert report["tool"] == "filtration-lab"
        assert report["scenario_hash"]

    def test_ga_default_checks_pass(self, capsys):
        code, report, _ = run_json(capsys, "run", TER1_GA)
        assert code == 0
        assert report["verdict"] == "pass"

    def test_bin1_passes(self, capsys):
        code, report, _ = run_json(capsys, "run", BIN1)
        assert code == 0
        assert report["verdict"] == "pass"

    def test_ga_viability_fails_with_witness(self, capsys):
        code, report, _ = run_json(
            capsys, "run", TER1_GA, "--checks", "viability")
        assert code == 1
        assert report["verdict"] == "fail"
        text = json.dumps(report)
        assert "b|c" in text

    def test_empty_check_list_runs_nothing(self, capsys):
        code, report, _ = run_json(capsys, "run", TER1_GA, "--checks", "")
        assert code == 0
        assert report["checks"] == []

    def test_unknown_check_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "run", TER1_GA, "--checks", "zeta")
        assert code == 2
        assert "unknown check" in err

    def test_missing_file_is_usage_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "run", str(tmp_path / "nope.json"))
        assert code == 2
        assert err

    def test_bad_json_is_usage_error(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{oops", encoding="utf-8")
        code, _, err = run_cli(capsys, "run", str(path))
        assert code == 2
        assert err

    def test_table_output_mentions_checks(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", TER1_GA, "--checks", "drift")
        assert code == 0
        assert "drift" in out and "pass" in out


class TestDeterminism:
    def test_run_reports_byte_identical(self, capsys, tmp_path):
        first = tmp_path / "one.json"
        second = tmp_path / "two.json"
        for target in (first, second):
            code = main(["run", TER1_GA, "--format", "json",
                         "--out", str(target)])
            capsys.readouterr()
            assert code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_fuzz_reports_byte_identical(self, capsys, tmp_path):
        first = tmp_path / "one.json"
        second = tmp_path / "two.json"
        for target in (first, second):
            code = main(["fuzz", "--count", "3", "--seed", "11",
                         "--format", "json", "--out", str(target),
                         "--repro-dir", str(tmp_path)])
            capsys.readouterr()
            assert code == 0
        assert first.read_bytes() == second.read_bytes()


class TestFuzz:
    def test_small_campaign_passes(self, capsys, tmp_path):
        code, report, _ = run_json(
            capsys, "fuzz", "--count", "4", "--seed", "2",
            "--repro-dir", str(tmp_path))
        assert code == 0
        assert report["verdict"] == "pass"
        assert report["failures"] == 0
        assert len(report["results"]) == 4
        assert [row["seed"] for row in report["results"]] == [2, 3, 4, 5]
        probed = 0
        for row in report["results"]:
            assert row["verdict"] == "pass"
            names = {c["name"] for c in row["checks"]}
            # the planted-defect probe needs a node with three children
            assert names - {"mrp-adversarial"} == set(CHECKS)
            probed += "mrp-adversarial" in names
        assert probed > 0

    def test_horizon_and_branching_knobs(self, capsys, tmp_path):
        code, report, _ = run_json(
            capsys, "fuzz", "--count", "2", "--seed", "5",
            "--horizon", "1", "--branching", "2",
            "--checks", "mrp,star-to-dot", "--repro-dir", str(tmp_path))
        assert code == 0
        assert report["params"]["horizon"] == 1
        assert report["params"]["max_branching"] == 2


class TestCheckMrp:
    def test_ga_basis_report(self, capsys):
        code, report, _ = run_json(capsys, "check-mrp", TER1_GA)
        assert code == 0
        assert report["mrp"] is True
        assert report["multiplicity"] == {"1:r": 3}
        assert report["ranks"] == {"r": [3, 2]}
        assert report["counterexample"] is None
        slots = report["constraint"]["slots"]
        assert slots[0]["values"] == [["-1", "1"], ["0", "-2"], ["1", "1"]]


class TestViability:
    def test_gb_audit_passes(self, capsys):
        code, report, _ = run_json(capsys, "viability", TER1_GB)
        assert code == 0
        assert report["verdict"] == "pass"
        (search,) = report["enlargements"].values()
        assert search["viable"] is True
        for result in search["results"]:
            assert result["feasible"] is True
            assert result["violations"] == []

    def test_ga_audit_fails(self, capsys, tmp_path):
        # same scenario, but ask for the deflator search against S under GA
        doc = json.loads(Path(TER1_GA).read_text(encoding="utf-8"))
        doc["viability_family"] = ["S"]
        path = tmp_path / "ga_family.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        code, report, _ = run_json(capsys, "viability", str(path))
        assert code == 1
        assert report["verdict"] == "fail"
        (search,) = report["enlargements"].values()
        result = search["results"][0]
        assert set(result["violations"]) == {"a", "b|c"}
        statuses = {row["atom"]: row["status"] for row in result["audit"]}
        assert statuses["a"] == "infeasible"


class TestExplain:
    @pytest.mark.parametrize("name", sorted(CHECKS))
    def test_each_check_has_prose(self, capsys, name):
        code, out, _ = run_cli(capsys, "explain", name)
        assert code == 0
        assert len(out.strip()) > 40

    def test_unknown_check(self, capsys):
        code, _, err = run_cli(capsys, "explain", "zeta")
        assert code == 2
        assert "unknown check" in err


class TestTiming:
    def test_timing_flag_adds_seconds(self, capsys):
        code, report, _ = run_json(
            capsys, "run", TER1_GA, "--checks", "drift", "--timing")
        assert code == 0
        assert "timing" in report and "seconds" in report["timing"]
