"""Command line behavior: exit codes, reports, reproducibility."""

import json
from pathlib import Path

import pytest

from poisson_chaos.cli import main
from poisson_chaos.report import parse_report


@pytest.fixture
def tiny_config(tmp_path):
    document = {
        "space": {"S1": {"a": 1.0}, "S2": {"a": 0.5, "b": 1.0},
                  "S3": {"a": 0.3, "b": 0.3, "c": 0.4}},
        "functionals": {
            "exp_s1_fifth": {"kind": "exponential", "space": "S1", "v": [0.2]},
            "exp_s2_a": {"kind": "exponential", "space": "S2", "v": [0.3, 0.7]},
            "exp_s3_mild": {"kind": "exponential", "space": "S3",
                            "v": [0.2, 0.35, 0.15]},
        },
        "mc": {"replicates": 5000, "seed": 11},
        "suites": ["laplace", "poincare"],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


class TestExitCodes:
    def test_list_exits_zero(self, capsys):
        assert main(["--list"]) == 0
        out = capsys.readouterr().out
        assert "laplace" in out and "fkg" in out

    def test_missing_suite_is_usage_error(self, capsys):
        assert main([]) == 2

    def test_unknown_suite_is_usage_error(self, capsys):
        assert main(["nosuch"]) == 2

    def test_unreadable_config_is_usage_error(self, tmp_path, capsys):
        assert main(["laplace", "--config", str(tmp_path / "missing.json")]) == 2

    def test_malformed_config_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert main(["laplace", "--config", str(bad)]) == 2

    def test_dimension_mismatch_is_usage_error(self, tmp_path, capsys):
        document = {"space": {"S1": {"a": 1.0}},
                    "kernels": {"bad": {"space": "S1", "values": [1.0, 2.0]}}}
        path = tmp_path / "mismatch.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        assert main(["laplace", "--config", str(path)]) == 2

    def test_passing_suite_exits_zero(self, tiny_config, capsys):
        assert main(["laplace", "--config", str(tiny_config)]) == 0

    def test_failing_case_exits_one(self, tiny_config, tmp_path, capsys):
        # an impossibly tight policy turns sampled agreement into failure
        document = json.loads(Path(tiny_config).read_text())
        document["tolerances"] = {"z": 1e-12, "abs_tol": 0.0, "exact_tol": 0.0}
        path = tmp_path / "strict.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        assert main(["laplace", "--config", str(path)]) == 1


class TestReports:
    def test_byte_identical_reruns(self, tiny_config, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["poincare", "--config", str(tiny_config),
                "--seed", "7", "--replicates", "1000"]
        assert main(args + ["--report", str(a)]) == 0
        assert main(args + ["--report", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_sampled_rows(self, tiny_config, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = ["laplace", "--config", str(tiny_config), "--replicates", "2000"]
        main(base + ["--seed", "1", "--report", str(a)])
        main(base + ["--seed", "2", "--report", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_round_trip_and_verdict_consistency(self, tiny_config, tmp_path, capsys):
        for fmt in ("csv", "jsonl"):
            path = tmp_path / f"report.{fmt}"
            main(["laplace", "--config", str(tiny_config),
                  "--report", str(path), "--format", fmt])
            rows = parse_report(path.read_text(encoding="utf-8"), fmt)
            assert rows
            for row in rows:
                recomputed = "PASS" if row["abs_diff"] <= row["tolerance"] else "FAIL"
                assert row["verdict"] == recomputed
                assert row["suite"] == "laplace"

    def test_timing_defaults_to_zero_in_files(self, tiny_config, tmp_path, capsys):
        path = tmp_path / "report.csv"
        main(["laplace", "--config", str(tiny_config), "--report", str(path)])
        rows = parse_report(path.read_text(encoding="utf-8"), "csv")
        assert all(row["wall_time_ms"] == 0 for row in rows)

    def test_report_header_matches_schema(self, tiny_config, tmp_path, capsys):
        path = tmp_path / "report.csv"
        main(["laplace", "--config", str(tiny_config), "--report", str(path)])
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == ("suite,case_id,lhs,rhs,se_combined,abs_diff,"
                          "tolerance,verdict,replicates,seed,wall_time_ms")

    def test_default_config_by_name(self, tmp_path, capsys):
        # the literal name selects the packaged configuration
        path = tmp_path / "report.csv"
        code = main(["product_formula", "--config", "default",
                     "--report", str(path)])
        assert code == 0 and path.exists()

    def test_thread_env_does_not_change_rows(self, tiny_config, tmp_path,
                                             monkeypatch, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["laplace", "--config", str(tiny_config), "--replicates", "40000"]
        monkeypatch.setenv("POISSON_CHAOS_THREADS", "1")
        main(args + ["--report", str(a)])
        monkeypatch.setenv("POISSON_CHAOS_THREADS", "4")
        main(args + ["--report", str(b)])
        assert a.read_bytes() == b.read_bytes()
