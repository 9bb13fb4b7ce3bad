"""Tests for the command line interface.

All commands run in-process through main(argv), with stdout and stderr
captured by pytest.
"""

import json
import re

import pytest

from wedgepower.cli import main
from wedgepower.designs import dataset_from_csv, exemplary_dataset, get_preset


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def table_value(out: str, label: str) -> str:
    for line in out.splitlines():
        parts = re.split(r"\s{2,}", line.rstrip(), maxsplit=1)
        if len(parts) == 2 and parts[0] == label:
            return parts[1]
    raise AssertionError(f"label {label!r} not found in output:\n{out}")


class TestPowerCommand:
    def test_table(self, capsys):
        code, out, err = run(capsys, "power", "--preset", "example2")
        assert code == 0 and err == ""
        assert table_value(out, "power") == "0.831"
        assert table_value(out, "ddf") == "45"
        assert table_value(out, "ddf policy") == "containment"
        assert table_value(out, "noncentrality") == "8.889"

    def test_json(self, capsys):
        code, out, _ = run(capsys, "power", "--preset", "example2", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["power"] == pytest.approx(0.830786060282071, rel=1e-10)
        assert payload["ddf"] == 45
        assert payload["ndf"] == 1
        assert "audit" not in payload

    def test_json_audit(self, capsys):
        code, out, _ = run(
            capsys, "power", "--preset", "example5", "--audit", "--format", "json"
        )
        assert code == 0
        payload = json.loads(out)
        audit = payload["audit"]
        assert audit["observations"] == 180
        assert audit["clusters"] == 9
        assert audit["contrast"] == "treated_post"
        assert audit["beta"] == pytest.approx([54.0, 0.0, 2.0, 5.0], abs=1e-9)
        assert audit["components"]["subject"] == pytest.approx(13.5)

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "power", "--preset", "example7", "--format", "csv")
        assert code == 0
        header, row = out.strip().splitlines()
        fields = dict(zip(header.split(","), row.split(",")))
        assert fields["design"] == "swd_cohort"
        assert float(fields["power"]) == pytest.approx(0.8189174030094872, rel=1e-12)
        assert int(fields["ddf"]) == 81

    def test_policy_flag(self, capsys):
        code, out, _ = run(
            capsys,
            "power",
            "--preset",
            "example2",
            "--ddf-policy",
            "residual",
            "--format",
            "json",
        )
        assert code == 0
        assert json.loads(out)["ddf"] == 52

    def test_alpha_override(self, capsys):
        _, strict, _ = run(
            capsys, "power", "--preset", "example2", "--alpha", "0.01",
            "--format", "json",
        )
        assert json.loads(strict)["power"] < 0.831

    def test_bad_alpha(self, capsys):
        code, _, err = run(capsys, "power", "--preset", "example2", "--alpha", "2.0")
        assert code == 2
        assert "--alpha" in err


class TestDeCommand:
    def test_table_with_plan(self, capsys):
        code, out, _ = run(
            capsys, "de", "--preset", "example4", "--n-unclustered", "128"
        )
        assert code == 0
        assert table_value(out, "design effect") == "1.816"
        assert table_value(out, "baseline r") == "0.211"
        assert table_value(out, "observations") == "232.421 -> 233"

    def test_cohort_wedge_plan_json(self, capsys):
        code, out, _ = run(
            capsys,
            "de",
            "--preset",
            "example7",
            "--n-unclustered",
            "34",
            "--format",
            "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["design_effect"] == pytest.approx(0.8882242990654206, rel=1e-12)
        assert payload["baseline_r"] == pytest.approx(0.5285714285714286, rel=1e-12)
        plan = payload["plan"]
        assert plan["observations_raw"] == pytest.approx(90.5988785046729, rel=1e-12)
        assert plan["participants_raw"] == pytest.approx(30.1996261682243, rel=1e-12)
        assert plan["participants"] == 31

    def test_wedge_plan_counts_all_measurements(self, capsys):
        code, out, _ = run(
            capsys, "de", "--preset", "example6", "--n-unclustered", "34",
            "--format", "json",
        )
        payload = json.loads(out)
        assert payload["plan"]["observations"] == 116
        assert payload["plan"]["participants"] == 116

    def test_unclustered_design(self, capsys):
        code, out, _ = run(
            capsys, "de", "--preset", "example1", "--n-unclustered", "34",
            "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["design_effect"] == 1.0
        assert payload["plan"]["observations"] == 34

    def test_no_closed_form_for_mixed_sizes(self, capsys):
        code, _, err = run(capsys, "de", "--preset", "example2_51")
        assert code == 2
        assert "common cluster size" in err


class TestMcCommand:
    def test_table_deterministic(self, capsys):
        args = ("mc", "--preset", "example1", "--reps", "400", "--seed", "5")
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        assert table_value(out1, "replicates") == "400"

    def test_json_reports_analytic_reference(self, capsys):
        code, out, _ = run(
            capsys,
            "mc", "--preset", "example2", "--reps", "2000", "--seed", "1",
            "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["replicates"] == 2000
        assert payload["analytic"] == pytest.approx(0.830786060282071, rel=1e-10)
        assert abs(payload["estimate"] - payload["analytic"]) <= 4 * 0.0084 + 0.034
        assert payload["ci95"][0] <= payload["estimate"] <= payload["ci95"][1]

    def test_bad_reps(self, capsys):
        code, _, err = run(capsys, "mc", "--preset", "example1", "--reps", "0")
        assert code == 2
        assert "replicates" in err


class TestDatasetCommand:
    def test_csv_round_trip(self, capsys):
        code, out, _ = run(
            capsys, "dataset", "--preset", "example6", "--format", "csv"
        )
        assert code == 0
        spec, _ = get_preset("example6")
        assert dataset_from_csv(out).equals(exemplary_dataset(spec))

    def test_table_head(self, capsys):
        code, out, _ = run(capsys, "dataset", "--preset", "example1")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("design")
        assert len(lines) == 35
        assert "rct_post" in lines[1]

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "rows.csv"
        code, out, _ = run(
            capsys, "dataset", "--preset", "example2", "--format", "csv",
            "--out", str(target),
        )
        assert code == 0
        assert out == ""
        spec, _ = get_preset("example2")
        assert dataset_from_csv(target.read_text()).equals(exemplary_dataset(spec))

    def test_unwritable_out(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "dataset", "--preset", "example2",
            "--out", str(tmp_path / "missing" / "rows.csv"),
        )
        assert code == 1
        assert "error:" in err


class TestVmatrixCommand:
    def test_single_occasion_table(self, capsys):
        code, out, _ = run(capsys, "vmatrix", "--preset", "example2")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 6
        assert lines[0].split() == ["25.0", "2.5", "2.5", "2.5", "2.5", "2.5"]

    def test_correlation_table(self, capsys):
        code, out, _ = run(
            capsys, "vmatrix", "--preset", "example2", "--correlation"
        )
        assert code == 0
        assert out.splitlines()[0].split() == ["1.0", "0.1", "0.1", "0.1", "0.1", "0.1"]

    def test_cohort_wedge_entries(self, capsys):
        code, out, _ = run(capsys, "vmatrix", "--preset", "example7")
        assert code == 0
        first = out.splitlines()[0].split()
        assert first[:6] == ["25.0", "14.5", "14.5", "2.5", "1.0", "1.0"]

    def test_csv_precision(self, capsys):
        code, out, _ = run(
            capsys, "vmatrix", "--preset", "example5", "--format", "csv"
        )
        assert code == 0
        rows = [[float(v) for v in line.split(",")] for line in out.splitlines()]
        assert len(rows) == 20
        assert rows[0][0] == 25.0
        assert rows[0][1] == 14.5

    def test_cluster_index_selects_size(self, capsys):
        code, out, _ = run(
            capsys, "vmatrix", "--preset", "example2_51", "--cluster-index", "3"
        )
        assert code == 0
        assert len(out.splitlines()) == 6  # third cluster has 6 subjects

    def test_cluster_index_out_of_range(self, capsys):
        code, _, err = run(
            capsys, "vmatrix", "--preset", "example2", "--cluster-index", "10"
        )
        assert code == 2
        assert "--cluster-index" in err


class TestSpecDocuments:
    def doc(self):
        return {
            "design": {
                "kind": "crt_post",
                "clusters_per_arm": [5, 4],
                "cluster_size": 6,
                "means": [[59.0], [54.0]],
            },
            "correlation": {"sigma_y_sq": 25.0, "icc": 0.1},
            "analysis": {"alpha": 0.05},
        }

    def write_doc(self, tmp_path, doc):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(doc))
        return str(path)

    def test_spec_file_matches_preset(self, capsys, tmp_path):
        path = self.write_doc(tmp_path, self.doc())
        code, from_file, _ = run(capsys, "power", "--spec", path, "--format", "json")
        _, from_preset, _ = run(
            capsys, "power", "--preset", "example2", "--format", "json"
        )
        assert code == 0
        assert json.loads(from_file) == json.loads(from_preset)

    def test_document_policy_honored(self, capsys, tmp_path):
        doc = self.doc()
        doc["analysis"]["ddf_policy"] = "residual"
        path = self.write_doc(tmp_path, doc)
        _, out, _ = run(capsys, "power", "--spec", path, "--format", "json")
        assert json.loads(out)["ddf"] == 52

    def test_flag_overrides_document_policy(self, capsys, tmp_path):
        doc = self.doc()
        doc["analysis"]["ddf_policy"] = "residual"
        path = self.write_doc(tmp_path, doc)
        _, out, _ = run(
            capsys, "power", "--spec", path, "--ddf-policy", "containment",
            "--format", "json",
        )
        assert json.loads(out)["ddf"] == 45

    def test_invalid_document_lists_all_errors(self, capsys, tmp_path):
        doc = self.doc()
        del doc["correlation"]["icc"]
        doc["design"]["cluster_size"] = "six"
        path = self.write_doc(tmp_path, doc)
        code, _, err = run(capsys, "power", "--spec", path)
        assert code == 2
        assert "correlation.icc" in err
        assert "design.cluster_size" in err
        assert err.count("error:") >= 2

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "power", "--spec", str(path))
        assert code == 2
        assert "not valid JSON" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "power", "--spec", str(tmp_path / "absent.json")
        )
        assert code == 1
        assert "error:" in err


class TestUsageErrors:
    def test_unknown_preset(self, capsys):
        code, _, err = run(capsys, "power", "--preset", "example99")
        assert code == 2
        assert "unknown preset" in err

    def test_scenario_required(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["power"])
        assert info.value.code == 2

    def test_preset_and_spec_exclusive(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["power", "--preset", "example1", "--spec", "x.json"])
        assert info.value.code == 2
