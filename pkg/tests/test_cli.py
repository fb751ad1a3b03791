import csv
import json

import pytest

from envymin.cli import main
from envymin.core import (
    allocation_from_json,
    allocation_to_json,
    instance_from_json,
    instance_to_json,
    measure_value,
)
from envymin.core import Allocation


@pytest.fixture
def instance_file(tmp_path, four_by_seven_peaked):
    path = tmp_path / "peaked.json"
    path.write_text(instance_to_json(four_by_seven_peaked))
    return path


@pytest.fixture
def contested_file(tmp_path, contested_top):
    path = tmp_path / "contested.json"
    path.write_text(instance_to_json(contested_top))
    return path


@pytest.fixture
def refine_files(tmp_path, five_by_eight, five_by_eight_initial):
    inst = tmp_path / "inst.json"
    inst.write_text(instance_to_json(five_by_eight))
    alloc = tmp_path / "alloc.json"
    alloc.write_text(allocation_to_json(five_by_eight_initial))
    return inst, alloc


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_peaked_method_reports_value_one(self, capsys, instance_file):
        code, out, _ = run(capsys, "solve", "--instance", str(instance_file), "--method", "peaked")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == 1
        assert set(doc["allocation"]) == {"i1", "i2", "i3", "i4"}

    def test_oracle_method(self, capsys, instance_file):
        code, out, _ = run(
            capsys, "solve", "--instance", str(instance_file), "--method", "oracle", "--measure", "envy"
        )
        assert code == 0
        assert json.loads(out)["value"] == 1

    def test_axis_required_flag(self, capsys, tmp_path, five_by_eight):
        path = tmp_path / "noaxis.json"
        path.write_text(instance_to_json(five_by_eight))
        code, _, err = run(
            capsys, "solve", "--instance", str(path), "--method", "oracle", "--axis-required"
        )
        assert code == 2
        assert "axis" in err

    def test_peaked_method_rejects_other_measures(self, capsys, instance_file):
        code, _, _ = run(
            capsys, "solve", "--instance", str(instance_file), "--method", "peaked", "--measure", "total"
        )
        assert code == 2


class TestRefine:
    def test_zero_budget_echoes_input(self, capsys, refine_files, five_by_eight_initial):
        inst, alloc = refine_files
        code, out, _ = run(
            capsys, "refine", "--instance", str(inst), "--alloc", str(alloc),
            "--q", "0", "--k", "0", "--mode", "exhaustive",
        )
        assert code == 0
        assert json.loads(out) == json.loads(allocation_to_json(five_by_eight_initial))

    def test_exhaustive_full_refinement(self, capsys, refine_files, five_by_eight):
        inst, alloc = refine_files
        code, out, _ = run(
            capsys, "refine", "--instance", str(inst), "--alloc", str(alloc),
            "--q", "5", "--k", "5", "--mode", "exhaustive",
        )
        assert code == 0
        refined = allocation_from_json(out, five_by_eight)
        assert measure_value(five_by_eight, refined, "envy") == 0

    def test_infeasible_request(self, capsys, refine_files):
        inst, alloc = refine_files
        code, out, _ = run(
            capsys, "refine", "--instance", str(inst), "--alloc", str(alloc),
            "--q", "1", "--k", "5", "--mode", "oracle",
        )
        assert code == 1
        assert json.loads(out) == "infeasible"

    def test_randomized_needs_seed(self, capsys, refine_files):
        inst, alloc = refine_files
        code, _, err = run(
            capsys, "refine", "--instance", str(inst), "--alloc", str(alloc),
            "--q", "1", "--k", "1", "--mode", "randomized",
        )
        assert code == 2
        assert "seed" in err

    def test_identical_seeded_invocations_are_byte_identical(self, capsys, refine_files):
        inst, alloc = refine_files
        args = (
            "refine", "--instance", str(inst), "--alloc", str(alloc),
            "--q", "2", "--k", "1", "--mode", "randomized", "--seed", "9", "--reps", "400",
        )
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert (code1, out1) == (code2, out2)


class TestPareto:
    def test_contested_instance_has_none(self, capsys, contested_file):
        code, out, _ = run(capsys, "pareto", "--instance", str(contested_file), "--domain", "peaked")
        assert code == 1
        assert json.loads(out) == "none exists"

    def test_existing_po_allocation(self, capsys, tmp_path):
        from .conftest import strict_profile
        from envymin.core import Instance

        inst = Instance(
            n=3, m=3, prefs=strict_profile([(0, 1, 2), (1, 0, 2), (2, 1, 0)]), axis=(0, 1, 2)
        )
        path = tmp_path / "tops.json"
        path.write_text(instance_to_json(inst))
        code, out, _ = run(capsys, "pareto", "--instance", str(path), "--domain", "peaked")
        assert code == 0
        assert json.loads(out) == {"i1": "h1", "i2": "h2", "i3": "h3"}


class TestWelfareCommand:
    def test_utilitarian(self, capsys, tmp_path):
        from envymin.core import CardinalProfile, Instance

        inst = Instance(n=2, m=2, prefs=CardinalProfile(((5, 1), (1, 5))))
        path = tmp_path / "card.json"
        path.write_text(instance_to_json(inst))
        code, out, _ = run(capsys, "welfare", "--instance", str(path), "--objective", "util")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == 10
        assert doc["allocation"] == {"i1": "h1", "i2": "h2"}

    def test_ordinal_instance_rejected(self, capsys, instance_file):
        code, _, _ = run(capsys, "welfare", "--instance", str(instance_file), "--objective", "nash")
        assert code == 2


class TestGen:
    def test_writes_instance_and_echoes_json(self, capsys, tmp_path):
        out_file = tmp_path / "gen.json"
        code, out, _ = run(
            capsys, "gen", "--model", "peaked", "--n", "3", "--m", "5",
            "--seed", "4", "--out", str(out_file),
        )
        assert code == 0
        inst = instance_from_json(out_file.read_text())
        assert inst.n == 3 and inst.m == 5
        assert json.loads(out) == json.loads(out_file.read_text())

    def test_identical_invocations_identical_stdout(self, capsys, tmp_path):
        args = (
            "gen", "--model", "uniform", "--n", "3", "--m", "4",
            "--seed", "8", "--out", str(tmp_path / "u.json"),
        )
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2


class TestBenchCommand:
    def test_qsweep_writes_csv(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "bench", "qsweep", "--n", "3", "--m-min", "3", "--m-max", "4",
            "--instances", "2", "--initial", "nash", "--seed", "6",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        doc = json.loads(out)
        with open(doc["csv"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["m", "q", "metric", "mean", "stddev", "instances", "seed"]
        assert len(rows) - 1 == doc["rows"]

    def test_domain_sweep_writes_csv(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "bench", "domain", "--n", "3", "--m-min", "3", "--m-max", "4",
            "--instances", "2", "--domain", "dipped", "--seed", "6",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert json.loads(out)["rows"] == 4


class TestCheck:
    def test_valid_instance(self, capsys, instance_file):
        code, out, _ = run(capsys, "check", "--instance", str(instance_file), "--domain", "peaked")
        assert code == 0
        assert json.loads(out) == {"valid": True, "witness": None}

    def test_invalid_instance_reports_witness(self, capsys, contested_file):
        code, out, _ = run(capsys, "check", "--instance", str(contested_file), "--domain", "peaked")
        assert code == 1
        doc = json.loads(out)
        assert doc["valid"] is False
        assert set(doc["witness"]) == {"agent", "farther", "nearer"}

    def test_axis_override(self, capsys, instance_file):
        code, out, _ = run(
            capsys, "check", "--instance", str(instance_file), "--domain", "peaked",
            "--axis", "h7,h6,h5,h4,h3,h2,h1",
        )
        # reversing the axis preserves single-peakedness
        assert code == 0
        assert json.loads(out)["valid"] is True

    def test_bad_file_is_usage_error(self, capsys, tmp_path):
        missing = tmp_path / "missing.json"
        code, _, err = run(capsys, "check", "--instance", str(missing), "--domain", "peaked")
        assert code == 2
        assert "error" in err


def test_emitted_allocations_revalidate(capsys, instance_file, four_by_seven_peaked):
    code, out, _ = run(capsys, "solve", "--instance", str(instance_file), "--method", "peaked")
    assert code == 0
    alloc = allocation_from_json(json.dumps(json.loads(out)["allocation"]), four_by_seven_peaked)
    assert isinstance(alloc, Allocation)
