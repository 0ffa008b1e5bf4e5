"""Command-line behavior: outputs, exit codes, and diagnostics."""

import json

import pytest

from membw.cli import main

STATIC = "scenarios/static_worked_example.json"
DYNAMIC = "scenarios/dynamic_worked_example.json"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyzeStatic:
    def test_worked_example(self, capsys):
        code, out, _ = run(capsys, "analyze-static", "--scenario", STATIC)
        assert code == 0
        doc = json.loads(out)
        assert doc["status"] == "converged"
        assert doc["span_periods"] == 10
        assert doc["length_slots"] == 160
        assert doc["total_stall"] == "85"

    def test_trace_rows(self, capsys):
        code, out, _ = run(capsys, "analyze-static", "--scenario", STATIC, "--trace")
        assert code == 0
        lines = out.strip().splitlines()
        assert "k,W,S" in lines
        tail = lines[lines.index("k,W,S") + 1 :]
        assert tail == ["0,5,0", "1,9,55", "2,10,247/3", "3,10,85"]

    def test_rejects_multi_interval(self, capsys):
        code, _, err = run(capsys, "analyze-static", "--scenario", DYNAMIC)
        assert code == 2
        assert "analyze-dynamic" in err

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "analyze-static", "--scenario", "nope.json")
        assert code == 2
        assert err.startswith("error:")

    def test_core_must_exist(self, capsys):
        code, _, err = run(capsys, "analyze-static", "--scenario", STATIC, "--core", "2")
        assert code == 2
        assert "no workload" in err


class TestAnalyzeDynamic:
    def test_worked_example(self, capsys):
        code, out, _ = run(capsys, "analyze-dynamic", "--scenario", DYNAMIC)
        assert code == 0
        doc = json.loads(out)
        assert doc["span_periods"] == 7
        assert doc["length_slots"] == 112
        assert doc["total_stall"] == "61"

    def test_breakdown_rows(self, capsys):
        code, out, _ = run(capsys, "analyze-dynamic", "--scenario", DYNAMIC, "--breakdown")
        assert code == 0
        lines = out.strip().splitlines()
        tail = lines[lines.index("interval,W,mu,S") + 1 :]
        assert tail == ["1,5,19,45", "2,2,6,16", "3,0,0,0"]


class TestDumpCurve:
    def test_points_golden(self, capsys):
        code, out, _ = run(capsys, "dump-curve", "--scenario", STATIC)
        assert code == 0
        doc = json.loads(out)
        assert doc["points"] == [0, 3, 6, 7, 8, 11]
        assert doc["start_points"] == [0, 2]

    def test_interval_selection(self, capsys):
        code, out, _ = run(capsys, "dump-curve", "--scenario", DYNAMIC, "--interval", "3")
        assert code == 0
        doc = json.loads(out)
        assert doc["budgets"] == [4, 4, 4, 4]
        assert doc["points"] == [0, 3, 6, 9, 12]

    def test_interval_out_of_range(self, capsys):
        code, _, err = run(capsys, "dump-curve", "--scenario", DYNAMIC, "--interval", "4")
        assert code == 2
        assert "--interval" in err


class TestOracle:
    def test_objectives_match_on_worked_example(self, capsys):
        code, out, _ = run(capsys, "oracle", "--scenario", DYNAMIC)
        assert code == 0
        doc = json.loads(out)
        assert doc["objectives_match"] is True
        assert doc["greedy_objective"] == doc["oracle_objective"] == "61"


class TestExperiment:
    def test_smoke_writes_csv(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("MEMBW_THREADS", "1")
        out_file = tmp_path / "smoke.csv"
        code, _, err = run(capsys, "experiment", "--preset", "smoke", "--seed", "7", "--out", str(out_file))
        assert code == 0
        assert "wrote" in err
        lines = out_file.read_text().strip().splitlines()
        assert lines[0] == "# seed=7"
        assert lines[2] == "policy,m,MIr,U,schedulable,total,ratio,seed"
        assert len(lines) == 3 + 3 * 3  # 3 policies x 3 U points

    def test_smoke_stdout(self, capsys, monkeypatch):
        monkeypatch.setenv("MEMBW_THREADS", "1")
        code, out, _ = run(capsys, "experiment", "--preset", "smoke", "--seed", "7")
        assert code == 0
        assert out.startswith("# seed=7")

    def test_plot_requires_out(self, capsys, monkeypatch):
        monkeypatch.setenv("MEMBW_THREADS", "1")
        code, _, err = run(capsys, "experiment", "--preset", "smoke", "--seed", "7", "--plot")
        assert code == 2
        assert "--plot requires --out" in err

    def test_plot_script_written(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("MEMBW_THREADS", "1")
        out_file = tmp_path / "smoke.csv"
        code, _, _ = run(capsys, "experiment", "--preset", "smoke", "--seed", "7", "--out", str(out_file), "--plot")
        assert code == 0
        script = (tmp_path / "smoke.plt").read_text()
        assert "using 4:7" in script
        assert str(out_file) in script


def test_unknown_command_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
