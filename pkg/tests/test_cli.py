import json
import subprocess
import sys

import pytest

from tsadbench.benchmark.records import read_records
from tsadbench.cli import build_parser, main
from tsadbench.core.specs import pipeline_paths
from tsadbench.data.synthetic import suite_configs, write_dataset

from conftest import FIXTURES

SUBCOMMANDS = {
    ("run",): ["--pipelines", "--datasets", "--metrics", "--iterations", "--seed", "--workers",
               "--output", "--timings", "--reproducible", "--registry", "--primitives"],
    ("summarize",): ["--metric", "--baseline", "--out", "--leaderboard"],
    ("evaluate",): ["--detected", "--truth", "--method", "--domain", "--step"],
    ("history", "add"): ["--dir", "--version", "--results"],
    ("history", "shifts"): ["--dir", "--metric"],
    ("history", "rho"): ["--dir", "--baseline", "--metric", "--ranks"],
    ("pipeline", "validate"): ["--primitives"],
    ("data", "fetch"): ["--registry"],
    ("data", "synth"): ["--config", "--out", "--name"],
}


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("TSADBENCH_CACHE", str(tmp_path / "cache"))
    return tmp_path


@pytest.fixture
def suite_registry(workdir):
    return write_dataset(suite_configs(2, seed=5, length=300), workdir / "suite")


@pytest.mark.parametrize("command", list(SUBCOMMANDS), ids=" ".join)
def test_help_lists_every_flag(command, capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args([*command, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for flag in SUBCOMMANDS[command]:
        assert flag in text


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--bogus"])
    assert info.value.code == 2


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "tsadbench.cli", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for name in ("run", "summarize", "evaluate", "history", "pipeline", "data"):
        assert name in out


# -- run and summarize ------------------------------------------------------------

def test_run_then_summarize(suite_registry, workdir, capsys):
    code = main(["run", "--registry", str(suite_registry), "--iterations", "3",
                 "--timings", "timings.csv", "--reproducible"])
    assert code == 0
    records = read_records(workdir / "results.csv")
    verified = len(list(pipeline_paths("verified")))
    assert len(records) == verified * 2 * 3
    assert (workdir / "timings.csv").read_text().startswith(
        "dataset,pipeline,signal,iteration,primitive,seconds\n")

    code = main(["summarize", "results.csv", "--out", "summary.csv",
                 "--leaderboard", "board.csv"])
    assert code == 0
    summary = (workdir / "summary.csv").read_text().splitlines()
    assert summary[0] == "pipeline,dataset,metric,value"
    assert len(summary) == 1 + verified
    board = (workdir / "board.csv").read_text().splitlines()
    assert board[0] == "pipeline,wins,rank"
    assert sorted(int(line.split(",")[2]) for line in board[1:]) == list(range(1, verified + 1))


def test_run_unknown_pipeline(suite_registry, capsys):
    assert main(["run", "--registry", str(suite_registry), "--pipelines", "nope"]) == 2
    assert "unknown pipeline" in capsys.readouterr().err


def test_run_uses_local_registry_file(suite_registry, workdir):
    (workdir / "datasets.json").write_text(suite_registry.read_text().replace(
        '"."', '"suite"').replace('"truth.csv"', '"suite/truth.csv"'))
    assert main(["run", "--pipelines", "arima_like", "--iterations", "1"]) == 0
    assert len(read_records(workdir / "results.csv")) == 2


def test_run_with_pipeline_file_records_errors(suite_registry, workdir):
    code = main(["run", "--registry", str(suite_registry), "--iterations", "1",
                 "--pipelines", str(FIXTURES / "pipelines" / "failing.json"),
                 "--primitives", str(FIXTURES / "primitives")])
    assert code == 0
    assert {r.status for r in read_records(workdir / "results.csv")} == {"ERROR"}


def test_summarize_single_record(workdir, capsys):
    (workdir / "r.csv").write_text(
        "dataset,pipeline,signal,iteration,f1,precision,recall,tn,fp,fn,tp,status,elapsed,"
        "run_id\nd,p,s,0,0.5,0.5,0.5,,1,1,1,OK,1.0,x\n")
    assert main(["summarize", "r.csv"]) == 0
    assert capsys.readouterr().out.splitlines() == ["pipeline,dataset,metric,value",
                                                    "p,d,f1,0.5"]


def test_summarize_missing_baseline(workdir, capsys):
    (workdir / "r.csv").write_text(
        "dataset,pipeline,signal,iteration,f1,precision,recall,tn,fp,fn,tp,status,elapsed,"
        "run_id\nd,p,s,0,0.5,0.5,0.5,,1,1,1,OK,1.0,x\n")
    assert main(["summarize", "r.csv", "--baseline", "arima_like"]) == 2
    assert "arima_like" in capsys.readouterr().err


def test_summarize_bad_sheet(workdir):
    (workdir / "r.csv").write_text("a,b,c\n")
    assert main(["summarize", "r.csv"]) == 2


# -- evaluate ---------------------------------------------------------------------

@pytest.mark.parametrize("detected,truth,expected", [
    ("5,10\n", "5,10\n", "tp=1 fp=0 fn=0 tn="),
    ("", "5,10\n", "tp=0 fp=0 fn=1 tn="),
    ("0,3\n8,12\n", "2,4\n20,25\n", "tp=1 fp=1 fn=1 tn="),
])
def test_evaluate_overlapping(workdir, capsys, detected, truth, expected):
    (workdir / "d.csv").write_text("start,end\n" + detected)
    (workdir / "t.csv").write_text("start,end\n" + truth)
    assert main(["evaluate", "--detected", "d.csv", "--truth", "t.csv",
                 "--domain", "0", "30"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == expected


def test_evaluate_weighted(workdir, capsys):
    (workdir / "d.csv").write_text("3,6\n")
    (workdir / "t.csv").write_text("2,4\n")
    assert main(["evaluate", "--detected", "d.csv", "--truth", "t.csv", "--method", "weighted",
                 "--domain", "0", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["tp=2 fp=2 fn=1 tn=5", "precision=0.5 recall=0.666667 f1=0.571429"]


def test_evaluate_missing_file(workdir):
    assert main(["evaluate", "--detected", "nope.csv", "--truth", "nope.csv",
                 "--domain", "0", "1"]) == 2


# -- history ----------------------------------------------------------------------

def sheet(rows):
    header = ("dataset,pipeline,signal,iteration,f1,precision,recall,tn,fp,fn,tp,status,"
              "elapsed,run_id\n")
    body = "".join(f"{d},{p},s,0,,,,,{fp},0,{tp},OK,1.0,x\n" for d, p, tp, fp in rows)
    return header + body


def test_history_add_and_shifts(workdir, capsys):
    # precision 1 and recall 1 gives f1 1; one false positive in three detections drops it
    (workdir / "a.csv").write_text(sheet([("x", "p", 2, 0), ("y", "p", 2, 0)]))
    (workdir / "b.csv").write_text(sheet([("x", "p", 2, 0), ("y", "p", 2, 0)]))
    (workdir / "c.csv").write_text(sheet([("x", "p", 2, 1), ("y", "p", 2, 0)]))
    for version, name in (("0.1.0", "a"), ("0.2.0", "b"), ("0.10.0", "c")):
        assert main(["history", "add", "--version", version, "--results", f"{name}.csv"]) == 0
    capsys.readouterr()
    assert main(["history", "shifts"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "0.1.0,0.2.0,p,0,0,false,2,0"
    assert lines[2].startswith("0.2.0,0.10.0,p,-10,10,true,2,0")


def test_history_duplicate_and_bad_version(workdir):
    (workdir / "a.csv").write_text(sheet([("x", "p", 1, 0)]))
    assert main(["history", "add", "--version", "1.0.0", "--results", "a.csv"]) == 0
    assert main(["history", "add", "--version", "1.0.0", "--results", "a.csv"]) == 2
    assert main(["history", "add", "--version", "1.0", "--results", "a.csv"]) == 2


def test_history_rho_from_rank_table(workdir, capsys):
    (workdir / "ranks.csv").write_text(
        "pipeline,run1,run2\n" + "".join(
            f"p{i},{a},{b}\n" for i, (a, b) in enumerate(zip(
                [1, 3, 2, 6, 4, 7, 5, 8, 9, 10, 11], [1, 2, 5, 7, 3, 4, 6, 8, 9, 10, 11]))))
    assert main(["history", "rho", "--ranks", "ranks.csv"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["run,run1,run2", "run1,1,0.9", "run2,0.9,1", "mean pairwise rho: 0.9"]


def test_history_rho_needs_two_releases(workdir):
    assert main(["history", "rho"]) == 2


# -- pipeline validate ------------------------------------------------------------

def test_validate_shipped_pipelines(capsys):
    for path in pipeline_paths("verified"):
        assert main(["pipeline", "validate", str(path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS determinism" in out


@pytest.mark.parametrize("name,failed", [
    ("bad_schema", "schema"), ("bad_dataflow", "data-flow"),
    ("bad_determinism", "determinism"), ("failing", "execution")])
def test_validate_rejects_bad_pipelines(capsys, name, failed):
    code = main(["pipeline", "validate", str(FIXTURES / "pipelines" / f"{name}.json"),
                 "--primitives", str(FIXTURES / "primitives")])
    assert code == 1
    assert f"FAIL {failed}" in capsys.readouterr().out


def test_validate_missing_file(capsys):
    assert main(["pipeline", "validate", "nope.json"]) == 1


# -- data -------------------------------------------------------------------------

def test_data_synth(workdir, capsys):
    config = {"signals": [{"name": "one", "length": 100, "anomalies": [
        {"kind": "point_spike", "position": 40, "magnitude": 3}]}]}
    (workdir / "c.json").write_text(json.dumps(config))
    assert main(["data", "synth", "--config", "c.json", "--out", "out"]) == 0
    assert (workdir / "out" / "one.csv").exists()
    assert (workdir / "out" / "truth.csv").read_text() == "signal,start,end\none,40,40\n"
    assert json.loads((workdir / "out" / "datasets.json").read_text())["datasets"][0][
        "signals"] == ["one"]


def test_data_synth_bad_config(workdir):
    (workdir / "c.json").write_text("{")
    assert main(["data", "synth", "--config", "c.json", "--out", "out"]) == 2
    (workdir / "c.json").write_text("{}")
    assert main(["data", "synth", "--config", "c.json", "--out", "out"]) == 2


def test_data_fetch_unknown_dataset(workdir, capsys):
    assert main(["data", "fetch", "nope"]) == 2
    assert "not registered" in capsys.readouterr().err


def test_data_fetch_local_and_cached(suite_registry, workdir, mock_server, capsys):
    assert main(["data", "fetch", "synthetic", "--registry", str(suite_registry)]) == 0
    (workdir / "remote.json").write_text(json.dumps({"datasets": [{
        "name": "remote", "signals": ["a"], "source": mock_server.url, "truth_file": None}]}))
    mock_server.responses = [(200, b"0,1\n1,2\n", 0.0)]
    assert main(["data", "fetch", "remote", "--registry", "remote.json"]) == 0
    assert main(["data", "fetch", "remote", "--registry", "remote.json"]) == 0
    assert len(mock_server.requests) == 1


def test_data_fetch_failure_exits_one(workdir, mock_server):
    (workdir / "remote.json").write_text(json.dumps({"datasets": [{
        "name": "remote", "signals": ["a"], "source": mock_server.url}]}))
    mock_server.responses = [(500, b"", 0.0)]
    assert main(["data", "fetch", "remote", "--registry", "remote.json"]) == 1
