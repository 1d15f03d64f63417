import csv
import shutil
import subprocess
import sys

import pytest

from mps_oracle import FIXTURES
from ddlp.bench import CSV_FIELDS
from ddlp.cli import main
from ddlp.mpsio import load_dataset, read_matrix


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "d"
    code = main(["gen", "packing", "--seed", "7", "--out", str(out), "--m", "4", "--n", "30",
                 "--count", "24", "--n-train", "16", "--noise-mode", "per-entry"])
    assert code == 0
    return out


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_gen_writes_dataset(dataset):
    ds = load_dataset(dataset)
    assert ds.manifest.n == 30 and len(ds.train()) == 16 and len(ds.test()) == 8


@pytest.mark.parametrize("family", ["maxflow", "mincostflow"])
def test_gen_flow(tmp_path, family):
    out = tmp_path / family
    assert main(["gen", family, "--out", str(out), "--count", "3", "--vertices", "6",
                 "--arcs", "12"]) == 0
    assert load_dataset(out).manifest.identical_a


def test_bench_header(dataset, tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--dataset", str(dataset), "--methods", "full,pca", "--out",
                 str(out), "--k-schedule", "1,3"]) == 0
    with open(out) as fh:
        assert fh.readline().strip() == "dataset,method,k,instance_id,objective,ratio," \
                                         "solve_time_ms,feasible,seed"
    rows = read_rows(out)
    assert {r["method"] for r in rows} == {"full", "pca"}
    assert all(r["feasible"] == "true" for r in rows)


def test_bench_repeatable(dataset, tmp_path):
    runs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["bench", "--dataset", str(dataset), "--methods", "full,colrand,pca",
                     "--out", str(out), "--k-schedule", "2", "--seeds", "0,1"]) == 0
        rows = read_rows(out)
        for r in rows:
            r.pop("solve_time_ms")
        runs.append(rows)
    assert runs[0] == runs[1]


@pytest.mark.parametrize("method", ["pca", "colrand", "sga"])
def test_train_and_eval(dataset, tmp_path, method):
    mat = tmp_path / f"{method}.json"
    assert main(["train", method, "--dataset", str(dataset), "--k", "3", "--out", str(mat)]) == 0
    pm = read_matrix(mat.read_bytes())
    assert pm.k == 3 and pm.method_tag == method
    out = tmp_path / "eval.csv"
    assert main(["eval", "--dataset", str(dataset), "--matrix", str(mat), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 8 and all(r["feasible"] == "true" for r in rows)
    assert list(rows[0]) == list(CSV_FIELDS)


def test_ingest_mps(tmp_path):
    out = tmp_path / "mps"
    assert main(["ingest-mps", str(FIXTURES / "fixed3.mps"), "--out", str(out),
                 "--count", "6"]) == 0
    ds = load_dataset(out)
    assert ds.manifest.name == "fixed3" and len(ds.all()) == 6


def test_gap_too_small(dataset, tmp_path):
    assert main(["gap", "--dataset", str(dataset), "--out", str(tmp_path / "g.csv")]) == 2


@pytest.mark.parametrize("argv", [
    ["train", "sga", "--k", "2", "--out", "m.json"],
    ["gen", "packing", "--out", "d", "--bogus"],
    ["bench", "--dataset", "d", "--out", "o.csv", "--methods", "simplex"],
    ["bench", "--dataset", "d", "--out", "o.csv", "--k-schedule", "a,b"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["--help"], ["gen", "--help"], ["ingest-mps", "--help"],
                                  ["train", "--help"], ["eval", "--help"], ["bench", "--help"],
                                  ["gap", "--help"]])
def test_help(argv, capsys):
    assert main(argv) == 0
    assert "usage" in capsys.readouterr().out


def test_runtime_error_exit(tmp_path):
    assert main(["eval", "--dataset", str(tmp_path / "missing"), "--matrix", "x.json",
                 "--out", str(tmp_path / "e.csv")]) == 2


@pytest.mark.skipif(shutil.which("ddlp") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["ddlp", "train", "sga"], capture_output=True, text=True)
    assert proc.returncode == 1


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "ddlp.cli", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "bench" in proc.stdout
