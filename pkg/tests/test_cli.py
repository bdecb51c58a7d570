import json
from pathlib import Path

import numpy as np
import pytest

from icaperf.cli import main
from icaperf.model import read_matrix_csv, write_matrix_csv

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate_fobi_golden(tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"g{i}.csv"
        code, _, _ = run(capsys, "estimate", "--input", DATA / "fixture3.csv",
                         "--method", "fobi", "--out", out)
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == (DATA / "golden_fobi.csv").read_bytes()
    meta = json.loads((tmp_path / "g0.json").read_text())
    assert meta["method"] == "fobi" and len(meta["lambdas"]) == 3


def test_estimate_fastica_sidecar(tmp_path, capsys):
    out = tmp_path / "fi.csv"
    code, _, _ = run(capsys, "estimate", "--input", DATA / "fixture3.csv", "--method",
                     "fastica", "--g", "pow3", "--init", "random", "--seed", "4", "--out", out)
    assert code == 0
    text = (tmp_path / "fi.json").read_text()
    assert text.count("\n") == 1
    meta = json.loads(text)
    assert meta["converged"] == [True, True, True]
    assert read_matrix_csv(out).shape == (3, 3)


def test_estimate_fastica_init_file(tmp_path, capsys):
    init = tmp_path / "init.csv"
    write_matrix_csv(init, np.eye(3)[::-1])
    code, _, _ = run(capsys, "estimate", "--input", DATA / "fixture3.csv", "--method",
                     "fastica", "--init", init, "--out", tmp_path / "o.csv")
    assert code == 0
    write_matrix_csv(init, np.ones((3, 3)))
    code, _, err = run(capsys, "estimate", "--input", DATA / "fixture3.csv", "--method",
                       "fastica", "--init", init, "--out", tmp_path / "o.csv")
    assert code == 1 and "orthogonal" in err


def test_estimate_usage_errors(tmp_path, capsys):
    code, _, err = run(capsys, "estimate", "--method", "fobi", "--out", tmp_path / "x.csv")
    assert code == 1 and "usage" in err
    code, _, err = run(capsys, "estimate", "--input", DATA / "fixture3.csv", "--method",
                       "fobi", "--g", "pow3", "--out", tmp_path / "x.csv")
    assert code == 1 and "--g" in err
    code, _, _ = run(capsys, "estimate", "--input", tmp_path / "missing.csv", "--method",
                     "fobi", "--out", tmp_path / "x.csv")
    assert code == 1


def test_estimate_singular_data_is_runtime_failure(tmp_path, capsys):
    x = np.random.default_rng(0).standard_normal((50, 1))
    path = tmp_path / "flat.csv"
    write_matrix_csv(path, np.hstack([x, x, x]))
    code, _, err = run(capsys, "estimate", "--input", path, "--method", "fobi",
                       "--out", tmp_path / "x.csv")
    assert code == 2 and "singular" in err


def test_unknown_flag_rejected(capsys):
    code, _, _ = run(capsys, "bench", "--fast")
    assert code == 1


def test_index_identity(tmp_path, capsys):
    write_matrix_csv(tmp_path / "i.csv", np.eye(3))
    code, out, _ = run(capsys, "index", "--gain", tmp_path / "i.csv",
                       "--metric", "md,amari,isr,md-col")
    assert code == 0
    assert out.splitlines() == ["md,0", "amari,0", "isr,0", "md-col,0"]


def test_index_hand_value(tmp_path, capsys):
    (tmp_path / "g.csv").write_text("1,0.5\n0,1\n")
    code, out, _ = run(capsys, "index", "--gain", tmp_path / "g.csv")
    assert code == 0 and out == "md,0.44721359549995793\n"


def test_index_gce_from_files(capsys):
    code, out, _ = run(capsys, "index", "--gamma", DATA / "golden_fobi.csv", "--omega",
                       DATA / "omega3.csv", "--metric", "md,gce")
    assert code == 0
    vals = dict(line.split(",") for line in out.splitlines())
    g = read_matrix_csv(DATA / "golden_fobi.csv") @ read_matrix_csv(DATA / "omega3.csv")
    from icaperf.indices import md_index
    assert float(vals["md"]) == md_index(g)
    assert float(vals["gce"]) > 0


@pytest.mark.parametrize("argv", [
    ["index", "--gain", DATA / "omega3.csv", "--metric", "gce"],
    ["index", "--gain", DATA / "omega3.csv", "--metric", "nope"],
    ["index", "--metric", "md"],
])
def test_index_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 1


def test_index_malformed_csv(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("1,2\n3\n")
    code, _, _ = run(capsys, "index", "--gain", tmp_path / "bad.csv")
    assert code == 1


def test_asymptotics_tanh_b(capsys):
    code, out, _ = run(capsys, "asymptotics", "--sources", "laplace,logistic,beta33",
                       "--method", "fastica", "--g", "tanh", "--order", "b")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    name, value = lines[-1].split(",")
    assert name == "trace" and float(value) == pytest.approx(31.78, abs=0.02)
    v = np.array([[float(t) for t in line.split(",")] for line in lines[:3]])
    assert v[0, 0] == pytest.approx(1.25, abs=1e-8)


def test_asymptotics_fobi_monte_carlo(capsys):
    code, out, _ = run(capsys, "asymptotics", "--method", "fobi", "--n", "2000",
                       "--reps", "20", "--seed", "1")
    assert code == 0
    assert out.splitlines()[-1].startswith("trace,")


def test_bench_single_dim(capsys):
    code, out, _ = run(capsys, "bench", "--dims", "3", "--count", "1000")
    assert code == 0
    header, row = out.splitlines()
    assert header == "p,seconds"
    p, secs = row.split(",")
    assert p == "3" and float(secs) > 0


def test_simulate_smoke(tmp_path, capsys):
    argv = ["simulate", "--method", "fastica", "--g", "tanh", "--order", "b", "--n", "1000",
            "--reps", "2", "--seed", "7", "--threads", "2"]
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    lines = out1.splitlines()
    assert lines[0] == "method,order,n,rep,seed,md,npd2,converged"
    assert len(lines) == 3
    assert lines[1].startswith("fastica-tanh,b,1000,0,")
    code, out2, _ = run(capsys, *argv, "--threads", "1", "--out", tmp_path / "r.csv",
                        "--summary", tmp_path / "s.csv")
    assert code == 0 and out2 == ""
    assert (tmp_path / "r.csv").read_text() == out1
    assert (tmp_path / "s.csv").read_text().startswith("method,order,n,mean_npd2,")


def test_simulate_flag_conflicts(capsys):
    code, _, _ = run(capsys, "simulate", "--method", "fobi", "--g", "tanh", "--reps", "1")
    assert code == 1
    code, _, _ = run(capsys, "simulate", "--sources", "laplace,cauchy", "--reps", "1")
    assert code == 1
