import json
import subprocess
import sys

import pytest

from schwarzlat.cli import dispatch
from schwarzlat.io import parse_sparse_function, write_sparse_function
from schwarzlat.lattice import SparseFunction
from schwarzlat.rearrange import is_schwarz_symmetric, schwarz_rearrange


def run(argv, capsys):
    code = dispatch([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def fsv(tmp_path):
    path = tmp_path / "f.tsv"
    path.write_text("0\t0\t1.5\n1\t1\t2.0\n3\t0\t0.5\n")
    return path


def test_polya_szego_file(fsv, capsys):
    code, rep = run(["verify", "polya-szego", "--u", fsv, "--p", 2], capsys)
    assert code == 0 and rep["pass"] and rep["results"]["lhs"] <= rep["results"]["rhs"]
    assert len(rep["inputs"]["u"]) == 64


def test_unknown_flag_is_usage_error(capsys):
    assert dispatch(["verify", "polya-szego", "--bogus"]) == 2
    assert dispatch(["verify", "no-such-check"]) == 2
    assert dispatch([]) == 2


def test_obstruction(capsys):
    code, rep = run(["oracle", "obstruction"], capsys)
    assert code == 0 and rep["results"]["contradiction"] is True


@pytest.mark.parametrize("check", ["polya-szego", "riesz", "hardy-littlewood", "contraction",
                                   "cavalieri", "weighted-f"])
def test_verify_random_inputs_pass(check, capsys):
    code, rep = run(["verify", check, "--seed", 7, "--size", 12], capsys)
    assert code == 0 and rep["pass"]


def test_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert dispatch(["--seed", "5", "verify", "riesz", "--report", str(path), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    dispatch(["verify", "riesz", "--seed", "6", "--report", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_timing_field(capsys):
    _, rep = run(["oracle", "minimizers", "--values", "1,1,1", "--timing"], capsys)
    assert rep["wall_time_s"] >= 0
    _, rep = run(["oracle", "minimizers", "--values", "1,1,1"], capsys)
    assert "wall_time_s" not in rep


def test_budget_exhausted_is_internal_error(tmp_path):
    src = tmp_path / "row.tsv"
    write_sparse_function(SparseFunction.indicator([(x, 0) for x in range(-3, 4)]), src)
    argv = ["rearrange", "--input", src, "--output", tmp_path / "o.tsv", "--max-cycles", 1]
    assert dispatch([str(a) for a in argv]) == 3


def test_bad_input_file(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("0\t0\t1\n0\t0\t2\n")
    assert dispatch(["verify", "polya-szego", "--u", str(bad)]) == 2
    assert "bad.tsv:2" in capsys.readouterr().err
    assert dispatch(["verify", "polya-szego", "--u", str(tmp_path / "missing.tsv")]) == 2


def test_rearrange_with_trace(fsv, tmp_path, capsys):
    out = tmp_path / "star.tsv"
    code, rep = run(["rearrange", "--input", fsv, "--output", out, "--trace"], capsys)
    assert code == 0 and rep["results"]["symmetric"]
    star = parse_sparse_function(out)
    assert star == schwarz_rearrange(parse_sparse_function(fsv)) and is_schwarz_symmetric(star)
    steps = sorted(tmp_path.glob("star.step*.tsv"))
    assert len(steps) == rep["results"]["steps"]
    assert parse_sparse_function(steps[-1]) == star


def test_custom_cycle(fsv, tmp_path, capsys):
    out = tmp_path / "o.tsv"
    code, _ = run(["rearrange", "--input", fsv, "--output", out, "--cycle", "custom:e1"], capsys)
    assert code == 2
    code, _ = run(["rearrange", "--input", fsv, "--output", out, "--cycle", "sideways"], capsys)
    assert code == 2


def test_riesz_max(capsys):
    code, rep = run(["oracle", "riesz-max", "--u-values", "3,1,2", "--v-values", "2,1",
                     "--window", 3], capsys)
    assert code == 0 and rep["results"]["gap"] == pytest.approx(0, abs=1e-12)


def test_minimize_writes_solution(tmp_path, capsys):
    sol = tmp_path / "u.tsv"
    code, rep = run(["minimize", "dnls", "--c", 2, "--sigma", 0.9, "--dim", 2, "--radius", 5,
                     "--solution", sol], capsys)
    assert code == 0 and rep["results"]["converged"]
    u = parse_sparse_function(sol)
    assert is_schwarz_symmetric(u)
    assert rep["results"]["l2_norm"] == pytest.approx(2.0, abs=1e-12)


def test_minimize_bad_sigma(capsys):
    assert dispatch(["minimize", "dnls", "--c", "1", "--sigma", "1.5", "--dim", "2", "--radius", "3"]) == 2


def test_module_entry_point(fsv):
    proc = subprocess.run([sys.executable, "-m", "schwarzlat", "verify", "cavalieri", "--u", str(fsv)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["pass"]
