import json

import pytest

from quboforge.cli import main
from quboforge.ising_core import load_model


@pytest.fixture
def lib_file(clause_lib, tmp_path):
    path = tmp_path / "lib.json"
    clause_lib.save(path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_npn_stats(capsys):
    code, out, _ = run(capsys, "npn-stats", "--arity", "3")
    assert code == 0 and out.strip() == "14"
    code, out, _ = run(capsys, "--json", "npn-stats", "--arity", "2")
    assert json.loads(out)["classes"] == 4


def test_bench_json_and_files(capsys, tmp_path):
    stem = str(tmp_path / "inst")
    code, out, _ = run(capsys, "--json", "bench", "sgen", "--n", "8", "--seed", "3", "--out", stem)
    rec = json.loads(out)
    assert code == 0 and rec["n_vars"] == 8
    assert len(rec["paths"]) == 2 and all((tmp_path / p.split("/")[-1]).exists() for p in rec["paths"])


def test_encode_solve_verify_round_trip(capsys, tmp_path, lib_file):
    cnf = tmp_path / "p.cnf"
    cnf.write_text("p cnf 4 4\n1 2 3 0\n-1 4 0\n-3 -4 0\n2 4 0\n")
    model, emb, res = (str(tmp_path / f) for f in ("m.json", "e.json", "r.json"))
    code, out, _ = run(capsys, "encode", "--cnf", str(cnf), "--lib", lib_file, "--graph", "4x4",
                       "--out", model, "--embedding", emb)
    assert code == 0 and "verified" in out
    assert load_model(model).qubits
    code, out, _ = run(capsys, "verify", "--embedding", emb)
    assert code == 0 and "passed" in out
    code, out, _ = run(capsys, "solve", "--model", model, "--embedding", emb, "--sweeps", "500", "--out", res)
    assert code == 0 and out.startswith("status: sat")
    rec = json.loads((tmp_path / "r.json").read_text())
    lits = {int(x) for x in out.splitlines()[1].split()[1:-1]}
    clauses = [(1, 2, 3), (-1, 4), (-3, -4), (2, 4)]
    assert rec["status"] == "sat" and all(any(l in lits for l in c) for c in clauses)


def test_verify_tampered_embedding_fails(capsys, tmp_path, lib_file):
    cnf = tmp_path / "p.cnf"
    cnf.write_text("p cnf 2 1\n1 2 0\n")
    model, emb = str(tmp_path / "m.json"), str(tmp_path / "e.json")
    assert run(capsys, "encode", "--cnf", str(cnf), "--lib", lib_file, "--graph", "2x2",
               "--out", model, "--embedding", emb)[0] == 0
    d = json.loads((tmp_path / "e.json").read_text())
    # graft a qubit of one chain onto another so two chains overlap
    chains = d["chains"]
    a, b = sorted(chains)[:2]
    chains[a] = chains[a] + chains[b][:1]
    (tmp_path / "e.json").write_text(json.dumps(d))
    code, out, _ = run(capsys, "verify", "--embedding", emb)
    assert code == 1 and "FAILED" in out


def test_verify_penalty_cell(capsys, tmp_path, clause_lib):
    cell = next(iter(clause_lib.cells.values()))[0]
    path = tmp_path / "cell.json"
    path.write_text(json.dumps(cell.to_dict()))
    code, out, _ = run(capsys, "verify", "--penalty", str(path))
    assert code == 0 and "passed" in out
    code, out, _ = run(capsys, "verify", "--penalty", str(path), "--tt", "tt1:0")
    assert code == 1


def test_genlib_small(capsys, tmp_path):
    funcs = tmp_path / "f.json"
    funcs.write_text(json.dumps([{"name": "and2", "tt": "tt2:8"}]))
    out_path = str(tmp_path / "lib.json")
    code, out, _ = run(capsys, "genlib", "--functions", str(funcs), "--footprints", "half-tile", "--out", out_path)
    assert code == 0 and "wrote 1 cells" in out


def test_errors_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--model", str(tmp_path / "missing.json"), "--embedding", "x")
    assert code == 1 and "error" in err
    code, _, err = run(capsys, "bench", "sgen", "--n", "7")
    assert code == 1 and "error" in err
