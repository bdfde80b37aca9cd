import json
import subprocess
import sys

import pytest

from countdec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_count_closed_form(capsys):
    code, rep = run_json(capsys, "count", "--n", "2", "--s", "2", "--X", "50")
    assert code == 0 and rep["J"] == 4950 and rep["command"] == "count"
    assert rep["config"]["X"] == 50


def test_count_subset_and_phi_file(capsys, tmp_path):
    code, rep = run_json(capsys, "count", "--n", "2", "--s", "3", "--X", "7", "--subset", "1,2,3,4,5,6,7")
    assert code == 0 and (rep["J"], rep["off_diagonal"]) == (1771, 126)
    table = tmp_path / "phi.txt"
    table.write_text("1 1 1\n2 2 4\n3 3 9\n")
    code, rep = run_json(capsys, "count", "--s", "2", "--phi-file", str(table))
    assert code == 0 and rep["J"] == 15


def test_count_budget_refusal(capsys):
    code, out, err = run(capsys, "count", "--n", "2", "--s", "9", "--X", "1000")
    assert code == 2 and "refused" in err


def test_diagonal_check(capsys):
    code, rep = run_json(capsys, "diagonal-check", "--n", "2", "--X", "8")
    assert code == 0 and rep["all_diagonal"]


def test_pte_search(capsys):
    code, rep = run_json(capsys, "pte-search", "--n", "2", "--s", "3", "--X", "7")
    assert code == 0 and rep["sides"] == [[1, 5, 6], [2, 3, 7]]
    code, _, _ = run(capsys, "pte-search", "--n", "3", "--s", "4", "--X", "12", "--budget", "10")
    assert code == 2


def test_amplify_csv(capsys):
    code, out, _ = run(capsys, "amplify", "--base", "1,5,6|2,3,7", "--X", "100", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "q,h"
    assert sum(1 for ln in lines[1:] if not ln.startswith("#")) == 665


def test_lorentz_csv_columns(capsys):
    code, out, _ = run(capsys, "lorentz-check", "--X", "50", "--trials", "5", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "trial,N,p,lhs,rhs,ratio,holds"


def test_decouple_check(capsys):
    code, rep = run_json(capsys, "decouple-check", "--X", "40", "--trials", "5")
    assert code == 0 and rep["violations"] == 0 and rep["max_ratio"] <= 1


def test_perm_lemma(capsys):
    code, rep = run_json(capsys, "perm-lemma", "--n", "2", "--grid", "4")
    assert code == 0 and rep["configurations"] == 4**4 and rep["counterexamples"] == []


def test_sign_decomp_inline(capsys):
    code, rep = run_json(capsys, "sign-decomp", "--pairs", "0,1/2;1/4,3/4", "--pad")
    assert code == 0 and rep["intervals"] == [["0", "3/4"]] and rep["reconstruction"]
    assert rep["padded"]["intervals"] == [["0", "3/8"], ["3/8", "3/4"]]


def test_sign_decomp_bad_pairs(capsys):
    code, _, _ = run(capsys, "sign-decomp", "--pairs", "0,3/2")
    assert code == 2


def test_det_scan_and_sigma(capsys):
    assert run(capsys, "det-scan", "--n", "3", "--trials", "200")[0] == 0
    assert run(capsys, "sigma-check", "--n", "3", "--trials", "5")[0] == 0


def test_separation(capsys):
    code, rep = run_json(capsys, "separation", "--R", "32", "--trials", "200")
    assert code == 0 and rep["violations"] == 0


def test_config_file_supplies_defaults(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2, "s": 2, "X": 30}))
    code, rep = run_json(capsys, "--config", str(cfg), "count")
    assert code == 0 and rep["J"] == 2 * 30**2 - 30


def test_missing_config(capsys, tmp_path):
    code, _, _ = run(capsys, "--config", str(tmp_path / "nope.json"), "count")
    assert code == 2


def test_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["lorentz-check", "--X", "100", "--trials", "20", "--seed", "9", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["count", "--engine", "quantum"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "countdec", "count", "--X", "10"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["J"] == 190
