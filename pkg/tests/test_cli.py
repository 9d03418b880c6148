import json
import subprocess
import sys

import numpy as np
import pytest

from promise_color import cli
from promise_color.alpha import alpha_kl
from promise_color.gadgets import LabelCoverInstance
from promise_color.graph import complete_bipartite, complete_graph, parse_graph, planted_colourable, write_graph
from promise_color.sdp import SolverError


@pytest.fixture
def k3(tmp_path):
    path = tmp_path / "k3.txt"
    write_graph(complete_graph(3), path)
    return str(path)


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_triangle(capsys, k3):
    code, out, _ = run(capsys, "solve", k3, "--k", 3, "--l", 3, "--trials", 50, "--seed", 1)
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == 1
    assert rep["achieved_value"] == "1"
    assert rep["sdp_objective"] == pytest.approx(1.0, abs=1e-6)
    assert rep["predicted_floor"] == pytest.approx(rep["alpha_kl"] * rep["sdp_objective"] - 0.02)
    assert "timestamp" in rep


def test_solve_bipartite(capsys, tmp_path):
    path = tmp_path / "k33.txt"
    write_graph(complete_bipartite(3, 3), path)
    code, out, _ = run(capsys, "solve", path, "--k", 2, "--l", 2, "--deterministic")
    assert code == 0 and json.loads(out)["achieved_value"] == "1"


def test_deterministic_output_is_byte_identical(capsys, k3):
    args = ("solve", k3, "--k", 3, "--l", 4, "--method", "kms", "--trials", 5, "--seed", 9, "--deterministic")
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second and "timestamp" not in first


def test_round_saved_solution(capsys, k3, tmp_path):
    sol = tmp_path / "sol.json"
    run(capsys, "solve", k3, "--k", 3, "--l", 3, "--save-solution", sol)
    code, out, _ = run(capsys, "round", k3, sol, "--l", 3, "--method", "derand", "--epsilon", 0.05)
    rep = json.loads(out)
    assert code == 0 and rep["method"] == "derand"
    assert rep["achieved_value_float"] >= rep["expected_value"] - 0.05


def test_alpha(capsys):
    code, out, _ = run(capsys, "alpha", "--k", 3, "--l", 3)
    rep = json.loads(out)
    assert abs(rep["alpha_kl"]["value"] - 0.836) <= 0.002
    assert rep["best"] >= rep["alpha_kl"]["value"]
    code, out, _ = run(capsys, "alpha", "--k", 3, "--l", 1024)
    rep = json.loads(out)
    prime = rep["alpha_prime_kl"]
    assert prime["diagnostics"]["t"] == 10
    assert prime["diagnostics"]["closed_form"] == pytest.approx(1 - 3.0**-10, abs=1e-12)
    assert prime["value"] == pytest.approx(1 - 3.0**-10, abs=1e-9)


def test_usage_errors(capsys, k3):
    assert run(capsys, "alpha", "--k", 4, "--l", 3)[0] == cli.EXIT_USAGE
    assert run(capsys, "solve", k3, "--k", 3, "--l", 3, "--epsilon", 0)[0] == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        cli.main(["solve", "--bogus"])
    assert info.value.code == cli.EXIT_USAGE


def test_parse_error_exit(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("p edge 2 1\ne 1 9\n")
    code, _, err = run(capsys, "oracle", bad, "--k", 2)
    assert code == cli.EXIT_PARSE and "line 2" in err
    assert run(capsys, "oracle", tmp_path / "missing.txt", "--k", 2)[0] == cli.EXIT_PARSE


def test_budget_exit(capsys, tmp_path):
    path = tmp_path / "k8.txt"
    write_graph(complete_graph(8), path)
    assert run(capsys, "oracle", path, "--k", 3, "--budget", 5)[0] == cli.EXIT_BUDGET


def test_solver_exit(capsys, k3, monkeypatch):
    def fail(*a, **k):
        raise SolverError("no convergence", None, {})

    monkeypatch.setattr(cli, "solve_relaxation", fail)
    assert run(capsys, "solve", k3, "--k", 3, "--l", 3)[0] == cli.EXIT_SOLVER


def test_oracle_text(capsys, k3):
    code, out, _ = run(capsys, "oracle", k3, "--k", 2, "--format", "text")
    assert code == 0 and out.strip() == "2/3"


def test_gadget(capsys, k3, tmp_path):
    dest = tmp_path / "gadget.txt"
    code, out, _ = run(capsys, "gadget", k3, "--p", 1, "--q", 2, "-o", dest)
    assert code == 0 and json.loads(out)["m"] == 6
    g = parse_graph(dest.read_text())
    assert (g.m, g.loop_count) == (6, 3)
    code, out, _ = run(capsys, "gadget", k3, "--p", 1, "--q", 2)
    assert parse_graph(out).m == 6


def test_pcp(capsys, tmp_path):
    inst = LabelCoverInstance(1, 2, 1, 2, ((1, 1, (2, 1)), (1, 2, (1, 2))))
    path = tmp_path / "lc.txt"
    path.write_text(inst.to_text())
    dest = tmp_path / "pcp.txt"
    code, out, _ = run(capsys, "pcp", path, "--k", 3, "--left-labels", "1", "--right-labels", "2,1", "-o", dest)
    rep = json.loads(out)
    assert code == 0
    assert rep["completeness_value"] == "1" and rep["labels_satisfy_all"] is True
    assert rep["integral_multiplicities"]
    assert parse_graph(dest.read_text()).n == 18


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--k-range", "3..4", "--l-range", "3..5", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 1 + 5
    assert lines[1].startswith("3,3,0.836")


def test_console_script_entry():
    cmd = [sys.executable, "-m", "promise_color.cli", "alpha", "--k", "3", "--l", "4", "--format", "text"]
    res = subprocess.run(cmd, capture_output=True, text=True, check=True)
    assert "alpha_3,4 = 0.90" in res.stdout


def test_planted_derand_pipeline(capsys, tmp_path):
    g, _ = planted_colourable(40, 3, 0.3, np.random.default_rng(40))
    path = tmp_path / "planted.txt"
    write_graph(g, path)
    args = ("solve", path, "--k", 3, "--l", 5, "--method", "derand", "--epsilon", 0.02, "--seed", 7, "--deterministic")
    code, out, _ = run(capsys, *args)
    rep = json.loads(out)
    assert code == 0
    assert rep["achieved_value_float"] >= alpha_kl(3, 5).value * rep["sdp_objective"] - 0.02
