import os
import shutil

import pytest

from flatreach.machine import parse_machine
from flatreach.reach import decide_reach, replay
from flatreach.smt import emit_smt, parse_model, run_solver
from flatreach.suite import WORKED_COUNT_UP, WORKED_PARITY, WORKED_SWAP_SHIFT, machine_suite

HAVE_Z3 = shutil.which(os.environ.get("FLATREACH_SOLVER", "z3")) is not None
needs_z3 = pytest.mark.skipif(not HAVE_Z3, reason="z3 not on PATH")


def test_emit_is_deterministic_and_well_formed():
    m = WORKED_SWAP_SHIFT.machine()
    a, b = emit_smt(m), emit_smt(m)
    assert a == b
    assert "(set-logic QF_LIA)" in a
    assert a.count("(assert ") == 1
    assert a.rstrip().endswith("(get-model)") and "(check-sat)" in a
    assert a.count("(") == a.count(")")


def test_loop_free_has_no_loop_counters():
    m = parse_machine("vars x;\ninit a; final b;\nI: x = 0; F: x = 2;\na -> b [x' = x + 2];\n")
    text = emit_smt(m)
    assert "_k" not in text


def test_parse_model():
    out = "sat\n(\n  (define-fun x_0 () Int\n    3)\n  (define-fun y_1 () Int\n    (- 4))\n)\n"
    assert parse_model(out) == {"x_0": 3, "y_1": -4}


def test_missing_solver_is_unknown():
    status, model, detail = run_solver("(check-sat)", solver="/nonexistent/solver")
    assert status == "unknown" and model == {} and "solver unavailable" in detail
    res = decide_reach(WORKED_PARITY.machine(), backend="smt", solver="/nonexistent/solver")
    assert res.verdict == "Unknown"
    assert "solver unavailable" in res.diagnostics["reason"]


@needs_z3
def test_parity_unsat():
    res = decide_reach(WORKED_PARITY.machine(), backend="smt")
    assert res.verdict == "Unreachable" and res.diagnostics["solver_status"] == "unsat"


@needs_z3
def test_swap_shift_sat():
    m = WORKED_SWAP_SHIFT.machine()
    res = decide_reach(m, backend="smt")
    assert res.verdict == "Reachable" and replay(m, res.witness)
    assert res.witness.loop_iters == {"a": 6}


@needs_z3
def test_count_up_witness():
    m = WORKED_COUNT_UP.machine()
    res = decide_reach(m, backend="smt")
    assert res.verdict == "Reachable" and [v[0] for v in res.witness.trace] == [0, 1, 2, 3, 4, 5]


@needs_z3
def test_smt_out_file(tmp_path):
    path = tmp_path / "q.smt2"
    decide_reach(WORKED_PARITY.machine(), backend="smt", smt_out=str(path))
    assert path.read_text() == emit_smt(WORKED_PARITY.machine())


@needs_z3
@pytest.mark.parametrize("case", machine_suite(), ids=lambda c: c.name)
def test_backends_agree(case):
    m = case.machine()
    smt = decide_reach(m, backend="smt")
    bounded = decide_reach(m)
    assert "Unknown" in (smt.verdict, bounded.verdict) or smt.verdict == bounded.verdict
    if smt.verdict == "Reachable":
        assert replay(m, smt.witness)
