import itertools

import pytest
from hypothesis import given, settings, strategies as st

from flatreach import oracles
from flatreach.accel import CapExceeded, compose
from flatreach.dbm import DbRelation, EMPTY
from flatreach.machine import (
    FlatOk, ParseError, Violation, check_flat, fold_loops, parse_machine, parse_relation, print_machine, summarize,
)
from flatreach.octagon import OctRelation
from flatreach.suite import machine_suite

HEADER = "vars x, y;\ninit a; final b;\nI: x = 0 && y = 0; F: x >= 0;\n"


def machine(body, header=HEADER):
    return parse_machine(header + body)


@pytest.mark.parametrize("case", machine_suite(), ids=lambda c: c.name)
def test_print_round_trip(case):
    m = case.machine()
    again = parse_machine(print_machine(m))
    assert again == m
    assert print_machine(again) == print_machine(m)


def test_relation_class():
    m = machine("a -> b [x + y <= 3];\na -> b [x' - y <= 3];\n")
    assert isinstance(m.relation(0), OctRelation)
    assert isinstance(m.relation(1), DbRelation)


def test_non_octagonal_atom_rejected():
    with pytest.raises(ParseError) as err:
        machine("a -> b [3x - y <= 1];\n")
    assert err.value.line == 4 and err.value.col == 9


@pytest.mark.parametrize("body, line, message", [
    ("a -> b [z' = x];\n", 4, "unknown variable"),
    ("a -> b [x' = x]\n", 5, "expected ';'"),
    ("a -> b [x' = x] ; a -> b [x' ? x];\n", 4, "unexpected character"),
    ("a -> b [x' = ];\n", 4, "expected a term"),
])
def test_syntax_errors_carry_positions(body, line, message):
    with pytest.raises(ParseError) as err:
        machine(body)
    assert err.value.line == line and message in err.value.message


def test_semantic_errors():
    with pytest.raises(ParseError, match="duplicate variable"):
        parse_machine("vars x, x;\ninit a; final a;\nI: x = 0; F: x = 0;\n")
    with pytest.raises(ParseError, match="duplicate init"):
        parse_machine("vars x;\ninit a; init b; final a;\nI: x = 0; F: x = 0;\n")
    with pytest.raises(ParseError, match="primed"):
        parse_machine("vars x;\ninit a; final a;\nI: x' = 0; F: x = 0;\n")


def test_strict_and_sugar_forms():
    r, names = parse_relation("vars x; x < 3 && x' > x && 2x' <= 9")
    assert names == ["x"]
    assert r.holds([2], [3]) and r.holds([2], [4])
    assert not r.holds([3], [4]) and not r.holds([2], [5]) and not r.holds([2], [2])


def test_check_flat():
    assert check_flat(machine("a -> a [x' = x + 1];\na -> b [x' = x];\n"))
    assert check_flat(machine("a -> c [x' = x];\nc -> b [x' = x];\n")) == FlatOk(())
    eight = machine("a -> a [x' = x + 1];\na -> c [x' = x];\nc -> a [x' = x];\na -> b [x' = x];\n")
    v = check_flat(eight)
    assert isinstance(v, Violation) and v.location == "a" and len(v.loops) == 2
    with pytest.raises(ValueError):
        fold_loops(eight)


def test_fold_three_cycle():
    m = parse_machine("""vars x;
init q0; final out;
I: x = 0; F: x = 5;
q0 -> q1 [x' = x + 1];
q1 -> q2 [x' = x + 2];
q2 -> q0 [x' = x + 3];
q2 -> out [x' = x];
""")
    f = fold_loops(m)
    assert set(f.loops) == {"q0", "q1", "q2"}
    assert [f.loops[q].provenance for q in ("q0", "q1", "q2")] == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    chain = [(r.src, r.dst, r.provenance) for r in f.rules if r.provenance and r.provenance[0] != 3]
    assert chain == [("q0", "q1", (0,)), ("q1", "q2", (1,)), ("q2", "q0_dup", (2,)),
                     ("q0_dup", "q1_dup", (0,)), ("q1_dup", "q2_dup", (1,))]
    exits = sorted(r.src for r in f.rules if r.provenance == (3,))
    assert exits == ["q2", "q2_dup"]
    assert len(f.locations) <= 2 * len(m.all_locations())
    up6 = DbRelation.from_atoms(1, [(0, 1, -6), (1, 0, 6)])
    assert all(f.loops[q].relation == up6 for q in f.loops)


def test_self_loops_unchanged():
    m = machine("a -> a [x' = x + 1 && y' = y];\na -> b [x' = x && y' = y];\n")
    f = fold_loops(m)
    assert f.locations == m.all_locations()
    assert [(r.src, r.dst) for r in f.rules] == [("a", "b")]


def test_two_cycle_rotations_match_unrolling():
    m = parse_machine("""vars x, y;
init p; final r;
I: x = 0 && y = 0; F: x >= 0;
p -> q [x' = x + 1 && y' = y && x <= 3];
q -> p [x' = x && y' = y + x];
q -> r [x' = x && y' = y];
""".replace("y' = y + x", "y' = y + 2"))
    f = fold_loops(m)
    a, b = m.relation(0), m.relation(1)
    assert f.loops["p"].relation == compose(a, b)
    assert f.loops["q"].relation == compose(b, a)
    # the folded machine reaches exactly the valuations the original one does at r
    box = 15
    orig = oracles.bfs_reach(m, box)
    folded = oracles.bfs_reach(f.to_machine(), box)
    assert orig.reachable == folded.reachable
    ends_o = {tuple(p) for loc, p in orig_states(m, box) if loc == "r"}
    ends_f = {tuple(p) for loc, p in orig_states(f.to_machine(), box) if loc in ("r",)}
    assert ends_o == ends_f


def orig_states(m, box):
    # explicit forward search without a target
    start = [(m.init, p) for p in oracles.box_states(m.n_vars, m.init_atoms, box)]
    seen = set((loc, tuple(p)) for loc, p in start)
    frontier = list(seen)
    while frontier:
        nxt = []
        for loc, p in frontier:
            for r in m.rules:
                if r.src != loc:
                    continue
                for q in oracles.successors(m.n_vars, r.atoms, p, box):
                    key = (r.dst, tuple(q))
                    if key not in seen:
                        seen.add(key)
                        nxt.append(key)
        frontier = nxt
    return seen


def test_summary_shape_for_one_loop():
    m = parse_machine("vars x, y;\ninit a; final a;\nI: x = 0 && y = 0; F: x = 3;\n"
                      "a -> a [x' = y + 1 && y' = x];\n")
    s = summarize(fold_loops(m))
    assert s.order == ["a"]
    cf = s.loops["a"]
    assert not isinstance(cf, CapExceeded)
    kinds = [k for k, _ in cf.disjuncts()]
    assert kinds == ["id"] + ["template"] * 2
    assert "sigma[a] = (Id) ; L[a]*(b=1, c=2)" in s.describe()


def test_summary_of_straight_line():
    m = machine("a -> c [x' = x + 1 && y' = y];\nc -> b [x' = x && y' = y - 1];\n")
    s = summarize(fold_loops(m))
    assert s.order == ["a", "c", "b"]
    assert [[r.provenance for r in p] for p in s.paths()] == [[(0,), (1,)]]
    assert s.describe().splitlines()[0] == "sigma[a] = Id"


LOOP_FREE = [
    "a -> c [x' = x + 1 && y' = y];\nc -> b [x' = y && y' = x];\n",
    "a -> c [x' = x + 1 && y' = y];\na -> d [x' = x && y' = y + 2 && x <= 0];\nc -> b [x' = x && y' = y];\n"
    "d -> b [x' + y' <= 3 && x - x' <= 0 && x' - x <= 1 && y' = y];\n",
    "a -> b [x' - y <= 1 && y - x' <= 1 && y' = x];\n",
]


@pytest.mark.parametrize("body", LOOP_FREE)
def test_ground_level_summary_labeling(body):
    m = parse_machine("vars x, y;\ninit a; final b;\nI: true; F: true;\n" + body)
    s = summarize(fold_loops(m))
    rels = []
    for path in s.paths():
        r = path[0].relation
        for step in path[1:]:
            r = compose(r, step.relation)
        rels.append(r)
    box = 3
    pts = list(itertools.product(range(-box, box + 1), repeat=2))
    for nu in pts:
        ends = {q for loc, q in runs_from(m, nu, box + 4) if loc == "b"}
        for nu2 in pts:
            got = any(r is not EMPTY and r.holds(nu, nu2) for r in rels)
            assert got == (nu2 in ends), (nu, nu2)


def runs_from(m, nu, box):
    seen = {(m.init, tuple(nu))}
    frontier = list(seen)
    while frontier:
        nxt = []
        for loc, p in frontier:
            for r in m.rules:
                if r.src == loc:
                    for q in oracles.successors(m.n_vars, r.atoms, p, box):
                        k = (r.dst, tuple(q))
                        if k not in seen:
                            seen.add(k)
                            nxt.append(k)
        frontier = nxt
    return seen
