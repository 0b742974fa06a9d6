import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flatreach import oracles
from flatreach.dbm import EMPTY, INF, close
from flatreach.octagon import (
    OctRelation, atom_cells, equivalent, from_cells, is_coherent, oct_compose, pick_point, point_holds, tight_close,
)

I = int(INF)


def octagon(n, atoms):
    cells = []
    for terms, c in atoms:
        cells += atom_cells(terms, c)
    return from_cells(n, cells)


@st.composite
def octagon_atoms(draw, n_vars, lo=-5, hi=5, max_atoms=5):
    out = []
    for _ in range(draw(st.integers(0, max_atoms))):
        u = draw(st.integers(0, n_vars - 1))
        v = draw(st.integers(0, n_vars - 1))
        a = draw(st.sampled_from([1, -1]))
        b = draw(st.sampled_from([1, -1]))
        terms = {u: a} if u == v else {u: a, v: b}
        out.append((terms, draw(st.integers(lo, hi))))
    return out


@st.composite
def octagons(draw, max_vars=3):
    n = draw(st.integers(1, max_vars))
    return n, octagon(n, draw(octagon_atoms(n)))


@st.composite
def oct_relations(draw, n_vars=1):
    return OctRelation.from_atoms(n_vars, draw(octagon_atoms(2 * n_vars, lo=-3, hi=3, max_atoms=4)))


def test_sum_equality_encoding():
    m = octagon(2, [({0: 1, 1: 1}, 3), ({0: -1, 1: -1}, -3)])
    # y1 - y4 <= 3 and y2 - y3 <= -3 in one-based dual names
    assert m[0, 3] == 3 and m[1, 2] == -3
    assert is_coherent(m)


def test_difference_encoding():
    m = octagon(2, [({0: 1, 1: -1}, 5)])
    assert m[0, 2] == 5 and m[3, 1] == 5
    assert np.count_nonzero(m < INF) == 4 + 2


def test_empty_atom_set():
    m = octagon(2, [])
    assert is_coherent(m)
    assert np.count_nonzero(m < INF) == 4


def test_non_octagonal_coefficient_rejected():
    with pytest.raises(ValueError):
        atom_cells({0: 3, 1: -1}, 1)


def test_odd_unary_bound_tightens():
    t = tight_close(octagon(1, [({0: 2}, 5)]))
    assert t[0, 1] == 4


def test_unary_contradiction():
    assert tight_close(octagon(1, [({0: 1}, 0), ({0: -1}, -1)])) is None


def test_incoherent_input_rejected():
    m = octagon(2, [])
    m[0, 2] = 3
    with pytest.raises(ValueError):
        tight_close(m)


def test_compose_examples():
    ident = OctRelation.identity(1)
    assert oct_compose(ident, ident) == ident
    step = OctRelation.from_atoms(1, [({1: 1, 0: -1}, 1), ({1: -1, 0: 1}, -1)])
    two = OctRelation.from_atoms(1, [({1: 1, 0: -1}, 2), ({1: -1, 0: 1}, -2)])
    assert oct_compose(step, step) == two
    neg = OctRelation.from_atoms(1, [({1: 1, 0: 1}, 0), ({1: -1, 0: -1}, 0)])
    twice = oct_compose(neg, neg)
    for x, y in itertools.product(range(-10, 11), repeat=2):
        assert twice.holds([x], [y]) == (x == y)


def test_equivalence_examples():
    a = octagon(2, [({0: 1, 1: 1}, 4), ({0: 1, 1: 1}, 6)])
    assert equivalent(a, octagon(2, [({0: 1, 1: 1}, 4)]))
    assert equivalent(octagon(1, [({0: 2}, 5)]), octagon(1, [({0: 1}, 2)]))
    assert not equivalent(octagon(1, [({0: 2}, 5)]), octagon(1, [({0: 1}, 3)]))
    assert point_holds(octagon(1, [({0: 1}, 3)]), [3]) and not point_holds(octagon(1, [({0: 2}, 5)]), [3])


@given(octagons())
def test_tight_entries_are_box_suprema(case):
    n, m = case
    t = tight_close(m)
    sup = oracles.octagon_suprema(m, 20)
    assert (t is None) == (sup is None)
    if t is not None:
        fin = t < INF
        assert np.array_equal(t[fin], sup[fin])


@given(octagons())
def test_tightening_keeps_integer_points(case):
    n, m = case
    t = tight_close(m)
    pts = oracles.octagon_box_points(m, 6)
    if t is None:
        assert len(pts) == 0
    else:
        assert np.array_equal(pts, oracles.octagon_box_points(t, 6))


@given(octagons())
def test_tight_is_idempotent_coherent_and_dominated(case):
    n, m = case
    t = tight_close(m)
    if t is None:
        return
    assert is_coherent(t) and is_coherent(close(m))
    assert np.array_equal(tight_close(t), t)
    assert (t <= close(m)).all()
    idx = np.arange(2 * n)
    assert (t[idx, idx ^ 1][t[idx, idx ^ 1] < INF] % 2 == 0).all()


@given(octagons())
def test_tightening_formula_oracle(case):
    n, m = case
    c = close(m)
    ref = None if c is None else oracles.tighten_formula(c)
    t = tight_close(m)
    assert (ref is None) == (t is None)
    if t is not None:
        assert np.array_equal(t, ref)


@given(octagons())
def test_picked_point_satisfies(case):
    n, m = case
    if tight_close(m) is not None:
        assert point_holds(m, pick_point(m))


@given(oct_relations(), oct_relations())
def test_compose_semantics_on_box(a, b):
    r = oct_compose(a, b)
    assert r is EMPTY or is_coherent(r.matrix)
    for pre, post in itertools.product(range(-4, 5), repeat=2):
        exists = any(a.holds([pre], [mid]) and b.holds([mid], [post]) for mid in range(-12, 13))
        assert (r is not EMPTY and r.holds([pre], [post])) == exists
