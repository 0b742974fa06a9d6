import numpy as np
from hypothesis import given, strategies as st

from flatreach.dbm import INF, close
from flatreach.octagon import tight_close
from flatreach.param import (
    TOP, ParamDbm, add, evaluate, first_difference, half_floor, meet, param_close, param_equal, prune, substitute,
)

terms = st.lists(st.tuples(st.integers(-3, 3), st.integers(-8, 8)), min_size=1, max_size=4)
bounds = st.one_of(st.just(TOP), terms.map(lambda t: prune(tuple(t))))


def brute_min(ts, k):
    return min(a * k + b for a, b in ts) if ts else int(INF)


def test_param_equal_examples():
    assert param_equal(((0, 5),), prune(((0, 5), (1, 7))))
    assert not param_equal(((1, 0),), ((1, 1),))
    p = prune(((0, 3), (1, 0)))
    q = prune(((0, 3), (1, 0), (2, -2)))
    assert [brute_min(p, k) for k in range(5)] != [brute_min(q, k) for k in range(5)]
    assert not param_equal(p, q)
    assert first_difference(p, q) == 0


@given(terms)
def test_prune_keeps_the_lower_envelope(ts):
    p = prune(tuple(ts))
    for k in range(0, 40):
        assert evaluate(p, k) == brute_min(ts, k)
    for i, (a, b) in enumerate(p):
        for c, d in p[i + 1:]:
            assert not (a <= c and b <= d) and not (c <= a and d <= b)


@given(bounds, bounds)
def test_add_meet_pointwise(p, q):
    for k in range(30):
        s = evaluate(add(p, q), k)
        ref = int(INF) if not p or not q else evaluate(p, k) + evaluate(q, k)
        assert s == ref
        assert evaluate(meet(p, q), k) == min(evaluate(p, k), evaluate(q, k))


@given(bounds, bounds)
def test_first_difference_is_exact(p, q):
    diff = first_difference(p, q)
    values = [(evaluate(p, k), evaluate(q, k)) for k in range(200)]
    if diff is None:
        assert all(x == y for x, y in values)
    else:
        assert values[diff][0] != values[diff][1]
        assert all(x == y for x, y in values[:diff])


@given(bounds, st.integers(1, 3), st.integers(0, 3))
def test_substitute(p, scale, shift):
    s = substitute(p, scale, shift)
    for k in range(20):
        assert evaluate(s, k) == evaluate(p, scale * k + shift)


@given(st.lists(st.tuples(st.integers(-2, 2).map(lambda a: 2 * a), st.integers(-8, 8)), min_size=1, max_size=3))
def test_half_floor(ts):
    h = half_floor(prune(tuple(ts)))
    for k in range(20):
        assert evaluate(h, k) == brute_min(ts, k) // 2


def test_constant_matrix_closes_like_a_dbm():
    m = np.array([[0, 2, int(INF)], [int(INF), 0, -1], [3, int(INF), 0]], dtype=np.int64)
    pc = param_close(ParamDbm.constant(m))
    assert pc.status == "consistent"
    for k in range(5):
        assert np.array_equal(pc.instantiate(k), close(m))


def test_conditional_cycle():
    # a two-node cycle of weight 3 - k
    p = ParamDbm(((((0, 0),), ((-1, 3),)), (((0, 0),), ((0, 0),))))
    pc = param_close(p)
    assert pc.status == "conditional"
    assert [pc.consistent_at(k) for k in range(6)] == [True, True, True, True, False, False]
    assert pc.first_inconsistent() == 4
    assert pc.least_feasible() == 0


@st.composite
def param_dbms(draw, max_dim=4):
    n = draw(st.integers(1, max_dim))
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(((0, 0),))
            elif draw(st.booleans()):
                row.append(prune(tuple(draw(terms))))
            else:
                row.append(TOP)
        rows.append(tuple(row))
    return ParamDbm(tuple(rows))


@given(param_dbms())
def test_close_commutes_with_instantiation(p):
    pc = param_close(p)
    for k in range(16):
        direct = close(p.instantiate(k))
        got = pc.instantiate(k)
        assert (direct is None) == (got is None), k
        if direct is not None:
            assert np.array_equal(direct, got)


@st.composite
def coherent_param(draw, max_vars=2):
    n = draw(st.integers(1, max_vars))
    size = 2 * n
    cells = {}
    for i in range(size):
        for j in range(size):
            if i != j and draw(st.floats(0, 1)) < 0.4:
                b = prune(tuple(draw(terms)))
                mirror = (j ^ 1, i ^ 1)
                cells[(i, j)] = meet(cells.get((i, j), TOP), b)
                cells[mirror] = meet(cells.get(mirror, TOP), b)
    rows = tuple(tuple(((0, 0),) if i == j else cells.get((i, j), TOP) for j in range(size)) for i in range(size))
    return ParamDbm(rows)


@given(coherent_param())
def test_octagonal_close_commutes_with_instantiation(p):
    pc = param_close(p, "OCT")
    for k in range(16):
        direct = tight_close(p.instantiate(k))
        got = pc.instantiate(k)
        assert (direct is None) == (got is None), k
        if direct is not None:
            assert np.array_equal(direct, got)
