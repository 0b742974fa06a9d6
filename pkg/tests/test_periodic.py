import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flatreach import oracles
from flatreach.periodic import ScalarPeriodic, combine_periodic, detect, fits


@st.composite
def scalar(draw):
    b, c = draw(st.integers(1, 4)), draw(st.integers(1, 4))
    head = tuple(draw(st.integers(-10, 10)) for _ in range(b + c - 1))
    rates = tuple(draw(st.integers(-3, 3)) for _ in range(c))
    return ScalarPeriodic(b, c, head, rates)


def test_indexing():
    s = ScalarPeriodic(2, 2, (5, 1, 2), (1, -1))
    # 5 | 1 2 | 2 1 | 3 0
    assert s.values(7) == [5, 1, 2, 2, 1, 3, 0]
    with pytest.raises(ValueError):
        ScalarPeriodic(1, 2, (1,), (0,))


def test_sum_of_constants():
    s = ScalarPeriodic(3, 1, (4, 4, 4), (0,))
    t = ScalarPeriodic.build(lambda m: 7, 1, 1)
    u = combine_periodic("sum", s, t)
    assert u.prefix == 3 and u.values(10) == [11] * 10


def test_min_of_line_and_constant():
    s = ScalarPeriodic.build(lambda m: m, 1, 1)
    t = ScalarPeriodic.build(lambda m: 10, 1, 1)
    u = combine_periodic("min", s, t)
    assert (u.prefix, u.period, u.rates) == (10, 1, (0,))
    assert u.values(15) == [min(m, 10) for m in range(1, 16)]


def test_floor_half_doubles_the_period():
    s = ScalarPeriodic.build(lambda m: 3 * m, 1, 1)
    u = combine_periodic("floor_half", s)
    assert (u.period, u.rates) == (2, (3, 3))
    assert u.values(12) == [3 * m // 2 for m in range(1, 13)]
    assert oracles.scalar_refit(u.values(40), 4)[1] == 2


def test_unknown_operation():
    s = ScalarPeriodic.build(lambda m: m, 1, 1)
    with pytest.raises(ValueError):
        combine_periodic("max", s, s)
    with pytest.raises(ValueError):
        combine_periodic("min", s)


@given(scalar(), scalar(), st.sampled_from(["sum", "min"]))
def test_binary_combination_matches_brute_force(s, t, op):
    u = combine_periodic(op, s, t)
    h = u.prefix + 4 * u.period + 30
    fn = (lambda m: s[m] + t[m]) if op == "sum" else (lambda m: min(s[m], t[m]))
    values = [fn(m) for m in range(1, h + 1)]
    assert u.values(h) == values
    least = oracles.scalar_min_prefix(values, u.period)
    assert least is not None and least <= u.prefix


@given(scalar())
def test_floor_half_matches_brute_force(s):
    u = combine_periodic("floor_half", s)
    h = u.prefix + 4 * u.period + 30
    assert u.values(h) == [s[m] // 2 for m in range(1, h + 1)]


def test_matrix_detection():
    rng = random.Random(3)
    for _ in range(30):
        b, c = rng.randint(1, 5), rng.randint(1, 4)
        base = [np.array([[rng.randint(-5, 5)]]) for _ in range(b + c - 1)]
        rate = [np.array([[rng.randint(-2, 2)]]) for _ in range(c)]
        seq = list(base)
        while len(seq) < 60:
            seq.append(seq[-c] + rate[(len(seq) - b + 1) % c])
        stacked = np.stack(seq)
        found = detect(stacked)
        assert found is not None
        fb, fc = found
        assert fits(stacked, fb, fc)
        assert c % fc == 0 and fb <= b
        assert (fb, fc) == oracles.matrix_refit([m.tolist() for m in seq], 15)
