"""The eleven acceptance criteria, each reported as one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session (and inline when run with ``-s``).
"""

import math
import random
import time

import numpy as np
import pytest

from conftest import CRITERIA
from flatreach import oracles
from flatreach.accel import (
    Certified, CapExceeded, canonical, closed_form, detect_period, fast_power, naive_power, verify_period,
)
from flatreach.corpus import two_counter_relation, spiral_relation, swap_shift_relation
from flatreach.dbm import INF, DbRelation
from flatreach.machine import parse_relation
from flatreach.octagon import oct_compose, tight_close
from flatreach.periodic import ScalarPeriodic, combine_periodic
from flatreach.reach import decide_reach, replay
from flatreach.suite import WORKED_COUNT_UP, WORKED_PARITY, WORKED_SWAP_SHIFT, machine_suite
from flatreach.tropical import period_bound, prefix_bound
from flatreach.zigzag import FLAVORS, build_table, entry_flavor, scc_cyclicity

I = int(INF)


def record(num: int, ok: bool, detail: str, started: float, budget: float):
    elapsed = time.perf_counter() - started
    within = elapsed < budget
    CRITERIA[num] = (ok and within, f"{detail} [{elapsed:.1f}s, budget {budget:.0f}s]")
    print(f"\ncriterion {num}: {'PASS' if ok and within else 'FAIL'} {detail} ({elapsed:.1f}s)")
    assert ok, detail
    assert within, f"took {elapsed:.1f}s, budget {budget}s"


def same(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


# 1 -------------------------------------------------------------------------


def test_criterion_01_two_counter_closed_matrix():
    t0 = time.perf_counter()
    # reference closed matrix, rows and columns x1 x2 x1' x2'
    expected = np.array([
        [0, I, 1, -1],
        [I, 0, -2, 2],
        [I, I, 0, I],
        [I, I, I, 0],
    ])
    got = two_counter_relation().closed()
    with open("demos/data/two_counter.rel") as fh:
        parsed, _ = parse_relation(fh.read())
    ok = same(got, expected) and same(parsed.closed(), expected)
    record(1, ok, "closed DBM of the two-counter relation matches entry by entry", t0, 1)


# 2 -------------------------------------------------------------------------


def test_criterion_02_fast_power_matches_naive(db_relations):
    t0 = time.perf_counter()
    assert len(db_relations) >= 200
    bad = []
    for idx, r in enumerate(db_relations):
        acc = DbRelation.identity(r.n_vars)
        for n in range(1, 65):
            acc = naive_power(r, 1) if n == 1 else (acc if canonical(acc) is None else acc.compose(r))
            if not same(canonical(fast_power(r, n)), canonical(acc)):
                bad.append((idx, n))
                break
    record(2, not bad, f"{len(db_relations)} relations, n <= 64, mismatches {bad[:3]}", t0, 60)


# 3 -------------------------------------------------------------------------


def test_criterion_03_tight_closure_exact(octagon_sets):
    t0 = time.perf_counter()
    assert len(octagon_sets) >= 100
    bad = []
    empty = 0
    for idx, raw in enumerate(octagon_sets):
        t = tight_close(raw)
        sup = oracles.octagon_suprema(raw, 20)
        if (t is None) != (sup is None):
            bad.append((idx, "consistency"))
            continue
        if t is None:
            empty += 1
            continue
        finite = t < INF
        if not np.array_equal(t[finite], sup[finite]):
            bad.append((idx, "entries"))
    record(3, not bad, f"{len(octagon_sets)} octagons ({empty} empty), box [-20,20], failures {bad[:3]}", t0, 120)


# 4 -------------------------------------------------------------------------


def test_criterion_04_unfolded_tightening(oct_relations):
    t0 = time.perf_counter()
    bad = []
    for idx, r in enumerate(oct_relations):
        acc = r
        for m in range(1, 11):
            if m > 1 and canonical(acc) is not None:
                acc = oct_compose(acc, r)
            direct = canonical(acc)
            ref = oracles.unfolded_tight_power(r.matrix, m)
            if not same(direct, ref):
                bad.append((idx, m))
                break
    record(4, not bad, f"{len(oct_relations)} octagonal relations, m <= 10, mismatches {bad[:3]}", t0, 120)


# 5 and 8 -------------------------------------------------------------------

_CERTIFIED: dict = {}


def test_criterion_05_closed_form_correct(db_relations, oct_relations):
    t0 = time.perf_counter()
    bad, certified, capped = [], [], 0
    for idx, r in enumerate(list(db_relations) + list(oct_relations)):
        cf = closed_form(r)
        if isinstance(cf, CapExceeded):
            capped += 1
            continue
        certified.append((r, cf))
        acc = r
        for n in range(1, cf.prefix + 6 * cf.period + 1):
            if n > 1 and canonical(acc) is not None:
                acc = acc.compose(r) if r.kind == "DB" else oct_compose(acc, r)
            if not same(canonical(cf.instantiate(n)), canonical(acc)):
                bad.append((idx, n))
                break
    _CERTIFIED["items"] = certified
    record(5, not bad, f"{len(certified)} certified, {capped} capped, mismatches {bad[:3]}", t0, 180)


def test_criterion_08_period_divisibility(db_relations, oct_relations):
    t0 = time.perf_counter()
    items = _CERTIFIED.get("items")
    if items is None:
        items = [(r, cf) for r in list(db_relations) + list(oct_relations)
                 if not isinstance(cf := closed_form(r), CapExceeded)]
    bad = []
    for r, cf in items:
        n = r.n_vars
        bound = math.lcm(*range(1, n + 1)) if r.kind == "DB" else 2 * math.lcm(*range(1, 2 * n + 1))
        if bound % cf.period:
            bad.append((r.kind, n, cf.period))
    periods = sorted({cf.period for _, cf in items})
    record(8, not bad, f"{len(items)} periods checked (seen {periods}), violations {bad[:3]}", t0, 60)


# 6 -------------------------------------------------------------------------


def test_criterion_06_swap_shift_example():
    t0 = time.perf_counter()
    r = swap_shift_relation()
    spec = detect_period(r)
    ok = (spec.prefix, spec.period) == (1, 2)
    bases = [canonical(fast_power(r, spec.prefix + i)) for i in range(spec.period)]
    ok &= isinstance(verify_period(r, spec.prefix, spec.period, spec.rates, bases), Certified)
    cf = closed_form(r)
    want3, _ = parse_relation("vars x, y; x' = y + 2 && y' = x + 1")
    want7, _ = parse_relation("vars x, y; x' = y + 4 && y' = x + 3")
    ok &= cf.instantiate(3) == want3 and cf.instantiate(7) == want7
    # the even powers are checked against brute force only
    for k in range(6):
        ok &= same(canonical(cf.instantiate(2 * k + 2)), canonical(naive_power(r, 2 * k + 2)))
    record(6, ok, f"(b, c) = ({spec.prefix}, {spec.period}), certified, R^3 and R^7 match", t0, 1)


# 7 -------------------------------------------------------------------------


EMPTY_UNFOLDINGS: list[int] = []


def _zigzag_agrees(r: DbRelation, m_max: int) -> list:
    n = r.n_vars
    t = build_table(r)
    runs = {(fl, i, j): t.run_weights(fl, i, j, m_max) for fl in FLAVORS for i in range(n) for j in range(n)}
    bad = []
    for m in range(1, m_max + 1):
        ref = oracles.compose_by_unfolding([r.matrix] * m, n)
        if ref is None:
            # no closed matrix to compare with, and a negative cycle that stays
            # between interior columns is invisible to single-path runs
            EMPTY_UNFOLDINGS.append(m)
            continue
        for a in range(2 * n):
            for b in range(2 * n):
                fl, i, j = entry_flavor(n, a, b)
                w = runs[(fl, i, j)][m - 1]
                want = ref[a, b]
                got = min(w, 0) if a == b else w
                if got != want:
                    bad.append((m, a, b, w, int(want)))
    return bad


def test_criterion_07_zigzag_weights(db_relations):
    t0 = time.perf_counter()
    rels = [r for r in db_relations if r.n_vars <= 3]
    bad = []
    for idx, r in enumerate(rels):
        b = _zigzag_agrees(r, 12)
        if b:
            bad.append((idx, b[0]))
    spiral = spiral_relation()
    spiral_bad = _zigzag_agrees(spiral, 12)
    t = build_table(spiral)
    accepts_17 = t.run_weights("of", 0, 6, 17)[16] < INF
    # cyclic components of the live part of the of(1,7) automaton
    means = [c.min_mean for c in scc_cyclicity(t, "of", 0, 6).components if c.min_mean is not None]
    ok = not bad and not spiral_bad and accepts_17 and means == [-1]
    record(7, ok, f"{len(rels)} relations + spiral relation, m <= 12, of(1,7) accepts at 17: {accepts_17}, "
                  f"live cycle means {[str(x) for x in means]}, empty unfoldings skipped {len(EMPTY_UNFOLDINGS)}, mismatches {(bad + spiral_bad)[:3]}", t0, 300)


# 9 -------------------------------------------------------------------------


def test_criterion_09_tropical_bounds():
    t0 = time.perf_counter()
    rng = random.Random(909)
    bad, undetected = [], 0
    count = 100
    for idx in range(count):
        m = rng.randint(1, 5)
        a = [[I if rng.random() < 0.3 else rng.randint(-6, 6) for _ in range(m)] for _ in range(m)]
        seq, cur = [], None
        for k in range(1, 241):
            cur = oracles.naive_tropical_power(a, k) if cur is None else _times(cur, a)
            seq.append(cur)
        fit = oracles.matrix_refit(seq, 60)
        if fit is None:
            undetected += 1
            bad.append((idx, "no fit"))
            continue
        b, c = fit
        arr = np.array(a, dtype=np.int64)
        if b > prefix_bound(arr) or period_bound(arr) % c:
            bad.append((idx, b, c, period_bound(arr)))
    record(9, not bad, f"{count} matrices, violations {bad[:3]}", t0, 120)


def _times(p, a):
    n = len(a)
    out = [[I] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if p[i][k] >= I:
                continue
            for j in range(n):
                if a[k][j] < I and p[i][k] + a[k][j] < out[i][j]:
                    out[i][j] = p[i][k] + a[k][j]
    return out


# 10 ------------------------------------------------------------------------


def test_criterion_10_reachability_agreement():
    t0 = time.perf_counter()
    cases = machine_suite()
    names = {c.name for c in cases}
    assert {WORKED_COUNT_UP.name, WORKED_PARITY.name, WORKED_SWAP_SHIFT.name} <= names
    bad = []
    for c in cases:
        m = c.machine()
        res = decide_reach(m)
        bfs = oracles.bfs_reach(m, 15)
        if c.expected == "Reachable":
            if not bfs.reachable or res.verdict != "Reachable" or not replay(m, res.witness):
                bad.append(c.name)
        else:
            certified = not bfs.reachable and oracles.check_invariant(m, c.invariant, 15)
            if not certified or res.verdict != "Unreachable":
                bad.append(c.name)
    wc = decide_reach(WORKED_COUNT_UP.machine()).witness
    ok = not bad and [v[0] for v in wc.trace] == [0, 1, 2, 3, 4, 5]
    ok &= decide_reach(WORKED_SWAP_SHIFT.machine()).witness.loop_iters == {"a": 6}
    record(10, ok, f"{len(cases)} machines, disagreements {bad}", t0, 120)


# 11 ------------------------------------------------------------------------


def _random_periodic(rng: random.Random) -> ScalarPeriodic:
    b, c = rng.randint(1, 4), rng.randint(1, 4)
    head = tuple(rng.randint(-10, 10) for _ in range(b + c - 1))
    rates = tuple(rng.randint(-3, 3) for _ in range(c))
    return ScalarPeriodic(b, c, head, rates)


def test_criterion_11_combine_periodic():
    t0 = time.perf_counter()
    rng = random.Random(1111)
    bad = []
    count = 500
    for idx in range(count):
        op = rng.choice(["sum", "min", "floor_half"])
        s = _random_periodic(rng)
        t = _random_periodic(rng) if op != "floor_half" else None
        res = combine_periodic(op, s, t)
        horizon = res.prefix + 8 * res.period + 40
        if op == "sum":
            values = [s[m] + t[m] for m in range(1, horizon + 1)]
        elif op == "min":
            values = [min(s[m], t[m]) for m in range(1, horizon + 1)]
        else:
            values = [s[m] // 2 for m in range(1, horizon + 1)]
        rates = [values[res.prefix + res.period + i - 1] - values[res.prefix + i - 1] for i in range(res.period)]
        least_b = oracles.scalar_min_prefix(values, res.period)
        least_bc = oracles.scalar_refit(values, res.period)
        ok = (res.values(horizon) == values and list(res.rates) == rates
              and least_b is not None and least_b <= res.prefix and res.period % least_bc[1] == 0)
        if not ok:
            bad.append((idx, op))
    record(11, not bad, f"{count} random cases, failures {bad[:3]}", t0, 10)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
