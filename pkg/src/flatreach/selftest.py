"""Small seeded oracle corpora behind ``flatreach selftest``."""

from __future__ import annotations

import random

import numpy as np

from . import oracles
from .accel import canonical, closed_form, detect_period, fast_power, naive_power
from .corpus import db_corpus, oct_corpus, octagon_set_corpus, swap_shift_relation
from .dbm import close
from .octagon import tight_close
from .tropical import detect_power_period, period_bound


def _same(r, s) -> bool:
    a, b = canonical(r), canonical(s)
    return (a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b))


def _closure(seed: int) -> tuple[bool, int]:
    rels = db_corpus(seed, 30)
    for r in rels:
        ref = oracles.bellman_ford_closure(r.matrix.tolist())
        got = close(r.matrix)
        if (ref is None) != (got is None):
            return False, len(rels)
        if got is not None and not np.array_equal(got, np.array(ref)):
            return False, len(rels)
    return True, len(rels)


def _fast_power(seed: int) -> tuple[bool, int]:
    rels = db_corpus(seed + 1, 20)
    for r in rels:
        for n in range(1, 17):
            if not _same(fast_power(r, n), naive_power(r, n)):
                return False, len(rels)
    return True, len(rels)


def _tight(seed: int) -> tuple[bool, int]:
    sets = octagon_set_corpus(seed + 2, 10, max_vars=2)
    for raw in sets:
        t = tight_close(raw)
        sup = oracles.octagon_suprema(raw, 12)
        if (t is None) != (sup is None):
            return False, len(sets)
        if t is not None:
            finite = t < oracles.BIG
            if not np.array_equal(t[finite], sup[finite]):
                return False, len(sets)
    return True, len(sets)


def _closed_forms(seed: int) -> tuple[bool, int]:
    rels = db_corpus(seed + 3, 12) + oct_corpus(seed + 3, 6)
    for r in rels:
        cf = closed_form(r)
        if not cf:
            continue
        for n in range(1, cf.prefix + 6 * cf.period + 1):
            if not _same(cf.instantiate(n), naive_power(r, n)):
                return False, len(rels)
    return True, len(rels)


def _swap_shift(seed: int) -> tuple[bool, int]:
    r = swap_shift_relation()
    spec = detect_period(r)
    if (spec.prefix, spec.period) != (1, 2):
        return False, 1
    for i, rate in enumerate(spec.rates):
        a = naive_power(r, 1 + i).canonical()
        b = naive_power(r, 3 + i).canonical()
        if not np.array_equal(rate, np.where(a >= 2**61, rate, b - a)):
            return False, 1
    return True, 1


def _tropical(seed: int) -> tuple[bool, int]:
    rng = np.random.default_rng(seed + 4)
    count = 20
    for _ in range(count):
        m = int(rng.integers(1, 5))
        a = rng.integers(-6, 7, size=(m, m)).astype(np.int64)
        a[rng.random((m, m)) < 0.3] = 2**61
        found = detect_power_period(a, 120)
        if found is not None and period_bound(a) % found[1] != 0:
            return False, count
    return True, count


def _machines(seed: int) -> tuple[bool, int]:
    from .reach import decide_reach, replay
    from .suite import machine_suite

    cases = machine_suite()
    for c in cases:
        m = c.machine()
        res = decide_reach(m)
        if res.verdict != c.expected:
            return False, len(cases)
        if res.witness is not None and not replay(m, res.witness):
            return False, len(cases)
    return True, len(cases)


CHECKS = [
    ("closure matches Bellman-Ford", _closure),
    ("fast power matches naive composition", _fast_power),
    ("tight closure matches box suprema", _tight),
    ("closed forms match naive powers", _closed_forms),
    ("swap-shift period and rates", _swap_shift),
    ("tropical period divides cyclicity bound", _tropical),
    ("machine suite verdicts", _machines),
]


def run_selftest(seed: int = 0) -> list[tuple[str, bool, int]]:
    return [(name, *fn(seed)) for name, fn in CHECKS]
