"""Zigzag transition tables for difference-bounds relations.

The constraint graph of ``R^m`` is ``m`` copies of the one-step graph glued
column to column.  A state records, for every row (counter) of a column of
that unfolding, how the selected paths cross the column:

* ``R``   in from the left, out to the right
* ``L``   in from the right, out to the left
* ``LR``  in from the left, back out to the left
* ``RL``  in from the right, back out to the right
* ``BOT`` untouched

Counters constrained against each other on the same side are first routed
through a fresh row so that every edge goes between adjacent columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accel import CapExceeded
from .dbm import INF, DbRelation
from . import tropical

BOT, R, L, LR, RL = range(5)
NAMES = ("BOT", "R", "L", "LR", "RL")
OUT_RIGHT = (R, RL)
IN_LEFT = (R, LR)
OUT_LEFT = (L, LR)
IN_RIGHT = (L, RL)

FLAVORS = ("ef", "eb", "of", "ob")


@dataclass
class Bipartite:
    """Edges between adjacent columns over ``rows`` rows (``n_orig`` original ones)."""

    rows: int
    n_orig: int
    forward: dict[int, dict[int, int]]   # row k at column c -> row l at column c+1
    backward: dict[int, dict[int, int]]  # row l at column c+1 -> row k at column c


def bipartite(r: DbRelation) -> Bipartite:
    n = r.n_vars
    m = r.matrix
    fwd: dict[int, dict[int, int]] = {}
    bwd: dict[int, dict[int, int]] = {}
    rows = n

    def put(table, a, b, w):
        row = table.setdefault(a, {})
        if b not in row or w < row[b]:
            row[b] = w

    for i in range(2 * n):
        for j in range(2 * n):
            if i == j or m[i, j] >= INF:
                continue
            w = int(m[i, j])
            pi, pj = i >= n, j >= n
            a, b = i % n, j % n
            if not pi and pj:
                put(fwd, a, b, w)
            elif pi and not pj:
                put(bwd, a, b, w)
            elif not pi and not pj:
                t = rows
                rows += 1
                put(fwd, a, t, w)
                put(bwd, t, b, 0)
            else:
                s = rows
                rows += 1
                put(bwd, a, s, w)
                put(fwd, s, b, 0)
    return Bipartite(rows, n, fwd, bwd)


def _capabilities(g: Bipartite) -> tuple[set[int], set[int]]:
    """Rows with an outgoing forward edge and rows with an incoming backward edge."""
    out_right = {k for k, row in g.forward.items() if row}
    in_right = {k for row in g.backward.values() for k in row}
    return out_right, in_right


def _injections(sources: list[int], edges: dict[int, dict[int, int]]) -> dict[frozenset, int]:
    """Minimum weight of each way of matching every source to a distinct target."""
    best: dict[frozenset, int] = {}

    def go(idx: int, used: frozenset, weight: int):
        if idx == len(sources):
            if used not in best or weight < best[used]:
                best[used] = weight
            return
        for t, w in edges.get(sources[idx], {}).items():
            if t not in used:
                go(idx + 1, used | {t}, weight + w)

    go(0, frozenset(), 0)
    return best


def _reverse(edges: dict[int, dict[int, int]]) -> dict[int, dict[int, int]]:
    rev: dict[int, dict[int, int]] = {}
    for a, row in edges.items():
        for b, w in row.items():
            rev.setdefault(b, {})[a] = w
    return rev


@dataclass
class ZTable:
    """Reachable states and weighted one-step transitions of the zigzag table."""

    graph: Bipartite
    states: list[tuple[int, ...]]
    index: dict[tuple[int, ...], int]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def successors(self, s: int) -> list[tuple[int, int]]:
        mask = self.src == s
        return list(zip(self.dst[mask].tolist(), self.weight[mask].tolist()))

    def describe(self, s: int) -> str:
        return "(" + ",".join(NAMES[t] for t in self.states[s]) + ")"

    # initial / final predicates per flavor and pair (0-based counters)

    def initial(self, flavor: str, i: int, j: int) -> np.ndarray:
        return self._select(flavor, i, j, True)

    def final(self, flavor: str, i: int, j: int) -> np.ndarray:
        return self._select(flavor, i, j, False)

    def _select(self, flavor: str, i: int, j: int, first: bool) -> np.ndarray:
        key = (flavor, i, j, first)
        if key in self._cache:
            return self._cache[key]
        want: dict[int, int] = {}
        if flavor == "of":
            want = {i: R} if first else {j: R}
        elif flavor == "ob":
            want = {j: L} if first else {i: L}
        elif flavor == "ef":
            if first:
                want = {i: RL} if i == j else {i: R, j: L}
        elif flavor == "eb":
            if not first:
                want = {i: LR} if i == j else {i: L, j: R}
        else:
            raise ValueError(f"unknown flavor {flavor!r}")
        rest = (BOT, RL) if first else (BOT, LR)
        sel = []
        for idx, q in enumerate(self.states):
            ok = all(q[v] == t for v, t in want.items()) and all(
                q[v] in rest for v in range(len(q)) if v not in want
            )
            if ok:
                sel.append(idx)
        arr = np.array(sel, dtype=int)
        self._cache[key] = arr
        return arr

    def run_weights(self, flavor: str, i: int, j: int, m_max: int) -> list[int]:
        """``[w_1, ..., w_{m_max}]``: least accepting run weight for each length."""
        vec = np.full(self.n_states, INF, dtype=np.int64)
        vec[self.initial(flavor, i, j)] = 0
        fin = self.final(flavor, i, j)
        out = []
        for _ in range(m_max):
            vec = tropical._relax(vec, self.src, self.dst, self.weight)
            out.append(int(vec[fin].min()) if len(fin) else int(INF))
        return out


def _initial_states(g: Bipartite, out_right: set[int], in_right: set[int]) -> list[tuple[int, ...]]:
    # column 0 has nothing to its left: only BOT/RL, plus at most one start (R)
    # and one end (L) on original rows
    base = [(BOT, RL) if v in out_right and v in in_right else (BOT,) for v in range(g.rows)]
    out = set()

    def fill(v: int, cur: list[int], r_used: bool, l_used: bool):
        if v == g.rows:
            out.add(tuple(cur))
            return
        for t in base[v]:
            cur.append(t)
            fill(v + 1, cur, r_used, l_used)
            cur.pop()
        if v < g.n_orig:
            if not r_used and v in out_right:
                cur.append(R)
                fill(v + 1, cur, True, l_used)
                cur.pop()
            if not l_used and v in in_right:
                cur.append(L)
                fill(v + 1, cur, r_used, True)
                cur.pop()

    fill(0, [], False, False)
    return sorted(out)


def build_table(r: DbRelation, cap_states: int = 200_000) -> ZTable | CapExceeded:
    """Explore the transition table forward from every flavor-initial state."""
    g = bipartite(r)
    out_right, in_right = _capabilities(g)
    bounce = {v for v in out_right if v in in_right}
    bwd_into = _reverse(g.backward)  # row k at column c <- row l at column c+1
    fwd_memo: dict[tuple[int, ...], dict[frozenset, int]] = {}
    bwd_memo: dict[tuple[int, ...], dict[frozenset, int]] = {}

    states = _initial_states(g, out_right, in_right)
    index = {q: i for i, q in enumerate(states)}
    src, dst, wts = [], [], []
    frontier = list(range(len(states)))
    while frontier:
        nxt = []
        for s in frontier:
            q = states[s]
            outs = tuple(v for v, t in enumerate(q) if t in OUT_RIGHT)
            ins = tuple(v for v, t in enumerate(q) if t in IN_RIGHT)
            if outs not in fwd_memo:
                fwd_memo[outs] = _injections(list(outs), g.forward)
            if ins not in bwd_memo:
                bwd_memo[ins] = _injections(list(ins), bwd_into)
            best: dict[tuple[int, ...], int] = {}
            for b_in, w1 in fwd_memo[outs].items():
                for b_out, w2 in bwd_memo[ins].items():
                    for q2 in _completions(g.rows, b_in, b_out, bounce):
                        w = w1 + w2
                        if q2 not in best or w < best[q2]:
                            best[q2] = w
            for q2, w in best.items():
                t = index.get(q2)
                if t is None:
                    t = len(states)
                    if t >= cap_states:
                        return CapExceeded(t, "zigzag state cap reached")
                    index[q2] = t
                    states.append(q2)
                    nxt.append(t)
                src.append(s)
                dst.append(t)
                wts.append(w)
        frontier = nxt
    return ZTable(g, states, index, np.array(src, dtype=int), np.array(dst, dtype=int),
                  np.array(wts, dtype=np.int64))


def _completions(rows: int, b_in: frozenset, b_out: frozenset, bounce: set[int]):
    # crossing types are forced by the matchings; only untouched rows may
    # additionally host a right bounce
    choices = []
    for v in range(rows):
        li, lo = v in b_in, v in b_out
        if li and lo:
            opts = (LR,)
        elif li:
            opts = (R,)
        elif lo:
            opts = (L,)
        else:
            opts = (BOT, RL) if v in bounce else (BOT,)
        choices.append(opts)

    def go(v: int, cur: list[int]):
        if v == rows:
            yield tuple(cur)
            return
        for t in choices[v]:
            cur.append(t)
            yield from go(v + 1, cur)
            cur.pop()

    yield from go(0, [])


def min_weight(t: ZTable, flavor: str, i: int, j: int, m: int) -> int:
    """Least weight of an accepting run of length ``m`` (``INF`` when none)."""
    if m < 1:
        raise ValueError("length must be at least 1")
    return t.run_weights(flavor, i, j, m)[-1]


def entry_flavor(n: int, row: int, col: int) -> tuple[str, int, int]:
    """Flavor and counter pair whose runs encode entry ``(row, col)`` of a ``2N`` DBM."""
    pr, pc = row >= n, col >= n
    a, b = row % n, col % n
    if not pr and not pc:
        return "ef", a, b
    if not pr and pc:
        return "of", a, b
    if pr and not pc:
        return "ob", a, b
    return "eb", a, b


@dataclass(frozen=True)
class CyclicityReport:
    components: tuple[tropical.ComponentCycles, ...]
    period_bound: int


def _closure(start: np.ndarray, src: np.ndarray, dst: np.ndarray, n: int) -> np.ndarray:
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = np.zeros(n, dtype=bool)
        nxt[dst[frontier[src]]] = True
        frontier = nxt & ~seen
        seen |= nxt
    return seen


def live_states(t: ZTable, flavor: str, i: int, j: int) -> np.ndarray:
    """Mask of states reachable from the flavor's initial set and co-reachable to its final set."""
    fwd = _closure(t.initial(flavor, i, j), t.src, t.dst, t.n_states)
    bwd = _closure(t.final(flavor, i, j), t.dst, t.src, t.n_states)
    return fwd & bwd


def scc_cyclicity(t: ZTable, flavor: str | None = None, i: int = 0, j: int = 0) -> CyclicityReport:
    """Cycle analytics of the whole table, or of the part live for one flavor automaton."""
    src, dst, w = t.src, t.dst, t.weight
    if flavor is not None:
        live = live_states(t, flavor, i, j)
        keep = live[src] & live[dst]
        src, dst, w = src[keep], dst[keep], w[keep]
    comps = tropical.component_cycles(t.n_states, src, dst, w)
    bound = 1
    for c in comps:
        if c.min_mean is not None:
            bound = math.lcm(bound, c.cyclicity)
    return CyclicityReport(tuple(comps), bound)
