"""Brute-force reference implementations used to check the library.

Each routine here is deliberately naive and shares no code with the
algorithm it checks.  Closure is cross-checked with Bellman-Ford, and tight
closure with box enumeration.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

BIG = 2**61  # a plain "no bound" marker, independent of the library's INF


# ---------------------------------------------------------------- difference bounds


def bellman_ford_closure(m: Sequence[Sequence[int]], inf: int = BIG) -> list[list[int]] | None:
    """Shortest-path matrix of the constraint graph, ``None`` on a negative cycle.

    Edge ``i -> j`` carries ``m[i][j]`` (the bound on ``v_i - v_j``).
    """
    n = len(m)
    edges = [(i, j, int(m[i][j])) for i in range(n) for j in range(n) if i != j and m[i][j] < inf]
    if any(m[s][s] < 0 for s in range(n)):
        return None
    out = []
    for s in range(n):
        dist = [inf] * n
        dist[s] = 0
        for _ in range(n - 1):
            changed = False
            for u, v, w in edges:
                if dist[u] < inf and dist[u] + w < dist[v]:
                    dist[v] = dist[u] + w
                    changed = True
            if not changed:
                break
        for u, v, w in edges:
            if dist[u] < inf and dist[u] + w < dist[v]:
                return None
        out.append(dist)
    return out


def floyd_warshall(m: np.ndarray, inf: int = BIG) -> np.ndarray | None:
    """Textbook Floyd-Warshall; sums of two finite entries stay below ``2**62``."""
    d = np.array(m, dtype=np.int64)
    n = d.shape[0]
    for k in range(n):
        col = d[:, k : k + 1]
        row = d[k : k + 1, :]
        via = np.where((col < inf) & (row < inf), col + row, inf)
        d = np.minimum(d, via)
    if (np.diag(d) < 0).any():
        return None
    return d


def compose_by_unfolding(mats: Sequence[np.ndarray], n: int, inf: int = BIG) -> np.ndarray | None:
    """Closed DBM between the first and last of ``len(mats) + 1`` counter blocks.

    Each ``mats[s]`` is a ``2n x 2n`` DBM relating block ``s`` to block ``s + 1``.
    """
    blocks = len(mats) + 1
    size = blocks * n
    big = np.full((size, size), inf, dtype=np.int64)
    np.fill_diagonal(big, 0)
    for s, mat in enumerate(mats):
        idx = list(range(s * n, (s + 2) * n))
        for a in range(2 * n):
            for b in range(2 * n):
                if mat[a, b] < inf:
                    big[idx[a], idx[b]] = min(big[idx[a], idx[b]], int(mat[a, b]))
    closed = floyd_warshall(big, inf)
    if closed is None:
        return None
    keep = list(range(n)) + list(range(size - n, size))
    return closed[np.ix_(keep, keep)]


def box_relation_pairs(n: int, atoms: Sequence[tuple[int, int, int]], box: int) -> set[tuple[int, ...]]:
    """All ``(x, x')`` in ``[-box, box]^{2n}`` with ``v_i - v_j <= c`` for every atom."""
    out = set()
    for p in itertools.product(range(-box, box + 1), repeat=2 * n):
        if all(p[i] - p[j] <= c for i, j, c in atoms):
            out.add(p)
    return out


# ---------------------------------------------------------------- octagons


def _dual_values(points: np.ndarray) -> np.ndarray:
    # columns y_0, y_1, ... with y_{2v} = x_v and y_{2v+1} = -x_v
    n = points.shape[1]
    y = np.empty((points.shape[0], 2 * n), dtype=np.int64)
    y[:, 0::2] = points
    y[:, 1::2] = -points
    return y


def box_points(n: int, box: int) -> np.ndarray:
    axis = np.arange(-box, box + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def octagon_box_points(dual: np.ndarray, box: int, inf: int = BIG) -> np.ndarray:
    """Integer points of ``[-box, box]^n`` satisfying every finite cell of a dual matrix."""
    n = dual.shape[0] // 2
    pts = box_points(n, box)
    y = _dual_values(pts)
    ok = np.ones(len(pts), dtype=bool)
    for i in range(2 * n):
        for j in range(2 * n):
            if dual[i, j] < inf:
                ok &= y[:, i] - y[:, j] <= dual[i, j]
    return pts[ok]


def octagon_suprema(dual: np.ndarray, box: int, inf: int = BIG) -> np.ndarray | None:
    """``max(y_i - y_j)`` over the box points (``None`` when there are none)."""
    pts = octagon_box_points(dual, box, inf)
    if len(pts) == 0:
        return None
    y = _dual_values(pts)
    return (y[:, :, None] - y[:, None, :]).max(axis=0)


def tighten_formula(c: np.ndarray, inf: int = BIG) -> np.ndarray | None:
    """``min(c_ij, floor(c_{i,bar i}/2) + floor(c_{bar j,j}/2))`` on a shortest-path closed dual matrix."""
    size = c.shape[0]
    out = np.array(c, dtype=object)
    half = [None if c[i, i ^ 1] >= inf else int(c[i, i ^ 1]) // 2 for i in range(size)]
    for i in range(size):
        if half[i] is not None and half[i ^ 1] is not None and half[i] + half[i ^ 1] < 0:
            return None
    for i in range(size):
        for j in range(size):
            if half[i] is not None and half[j ^ 1] is not None:
                out[i, j] = min(out[i, j], half[i] + half[j ^ 1])
    return out.astype(np.int64)


def unfolded_tight_power(dual: np.ndarray, m: int, inf: int = BIG) -> np.ndarray | None:
    """Tight matrix of ``R^m`` from the closure of the ``m``-times unfolded dual DBM.

    ``dual`` is the ``4N`` dual matrix of ``R`` read as a DBM over ``2N``
    dual variables per side.
    """
    half = dual.shape[0] // 2
    closed = compose_by_unfolding([dual] * m, half, inf)
    if closed is None:
        return None
    return tighten_formula(closed, inf)


# ---------------------------------------------------------------- tropical


def naive_tropical_power(a: Sequence[Sequence[int]], m: int, inf: int = BIG) -> list[list[int]]:
    """Least weight of a length-``m`` walk between every pair, by dynamic programming over walks."""
    n = len(a)
    cur = [[int(a[i][j]) for j in range(n)] for i in range(n)]
    for _ in range(m - 1):
        nxt = [[inf] * n for _ in range(n)]
        for i in range(n):
            for k in range(n):
                if cur[i][k] >= inf:
                    continue
                for j in range(n):
                    if a[k][j] < inf:
                        v = cur[i][k] + int(a[k][j])
                        if v < nxt[i][j]:
                            nxt[i][j] = v
        cur = nxt
    return cur


def scalar_min_prefix(values: Sequence[int], c: int, min_tail: int = 3) -> int | None:
    """Least 1-based ``b`` from which ``values`` has period ``c`` with constant per-residue rates."""
    h = len(values)
    last_bad = 0
    for m in range(1, h - 2 * c + 1):
        if values[m + 2 * c - 1] - values[m + c - 1] != values[m + c - 1] - values[m - 1]:
            last_bad = m
    b = last_bad + 1
    return b if b + min_tail * c <= h else None


def scalar_refit(values: Sequence[int], max_period: int, min_tail: int = 3) -> tuple[int, int]:
    """Least period, then least prefix, of an integer sample."""
    for c in range(1, max_period + 1):
        b = scalar_min_prefix(values, c, min_tail)
        if b is not None:
            return b, c
    raise ValueError("no fit within the sample")


def matrix_refit(seq: Sequence[Sequence[Sequence[int]]], max_period: int, inf: int = BIG,
                 min_tail: int = 3) -> tuple[int, int] | None:
    """Least period, then least prefix, of a sample of matrices (1-based prefix).

    ``A_{m+2c} - A_{m+c} = A_{m+c} - A_m`` entrywise must hold for every
    ``m >= b`` in the sample, infinite entries staying infinite.
    """
    h = len(seq)
    size = len(seq[0])

    def step_ok(m: int, c: int) -> bool:
        a, b, d = seq[m - 1], seq[m + c - 1], seq[m + 2 * c - 1]
        for i in range(size):
            for j in range(size):
                fa, fb, fd = a[i][j] >= inf, b[i][j] >= inf, d[i][j] >= inf
                if fa or fb or fd:
                    if not (fa and fb and fd):
                        return False
                elif d[i][j] - b[i][j] != b[i][j] - a[i][j]:
                    return False
        return True

    for c in range(1, max_period + 1):
        if min_tail * c + 1 > h:
            return None
        last_bad = 0
        for m in range(1, h - 2 * c + 1):
            if not step_ok(m, c):
                last_bad = m
        b = last_bad + 1
        if b + min_tail * c <= h:
            return b, c
    return None


# ---------------------------------------------------------------- explicit-state search


def _solutions(atoms, fixed: dict[int, int], free: Sequence[int], box: int):
    """Assignments to ``free`` in ``[-box, box]`` satisfying linear atoms ``(terms, bound)``.

    Variables are bound one at a time; every atom whose other variables are
    known narrows the interval of the next one.
    """
    order = list(free)

    def go(idx: int, env: dict[int, int]):
        if idx == len(order):
            if all(sum(a * env[v] for v, a in terms) <= b for terms, b in atoms):
                yield dict(env)
            return
        var = order[idx]
        lo, hi = -box, box
        for terms, b in atoms:
            coef = 0
            rest = 0
            known = True
            for v, a in terms:
                if v == var:
                    coef += a
                elif v in env:
                    rest += a * env[v]
                else:
                    known = False
            if not known or coef == 0:
                continue
            if coef > 0:
                hi = min(hi, (b - rest) // coef)
            else:
                lo = max(lo, -((b - rest) // -coef))
        for val in range(lo, hi + 1):
            env[var] = val
            yield from go(idx + 1, env)
            del env[var]

    yield from go(0, dict(fixed))


def _atoms_of(lin_atoms) -> list[tuple[tuple[tuple[int, int], ...], int]]:
    return [(tuple(a.terms), int(a.bound)) for a in lin_atoms]


def box_states(n: int, lin_atoms, box: int) -> list[tuple[int, ...]]:
    atoms = _atoms_of(lin_atoms)
    return [tuple(env[v] for v in range(n)) for env in _solutions(atoms, {}, range(n), box)]


def successors(n: int, lin_atoms, point: Sequence[int], box: int) -> list[tuple[int, ...]]:
    atoms = _atoms_of(lin_atoms)
    fixed = {v: int(point[v]) for v in range(n)}
    return [tuple(env[n + v] for v in range(n)) for env in _solutions(atoms, fixed, range(n, 2 * n), box)]


@dataclass
class BfsResult:
    reachable: bool
    run: list[tuple[str, tuple[int, ...]]] | None
    rules: list[int] | None
    explored: int


def bfs_reach(machine, box: int = 15, max_states: int = 2_000_000) -> BfsResult:
    """Breadth-first search over ``(location, valuation)`` with counters kept in the box."""
    n = machine.n_vars
    start = [(machine.init, p) for p in box_states(n, machine.init_atoms, box)]
    parent: dict = {s: None for s in start}
    queue = deque(start)
    out_rules: dict[str, list[int]] = {}
    for idx, r in enumerate(machine.rules):
        out_rules.setdefault(r.src, []).append(idx)
    while queue:
        state = queue.popleft()
        loc, point = state
        if loc == machine.final and machine.in_final(point):
            run, rules = [state], []
            while parent[run[-1]] is not None:
                prev, idx = parent[run[-1]]
                run.append(prev)
                rules.append(idx)
            return BfsResult(True, run[::-1], rules[::-1], len(parent))
        for idx in out_rules.get(loc, []):
            r = machine.rules[idx]
            for nxt in successors(n, r.atoms, point, box):
                s2 = (r.dst, nxt)
                if s2 not in parent:
                    parent[s2] = (state, idx)
                    if len(parent) > max_states:
                        raise RuntimeError("explicit-state search exceeded its state budget")
                    queue.append(s2)
    return BfsResult(False, None, None, len(parent))


def check_invariant(machine, invariant: Callable[[str, tuple[int, ...]], bool], box: int = 15) -> bool:
    """Inductive-invariant certificate for unreachability, checked over the box.

    Holds when the initial states satisfy the invariant, every rule step
    between box states preserves it, and no final state satisfies it.
    """
    n = machine.n_vars
    if not all(invariant(machine.init, p) for p in box_states(n, machine.init_atoms, box)):
        return False
    every = [tuple(int(v) for v in row) for row in box_points(n, box)]
    for loc in machine.all_locations():
        inside = [p for p in every if invariant(loc, p)]
        if loc == machine.final and any(machine.in_final(p) for p in inside):
            return False
        for r in machine.rules:
            if r.src != loc:
                continue
            for p in inside:
                for q in successors(n, r.atoms, p, box):
                    if not invariant(r.dst, q):
                        return False
    return True
