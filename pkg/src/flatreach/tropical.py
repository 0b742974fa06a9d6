"""Min-plus matrix algebra and the cycle structure that governs its powers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import periodic
from .dbm import INF, check_range, sat_add


def tropical_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a * b)[i, j] = min_k a[i, k] + b[k, j]``."""
    s = sat_add(a[:, :, None], b[None, :, :])
    return check_range(s.min(axis=1))


def tropical_power(a: np.ndarray, m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("power must be at least 1")
    a = np.asarray(a, dtype=np.int64)
    result = None
    base = a
    while m:
        if m & 1:
            result = base if result is None else tropical_product(result, base)
        m >>= 1
        if m:
            base = tropical_product(base, base)
    return result


def power_sequence(a: np.ndarray, h: int) -> np.ndarray:
    out = [np.asarray(a, dtype=np.int64)]
    for _ in range(h - 1):
        out.append(tropical_product(out[-1], a))
    return np.stack(out)


def edge_list(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src, dst = np.nonzero(a < INF)
    return src, dst, a[src, dst]


def strong_components(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=int)
    g = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n)).tocsr()
    return connected_components(g, directed=True, connection="strong")[1]


def _relax(values: np.ndarray, src, dst, w) -> np.ndarray:
    out = np.full(len(values), INF, dtype=np.int64)
    np.minimum.at(out, dst, sat_add(values[src], w))
    return out


def karp_min_mean(n: int, src, dst, w) -> Fraction | None:
    """Minimum cycle mean of a strongly connected graph (``None`` if acyclic)."""
    if len(src) == 0:
        return None
    src, dst = np.asarray(src, dtype=int), np.asarray(dst, dtype=int)
    w = np.asarray(w, dtype=np.int64)
    d = np.full((n + 1, n), INF, dtype=np.int64)
    d[0, 0] = 0
    for k in range(1, n + 1):
        d[k] = _relax(d[k - 1], src, dst, w)
    best = None
    for v in np.nonzero(d[n] < INF)[0].tolist():
        worst = None
        for k in np.nonzero(d[:n, v] < INF)[0].tolist():
            val = Fraction(int(d[n, v]) - int(d[k, v]), n - k)
            if worst is None or val > worst:
                worst = val
        if worst is not None and (best is None or worst < best):
            best = worst
    return best


@dataclass(frozen=True)
class ComponentCycles:
    nodes: tuple[int, ...]
    min_mean: Fraction | None
    critical_edges: tuple[tuple[int, int], ...]
    cyclicity: int


def _cyclicity_of(nodes: list[int], edges: list[tuple[int, int]]) -> int:
    # gcd of cycle lengths in a strongly connected graph via BFS levels
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for u, v in edges:
        adj[u].append(v)
    level = {nodes[0]: 0}
    queue = [nodes[0]]
    for u in queue:
        for v in adj[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u, v in edges:
        g = math.gcd(g, abs(level[u] + 1 - level[v]))
    return g


def component_cycles(n: int, src, dst, w) -> list[ComponentCycles]:
    """Per strongly connected component: minimum mean, critical edges and cyclicity.

    Acyclic components (a single node without a self-loop) get cyclicity 1.
    """
    src, dst, w = np.asarray(src, dtype=int), np.asarray(dst, dtype=int), np.asarray(w, dtype=np.int64)
    labels = strong_components(n, src, dst)
    out = []
    for comp in range(labels.max() + 1 if n else 0):
        nodes = np.nonzero(labels == comp)[0].tolist()
        local = {v: i for i, v in enumerate(nodes)}
        mask = (labels[src] == comp) & (labels[dst] == comp)
        es, ed, ew = src[mask], dst[mask], w[mask]
        if len(es) == 0:
            out.append(ComponentCycles(tuple(nodes), None, (), 1))
            continue
        ls = np.array([local[v] for v in es.tolist()])
        ld = np.array([local[v] for v in ed.tolist()])
        lam = karp_min_mean(len(nodes), ls, ld, ew)
        p, q = lam.numerator, lam.denominator
        rw = q * ew - p
        pot = np.zeros(len(nodes), dtype=np.int64)
        for _ in range(len(nodes) + 1):
            nxt = np.minimum(pot, _relax(pot, ls, ld, rw))
            if np.array_equal(nxt, pot):
                break
            pot = nxt
        on = pot[ls] + rw == pot[ld]
        tight = list(zip(ls[on].tolist(), ld[on].tolist()))
        ts = np.array([u for u, _ in tight], dtype=int)
        td = np.array([v for _, v in tight], dtype=int)
        sub = strong_components(len(nodes), ts, td)
        crit = [(u, v) for u, v in tight if sub[u] == sub[v]]
        # cyclicity of the critical graph: lcm over its components of the gcd of cycle lengths
        g = 1
        for c in set(sub[u] for u, _ in crit):
            cn = [v for v in range(len(nodes)) if sub[v] == c]
            ce = [(u, v) for u, v in crit if sub[u] == c]
            g = math.lcm(g, _cyclicity_of(cn, ce))
        out.append(ComponentCycles(tuple(nodes), lam, tuple((nodes[u], nodes[v]) for u, v in crit), g))
    return out


def matrix_cyclicities(a: np.ndarray) -> list[ComponentCycles]:
    s, d, w = edge_list(np.asarray(a, dtype=np.int64))
    return component_cycles(a.shape[0], s, d, w)


def period_bound(a: np.ndarray) -> int:
    """lcm of the cyclicities of all strongly connected components."""
    return reduce(math.lcm, (c.cyclicity for c in matrix_cyclicities(a)), 1)


def prefix_bound(a: np.ndarray) -> int:
    """``max(m^4, 4 * M * m^6)`` with ``M`` the largest finite entry magnitude."""
    m = a.shape[0]
    fin = a[a < INF]
    big = int(np.abs(fin).max()) if fin.size else 0
    return max(m**4, 4 * big * m**6)


def detect_power_period(a: np.ndarray, horizon: int = 300) -> tuple[int, int] | None:
    """Empirical least period and prefix of ``a, a^2, ...`` over a finite sample."""
    return periodic.detect(power_sequence(a, horizon))
