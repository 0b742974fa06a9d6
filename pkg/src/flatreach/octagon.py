"""Octagons and octagonal relations in the dual (doubled-variable) encoding.

Variable ``x_v`` is represented by ``y_{2v} = x_v`` and ``y_{2v+1} = -x_v``.
An octagon over ``n`` variables is a coherent DBM of size ``2n`` over the
``y``'s, i.e. ``M[i, j] == M[bar(j), bar(i)]`` with ``bar(i) = i ^ 1``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import dbm
from .dbm import EMPTY, INF, DbRelation, Measures, close, constant_measures


def bar(i: int) -> int:
    return i ^ 1


def pos(v: int) -> int:
    return 2 * v


def neg(v: int) -> int:
    return 2 * v + 1


def atom_cells(terms: dict[int, int], c: int) -> list[tuple[int, int, int]]:
    """Dual cells for the octagonal atom ``sum(coef * x_v) <= c``.

    ``terms`` maps a variable to its nonzero coefficient.  Allowed shapes are
    ``+-x_u +- x_v`` with ``u != v`` and ``+-x`` or ``+-2x``.  A constant atom
    (no variables) is encoded on cell ``(0, 0)`` so that a false one makes the
    matrix inconsistent.
    """
    items = [(v, a) for v, a in terms.items() if a != 0]
    if not items:
        return [] if c >= 0 else [(0, 0, -1)]
    if len(items) == 1:
        v, a = items[0]
        if abs(a) == 1:
            bound = 2 * c
        elif abs(a) == 2:
            bound = c
        else:
            raise ValueError("coefficient not allowed in an octagonal atom")
        p = pos(v) if a > 0 else neg(v)
        return [(p, bar(p), bound)]
    if len(items) == 2:
        (u, a), (v, b) = items
        if abs(a) != 1 or abs(b) != 1:
            raise ValueError("coefficient not allowed in an octagonal atom")
        p = pos(u) if a > 0 else neg(u)
        q = pos(v) if b < 0 else neg(v)
        return [(p, q, c), (bar(q), bar(p), c)]
    raise ValueError("an octagonal atom has at most two variables")


def from_cells(n: int, cells: Iterable[tuple[int, int, int]]) -> np.ndarray:
    """Coherent matrix over ``n`` variables; each cell is mirrored."""
    m = np.full((2 * n, 2 * n), INF, dtype=np.int64)
    np.fill_diagonal(m, 0)
    for i, j, c in cells:
        if abs(int(c)) > dbm.LIMIT:
            raise OverflowError("constant exceeds the supported range")
        if c < m[i, j]:
            m[i, j] = c
        if c < m[bar(j), bar(i)]:
            m[bar(j), bar(i)] = c
    return m


def from_db_matrix(m: np.ndarray) -> np.ndarray:
    """Dual encoding of a DBM (each ``v_i - v_j <= c`` becomes two cells)."""
    n = m.shape[0]
    out = np.full((2 * n, 2 * n), INF, dtype=np.int64)
    ii, jj = np.nonzero(m < INF)
    out[2 * ii, 2 * jj] = m[ii, jj]
    out[2 * jj + 1, 2 * ii + 1] = m[ii, jj]
    np.fill_diagonal(out, np.minimum(np.diag(out), 0))
    return out


def is_coherent(m: np.ndarray) -> bool:
    n = m.shape[0]
    perm = np.arange(n) ^ 1
    return bool(np.array_equal(m, m[np.ix_(perm, perm)].T))


def _half_floor(v: np.ndarray) -> np.ndarray:
    return np.where(v < INF, np.floor_divide(v, 2), INF)


def tighten_closed(c: np.ndarray) -> np.ndarray | None:
    """Apply the integer tightening step to an already closed coherent matrix."""
    n = c.shape[0]
    perm = np.arange(n) ^ 1
    h = _half_floor(c[np.arange(n), perm])
    hs = dbm.sat_add(h, h[perm])
    if (hs < 0).any():
        return None
    t = np.minimum(c, dbm.sat_add(h[:, None], h[perm][None, :]))
    return dbm.check_range(t)


def tight_close(m: np.ndarray) -> np.ndarray | None:
    """Tight closure of a coherent matrix, ``None`` if it has no integer point."""
    if not is_coherent(m):
        raise ValueError("octagon matrix is not coherent")
    c = close(m)
    if c is None:
        return None
    return tighten_closed(c)


def project_vars(m: np.ndarray, keep: Sequence[int]) -> np.ndarray | None:
    """Tight closure followed by restriction to the variables in ``keep``."""
    t = tight_close(m)
    if t is None:
        return None
    idx = [k for v in keep for k in (pos(v), neg(v))]
    return t[np.ix_(idx, idx)]


def embed(m: np.ndarray, var_map: Sequence[int], n_total: int, into: np.ndarray | None = None) -> np.ndarray:
    """Place a dual matrix over ``len(var_map)`` variables into a bigger one."""
    if into is None:
        into = np.full((2 * n_total, 2 * n_total), INF, dtype=np.int64)
        np.fill_diagonal(into, 0)
    idx = np.array([k for v in var_map for k in (pos(v), neg(v))])
    sub = into[np.ix_(idx, idx)]
    into[np.ix_(idx, idx)] = np.minimum(sub, m)
    return into


def point_holds(m: np.ndarray, values: Sequence[int]) -> bool:
    y = np.empty(2 * len(values), dtype=np.int64)
    y[0::2] = values
    y[1::2] = -np.asarray(values, dtype=np.int64)
    fin = m < INF
    return bool(np.all(~fin | (y[:, None] - y[None, :] <= m)))


def dual_atoms(m: np.ndarray) -> list[tuple[dict[int, int], int]]:
    """Octagonal atoms for the finite cells of a coherent matrix.

    Each mirrored pair yields a single atom, emitted on the lexicographically
    smaller cell.
    """
    out = []
    n = m.shape[0]
    for i in range(n):
        for j in range(n):
            if i == j or m[i, j] >= INF:
                continue
            if (bar(j), bar(i)) < (i, j):
                continue
            terms: dict[int, int] = {}
            vi, vj = i // 2, j // 2
            terms[vi] = terms.get(vi, 0) + (1 if i % 2 == 0 else -1)
            terms[vj] = terms.get(vj, 0) + (-1 if j % 2 == 0 else 1)
            out.append(({k: a for k, a in terms.items() if a}, int(m[i, j])))
    return out


class OctRelation:
    """Octagonal relation over ``N`` counters: an octagon over ``2N`` variables.

    Counter ``x_i`` is variable ``i`` and ``x'_i`` is variable ``N + i``; the
    dual matrix has size ``4N``.
    """

    kind = "OCT"

    __slots__ = ("n_vars", "matrix", "_tight")

    def __init__(self, n_vars: int, matrix):
        m = np.array(matrix, dtype=np.int64)
        if m.shape != (4 * n_vars, 4 * n_vars):
            raise ValueError(f"an octagonal relation over {n_vars} counters needs a {4*n_vars}x{4*n_vars} matrix")
        if not is_coherent(m):
            raise ValueError("dual matrix is not coherent")
        dbm.check_range(m)
        m.setflags(write=False)
        self.n_vars = n_vars
        self.matrix = m
        self._tight: np.ndarray | None | bool = False

    @classmethod
    def from_cells(cls, n_vars: int, cells) -> "OctRelation":
        return cls(n_vars, from_cells(2 * n_vars, cells))

    @classmethod
    def from_atoms(cls, n_vars: int, atoms: Iterable[tuple[dict[int, int], int]]) -> "OctRelation":
        cells = [cell for terms, c in atoms for cell in atom_cells(terms, c)]
        return cls.from_cells(n_vars, cells)

    @classmethod
    def from_db(cls, r: DbRelation) -> "OctRelation":
        return cls(r.n_vars, from_db_matrix(r.matrix))

    @classmethod
    def identity(cls, n_vars: int) -> "OctRelation":
        return cls.from_db(DbRelation.identity(n_vars))

    @classmethod
    def from_canonical(cls, n_vars: int, m: np.ndarray) -> "OctRelation":
        r = cls(n_vars, m)
        r._tight = r.matrix
        return r

    def tight(self) -> np.ndarray | None:
        if self._tight is False:
            t = tight_close(self.matrix)
            if t is not None:
                t.setflags(write=False)
            self._tight = t
        return self._tight

    canonical = tight

    def is_consistent(self) -> bool:
        return self.tight() is not None

    def defining_constants(self) -> list[int]:
        return [c for _, c in dual_atoms(self.matrix)]

    def measures(self) -> Measures:
        return constant_measures(self.defining_constants())

    def as_db_relation(self) -> DbRelation:
        """The dual matrix read as a plain difference-bounds relation over ``2N`` counters."""
        # unprimed duals already occupy the first half of the index range
        return DbRelation(2 * self.n_vars, self.matrix)

    def compose(self, other) -> "OctRelation | object":
        return oct_compose(self, other)

    def holds(self, pre: Sequence[int], post: Sequence[int]) -> bool:
        return point_holds(self.matrix, list(pre) + list(post))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OctRelation) or other.n_vars != self.n_vars:
            return NotImplemented
        a, b = self.tight(), other.tight()
        if a is None or b is None:
            return a is None and b is None
        return bool(np.array_equal(a, b))

    def __hash__(self):
        t = self.tight()
        return hash((self.n_vars, None if t is None else t.tobytes()))

    def __repr__(self) -> str:
        return f"OctRelation({self.n_vars}, atoms={dual_atoms(self.matrix)})"


def equivalent(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    ta = None if a is None else tight_close(a)
    tb = None if b is None else tight_close(b)
    if ta is None or tb is None:
        return ta is None and tb is None
    return bool(np.array_equal(ta, tb))


def to_oct(r):
    if r is EMPTY or isinstance(r, OctRelation):
        return r
    return OctRelation.from_db(r)


def oct_compose(r, s):
    """Composition of octagonal relations (DB operands are lifted)."""
    r, s = to_oct(r), to_oct(s)
    if r is EMPTY or s is EMPTY:
        return EMPTY
    n = r.n_vars
    if s.n_vars != n:
        raise ValueError("dimension mismatch")
    a, b = r.tight(), s.tight()
    if a is None or b is None:
        return EMPTY
    big = embed(a, range(2 * n), 3 * n)
    embed(b, range(n, 3 * n), 3 * n, into=big)
    p = project_vars(big, list(range(n)) + list(range(2 * n, 3 * n)))
    if p is None:
        return EMPTY
    return OctRelation.from_canonical(n, p)


def post_image(s: np.ndarray | None, r) -> np.ndarray | None:
    """Tight octagon of ``{v' | exists v in s, r(v, v')}``."""
    if s is None:
        return None
    r = to_oct(r)
    if r is EMPTY:
        return None
    n = r.n_vars
    big = embed(r.matrix, range(2 * n), 2 * n)
    embed(s, range(n), 2 * n, into=big)
    return project_vars(big, range(n, 2 * n))


def pre_image(s: np.ndarray | None, r) -> np.ndarray | None:
    if s is None:
        return None
    r = to_oct(r)
    if r is EMPTY:
        return None
    n = r.n_vars
    big = embed(r.matrix, range(2 * n), 2 * n)
    embed(s, range(n, 2 * n), 2 * n, into=big)
    return project_vars(big, range(n))


def intersect(a: np.ndarray | None, b: np.ndarray | None) -> np.ndarray | None:
    if a is None or b is None:
        return None
    return tight_close(np.minimum(a, b))


def universe(n: int) -> np.ndarray:
    m = np.full((2 * n, 2 * n), INF, dtype=np.int64)
    np.fill_diagonal(m, 0)
    return m


def bounds(t: np.ndarray, v: int) -> tuple[int | None, int | None]:
    """Integer bounds of variable ``v`` read off a tight matrix."""
    up = t[pos(v), neg(v)]
    lo = t[neg(v), pos(v)]
    hi = None if up >= INF else int(up) // 2
    low = None if lo >= INF else -(int(lo) // 2)
    return low, hi


def pick_point(t: np.ndarray, prefer: Sequence[int] | None = None) -> list[int]:
    """An integer point of a consistent octagon (tight closure is exact).

    Variables are fixed one at a time to the admissible value closest to the
    preferred one, re-tightening after each choice.
    """
    t = tight_close(t)
    if t is None:
        raise ValueError("octagon is empty")
    n = t.shape[0] // 2
    values = []
    for v in range(n):
        lo, hi = bounds(t, v)
        want = 0 if prefer is None else int(prefer[v])
        if lo is not None:
            want = max(want, lo)
        if hi is not None:
            want = min(want, hi)
        nt = t.copy()
        nt[pos(v), neg(v)] = min(nt[pos(v), neg(v)], 2 * want)
        nt[neg(v), pos(v)] = min(nt[neg(v), pos(v)], -2 * want)
        nt = tight_close(nt)
        if nt is None:
            raise ArithmeticError("tight closure failed to be exact")
        t = nt
        values.append(want)
    return values
