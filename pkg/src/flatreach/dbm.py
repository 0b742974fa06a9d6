"""Difference-bound matrices and difference-bounds relations.

A DBM over ``n`` variables is an ``n x n`` int64 array whose entry ``(i, j)``
bounds ``v_i - v_j``.  Unbounded entries hold the sentinel :data:`INF`.  Finite
values are kept well inside int64 so that saturating additions can never wrap;
anything that would leave that range raises :class:`OverflowError`.

A :class:`DbRelation` over ``N`` counters is a DBM over ``2N`` variables where
indices ``0..N-1`` are the unprimed counters and ``N..2N-1`` their primed
copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

INF = np.int64(2**61)
LIMIT = 2**59


class _Inconsistent:
    """Marker returned whenever a constraint system has no solution."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Inconsistent"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Inconsistent, ())


EMPTY = _Inconsistent()


def is_empty(x) -> bool:
    return x is EMPTY


def finite(a: np.ndarray) -> np.ndarray:
    return a < INF


def check_range(a: np.ndarray) -> np.ndarray:
    fin = a < INF
    if fin.any() and np.abs(a[fin]).max() > LIMIT:
        raise OverflowError("bound magnitude exceeds the supported range")
    return a


def sat_add(a, b):
    """Elementwise ``a + b`` with ``INF`` absorbing."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    s = a + b
    return np.where((a >= INF) | (b >= INF), INF, s)


def as_matrix(entries, n: int | None = None) -> np.ndarray:
    """Build an int64 matrix, mapping ``None``/``math.inf`` to :data:`INF`."""
    rows = [[INF if (v is None or v == math.inf) else int(v) for v in row] for row in entries]
    m = np.array(rows, dtype=np.int64)
    if n is not None and m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix")
    return check_range(m)


def from_atoms(n: int, atoms: Iterable[tuple[int, int, int]]) -> np.ndarray:
    """Matrix of the conjunction of ``v_i - v_j <= c`` atoms (minimum on duplicates)."""
    m = np.full((n, n), INF, dtype=np.int64)
    np.fill_diagonal(m, 0)
    for i, j, c in atoms:
        if abs(int(c)) > LIMIT:
            raise OverflowError("constant exceeds the supported range")
        if c < m[i, j]:
            m[i, j] = c
    return m


def close(m: np.ndarray) -> np.ndarray | None:
    """Floyd-Warshall closure; ``None`` when the constraint graph has a negative cycle.

    The early exit on a negative diagonal keeps every intermediate value a
    simple-path weight, which is what bounds the magnitudes.
    """
    c = np.array(m, dtype=np.int64, copy=True)
    n = c.shape[0]
    idx = np.arange(n)
    c[idx, idx] = np.minimum(c[idx, idx], 0)
    if (c[idx, idx] < 0).any():
        return None
    for k in range(n):
        col = c[:, k : k + 1]
        row = c[k : k + 1, :]
        if not (col < INF).any() or not (row < INF).any():
            continue
        np.minimum(c, sat_add(col, row), out=c)
        if c[k, k] < 0 or (c[idx, idx] < 0).any():
            return None
    return check_range(c)


def is_consistent(m: np.ndarray) -> bool:
    return close(m) is not None


def equivalent(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    ca = None if a is None else close(a)
    cb = None if b is None else close(b)
    if ca is None or cb is None:
        return ca is None and cb is None
    return ca.shape == cb.shape and bool(np.array_equal(ca, cb))


def project(m: np.ndarray, keep: Sequence[int]) -> np.ndarray | None:
    """Close, then restrict to the variables in ``keep`` (in that order)."""
    c = close(m)
    if c is None:
        return None
    keep = np.asarray(keep, dtype=int)
    return c[np.ix_(keep, keep)]


def bin_size_of(c: int) -> int:
    c = abs(int(c))
    return 2 if c <= 2 else (c - 1).bit_length()


@dataclass(frozen=True)
class Measures:
    coeff_sum: int
    bin_size: int


def constant_measures(constants: Iterable[int]) -> Measures:
    cs = [int(c) for c in constants]
    return Measures(sum(abs(c) for c in cs), sum(bin_size_of(c) for c in cs))


class DbRelation:
    """Conjunction of difference constraints over ``x_1..x_N`` and ``x'_1..x'_N``.

    ``matrix`` is the defining (not necessarily closed) DBM of size ``2N``.
    """

    kind = "DB"

    __slots__ = ("n_vars", "matrix", "_closed")

    def __init__(self, n_vars: int, matrix):
        m = np.array(matrix, dtype=np.int64)
        if m.shape != (2 * n_vars, 2 * n_vars):
            raise ValueError(f"a relation over {n_vars} counters needs a {2*n_vars}x{2*n_vars} matrix")
        check_range(m)
        m.setflags(write=False)
        self.n_vars = n_vars
        self.matrix = m
        self._closed: np.ndarray | None | bool = False

    @classmethod
    def from_atoms(cls, n_vars: int, atoms: Iterable[tuple[int, int, int]]) -> "DbRelation":
        return cls(n_vars, from_atoms(2 * n_vars, atoms))

    @classmethod
    def identity(cls, n_vars: int) -> "DbRelation":
        atoms = []
        for i in range(n_vars):
            atoms += [(i, n_vars + i, 0), (n_vars + i, i, 0)]
        return cls.from_atoms(n_vars, atoms)

    @classmethod
    def from_canonical(cls, n_vars: int, m: np.ndarray) -> "DbRelation":
        r = cls(n_vars, m)
        r._closed = r.matrix
        return r

    def closed(self) -> np.ndarray | None:
        if self._closed is False:
            c = close(self.matrix)
            if c is not None:
                c.setflags(write=False)
            self._closed = c
        return self._closed

    canonical = closed

    def is_consistent(self) -> bool:
        return self.closed() is not None

    def defining_constants(self) -> list[int]:
        m = self.matrix
        off = ~np.eye(m.shape[0], dtype=bool) & (m < INF)
        return [int(v) for v in m[off]]

    def measures(self) -> Measures:
        return constant_measures(self.defining_constants())

    def __eq__(self, other) -> bool:
        if not isinstance(other, DbRelation) or other.n_vars != self.n_vars:
            return NotImplemented
        a, b = self.closed(), other.closed()
        if a is None or b is None:
            return a is None and b is None
        return bool(np.array_equal(a, b))

    def __hash__(self):
        c = self.closed()
        return hash((self.n_vars, None if c is None else c.tobytes()))

    def __repr__(self) -> str:
        return f"DbRelation({self.n_vars}, {self.matrix.tolist()})"

    def compose(self, other: "DbRelation"):
        return compose(self, other)

    def holds(self, pre: Sequence[int], post: Sequence[int]) -> bool:
        vals = np.array(list(pre) + list(post), dtype=np.int64)
        m = self.matrix
        fin = m < INF
        diff = vals[:, None] - vals[None, :]
        return bool(np.all(~fin | (diff <= m)))


def compose(r: DbRelation, s: DbRelation):
    """Relational composition ``r ; s``, or :data:`EMPTY`."""
    n = r.n_vars
    if s.n_vars != n:
        raise ValueError("dimension mismatch")
    a, b = r.closed(), s.closed()
    if a is None or b is None:
        return EMPTY
    big = np.full((3 * n, 3 * n), INF, dtype=np.int64)
    big[: 2 * n, : 2 * n] = a
    big[n:, n:] = np.minimum(big[n:, n:], b)
    keep = list(range(n)) + list(range(2 * n, 3 * n))
    p = project(big, keep)
    if p is None:
        return EMPTY
    return DbRelation.from_canonical(n, p)


def compose_any(r, s):
    if r is EMPTY or s is EMPTY:
        return EMPTY
    return r.compose(s)
