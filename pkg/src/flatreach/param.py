"""Matrices whose bounds are minima of affine functions of one parameter ``k >= 0``.

A bound is a tuple of ``(slope, offset)`` terms standing for
``min(slope * k + offset)``; the empty tuple is ``+inf``.  Bounds are kept in
a canonical form: the terms that appear on the lower envelope over real
``k >= 0``, sorted by slope.

Closure runs Floyd-Warshall over these bounds.  Because every path weight is
affine in ``k``, the closure commutes with instantiation at every ``k`` where
the instantiated matrix is consistent.  For octagons the ``floor(./2)`` of the
tightening step is made affine by splitting ``k`` by parity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .dbm import INF

Term = tuple[int, int]
Bound = tuple[Term, ...]
TOP: Bound = ()


def const(c) -> Bound:
    return TOP if c >= INF else ((0, int(c)),)


@lru_cache(maxsize=1 << 16)
def prune(terms: tuple[Term, ...]) -> Bound:
    best: dict[int, int] = {}
    for a, b in terms:
        if a not in best or b < best[a]:
            best[a] = b
    if len(best) == 1:
        ((a, b),) = best.items()
        return ((a, b),)
    hull: list[Term] = []
    for a, b in sorted(best.items(), key=lambda t: -t[0]):
        while hull:
            a1, b1 = hull[-1]
            if b <= b1:
                hull.pop()
                continue
            if len(hull) >= 2:
                a0, b0 = hull[-2]
                if (b - b1) * (a0 - a1) <= (b1 - b0) * (a1 - a):
                    hull.pop()
                    continue
            break
        hull.append((a, b))
    return tuple(sorted(hull))


@lru_cache(maxsize=1 << 18)
def add(p: Bound, q: Bound) -> Bound:
    if not p or not q:
        return TOP
    if len(p) == 1 and len(q) == 1:
        return ((p[0][0] + q[0][0], p[0][1] + q[0][1]),)
    return prune(tuple((a + c, b + d) for a, b in p for c, d in q))


@lru_cache(maxsize=1 << 18)
def meet(p: Bound, q: Bound) -> Bound:
    if not p:
        return q
    if not q or p == q:
        return p
    return prune(p + q)


def evaluate(p: Bound, k: int) -> int:
    return int(INF) if not p else min(a * k + b for a, b in p)


def substitute(p: Bound, scale: int, shift: int) -> Bound:
    """Rewrite in terms of ``k'`` where ``k = scale * k' + shift``."""
    if not p:
        return TOP
    return prune(tuple((a * scale, a * shift + b) for a, b in p))


def half_floor(p: Bound) -> Bound:
    """``floor(p / 2)``; every slope must be even."""
    if not p:
        return TOP
    if any(a % 2 for a, _ in p):
        raise ValueError("floor of an odd slope is not affine")
    return prune(tuple((a // 2, b // 2) for a, b in p))


def _breakpoint(terms: Sequence[Term]) -> int:
    top = 0.0
    for i, (a, b) in enumerate(terms):
        for c, d in terms[i + 1 :]:
            if a != c:
                x = (d - b) / (a - c)
                if x > top:
                    top = x
    return math.ceil(top) + 1


def first_difference(p: Bound, q: Bound) -> int | None:
    """Least ``k >= 0`` where the two bounds differ, or ``None`` if equal everywhere."""
    p, q = prune(p) if p else TOP, prune(q) if q else TOP
    if not p or not q:
        return None if (not p and not q) else 0
    horizon = _breakpoint(list(p) + list(q))
    for k in range(horizon + 1):
        if evaluate(p, k) != evaluate(q, k):
            return k
    ep, eq = p[0], q[0]
    if ep == eq:
        return None
    # eventual terms differ: they part ways after the last breakpoint
    k = horizon + 1
    while evaluate(p, k) == evaluate(q, k):
        k += 1
    return k


def param_equal(p: Bound, q: Bound) -> bool:
    return first_difference(p, q) is None


def nonneg_interval(p: Bound) -> tuple[int, int | None]:
    """Integer interval of ``k >= 0`` on which ``min(terms) >= 0`` (hi ``None`` = unbounded)."""
    lo, hi = 0, None
    for a, b in p:
        if a > 0:
            lo = max(lo, -(b // a))
        elif a < 0:
            bound = b // (-a)
            hi = bound if hi is None else min(hi, bound)
        elif b < 0:
            return 1, 0
    return lo, hi


def _intersect(x: tuple[int, int | None], y: tuple[int, int | None]) -> tuple[int, int | None]:
    lo = max(x[0], y[0])
    if x[1] is None:
        hi = y[1]
    elif y[1] is None:
        hi = x[1]
    else:
        hi = min(x[1], y[1])
    return lo, hi


@dataclass(frozen=True)
class ParamDbm:
    """Square matrix of parametric bounds; ``entries[i][j]`` bounds ``v_i - v_j``."""

    entries: tuple[tuple[Bound, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.entries)

    @classmethod
    def constant(cls, m: np.ndarray) -> "ParamDbm":
        return cls(tuple(tuple(const(v) for v in row) for row in m.tolist()))

    @classmethod
    def affine(cls, slopes: np.ndarray, offsets: np.ndarray) -> "ParamDbm":
        rows = []
        for srow, orow in zip(slopes.tolist(), offsets.tolist()):
            rows.append(tuple(TOP if o >= INF else ((int(s), int(o)),) for s, o in zip(srow, orow)))
        return cls(tuple(rows))

    def instantiate(self, k: int) -> np.ndarray:
        return np.array([[evaluate(p, k) for p in row] for row in self.entries], dtype=np.int64)

    def substitute(self, scale: int, shift: int) -> "ParamDbm":
        return ParamDbm(tuple(tuple(substitute(p, scale, shift) for p in row) for row in self.entries))

    def restrict(self, keep: Sequence[int]) -> "ParamDbm":
        return ParamDbm(tuple(tuple(self.entries[i][j] for j in keep) for i in keep))

    def meet(self, other: "ParamDbm") -> "ParamDbm":
        return ParamDbm(tuple(tuple(meet(p, q) for p, q in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def first_difference(self, other: "ParamDbm") -> int | None:
        first = None
        for r, s in zip(self.entries, other.entries):
            for p, q in zip(r, s):
                d = first_difference(p, q)
                if d is not None and (first is None or d < first):
                    first = d
        return first

    def equal(self, other: "ParamDbm") -> bool:
        return self.dim == other.dim and self.first_difference(other) is None


@dataclass(frozen=True)
class ClosedPiece:
    """Closure for the parameters ``k = modulus * j + residue``, as a function of ``j``.

    ``lo``/``hi`` delimit the values of ``j`` where the instance is consistent
    (``hi is None`` means unbounded above; ``lo > hi`` means never).
    """

    modulus: int
    residue: int
    matrix: ParamDbm | None
    lo: int
    hi: int | None

    def __post_init__(self):
        if self.hi is not None and self.lo > self.hi:
            object.__setattr__(self, "matrix", None)

    @property
    def empty(self) -> bool:
        return self.matrix is None

    def feasible(self, j: int) -> bool:
        return not self.empty and j >= self.lo and (self.hi is None or j <= self.hi)

    @property
    def always(self) -> bool:
        return not self.empty and self.lo == 0 and self.hi is None


@dataclass(frozen=True)
class ParamClosure:
    """Outcome of :func:`param_close`: one piece per residue class of ``k``."""

    pieces: tuple[ClosedPiece, ...]
    kind: str = "DB"

    def piece_for(self, k: int) -> tuple[ClosedPiece, int]:
        for p in self.pieces:
            if k % p.modulus == p.residue:
                return p, (k - p.residue) // p.modulus
        raise AssertionError("residue classes do not cover k")

    def consistent_at(self, k: int) -> bool:
        piece, j = self.piece_for(k)
        return piece.feasible(j)

    def instantiate(self, k: int) -> np.ndarray | None:
        piece, j = self.piece_for(k)
        if not piece.feasible(j):
            return None
        return piece.matrix.instantiate(j)

    @property
    def status(self) -> str:
        """``"consistent"`` for every k, ``"inconsistent"`` for every k, else ``"conditional"``."""
        if all(p.always for p in self.pieces):
            return "consistent"
        if all(p.empty for p in self.pieces):
            return "inconsistent"
        return "conditional"

    def feasible_values(self) -> list[tuple[int, int, int, int | None]]:
        """``(modulus, residue, lo, hi)`` for each nonempty piece, in terms of ``j``."""
        return [(p.modulus, p.residue, p.lo, p.hi) for p in self.pieces if not p.empty]

    def least_feasible(self) -> int | None:
        cands = [p.modulus * p.lo + p.residue for p in self.pieces if not p.empty]
        return min(cands) if cands else None

    def first_inconsistent(self) -> int | None:
        """Smallest ``k >= 0`` at which the instance is inconsistent."""
        best = None
        for p in self.pieces:
            if p.empty:
                j = 0
            elif p.lo > 0:
                j = 0
            elif p.hi is not None:
                j = p.hi + 1
            else:
                continue
            k = p.modulus * j + p.residue
            best = k if best is None else min(best, k)
        return best


def _floyd(entries: list[list[Bound]]) -> None:
    n = len(entries)
    for i in range(n):
        entries[i][i] = meet(entries[i][i], ((0, 0),))
    for k in range(n):
        row_k = entries[k]
        targets = [j for j in range(n) if row_k[j]]
        if not targets:
            continue
        for i in range(n):
            ik = entries[i][k]
            if not ik or i == k:
                continue
            row_i = entries[i]
            for j in targets:
                if j == k:
                    continue
                s = add(ik, row_k[j])
                cur = row_i[j]
                row_i[j] = s if not cur else meet(cur, s)


def _db_piece(m: ParamDbm, modulus: int, residue: int) -> tuple[list[list[Bound]], tuple[int, int | None]]:
    entries = [list(row) for row in m.entries]
    _floyd(entries)
    window: tuple[int, int | None] = (0, None)
    for i in range(len(entries)):
        window = _intersect(window, nonneg_interval(entries[i][i]))
    return entries, window


def _close_db(m: ParamDbm) -> ParamClosure:
    entries, (lo, hi) = _db_piece(m, 1, 0)
    piece = ClosedPiece(1, 0, ParamDbm(tuple(tuple(r) for r in entries)), lo, hi)
    return ParamClosure((piece,), "DB")


def _close_oct(m: ParamDbm) -> ParamClosure:
    pieces = []
    n = m.dim
    for parity in (0, 1):
        sub = m.substitute(2, parity)
        entries, window = _db_piece(sub, 2, parity)
        halves = []
        for i in range(n):
            halves.append(half_floor(entries[i][i ^ 1]))
        for i in range(n):
            window = _intersect(window, nonneg_interval(add(halves[i], halves[i ^ 1])) if halves[i] and halves[i ^ 1] else (0, None))
        tight = [
            [meet(entries[i][j], add(halves[i], halves[j ^ 1])) for j in range(n)]
            for i in range(n)
        ]
        pieces.append(ClosedPiece(2, parity, ParamDbm(tuple(tuple(r) for r in tight)), window[0], window[1]))
    return ParamClosure(tuple(pieces), "OCT")


def param_close(m: ParamDbm, kind: str = "DB") -> ParamClosure:
    """Parametric closure (``kind="DB"``) or tight closure of a coherent matrix (``"OCT"``)."""
    if kind == "DB":
        return _close_db(m)
    if kind == "OCT":
        return _close_oct(m)
    raise ValueError(f"unknown kind {kind!r}")
