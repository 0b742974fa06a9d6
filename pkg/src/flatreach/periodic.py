"""Ultimately periodic sequences of matrices and of integers.

A sequence ``A_1, A_2, ...`` is periodic from index ``b`` with period ``c``
when ``A_{b+(k+1)c+i} = L_i + A_{b+kc+i}`` for all ``k >= 0`` and
``0 <= i < c``, with one rate matrix ``L_i`` per residue.  Infinite entries
must be infinite at every index of their residue class; their rate is
``INF``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dbm import INF


def differences(seq: np.ndarray, c: int) -> tuple[np.ndarray, np.ndarray]:
    """``(valid, diff)`` for ``A_{n+c} - A_n`` over a stacked ``(H, m, m)`` sequence.

    ``valid[n]`` says both matrices share the same infinity pattern; ``diff``
    holds ``INF`` on infinite entries.
    """
    a, b = seq[:-c], seq[c:]
    fa, fb = a >= INF, b >= INF
    valid = np.all(fa == fb, axis=(1, 2))
    diff = np.where(fa, INF, b - a)
    return valid, diff


def plausible_prefix(seq: np.ndarray, c: int) -> int | None:
    """Smallest 1-based ``b`` whose recurrence with period ``c`` holds on the whole sample.

    Requires at least three full periods after ``b`` inside the sample.
    """
    h = len(seq)
    if h < 3 * c + 1:
        return None
    valid, diff = differences(seq, c)
    # good[n] (0-based n) <=> diff valid at n and n+c and equal
    good = valid[:-c] & valid[c:] & np.all(diff[:-c] == diff[c:], axis=(1, 2))
    bad = np.nonzero(~good)[0]
    start = 0 if len(bad) == 0 else int(bad[-1]) + 1
    b = start + 1
    if b + 3 * c > h:
        return None
    return b


def fits(seq: np.ndarray, b: int, c: int) -> bool:
    h = len(seq)
    if b + 2 * c > h:
        return False
    tail = seq[b - 1 :]
    valid, diff = differences(tail, c)
    if not valid.all():
        return False
    return bool(np.all(diff[:-c] == diff[c:])) if len(diff) > c else True


def rates(seq: np.ndarray, b: int, c: int) -> list[np.ndarray]:
    return [differences(seq[b - 1 + i : b - 1 + i + c + 1], c)[1][0] for i in range(c)]


def detect(seq: np.ndarray, max_period: int | None = None) -> tuple[int, int] | None:
    """Least period, then least prefix, consistent with the whole sample."""
    h = len(seq)
    top = (h - 1) // 3 if max_period is None else min(max_period, (h - 1) // 3)
    for c in range(1, top + 1):
        b = plausible_prefix(seq, c)
        if b is not None:
            return b, c
    return None


@dataclass(frozen=True)
class ScalarPeriodic:
    """Integer sequence ``s_1, s_2, ...`` given by its first ``b + c - 1`` values and ``c`` rates."""

    prefix: int
    period: int
    head: tuple[int, ...]
    rates: tuple[int, ...]

    def __post_init__(self):
        if self.prefix < 1 or self.period < 1:
            raise ValueError("prefix and period must be positive")
        if len(self.head) != self.prefix + self.period - 1 or len(self.rates) != self.period:
            raise ValueError("head must hold b + c - 1 values and one rate per residue")

    def __getitem__(self, m: int) -> int:
        if m < 1:
            raise IndexError("sequences are indexed from 1")
        if m <= len(self.head):
            return self.head[m - 1]
        k, i = divmod(m - self.prefix, self.period)
        return self.head[self.prefix + i - 1] + k * self.rates[i]

    def values(self, upto: int) -> list[int]:
        return [self[m] for m in range(1, upto + 1)]

    @classmethod
    def build(cls, fn: Callable[[int], int], b: int, c: int) -> "ScalarPeriodic":
        head = tuple(fn(m) for m in range(1, b + c))
        rate = tuple(fn(b + c + i) - fn(b + i) for i in range(c))
        return cls(b, c, head, rate)


def _min_prefix(s: ScalarPeriodic, t: ScalarPeriodic, b: int, c: int) -> int:
    # K_i: index after which the smaller sequence stays fixed, common b and c
    ks = []
    for i in range(c):
        ls = s[b + c + i] - s[b + i]
        lt = t[b + c + i] - t[b + i]
        sv, tv = s[b + i], t[b + i]
        if ls == lt:
            ks.append(0)
        elif ls < lt:
            ks.append(-((tv - sv) // (lt - ls)) if sv > tv else 0)
        else:
            ks.append(-((sv - tv) // (ls - lt)) if tv > sv else 0)
    return b + max(ks) * c


def combine_periodic(op: str, s: ScalarPeriodic, t: ScalarPeriodic | None = None) -> ScalarPeriodic:
    """Prefix, period and rates of ``s + t``, ``min(s, t)`` or ``floor(s / 2)``."""
    if op == "floor_half":
        b, c = s.prefix, 2 * s.period
        return ScalarPeriodic.build(lambda m: s[m] // 2, b, c)
    if t is None:
        raise ValueError(f"{op} needs two sequences")
    b = max(s.prefix, t.prefix)
    c = math.lcm(s.period, t.period)
    if op == "sum":
        return ScalarPeriodic.build(lambda m: s[m] + t[m], b, c)
    if op == "min":
        return ScalarPeriodic.build(lambda m: min(s[m], t[m]), _min_prefix(s, t, b, c), c)
    raise ValueError(f"unknown operation {op!r}")
