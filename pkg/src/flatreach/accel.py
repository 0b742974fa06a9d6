"""Powers, periodicity detection and closed forms of relation powers.

For a relation ``R`` (difference-bounds or octagonal) the canonical matrices
of ``R^1, R^2, ...`` form an ultimately periodic sequence.  The prefix and
period are found on a finite sample and then *certified* symbolically: each
residue template ``T_i(k) = k * L_i + M(R^{b+i})`` is composed with ``R^c``
in the parametric domain and compared with ``T_i(k + 1)`` for every ``k``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from . import periodic
from .dbm import EMPTY, INF, DbRelation
from .octagon import OctRelation, oct_compose
from .param import TOP, ParamDbm, meet, param_close


@dataclass(frozen=True)
class Caps:
    max_prefix: int = 2048
    max_period: int = 256
    max_k: int = 512
    max_states: int = 200_000
    start_horizon: int = 32

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class CapExceeded:
    horizon: int
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Refuted:
    residue: int
    k: int

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Certified:
    def __bool__(self) -> bool:
        return True


def compose(r, s):
    if r is EMPTY or s is EMPTY:
        return EMPTY
    if isinstance(r, DbRelation) and isinstance(s, DbRelation):
        return r.compose(s)
    return oct_compose(r, s)


def identity_like(r):
    return type(r).identity(r.n_vars)


def fast_power(r, n: int):
    """``R^n`` by repeated squaring (``R^0`` is the identity)."""
    if n < 0:
        raise ValueError("negative power")
    result = None
    base = r
    while n:
        if n & 1:
            result = base if result is None else compose(result, base)
            if result is EMPTY:
                return EMPTY
        n >>= 1
        if n:
            base = compose(base, base)
            if base is EMPTY:
                return EMPTY
    return identity_like(r) if result is None else result


def naive_power(r, n: int):
    result = identity_like(r)
    for _ in range(n):
        result = compose(result, r)
        if result is EMPTY:
            break
    return result


def canonical(r) -> np.ndarray | None:
    return None if r is EMPTY else r.canonical()


@dataclass
class PowerSequence:
    """Lazily extended list of canonical matrices of ``R^1, R^2, ...``."""

    relation: object
    mats: list = field(default_factory=list)
    empty_at: int | None = None
    _last: object = None

    def extend(self, h: int) -> None:
        while len(self.mats) < h and self.empty_at is None:
            nxt = self.relation if self._last is None else compose(self._last, self.relation)
            if nxt is EMPTY or nxt.canonical() is None:
                self.empty_at = len(self.mats) + 1
                return
            self._last = nxt
            self.mats.append(nxt.canonical())

    def stacked(self) -> np.ndarray:
        return np.stack(self.mats)


@dataclass(frozen=True)
class PeriodicSpec:
    """Certified prefix ``b``, period ``c`` and per-residue rate matrices."""

    kind: str
    n_vars: int
    star_consistent: bool
    prefix: int
    period: int
    rates: tuple[np.ndarray, ...]
    horizon: int


def _template(rate: np.ndarray, base: np.ndarray) -> ParamDbm:
    return ParamDbm.affine(np.where(base >= INF, 0, rate), base)


def _stack_db(t: ParamDbm, step: np.ndarray, n: int) -> ParamDbm:
    size = 3 * n
    rows = [[TOP] * size for _ in range(size)]
    for i in range(2 * n):
        for j in range(2 * n):
            rows[i][j] = t.entries[i][j]
    step_p = ParamDbm.constant(step).entries
    for i in range(2 * n):
        for j in range(2 * n):
            a, b = n + i, n + j
            rows[a][b] = meet(rows[a][b], step_p[i][j])
    return ParamDbm(tuple(tuple(r) for r in rows))


def _stack_oct(t: ParamDbm, step: np.ndarray, n: int) -> ParamDbm:
    size = 6 * n
    rows = [[TOP] * size for _ in range(size)]
    for i in range(4 * n):
        for j in range(4 * n):
            rows[i][j] = t.entries[i][j]
    step_p = ParamDbm.constant(step).entries
    off = 2 * n
    for i in range(4 * n):
        for j in range(4 * n):
            rows[off + i][off + j] = meet(rows[off + i][off + j], step_p[i][j])
    return ParamDbm(tuple(tuple(r) for r in rows))


def step_template(t: ParamDbm, step: np.ndarray, kind: str, n: int):
    """Parametric closure of ``T(k) ; step`` and the indices of its outer blocks."""
    if kind == "DB":
        big = _stack_db(t, step, n)
        keep = list(range(n)) + list(range(2 * n, 3 * n))
    else:
        big = _stack_oct(t, step, n)
        keep = list(range(2 * n)) + list(range(4 * n, 6 * n))
    return param_close(big, kind), keep


def verify_period(r, b: int, c: int, rates: Sequence[np.ndarray], bases: Sequence[np.ndarray]):
    """Certify ``R^{b+i+kc} = T_i(k)`` for every residue ``i`` and every ``k >= 0``.

    ``bases[i]`` is the canonical matrix of ``R^{b+i}``.  Returns
    :class:`Certified` or :class:`Refuted` with the first failing ``k``.
    """
    kind, n = r.kind, r.n_vars
    step = canonical(fast_power(r, c))
    if step is None:
        return Refuted(0, 0)
    for i in range(c):
        t = _template(rates[i], bases[i])
        closure, keep = step_template(t, step, kind, n)
        bad = closure.first_inconsistent()
        worst = bad
        for piece in closure.pieces:
            if piece.empty:
                continue
            got = piece.matrix.restrict(keep)
            # T(k + 1) expressed in the piece's own parameter j, k = m * j + res
            want = t.substitute(piece.modulus, piece.residue + 1)
            d = got.first_difference(want)
            if d is not None:
                k = piece.modulus * d + piece.residue
                worst = k if worst is None else min(worst, k)
        if worst is not None:
            return Refuted(i, worst)
    return Certified()


def detect_period(r, caps: Caps = DEFAULT_CAPS) -> PeriodicSpec | CapExceeded:
    """Least certified period and, for it, the least prefix of ``R^1, R^2, ...``."""
    seq = PowerSequence(r)
    limit = caps.max_prefix + 3 * caps.max_period
    h = min(caps.start_horizon, limit)
    tried: dict[tuple[int, int], bool] = {}
    while True:
        seq.extend(h)
        if seq.empty_at is not None:
            return PeriodicSpec(r.kind, r.n_vars, False, seq.empty_at, 1, (), seq.empty_at)
        stacked = seq.stacked()
        for c in range(1, min(caps.max_period, (h - 1) // 3) + 1):
            b = periodic.plausible_prefix(stacked, c)
            if b is None or b > caps.max_prefix:
                continue
            key = (b, c)
            if key not in tried:
                rates = periodic.rates(stacked, b, c)
                bases = [stacked[b - 1 + i] for i in range(c)]
                tried[key] = bool(verify_period(r, b, c, rates, bases))
            if tried[key]:
                rates = tuple(periodic.rates(stacked, b, c))
                for m in rates:
                    m.setflags(write=False)
                return PeriodicSpec(r.kind, r.n_vars, True, b, c, rates, h)
        if h >= limit:
            return CapExceeded(h, "no certified period within the prefix and period caps")
        h = min(2 * h, limit)


def _sparse(m: np.ndarray) -> list[list[int]]:
    out = []
    for i, j in zip(*np.nonzero(m < INF)):
        if i != j:
            out.append([int(i), int(j), int(m[i, j])])
    return out


def _dense(entries, size: int) -> np.ndarray:
    m = np.full((size, size), INF, dtype=np.int64)
    np.fill_diagonal(m, 0)
    for i, j, v in entries:
        m[i, j] = v
    return m


@dataclass(frozen=True)
class ClosedForm:
    """Finite description of ``{R^n | n >= 1}``.

    ``powers`` holds canonical matrices of ``R^1..R^b`` (star-consistent) or
    ``R^1..R^{b-1}`` (otherwise); ``templates[j]`` gives ``R^{b+j+kc}``.
    """

    kind: str
    n_vars: int
    star_consistent: bool
    prefix: int
    period: int
    powers: tuple[np.ndarray, ...]
    rates: tuple[np.ndarray, ...]
    templates: tuple[ParamDbm, ...]

    @property
    def size(self) -> int:
        return (2 if self.kind == "DB" else 4) * self.n_vars

    def relation_from(self, m: np.ndarray):
        cls = DbRelation if self.kind == "DB" else OctRelation
        return cls.from_canonical(self.n_vars, m)

    def instantiate(self, n: int):
        return instantiate(self, n)

    def disjuncts(self):
        """``("id", None)``, ``("power", i)`` and ``("template", j)`` pieces of ``R^*``."""
        out = [("id", None)]
        last = self.prefix - 1
        out += [("power", i) for i in range(1, last + 1)]
        if self.star_consistent:
            out += [("template", j) for j in range(self.period)]
        return out

    def to_json(self) -> dict:
        size = self.size
        templates = []
        for t in self.templates:
            entries = []
            for i in range(size):
                for j in range(size):
                    p = t.entries[i][j]
                    if p and i != j:
                        ((a, b),) = p
                        entries.append([i, j, a, b])
            templates.append(entries)
        return {
            "class": self.kind,
            "n_vars": self.n_vars,
            "star_consistent": self.star_consistent,
            "prefix": self.prefix,
            "period": self.period,
            "powers": [_sparse(m) for m in self.powers],
            "rates": [_sparse(m) for m in self.rates],
            "templates": templates,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClosedForm":
        kind = data["class"]
        n = int(data["n_vars"])
        size = (2 if kind == "DB" else 4) * n
        powers = tuple(_dense(e, size) for e in data["powers"])
        rates = tuple(_dense(e, size) for e in data["rates"])
        for m in rates:
            np.fill_diagonal(m, 0)
        templates = []
        for entries in data["templates"]:
            slopes = np.zeros((size, size), dtype=np.int64)
            offsets = _dense([], size)
            for i, j, a, b in entries:
                slopes[i, j] = a
                offsets[i, j] = b
            templates.append(ParamDbm.affine(slopes, offsets))
        return cls(kind, n, bool(data["star_consistent"]), int(data["prefix"]), int(data["period"]),
                   powers, rates, tuple(templates))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClosedForm):
            return NotImplemented
        return self.to_json() == other.to_json()


def closed_form(r, caps: Caps = DEFAULT_CAPS) -> ClosedForm | CapExceeded:
    spec = detect_period(r, caps)
    if isinstance(spec, CapExceeded):
        return spec
    seq = PowerSequence(r)
    if not spec.star_consistent:
        seq.extend(spec.prefix - 1)
        return ClosedForm(r.kind, r.n_vars, False, spec.prefix, 1, tuple(seq.mats), (), ())
    b, c = spec.prefix, spec.period
    seq.extend(b + c - 1)
    templates = tuple(_template(spec.rates[i], seq.mats[b - 1 + i]) for i in range(c))
    return ClosedForm(r.kind, r.n_vars, True, b, c, tuple(seq.mats[:b]), spec.rates, templates)


def instantiate(cf: ClosedForm, n: int):
    """The relation ``R^n`` read off a closed form."""
    if n < 0:
        raise ValueError("negative power")
    if n == 0:
        cls = DbRelation if cf.kind == "DB" else OctRelation
        return cls.identity(cf.n_vars)
    if not cf.star_consistent:
        return cf.relation_from(cf.powers[n - 1]) if n < cf.prefix else EMPTY
    if n <= cf.prefix:
        return cf.relation_from(cf.powers[n - 1])
    k, j = divmod(n - cf.prefix, cf.period)
    return cf.relation_from(cf.templates[j].instantiate(k))


def template_at(cf: ClosedForm, j: int) -> ParamDbm:
    return cf.templates[j]


def lcm_upto(n: int) -> int:
    return reduce(math.lcm, range(1, n + 1), 1)


def theoretical_bounds(r) -> dict:
    """Worst-case prefix and period bounds for the relation's class.

    The prefix figures are the (very coarse) closed-form estimates and serve
    as documentation; the search itself is limited by :class:`Caps`.
    """
    n = r.n_vars
    norm = max(1, r.measures().coeff_sum)
    if r.kind == "DB":
        return {"prefix": norm * 5 ** (6 * n), "period_divides": lcm_upto(n)}
    return {"prefix": norm**3 * 5 ** (12 * n), "period_divides": 2 * lcm_upto(2 * n)}
