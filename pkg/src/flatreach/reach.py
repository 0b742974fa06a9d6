"""Reachability for flat counter machines.

The bounded backend walks every control path of the folded machine and every
choice of loop disjunct (identity, a prefix power, or a periodic template).
Selections without templates are checked exactly with octagon images.  In a
selection with templates the last one is kept symbolic and decided over all
``k >= 0`` with the parametric closure; earlier ones are swept over
``0..caps.max_k``.  So only selections with at most one template are ever
refuted exactly, and ``Unreachable`` is reported only when every selection
was.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import octagon as oc
from .accel import DEFAULT_CAPS, CapExceeded, Caps, ClosedForm, fast_power
from .dbm import INF
from .machine import FoldedMachine, FoldedRule, Machine, Summary, fold_loops, octagon_of, summarize
from .param import TOP, ParamDbm, meet, param_close

REACHABLE = "Reachable"
UNREACHABLE = "Unreachable"
UNKNOWN = "Unknown"


@dataclass
class Witness:
    path: list[str]
    rules: list[int]
    loop_iters: dict[str, int]
    trace: list[list[int]]

    def to_json(self) -> dict:
        return {"path": self.path, "rules": self.rules, "loop_iters": self.loop_iters, "trace": self.trace}

    @classmethod
    def from_json(cls, d: dict) -> "Witness":
        return cls(list(d["path"]), list(d["rules"]), dict(d["loop_iters"]), [list(v) for v in d["trace"]])


@dataclass
class ReachResult:
    verdict: str
    witness: Witness | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "diagnostics": self.diagnostics}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "ReachResult":
        w = Witness.from_json(d["witness"]) if d.get("witness") else None
        return cls(d["verdict"], w, dict(d.get("diagnostics", {})))


def replay(m: Machine, w: Witness) -> bool:
    """Check a witness against the machine's concrete semantics."""
    if len(w.trace) != len(w.rules) + 1 or len(w.path) != len(w.trace):
        return False
    if w.path[0] != m.init or w.path[-1] != m.final:
        return False
    if not m.in_init(w.trace[0]) or not m.in_final(w.trace[-1]):
        return False
    for s, idx in enumerate(w.rules):
        r = m.rules[idx]
        if r.src != w.path[s] or r.dst != w.path[s + 1]:
            return False
        if not r.holds(w.trace[s], w.trace[s + 1]):
            return False
    return True


# ---------------------------------------------------------------- steps


@dataclass(frozen=True)
class Step:
    """A rule of the folded machine, or the self-loop at ``loc``."""

    rule: FoldedRule | None = None
    loc: str | None = None


@dataclass(frozen=True)
class Choice:
    kind: str  # "id", "power", "template"
    n: int = 0  # iteration count for id/power; template index for templates


def _steps(summary: Summary, path: list[FoldedRule]) -> list[Step]:
    out = []
    loc = summary.folded.init
    if loc in summary.loops:
        out.append(Step(loc=loc))
    for r in path:
        out.append(Step(rule=r))
        if r.dst in summary.loops:
            out.append(Step(loc=r.dst))
    return out


def _options(summary: Summary, step: Step, probe: int) -> tuple[list[Choice], bool]:
    if step.rule is not None:
        return [Choice("id")], True
    cf = summary.loops[step.loc]
    if isinstance(cf, CapExceeded):
        return [Choice("id")] + [Choice("power", n) for n in range(1, probe + 1)], False
    opts = []
    for tag, val in cf.disjuncts():
        if tag == "id":
            opts.append(Choice("id"))
        elif tag == "power":
            opts.append(Choice("power", val))
        else:
            opts.append(Choice("template", val))
    return opts, True


class _Ctx:
    def __init__(self, m: Machine, f: FoldedMachine, summary: Summary):
        self.m = m
        self.f = f
        self.summary = summary
        self.n = m.n_vars
        self._power_cache: dict[tuple[str, int], object] = {}

    def iterations(self, step: Step, choice: Choice, k: int | None = None) -> int:
        if choice.kind == "id":
            return 0
        if choice.kind == "power":
            return choice.n
        cf = self.summary.loops[step.loc]
        return cf.prefix + choice.n + k * cf.period

    def relation(self, step: Step, choice: Choice, k: int | None = None):
        """Relation of a step under a choice (``None`` for the identity)."""
        if step.rule is not None:
            return step.rule.relation
        n = self.iterations(step, choice, k)
        if n == 0:
            return None
        key = (step.loc, n)
        if key not in self._power_cache:
            cf = self.summary.loops[step.loc]
            if isinstance(cf, ClosedForm):
                self._power_cache[key] = cf.instantiate(n)
            else:
                self._power_cache[key] = fast_power(self.f.loops[step.loc].relation, n)
        return self._power_cache[key]


def _post(s: np.ndarray | None, rel) -> np.ndarray | None:
    if s is None:
        return None
    if rel is None:
        return s
    return oc.post_image(s, rel)


def _pre(s: np.ndarray | None, rel) -> np.ndarray | None:
    if s is None:
        return None
    if rel is None:
        return s
    return oc.pre_image(s, rel)


def _dual_template(cf: ClosedForm, j: int) -> ParamDbm:
    t = cf.templates[j]
    if cf.kind == "OCT":
        return t
    size = t.dim
    rows = [[TOP] * (2 * size) for _ in range(2 * size)]
    for i in range(2 * size):
        rows[i][i] = ((0, 0),)
    for i in range(size):
        for jj in range(size):
            p = t.entries[i][jj]
            if p:
                rows[2 * i][2 * jj] = meet(rows[2 * i][2 * jj], p)
                rows[2 * jj + 1][2 * i + 1] = meet(rows[2 * jj + 1][2 * i + 1], p)
    return ParamDbm(tuple(tuple(r) for r in rows))


def _symbolic_k(cf: ClosedForm, j: int, pre: np.ndarray, post: np.ndarray) -> int | None:
    """Least ``k >= 0`` with ``pre(u) and T_j(k)(u, v) and post(v)`` satisfiable."""
    t = _dual_template(cf, j)
    n = cf.n_vars
    rows = [list(r) for r in t.entries]
    for block, mat in ((0, pre), (2 * n, post)):
        for a in range(2 * n):
            for b in range(2 * n):
                v = mat[a, b]
                if v < INF:
                    rows[block + a][block + b] = meet(rows[block + a][block + b], ((0, int(v)),))
    closure = param_close(ParamDbm(tuple(tuple(r) for r in rows)), "OCT")
    return closure.least_feasible()


def _grid(count: int, max_k: int):
    if count == 0:
        yield ()
        return
    if count == 1:
        for k in range(max_k + 1):
            yield (k,)
        return
    budget = max_k + 1
    total = 0
    while budget > 0:
        for combo in itertools.product(range(total + 1), repeat=count):
            if sum(combo) == total:
                yield combo
                budget -= 1
                if budget <= 0:
                    return
        total += 1


def _bounded(m: Machine, caps: Caps) -> ReachResult:
    diag: dict = {"backend": "bounded", "caps": caps.as_dict()}
    if not m.octagonal_sets:
        diag["reason"] = "the bounded backend needs octagonal I and F"
        return ReachResult(UNKNOWN, None, diag)
    f = fold_loops(m)
    summary = summarize(f, caps)
    ctx = _Ctx(m, f, summary)
    n = m.n_vars
    init = octagon_of(n, m.init_atoms)
    final = octagon_of(n, m.final_atoms)
    capped = sorted(loc for loc, cf in summary.loops.items() if isinstance(cf, CapExceeded))
    diag.update({"paths": 0, "selections": 0, "refuted": 0, "undecided": 0, "capped_loops": capped,
                 "loops": {loc: ({"prefix": cf.prefix, "period": cf.period, "star_consistent": cf.star_consistent}
                                 if isinstance(cf, ClosedForm) else {"cap_exceeded": cf.horizon})
                           for loc, cf in summary.loops.items()}})
    if init is None or final is None:
        diag["reason"] = "empty initial or final set"
        return ReachResult(UNREACHABLE, None, diag)
    exact = not capped
    probe = min(caps.max_k, 32)
    for path in summary.paths():
        diag["paths"] += 1
        steps = _steps(summary, path)
        opts = [_options(summary, s, probe)[0] for s in steps]
        groups = [frozenset(f.loops[s.loc].provenance) if s.loc is not None else None for s in steps]
        for sel in itertools.product(*opts):
            if not _one_per_cycle(groups, sel):
                continue
            diag["selections"] += 1
            found, refuted = _evaluate(ctx, steps, sel, init, final, caps)
            if found is not None:
                ks = found
                w = build_witness(ctx, steps, sel, ks, init, final)
                if not replay(m, w):
                    raise AssertionError("constructed witness does not replay")
                return ReachResult(REACHABLE, w, diag)
            if refuted:
                diag["refuted"] += 1
            else:
                diag["undecided"] += 1
                exact = False
    return ReachResult(UNREACHABLE if exact else UNKNOWN, None, diag)


def _one_per_cycle(groups, sel) -> bool:
    # every run through a cycle iterates a single rotation of it, so selections
    # that iterate two rotations of the same cycle add nothing
    used = set()
    for g, c in zip(groups, sel):
        if g is None or c.kind == "id":
            continue
        if g in used:
            return False
        used.add(g)
    return True


def _evaluate(ctx: _Ctx, steps, sel, init, final, caps: Caps):
    """``(ks, False)`` when reachable, ``(None, True)`` when refuted exactly, else ``(None, False)``.

    ``ks`` maps each template step index to its ``k``.
    """
    params = [i for i, c in enumerate(sel) if c.kind == "template"]
    if not params:
        s = init
        for st, c in zip(steps, sel):
            s = _post(s, ctx.relation(st, c))
            if s is None:
                return None, True
        return ({}, False) if oc.intersect(s, final) is not None else (None, True)
    last = params[-1]
    v = final
    for i in range(len(steps) - 1, last, -1):
        v = _pre(v, ctx.relation(steps[i], sel[i]))
        if v is None:
            return None, True
    earlier = params[:-1]
    cf = ctx.summary.loops[steps[last].loc]
    for combo in _grid(len(earlier), caps.max_k):
        ks = dict(zip(earlier, combo))
        s = init
        for i in range(last):
            s = _post(s, ctx.relation(steps[i], sel[i], ks.get(i)))
            if s is None:
                break
        if s is None:
            if not earlier:
                return None, True
            continue
        k = _symbolic_k(cf, sel[last].n, s, v)
        if k is not None:
            ks[last] = k
            return ks, False
        if not earlier:
            return None, True
    return None, False


def _point_set(values: Sequence[int]) -> np.ndarray:
    n = len(values)
    m = oc.universe(n)
    for i, val in enumerate(values):
        m[2 * i, 2 * i + 1] = 2 * val
        m[2 * i + 1, 2 * i] = -2 * val
    return m


def _link(m: Machine, seq: Sequence[int], start: list[int], end: list[int]) -> list[list[int]]:
    """Concrete valuations after each of ``seq`` (original rules), from ``start`` to ``end``."""
    rels = [m.relation(i) for i in seq]
    back = [None] * (len(rels) + 1)
    back[-1] = _point_set(end)
    for p in range(len(rels) - 1, -1, -1):
        back[p] = oc.pre_image(back[p + 1], rels[p])
        if back[p] is None:
            raise AssertionError("no concrete path between cut points")
    out = []
    cur = start
    for p, rel in enumerate(rels):
        nxt_set = oc.intersect(oc.post_image(_point_set(cur), rel), back[p + 1])
        if nxt_set is None:
            raise AssertionError("no concrete successor")
        cur = oc.pick_point(nxt_set, prefer=cur)
        out.append(cur)
    return out


def _macro(ctx: _Ctx, steps, sel, ks) -> list[tuple[Step, list[int], int]]:
    """``(step, original rule sequence, iterations)`` per step."""
    out = []
    for i, (st, c) in enumerate(zip(steps, sel)):
        if st.rule is not None:
            out.append((st, list(st.rule.provenance), 1))
        else:
            it = ctx.iterations(st, c, ks.get(i))
            out.append((st, list(ctx.f.loops[st.loc].provenance) * it, it))
    return out


def build_witness(ctx: _Ctx, steps, sel, ks, init, final, cuts: list[list[int]] | None = None) -> Witness:
    """Concrete run for a feasible selection; ``cuts`` optionally fixes the cut-point valuations."""
    m = ctx.m
    rels = [ctx.relation(st, c, ks.get(i)) for i, (st, c) in enumerate(zip(steps, sel))]
    if cuts is None:
        back = [None] * (len(rels) + 1)
        back[-1] = final
        for p in range(len(rels) - 1, -1, -1):
            back[p] = _pre(back[p + 1], rels[p])
        start = oc.intersect(init, back[0])
        if start is None:
            raise AssertionError("selection is infeasible")
        cuts = [oc.pick_point(start)]
        for p, rel in enumerate(rels):
            nxt = oc.intersect(_post(_point_set(cuts[-1]), rel), back[p + 1])
            if nxt is None:
                raise AssertionError("selection is infeasible")
            cuts.append(oc.pick_point(nxt, prefer=cuts[-1]))
    trace = [list(cuts[0])]
    rules: list[int] = []
    loop_iters: dict[str, int] = {}
    for p, (st, seq, it) in enumerate(_macro(ctx, steps, sel, ks)):
        if st.loc is not None:
            loop_iters[st.loc] = it
        if not seq:
            continue
        trace += _link(m, seq, trace[-1], list(cuts[p + 1]))
        rules += seq
    path = [m.init] + [m.rules[i].dst for i in rules]
    return Witness(path, rules, loop_iters, [list(map(int, v)) for v in trace])


def decide_reach(m: Machine, backend: str = "bounded", caps: Caps = DEFAULT_CAPS,
                 solver: str | None = None, smt_out: str | None = None) -> ReachResult:
    if backend == "bounded":
        return _bounded(m, caps)
    if backend == "smt":
        from .smt import smt_reach

        return smt_reach(m, caps, solver=solver, smt_out=smt_out)
    raise ValueError(f"unknown backend {backend!r}")
