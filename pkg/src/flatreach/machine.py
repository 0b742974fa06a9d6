"""Flat counter machines: text format, flatness, loop folding and summaries.

Example::

    vars x, y;
    init q0; final q1;
    I: x = 0 && y = 0;
    F: x >= 5;
    q0 -> q0 [ x' = x + 1 && y' = y ];
    q0 -> q1 [ x' = x && y' = y ];

Atoms are linear (in)equalities; ``=`` stands for two inequalities and
``a < b`` for ``a <= b - 1``.  Rule bodies must be octagonal; ``I`` and ``F``
may hold arbitrary linear atoms (only the SMT backend accepts those).
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .accel import CapExceeded, Caps, ClosedForm, DEFAULT_CAPS, closed_form, compose
from .dbm import INF, DbRelation, is_empty
from .octagon import OctRelation, atom_cells, from_cells, tight_close


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


# ---------------------------------------------------------------- atoms


@dataclass(frozen=True)
class LinAtom:
    """``sum(coef * var) <= bound`` over variable indices (primed ones offset by N)."""

    terms: tuple[tuple[int, int], ...]
    bound: int

    @staticmethod
    def make(terms: dict[int, int], bound: int) -> "LinAtom":
        return LinAtom(tuple(sorted((v, a) for v, a in terms.items() if a)), int(bound))

    def value(self, point: Sequence[int]) -> int:
        return sum(a * point[v] for v, a in self.terms)

    def holds(self, point: Sequence[int]) -> bool:
        return self.value(point) <= self.bound

    @property
    def is_difference(self) -> bool:
        return len(self.terms) == 2 and sorted(a for _, a in self.terms) == [-1, 1]

    @property
    def is_octagonal(self) -> bool:
        if len(self.terms) == 0:
            return True
        if len(self.terms) == 1:
            return abs(self.terms[0][1]) in (1, 2)
        return len(self.terms) == 2 and all(abs(a) == 1 for _, a in self.terms)


def format_atom(atom: LinAtom, names: Sequence[str]) -> str:
    parts = []
    for v, a in atom.terms:
        name = names[v]
        mag = abs(a)
        body = name if mag == 1 else f"{mag}{name}"
        if not parts:
            parts.append(body if a > 0 else f"-{body}")
        else:
            parts.append(("+ " if a > 0 else "- ") + body)
    lhs = " ".join(parts) if parts else "0"
    return f"{lhs} <= {atom.bound}"


def relation_of(n_vars: int, atoms: Sequence[LinAtom]):
    """DB relation when every atom is a difference, otherwise an octagonal one."""
    if all(a.is_difference or not a.terms for a in atoms):
        cells = []
        for a in atoms:
            if not a.terms:
                if a.bound < 0:
                    cells.append((0, 0, -1))
                continue
            (u, cu), (v, cv) = a.terms
            i, j = (u, v) if cu > 0 else (v, u)
            cells.append((i, j, a.bound))
        return DbRelation.from_atoms(n_vars, cells)
    cells = []
    for a in atoms:
        if not a.is_octagonal:
            raise ValueError("atom is not octagonal")
        cells += atom_cells(dict(a.terms), a.bound)
    return OctRelation.from_cells(n_vars, cells)


def relation_atoms(r) -> tuple[LinAtom, ...]:
    """Atoms of a relation's (unclosed) matrix; an empty relation gives the false atom."""
    from .octagon import dual_atoms

    if is_empty(r):
        return (LinAtom((), -1),)
    n = r.n_vars
    if r.kind == "DB":
        m = r.matrix
        return tuple(LinAtom.make({i: 1, j: -1}, int(m[i, j]))
                     for i in range(2 * n) for j in range(2 * n) if i != j and m[i, j] < INF)
    return tuple(LinAtom.make(t, c) for t, c in dual_atoms(r.matrix))


def octagon_of(n: int, atoms: Sequence[LinAtom]) -> np.ndarray | None:
    """Tight dual matrix of a conjunction of octagonal atoms (``None`` if empty)."""
    cells = []
    for a in atoms:
        cells += atom_cells(dict(a.terms), a.bound)
    return tight_close(from_cells(n, cells))


# ---------------------------------------------------------------- lexer / parser

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*'?)"
    r"|(?P<op>->|<=|>=|==|&&|[<>=+\-*,;:\[\]()])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            self.error(f"expected {want}, found {t.text!r}" if t.kind != "eof" else f"expected {want}, found end of input")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    # expr := ['-'] term (('+'|'-') term)*
    def expr(self, resolve) -> tuple[dict[int, int], int]:
        coefs: dict[int, int] = {}
        const = 0
        sign = 1
        if self.accept("-"):
            sign = -1
        elif self.accept("+"):
            pass
        while True:
            t = self.tok
            if t.kind == "int":
                self.i += 1
                val = int(t.text)
                self.accept("*")
                if self.tok.kind == "ident":
                    v = resolve(self.take(kind="ident"))
                    coefs[v] = coefs.get(v, 0) + sign * val
                else:
                    const += sign * val
            elif t.kind == "ident":
                v = resolve(self.take(kind="ident"))
                coefs[v] = coefs.get(v, 0) + sign
            else:
                self.error(f"expected a term, found {t.text!r}" if t.kind != "eof" else "expected a term, found end of input")
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return coefs, const

    def atom(self, resolve) -> list[tuple[LinAtom, Token]]:
        first = self.tok
        lc, lk = self.expr(resolve)
        op = self.tok
        if op.text not in ("<=", "<", ">=", ">", "=", "=="):
            self.error(f"expected a comparison, found {op.text!r}")
        self.i += 1
        rc, rk = self.expr(resolve)
        diff = dict(lc)
        for v, a in rc.items():
            diff[v] = diff.get(v, 0) - a
        bound = rk - lk  # sum(diff) <= bound means lhs <= rhs
        neg = {v: -a for v, a in diff.items()}
        if op.text == "<=":
            out = [LinAtom.make(diff, bound)]
        elif op.text == "<":
            out = [LinAtom.make(diff, bound - 1)]
        elif op.text == ">=":
            out = [LinAtom.make(neg, -bound)]
        elif op.text == ">":
            out = [LinAtom.make(neg, -bound - 1)]
        else:
            out = [LinAtom.make(diff, bound), LinAtom.make(neg, -bound)]
        return [(a, first) for a in out]

    def conjunction(self, resolve, stop: str) -> list[tuple[LinAtom, Token]]:
        if self.tok.text == stop:
            return []
        if self.tok.kind == "ident" and self.tok.text == "true" and self.toks[self.i + 1].text == stop:
            self.i += 1
            return []
        out = self.atom(resolve)
        while self.accept("&&"):
            out += self.atom(resolve)
        return out


@dataclass(frozen=True)
class Rule:
    src: str
    dst: str
    atoms: tuple[LinAtom, ...]

    def relation(self, n_vars: int):
        return relation_of(n_vars, self.atoms)

    def holds(self, pre: Sequence[int], post: Sequence[int]) -> bool:
        point = list(pre) + list(post)
        return all(a.holds(point) for a in self.atoms)


@dataclass(frozen=True)
class Machine:
    vars: tuple[str, ...]
    init: str
    final: str
    init_atoms: tuple[LinAtom, ...]
    final_atoms: tuple[LinAtom, ...]
    rules: tuple[Rule, ...]
    locations: tuple[str, ...] = field(default=(), compare=False)

    @property
    def n_vars(self) -> int:
        return len(self.vars)

    def all_locations(self) -> list[str]:
        seen: dict[str, None] = {}
        for loc in self.locations:
            seen.setdefault(loc, None)
        seen.setdefault(self.init, None)
        for r in self.rules:
            seen.setdefault(r.src, None)
            seen.setdefault(r.dst, None)
        seen.setdefault(self.final, None)
        return list(seen)

    def names(self, primed: bool = True) -> list[str]:
        return list(self.vars) + ([v + "'" for v in self.vars] if primed else [])

    def in_init(self, point: Sequence[int]) -> bool:
        return all(a.holds(point) for a in self.init_atoms)

    def in_final(self, point: Sequence[int]) -> bool:
        return all(a.holds(point) for a in self.final_atoms)

    @property
    def octagonal_sets(self) -> bool:
        return all(a.is_octagonal for a in self.init_atoms + self.final_atoms)

    def relation(self, index: int):
        return self.rules[index].relation(self.n_vars)


def parse_machine(text: str) -> Machine:
    p = _Parser(text)
    vars_: list[str] | None = None
    locs: list[str] = []
    init = final = None
    init_atoms: list[LinAtom] | None = None
    final_atoms: list[LinAtom] | None = None
    rules: list[Rule] = []
    seen: set[str] = set()

    def resolver(primed_ok: bool):
        def resolve(tok: Token) -> int:
            if vars_ is None:
                p.error("variables must be declared before use", tok)
            name, primed = (tok.text[:-1], True) if tok.text.endswith("'") else (tok.text, False)
            if name not in vars_:
                p.error(f"unknown variable {name!r}", tok)
            if primed and not primed_ok:
                p.error(f"primed variable {tok.text!r} outside a rule", tok)
            return vars_.index(name) + (len(vars_) if primed else 0)
        return resolve

    def once(key: str, tok: Token):
        if key in seen:
            p.error(f"duplicate {key} declaration", tok)
        seen.add(key)

    while p.tok.kind != "eof":
        tok = p.tok
        if tok.kind == "ident" and tok.text == "vars":
            once("vars", tok)
            p.i += 1
            vars_ = []
            while True:
                t = p.take(kind="ident")
                if t.text.endswith("'"):
                    p.error("variable names cannot be primed", t)
                if t.text in vars_:
                    p.error(f"duplicate variable {t.text!r}", t)
                vars_.append(t.text)
                if not p.accept(","):
                    break
            p.take(";")
        elif tok.kind == "ident" and tok.text in ("locs", "locations"):
            once("locs", tok)
            p.i += 1
            while True:
                t = p.take(kind="ident")
                if t.text in locs:
                    p.error(f"duplicate location {t.text!r}", t)
                locs.append(t.text)
                if not p.accept(","):
                    break
            p.take(";")
        elif tok.kind == "ident" and tok.text in ("init", "final") and p.toks[p.i + 1].kind == "ident":
            once(tok.text, tok)
            p.i += 1
            name = p.take(kind="ident").text
            p.take(";")
            if tok.text == "init":
                init = name
            else:
                final = name
        elif tok.kind == "ident" and tok.text in ("I", "F") and p.toks[p.i + 1].text == ":":
            once(tok.text, tok)
            p.i += 2
            atoms = [a for a, _ in p.conjunction(resolver(False), ";")]
            p.take(";")
            if tok.text == "I":
                init_atoms = atoms
            else:
                final_atoms = atoms
        elif tok.kind == "ident":
            src = p.take(kind="ident")
            p.take("->")
            dst = p.take(kind="ident")
            p.take("[")
            body = p.conjunction(resolver(True), "]")
            p.take("]")
            p.take(";")
            for a, at in body:
                if not a.is_octagonal:
                    p.error("rule atoms must be octagonal (at most two variables with unit coefficients)", at)
            rules.append(Rule(src.text, dst.text, tuple(a for a, _ in body)))
            for t in (src, dst):
                if locs and t.text not in locs:
                    p.error(f"undeclared location {t.text!r}", t)
        else:
            p.error(f"unexpected {tok.text!r}")
    eof = p.tok
    if vars_ is None:
        raise ParseError("missing vars declaration", eof.line, eof.col)
    if init is None or final is None:
        raise ParseError("missing init or final declaration", eof.line, eof.col)
    for name in (init, final):
        if locs and name not in locs:
            raise ParseError(f"undeclared location {name!r}", eof.line, eof.col)
    return Machine(tuple(vars_), init, final, tuple(init_atoms or ()), tuple(final_atoms or ()),
                   tuple(rules), tuple(locs))


def print_machine(m: Machine) -> str:
    names = m.names()
    lines = [f"vars {', '.join(m.vars)};"]
    if m.locations:
        lines.append(f"locs {', '.join(m.locations)};")
    lines.append(f"init {m.init};")
    lines.append(f"final {m.final};")

    def conj(atoms):
        return " && ".join(format_atom(a, names) for a in atoms) if atoms else "true"

    lines.append(f"I: {conj(m.init_atoms)};")
    lines.append(f"F: {conj(m.final_atoms)};")
    for r in m.rules:
        lines.append(f"{r.src} -> {r.dst} [ {conj(r.atoms)} ];")
    return "\n".join(lines) + "\n"


def parse_relation(text: str):
    """A relation file: optional ``vars`` declaration followed by one conjunction.

    Without a declaration the counters are taken in order of first appearance.
    """
    p = _Parser(text)
    names: list[str] = []
    declared = False
    if p.tok.kind == "ident" and p.tok.text == "vars":
        declared = True
        p.i += 1
        while True:
            names.append(p.take(kind="ident").text)
            if not p.accept(","):
                break
        p.take(";")
    else:
        for t in p.toks:
            if t.kind == "ident" and t.text != "true":
                base = t.text.rstrip("'")
                if base not in names:
                    names.append(base)
    n = len(names)

    def resolve(tok: Token) -> int:
        base, primed = (tok.text[:-1], True) if tok.text.endswith("'") else (tok.text, False)
        if base not in names:
            p.error(f"unknown variable {base!r}", tok)
        return names.index(base) + (n if primed else 0)

    bracket = p.accept("[")
    body = p.conjunction(resolve, "]" if bracket else ";")
    if bracket:
        p.take("]")
    p.accept(";")
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    for a, at in body:
        if not a.is_octagonal:
            p.error("relation atoms must be octagonal", at)
    if n == 0:
        raise ParseError("relation mentions no counters", p.tok.line, p.tok.col)
    return relation_of(n, [a for a, _ in body]), names


def format_relation(r, names: Sequence[str]) -> str:
    """Atoms of the canonical matrix, dropping those implied by the rest."""
    from .octagon import dual_atoms, to_oct

    full = list(names) + [v + "'" for v in names]
    n = r.n_vars
    canon = r.canonical()
    if canon is None:
        return "false"
    if r.kind == "DB":
        atoms = [LinAtom.make({i: 1, j: -1}, int(canon[i, j]))
                 for i in range(2 * n) for j in range(2 * n) if i != j and canon[i, j] < 2**61]
    else:
        atoms = [LinAtom.make(t, c) for t, c in dual_atoms(canon)]
    kept = list(atoms)
    target = to_oct(r)
    for a in atoms:
        trial = [b for b in kept if b is not a]
        if to_oct(relation_of(n, trial)) == target:
            kept = trial
    return " && ".join(format_atom(a, full) for a in kept) if kept else "true"


# ---------------------------------------------------------------- flatness


@dataclass(frozen=True)
class FlatOk:
    loops: tuple[tuple[int, ...], ...]  # rule indices of each simple loop, in order

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Violation:
    location: str
    loops: tuple[tuple[int, ...], ...]

    def __bool__(self) -> bool:
        return False


def _control_graph(m: Machine) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    g.add_nodes_from(m.all_locations())
    for idx, r in enumerate(m.rules):
        g.add_edge(r.src, r.dst, key=idx)
    return g


def _loop_through(g: nx.MultiDiGraph, comp: set, first: int, rules: Sequence[Rule], target: str) -> tuple[int, ...]:
    start = rules[first].dst
    prev: dict[str, tuple[str, int] | None] = {start: None}
    queue = deque([start])
    while queue and target not in prev:
        u = queue.popleft()
        for _, v, key in sorted(g.out_edges(u, keys=True), key=lambda e: e[2]):
            if v in comp and v not in prev:
                prev[v] = (u, key)
                queue.append(v)
    path = []
    node = target
    while prev[node] is not None:
        u, key = prev[node]
        path.append(key)
        node = u
    return (first,) + tuple(reversed(path))


def check_flat(m: Machine) -> FlatOk | Violation:
    """Every location must lie on at most one simple loop."""
    g = _control_graph(m)
    loops = []
    order = {loc: i for i, loc in enumerate(m.all_locations())}
    for comp in sorted(nx.strongly_connected_components(g), key=lambda c: min(order[x] for x in c)):
        inner = [(u, v, k) for u, v, k in g.edges(keys=True) if u in comp and v in comp]
        if not inner:
            continue
        outdeg: dict[str, list[int]] = {}
        for u, _, k in inner:
            outdeg.setdefault(u, []).append(k)
        for loc in sorted(comp, key=order.get):
            ks = sorted(outdeg.get(loc, []))
            if len(ks) > 1:
                two = tuple(_loop_through(g, comp, k, m.rules, loc) for k in ks[:2])
                return Violation(loc, two)
        start = min(comp, key=order.get)
        loops.append(_loop_through(g, comp, outdeg[start][0], m.rules, start))
    return FlatOk(tuple(loops))


# ---------------------------------------------------------------- loop folding


@dataclass(frozen=True)
class FoldedRule:
    src: str
    dst: str
    relation: object
    provenance: tuple[int, ...]  # original rule indices, applied left to right


@dataclass
class FoldedMachine:
    """Control graph whose only cycles are self-loops (at most one per location)."""

    machine: Machine
    locations: list[str]
    init: str
    final: str
    rules: list[FoldedRule]
    loops: dict[str, FoldedRule]
    origin: dict[str, str]

    def incoming(self, loc: str) -> list[FoldedRule]:
        return [r for r in self.rules if r.dst == loc]

    def to_machine(self) -> Machine:
        """The folded control graph as an ordinary machine (loops become self-loop rules)."""
        rules = [Rule(r.src, r.dst, relation_atoms(r.relation)) for r in self.rules]
        rules += [Rule(loc, loc, relation_atoms(r.relation)) for loc, r in self.loops.items()]
        m = self.machine
        return Machine(m.vars, self.init, self.final, m.init_atoms, m.final_atoms, tuple(rules),
                       tuple(self.locations))


def _chain(m: Machine, rule_ids: Sequence[int]):
    rel = m.relation(rule_ids[0])
    for idx in rule_ids[1:]:
        rel = compose(rel, m.relation(idx))
    return rel


def fold_loops(m: Machine) -> FoldedMachine:
    """Replace every loop of length k > 1 by k self-loops along a 2k-location chain."""
    flat = check_flat(m)
    if not flat:
        raise ValueError(f"machine is not flat at location {flat.location!r}")
    n = m.n_vars
    locs = m.all_locations()
    origin = {loc: loc for loc in locs}
    rules: list[FoldedRule] = []
    loops: dict[str, FoldedRule] = {}
    loop_rules: set[int] = set()
    on_loop: dict[str, tuple[tuple[int, ...], int]] = {}
    for cyc in flat.loops:
        loop_rules.update(cyc)
        for pos, idx in enumerate(cyc):
            on_loop[m.rules[idx].src] = (cyc, pos)

    copies: dict[str, str] = {}
    taken = set(locs)
    for cyc in flat.loops:
        k = len(cyc)
        if k == 1:
            idx = cyc[0]
            loc = m.rules[idx].src
            loops[loc] = FoldedRule(loc, loc, m.relation(idx), (idx,))
            continue
        heads = [m.rules[idx].src for idx in cyc]
        for j, loc in enumerate(heads):
            rot = cyc[j:] + cyc[:j]
            loops[loc] = FoldedRule(loc, loc, _chain(m, rot), tuple(rot))
            name = loc + "_dup"
            while name in taken:
                name += "_dup"
            taken.add(name)
            copies[loc] = name
            origin[name] = loc
        # q_0 -> q_1 -> ... -> q_{k-1} -> q'_0 -> ... -> q'_{k-1}
        chain = heads + [copies[h] for h in heads]
        for pos in range(2 * k - 1):
            idx = cyc[pos % k]
            rules.append(FoldedRule(chain[pos], chain[pos + 1], m.relation(idx), (idx,)))

    for idx, r in enumerate(m.rules):
        if idx in loop_rules:
            continue
        rules.append(FoldedRule(r.src, r.dst, m.relation(idx), (idx,)))
        if r.src in copies:
            rules.append(FoldedRule(copies[r.src], r.dst, m.relation(idx), (idx,)))

    all_locs = locs + [copies[h] for h in copies]
    final = m.final
    if m.final in copies:
        sink = m.final + "_sink"
        while sink in taken:
            sink += "_sink"
        ident = DbRelation.identity(n)
        rules.append(FoldedRule(m.final, sink, ident, ()))
        rules.append(FoldedRule(copies[m.final], sink, ident, ()))
        all_locs.append(sink)
        origin[sink] = m.final
        final = sink
    return FoldedMachine(m, all_locs, m.init, final, rules, loops, origin)


# ---------------------------------------------------------------- summary


@dataclass
class Summary:
    """Per-location reachability relations as a DAG over folded rules and accelerated loops.

    ``order`` is a topological order of the locations reachable from the
    initial one and co-reachable to the final one.
    """

    folded: FoldedMachine
    order: list[str]
    incoming: dict[str, list[FoldedRule]]
    loops: dict[str, ClosedForm | CapExceeded]

    def paths(self, limit: int | None = None) -> list[list[FoldedRule]]:
        """Rule sequences from the initial to the final location."""
        out: list[list[FoldedRule]] = []
        target = self.folded.init

        def back(loc: str, suffix: list[FoldedRule]):
            if limit is not None and len(out) >= limit:
                return
            if loc == target:
                out.append(list(reversed(suffix)))
                return
            for r in self.incoming.get(loc, []):
                back(r.src, suffix + [r])

        if self.folded.final in self.order:
            back(self.folded.final, [])
        return out

    def describe(self) -> str:
        lines = []
        for loc in self.order:
            preds = [f"sigma[{r.src}] ; R{list(r.provenance)}" for r in self.incoming.get(loc, [])]
            head = "Id" if loc == self.folded.init else " | ".join(preds) or "false"
            loop = self.loops.get(loc)
            if loop is not None:
                tag = "?" if isinstance(loop, CapExceeded) else f"(b={loop.prefix}, c={loop.period})"
                head = f"({head}) ; L[{loc}]*{tag}"
            lines.append(f"sigma[{loc}] = {head}")
        return "\n".join(lines)


def summarize(f: FoldedMachine, caps: Caps = DEFAULT_CAPS) -> Summary:
    g = nx.DiGraph()
    g.add_nodes_from(f.locations)
    for r in f.rules:
        g.add_edge(r.src, r.dst)
    fwd = nx.descendants(g, f.init) | {f.init}
    bwd = nx.ancestors(g, f.final) | {f.final}
    live = fwd & bwd
    pos = {loc: i for i, loc in enumerate(f.locations)}
    order = [loc for loc in nx.lexicographical_topological_sort(g.subgraph(live), key=pos.get)]
    incoming = {loc: [r for r in f.rules if r.dst == loc and r.src in live] for loc in order}
    loops = {}
    for loc in order:
        if loc in f.loops:
            loops[loc] = closed_form(f.loops[loc].relation, caps)
    return Summary(f, order, incoming, loops)
