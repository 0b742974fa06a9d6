"""QF_LIA encoding of flat-machine reachability and an external solver driver.

Per control path of the folded machine there is one integer constant per
counter and cut point (``p{path}_c{cut}_{var}``) and one nonnegative integer
per accelerated loop (``p{path}_k{cut}``).  Loops contribute the disjunction
of their closed form: identity, prefix powers, and templates linear in the
loop parameter.
"""

from __future__ import annotations

import os
import re
import subprocess
import tempfile
from dataclasses import dataclass

from .accel import DEFAULT_CAPS, CapExceeded, Caps, fast_power
from .dbm import INF, DbRelation, is_empty
from .machine import LinAtom, Machine, fold_loops, summarize

DEFAULT_SOLVER = "z3"
DEFAULT_TIMEOUT = 60.0


def _num(c: int) -> str:
    return str(c) if c >= 0 else f"(- {-c})"


def _linear(terms: list[tuple[int, str]]) -> str:
    parts = []
    for coef, name in terms:
        if coef == 0:
            continue
        parts.append(name if coef == 1 else f"(* {_num(coef)} {name})")
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def _le(terms: list[tuple[int, str]], rhs: str) -> str:
    return f"(<= {_linear(terms)} {rhs})"


def _conj(parts: list[str]) -> str:
    if not parts:
        return "true"
    return parts[0] if len(parts) == 1 else "(and " + " ".join(parts) + ")"


def _disj(parts: list[str]) -> str:
    if not parts:
        return "false"
    return parts[0] if len(parts) == 1 else "(or " + " ".join(parts) + ")"


def _entry_terms(kind: str, i: int, j: int) -> list[tuple[int, int]]:
    """Entry ``(i, j)`` as ``(coef, var)`` over unprimed ``0..N-1`` and primed ``N..2N-1``."""
    if kind == "DB":
        return [(1, i), (-1, j)]
    # y_i - y_j with y_{2v} = x_v and y_{2v+1} = -x_v
    acc: dict[int, int] = {}
    acc[i // 2] = acc.get(i // 2, 0) + (1 if i % 2 == 0 else -1)
    acc[j // 2] = acc.get(j // 2, 0) - (1 if j % 2 == 0 else -1)
    return [(c, v) for v, c in sorted(acc.items()) if c]


def _relation_rows(kind: str, matrix) -> list[tuple[list[tuple[int, int]], int, int]]:
    """``(terms, slope, offset)`` for each finite off-diagonal entry."""
    size = matrix.shape[0]
    return [(_entry_terms(kind, i, j), 0, int(matrix[i, j]))
            for i in range(size) for j in range(size) if i != j and matrix[i, j] < INF]


def _atoms_text(rows, pre: list[str], post: list[str], k: str | None = None) -> list[str]:
    names = pre + post
    out = []
    seen = set()
    for terms, a, b in rows:
        if not terms:
            if b < 0:
                out.append("false")
            continue
        lhs = [(c, names[v]) for c, v in terms]
        if a != 0:
            lhs.append((-a, k))
        txt = _le(lhs, _num(b))
        if txt not in seen:
            seen.add(txt)
            out.append(txt)
    return out


def _relation_text(r, pre: list[str], post: list[str]) -> str:
    if is_empty(r):
        return "false"
    kind = "DB" if isinstance(r, DbRelation) else "OCT"
    return _conj(_atoms_text(_relation_rows(kind, r.matrix), pre, post))


def _matrix_text(kind: str, m, pre, post) -> str:
    return _conj(_atoms_text(_relation_rows(kind, m), pre, post))


def _lin_atom_text(a: LinAtom, names: list[str]) -> str:
    return _le([(c, names[v]) for v, c in sorted(a.terms)], _num(a.bound))


@dataclass
class Encoding:
    """SMT text plus enough structure to decode a model back into a witness."""

    text: str
    paths: list            # per path: list of steps
    capped: list[str]
    m: Machine
    folded: object
    summary: object


def _cut(p: int, s: int, vars_: tuple[str, ...]) -> list[str]:
    return [f"p{p}_c{s}_{v}" for v in vars_]


def _loop_text(cf, probe_rel, pre, post, k: str, probe: int) -> tuple[str, bool]:
    """Disjunction for ``L^*``; the flag says whether ``k`` is used."""
    same = _conj([f"(= {a} {b})" for a, b in zip(pre, post)])
    parts = [same]
    uses_k = False
    if isinstance(cf, CapExceeded):
        for i in range(1, probe + 1):
            parts.append(_relation_text(fast_power(probe_rel, i), pre, post))
        return _disj(parts), False
    for tag, val in cf.disjuncts():
        if tag == "power":
            parts.append(_matrix_text(cf.kind, cf.powers[val - 1], pre, post))
        elif tag == "template":
            uses_k = True
            t = cf.templates[val]
            rows = [(_entry_terms(cf.kind, i, j), *t.entries[i][j][0])
                    for i in range(t.dim) for j in range(t.dim) if i != j and t.entries[i][j]]
            parts.append(_conj(_atoms_text(rows, pre, post, k)))
    return _disj(parts), uses_k


def encode(m: Machine, caps: Caps = DEFAULT_CAPS) -> Encoding:
    from .reach import _steps

    f = fold_loops(m)
    summary = summarize(f, caps)
    probe = min(caps.max_k, 32)
    decls: list[str] = []
    disjuncts: list[str] = []
    all_steps = []
    for p, path in enumerate(summary.paths()):
        steps = _steps(summary, path)
        all_steps.append(steps)
        cuts = [_cut(p, s, m.vars) for s in range(len(steps) + 1)]
        for c in cuts:
            decls += [f"(declare-const {name} Int)" for name in c]
        parts = [_lin_atom_text(a, cuts[0]) for a in m.init_atoms]
        parts += [_lin_atom_text(a, cuts[-1]) for a in m.final_atoms]
        for s, st in enumerate(steps):
            pre, post = cuts[s], cuts[s + 1]
            if st.rule is not None:
                parts.append(_relation_text(st.rule.relation, pre, post))
            else:
                k = f"p{p}_k{s + 1}"
                txt, uses_k = _loop_text(summary.loops[st.loc], f.loops[st.loc].relation, pre, post, k, probe)
                if uses_k:
                    decls.append(f"(declare-const {k} Int)")
                    parts.append(f"(>= {k} 0)")
                parts.append(txt)
        disjuncts.append(_conj(parts))
    lines = ["(set-logic QF_LIA)"] + decls + [f"(assert {_disj(disjuncts)})", "(check-sat)", "(get-model)", ""]
    capped = sorted(loc for loc, cf in summary.loops.items() if isinstance(cf, CapExceeded))
    return Encoding("\n".join(lines), all_steps, capped, m, f, summary)


def emit_smt(m: Machine, caps: Caps = DEFAULT_CAPS) -> str:
    return encode(m, caps).text


_MODEL = re.compile(r"\(define-fun\s+(\S+)\s+\(\)\s+Int\s+(\(-\s*\d+\)|-?\d+)\s*\)")


def parse_model(text: str) -> dict[str, int]:
    out = {}
    for name, val in _MODEL.findall(text):
        val = val.strip()
        if val.startswith("("):
            out[name] = -int(val[1:-1].replace("-", "").strip())
        else:
            out[name] = int(val)
    return out


def run_solver(text: str, solver: str | None = None, timeout: float = DEFAULT_TIMEOUT,
               path: str | None = None) -> tuple[str, dict[str, int], str]:
    """``(status, model, detail)`` where status is ``sat``, ``unsat`` or ``unknown``."""
    solver = solver or os.environ.get("FLATREACH_SOLVER") or DEFAULT_SOLVER
    tmp = None
    if path is None:
        tmp = tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False)
        tmp.write(text)
        tmp.close()
        path = tmp.name
    try:
        try:
            proc = subprocess.run([solver, path], capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            return "unknown", {}, f"solver unavailable: {solver}"
        except subprocess.TimeoutExpired:
            return "unknown", {}, "solver timeout"
    finally:
        if tmp is not None:
            os.unlink(tmp.name)
    out = proc.stdout.strip()
    first = out.split("\n", 1)[0].strip() if out else ""
    if first == "sat":
        return "sat", parse_model(out), ""
    if first == "unsat":
        return "unsat", {}, ""
    return "unknown", {}, (first or proc.stderr.strip() or "no solver output")


def _decode(enc: Encoding, model: dict[str, int]):
    """Path index, selection, loop parameters and cut valuations satisfied by the model."""
    from .reach import Choice

    m = enc.m
    for p, steps in enumerate(enc.paths):
        cuts = [[model.get(name, 0) for name in _cut(p, s, m.vars)] for s in range(len(steps) + 1)]
        if not (m.in_init(cuts[0]) and m.in_final(cuts[-1])):
            continue
        sel, ks, ok = [], {}, True
        for s, st in enumerate(steps):
            a, b = cuts[s], cuts[s + 1]
            if st.rule is not None:
                ok = st.rule.relation.holds(a, b)
                sel.append(Choice("id"))
            else:
                choice = _loop_choice(enc, st, a, b, model.get(f"p{p}_k{s + 1}"))
                ok = choice is not None
                if ok:
                    sel.append(choice[0])
                    if choice[1] is not None:
                        ks[s] = choice[1]
            if not ok:
                break
        if ok:
            return steps, sel, ks, cuts
    return None


def _loop_choice(enc: Encoding, st, a, b, k):
    from .reach import Choice

    cf = enc.summary.loops[st.loc]
    if a == b:
        return Choice("id"), None
    if isinstance(cf, CapExceeded):
        rel = enc.folded.loops[st.loc].relation
        for i in range(1, 33):
            r = fast_power(rel, i)
            if not is_empty(r) and r.holds(a, b):
                return Choice("power", i), None
        return None
    for tag, val in cf.disjuncts():
        if tag == "power" and cf.relation_from(cf.powers[val - 1]).holds(a, b):
            return Choice("power", val), None
        if tag == "template" and k is not None and k >= 0:
            r = cf.instantiate(cf.prefix + val + k * cf.period)
            if not is_empty(r) and r.holds(a, b):
                return Choice("template", val), k
    return None


def smt_reach(m: Machine, caps: Caps = DEFAULT_CAPS, solver: str | None = None,
              smt_out: str | None = None, timeout: float = DEFAULT_TIMEOUT):
    from .reach import REACHABLE, UNKNOWN, UNREACHABLE, ReachResult, _Ctx, build_witness, replay

    enc = encode(m, caps)
    diag = {"backend": "smt", "caps": caps.as_dict(), "paths": len(enc.paths), "capped_loops": enc.capped}
    if smt_out:
        with open(smt_out, "w") as fh:
            fh.write(enc.text)
    status, model, detail = run_solver(enc.text, solver, timeout, path=smt_out)
    diag["solver_status"] = status
    if status == "unsat":
        if enc.capped:
            diag["reason"] = "loops beyond caps were only unrolled"
            return ReachResult(UNKNOWN, None, diag)
        return ReachResult(UNREACHABLE, None, diag)
    if status != "sat":
        diag["reason"] = detail
        return ReachResult(UNKNOWN, None, diag)
    dec = _decode(enc, model)
    if dec is None:
        diag["reason"] = "model does not match any encoded path"
        return ReachResult(UNKNOWN, None, diag)
    steps, sel, ks, cuts = dec
    ctx = _Ctx(m, enc.folded, enc.summary)
    w = build_witness(ctx, steps, sel, ks, None, None, cuts=cuts)
    if not replay(m, w):
        diag["reason"] = "model witness failed to replay"
        return ReachResult(UNKNOWN, None, diag)
    return ReachResult(REACHABLE, w, diag)
