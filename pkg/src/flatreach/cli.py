"""Command-line frontend.

Exit status is 0 for a definite answer, 2 when the answer is Unknown or a
cap was hit, and 1 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .accel import CapExceeded, Caps, ClosedForm, closed_form, detect_period, fast_power, theoretical_bounds
from .dbm import INF, is_empty
from .machine import ParseError, format_relation, parse_machine, parse_relation

GRAMMAR = """\
machine file (line comments start with #):
  vars <id> (, <id>)* ;
  [locs <loc> (, <loc>)* ;]
  init <loc> ; final <loc> ;
  I: <octagonal conjunction> ; F: <octagonal conjunction> ;
  <loc> -> <loc> [ <conjunction over x and x'> ] ;
relation file:
  [vars <id> (, <id>)* ;] <conjunction over x and x'>
atoms: a1*v1 + a2*v2 (<= | < | = | >= | >) c, joined with &&; `true` is the empty conjunction
"""

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_caps(p: argparse.ArgumentParser):
    d = Caps()
    p.add_argument("--max-prefix", type=_positive, default=d.max_prefix)
    p.add_argument("--max-period", type=_positive, default=d.max_period)
    p.add_argument("--max-k", type=_positive, default=d.max_k)
    p.add_argument("--max-states", type=_positive, default=d.max_states)


def _caps(a) -> Caps:
    return Caps(max_prefix=a.max_prefix, max_period=a.max_period, max_k=a.max_k, max_states=a.max_states)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flatreach", description="Acceleration and reachability for flat counter machines.",
                epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("power", help="closed matrix of R^n")
    s.add_argument("-r", "--relation", required=True)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("accelerate", help="closed form of R^n for all n")
    s.add_argument("-r", "--relation", required=True)
    s.add_argument("--json", action="store_true")
    _add_caps(s)

    s = sub.add_parser("period", help="prefix, period and rates of R^n")
    s.add_argument("-r", "--relation", required=True)
    s.add_argument("--json", action="store_true")
    _add_caps(s)

    s = sub.add_parser("zigzag", help="zigzag table statistics and run weights")
    s.add_argument("-r", "--relation", required=True)
    s.add_argument("--pair", type=int, nargs=2, metavar=("I", "J"))
    s.add_argument("--flavor", choices=("of", "ob", "ef", "eb"), default="of")
    s.add_argument("--len", type=_positive, default=12, dest="length")
    s.add_argument("--json", action="store_true")
    _add_caps(s)

    s = sub.add_parser("reach", help="decide reachability of the final location")
    s.add_argument("machine")
    s.add_argument("--backend", choices=("bounded", "smt"), default="bounded")
    s.add_argument("--solver")
    s.add_argument("--smt-out")
    s.add_argument("--json", action="store_true")
    _add_caps(s)

    s = sub.add_parser("selftest", help="run the oracle corpora")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")
    return p


# ---------------------------------------------------------------- output helpers


def _cell(v) -> str:
    return "inf" if v >= INF else str(int(v))


def format_matrix(m: np.ndarray, labels: Sequence[str]) -> str:
    cells = [[""] + list(labels)] + [[labels[i]] + [_cell(v) for v in row] for i, row in enumerate(m)]
    width = max(len(c) for row in cells for c in row)
    return "\n".join(" ".join(c.rjust(width) for c in row) for row in cells)


def _labels(kind: str, names: Sequence[str]) -> list[str]:
    full = list(names) + [v + "'" for v in names]
    if kind == "DB":
        return full
    return [s + v for v in full for s in ("+", "-")]


def _json_matrix(m: np.ndarray) -> list[list[int | None]]:
    return [[None if v >= INF else int(v) for v in row] for row in m]


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _template_terms(kind: str, i: int, j: int) -> dict[int, int]:
    if kind == "DB":
        return {i: 1, j: -1}
    acc: dict[int, int] = {}
    acc[i // 2] = acc.get(i // 2, 0) + (1 if i % 2 == 0 else -1)
    acc[j // 2] = acc.get(j // 2, 0) - (1 if j % 2 == 0 else -1)
    return {v: c for v, c in acc.items() if c}


def _affine(a: int, b: int) -> str:
    if a == 0:
        return str(b)
    head = "k" if a == 1 else "-k" if a == -1 else f"{a}k"
    if b == 0:
        return head
    return f"{head} + {b}" if b > 0 else f"{head} - {-b}"


def format_template(cf: ClosedForm, j: int, names: Sequence[str]) -> str:
    """Atoms of the ``j``-th periodic template, with ``k`` the period count."""
    full = list(names) + [v + "'" for v in names]
    t = cf.templates[j]
    seen = set()
    out = []
    for r in range(t.dim):
        for c in range(t.dim):
            p = t.entries[r][c]
            if r == c or not p:
                continue
            if cf.kind == "OCT":
                key = min((r, c), (c ^ 1, r ^ 1))
                if key in seen:
                    continue
                seen.add(key)
            ((a, b),) = p
            terms = _template_terms(cf.kind, r, c)
            if all(v % 2 == 0 for v in terms.values()) and a % 2 == 0 and b % 2 == 0:
                terms = {v: x // 2 for v, x in terms.items()}
                a, b = a // 2, b // 2
            lhs = " + ".join((f"{x}*" if abs(x) != 1 else ("-" if x < 0 else "")) + full[v]
                             for v, x in sorted(terms.items())).replace("+ -", "- ")
            out.append(f"{lhs} <= {_affine(a, b)}")
    return " && ".join(out) if out else "true"


# ---------------------------------------------------------------- subcommands


def cmd_power(a, out) -> int:
    r, names = parse_relation(_read(a.relation))
    if a.n < 0:
        raise UsageError("-n must be nonnegative")
    p = fast_power(r, a.n)
    if is_empty(p):
        if a.json:
            print(json.dumps({"n": a.n, "consistent": False}), file=out)
        else:
            print(f"R^{a.n} is empty", file=out)
        return EXIT_OK
    m = p.canonical()
    if a.json:
        print(json.dumps({"n": a.n, "consistent": True, "class": p.kind, "matrix": _json_matrix(m),
                          "formula": format_relation(p, names)}), file=out)
    else:
        print(format_matrix(m, _labels(p.kind, names)), file=out)
        print(format_relation(p, names), file=out)
    return EXIT_OK


def cmd_accelerate(a, out) -> int:
    r, names = parse_relation(_read(a.relation))
    cf = closed_form(r, _caps(a))
    if isinstance(cf, CapExceeded):
        return _cap_report(cf, a, out)
    if a.json:
        print(json.dumps(cf.to_json()), file=out)
        return EXIT_OK
    print(f"class {cf.kind}, prefix b={cf.prefix}, period c={cf.period}, "
          f"{'star-consistent' if cf.star_consistent else 'not star-consistent'}", file=out)
    last = cf.prefix if cf.star_consistent else cf.prefix - 1
    for i in range(1, last + 1):
        print(f"R^{i}: {format_relation(cf.relation_from(cf.powers[i - 1]), names)}", file=out)
    if not cf.star_consistent:
        print(f"R^n is empty for n >= {cf.prefix}", file=out)
    for j in range(len(cf.templates)):
        print(f"R^({cf.prefix + j} + {cf.period}k), k >= 0: {format_template(cf, j, names)}", file=out)
    return EXIT_OK


def cmd_period(a, out) -> int:
    r, names = parse_relation(_read(a.relation))
    spec = detect_period(r, _caps(a))
    if isinstance(spec, CapExceeded):
        return _cap_report(spec, a, out)
    bounds = theoretical_bounds(r)
    if a.json:
        print(json.dumps({"prefix": spec.prefix, "period": spec.period, "star_consistent": spec.star_consistent,
                          "rates": [_json_matrix(m) for m in spec.rates],
                          "period_divides": bounds["period_divides"]}), file=out)
        return EXIT_OK
    print(f"b={spec.prefix} c={spec.period}", file=out)
    if not spec.star_consistent:
        print(f"not star-consistent: R^{spec.prefix} is empty", file=out)
    for i, m in enumerate(spec.rates):
        print(f"rate {i}:", file=out)
        print(format_matrix(m, _labels(r.kind, names)), file=out)
    print(f"period divides {bounds['period_divides']}", file=out)
    return EXIT_OK


def cmd_zigzag(a, out) -> int:
    from .dbm import DbRelation
    from .zigzag import build_table, scc_cyclicity

    r, names = parse_relation(_read(a.relation))
    if not isinstance(r, DbRelation):
        raise UsageError("zigzag tables are defined for difference-bounds relations only")
    t = build_table(r, a.max_states)
    if isinstance(t, CapExceeded):
        return _cap_report(t, a, out)
    if a.pair:
        n = r.n_vars
        if not all(1 <= v <= n for v in a.pair):
            raise UsageError(f"counter indices must lie in 1..{n}")
        # with a pair, cycle analytics cover only the live part of that automaton
        rep = scc_cyclicity(t, a.flavor, a.pair[0] - 1, a.pair[1] - 1)
    else:
        rep = scc_cyclicity(t)
    comps = [{"size": len(c.nodes), "min_mean": None if c.min_mean is None else str(c.min_mean),
              "cyclicity": c.cyclicity} for c in rep.components if c.min_mean is not None]
    data = {"states": t.n_states, "edges": int(len(t.src)), "cyclic_components": comps,
            "period_bound": rep.period_bound}
    if a.pair:
        i, j = a.pair
        ws = t.run_weights(a.flavor, i - 1, j - 1, a.length)
        data["runs"] = {"flavor": a.flavor, "pair": [i, j], "weights": [None if w >= INF else w for w in ws]}
    if a.json:
        print(json.dumps(data), file=out)
        return EXIT_OK
    print(f"states {data['states']}, edges {data['edges']}, period bound {rep.period_bound}", file=out)
    for c in comps:
        print(f"  component of {c['size']} states: min cycle mean {c['min_mean']}, cyclicity {c['cyclicity']}",
              file=out)
    if a.pair:
        runs = data["runs"]
        for m, w in enumerate(runs["weights"], start=1):
            print(f"{a.flavor}({i},{j}) length {m}: {'none' if w is None else w}", file=out)
    return EXIT_OK


def cmd_reach(a, out) -> int:
    from .reach import UNKNOWN, decide_reach

    m = parse_machine(_read(a.machine))
    res = decide_reach(m, a.backend, _caps(a), solver=a.solver, smt_out=a.smt_out)
    if a.json:
        print(res.dumps(), file=out)
    else:
        print(res.verdict, file=out)
        if res.witness is not None:
            w = res.witness
            print("path: " + " -> ".join(w.path), file=out)
            if w.loop_iters:
                print("loop iterations: " + ", ".join(f"{k}={v}" for k, v in sorted(w.loop_iters.items())),
                      file=out)
            print("trace: " + " ".join("(" + ",".join(map(str, v)) + ")" for v in w.trace), file=out)
        if "reason" in res.diagnostics:
            print("reason: " + str(res.diagnostics["reason"]), file=out)
    return EXIT_UNKNOWN if res.verdict == UNKNOWN else EXIT_OK


def cmd_selftest(a, out) -> int:
    from .selftest import run_selftest

    results = run_selftest(a.seed)
    if a.json:
        print(json.dumps([{"check": n, "passed": ok, "cases": c} for n, ok, c in results]), file=out)
    else:
        for name, ok, count in results:
            print(f"{'pass' if ok else 'FAIL'} {name} ({count} cases)", file=out)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_ERROR


def _cap_report(cap: CapExceeded, a, out) -> int:
    if a.json:
        print(json.dumps({"cap_exceeded": {"horizon": cap.horizon, "reason": cap.reason}}), file=out)
    else:
        print(f"cap exceeded at horizon {cap.horizon}: {cap.reason}", file=out)
    return EXIT_UNKNOWN


COMMANDS = {"power": cmd_power, "accelerate": cmd_accelerate, "period": cmd_period, "zigzag": cmd_zigzag,
            "reach": cmd_reach, "selftest": cmd_selftest}


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    want_json = "--json" in argv
    try:
        a = build_parser().parse_args(list(argv))
        return COMMANDS[a.command](a, out)
    except UsageError as e:
        return _fail("usage", str(e), want_json, out, err, grammar=True)
    except ParseError as e:
        return _fail("parse", str(e), want_json, out, err)
    except OSError as e:
        return _fail("io", str(e), want_json, out, err)
    except (ValueError, OverflowError) as e:
        return _fail("input", str(e), want_json, out, err)


def _fail(code: str, message: str, want_json: bool, out, err, grammar: bool = False) -> int:
    if want_json:
        print(json.dumps({"error": {"code": code, "message": message}}), file=out)
    else:
        print(f"flatreach: {message}", file=err)
        if grammar:
            print("usage: flatreach {power,accelerate,period,zigzag,reach,selftest} ...", file=err)
            print(GRAMMAR, file=err, end="")
    return EXIT_ERROR


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
