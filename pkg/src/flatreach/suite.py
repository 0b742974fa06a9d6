"""A fixed suite of small flat machines with known reachability.

Every unreachable case comes with an inductive invariant so the verdict can
be certified by brute force; every reachable case has a run whose counters
stay in ``[-15, 15]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .machine import Machine, parse_machine

Invariant = Callable[[str, tuple[int, ...]], bool]


@dataclass(frozen=True)
class SuiteCase:
    name: str
    text: str
    expected: str
    invariant: Invariant | None = None

    def machine(self) -> Machine:
        return parse_machine(self.text)


def _step(s: int, t: int) -> SuiteCase:
    text = f"""# counter stepping by {s}
vars x;
init a; final b;
I: x = 0; F: x = {t};
a -> a [x' = x + {s}];
a -> b [x' = x];
"""
    if t >= 0 and t % s == 0:
        return SuiteCase(f"step{s}_to_{t}", text, "Reachable")
    return SuiteCase(f"step{s}_to_{t}", text, "Unreachable",
                     lambda loc, v, s=s: v[0] >= 0 and v[0] % s == 0)


def _countdown(t: int) -> SuiteCase:
    text = f"""vars x;
init a; final b;
I: x = 5; F: x = {t};
a -> a [x >= 1 && x' = x - 1];
a -> b [x' = x];
"""
    if 0 <= t <= 5:
        return SuiteCase(f"countdown_to_{t}", text, "Reachable")
    return SuiteCase(f"countdown_to_{t}", text, "Unreachable", lambda loc, v: 0 <= v[0] <= 5)


def _lockstep(tx: int, ty: int) -> SuiteCase:
    text = f"""vars x, y;
init a; final b;
I: x = 0 && y = 0; F: x = {tx} && y = {ty};
a -> a [x' = x + 1 && y' = y + 1];
a -> b [x' = x && y' = y];
"""
    if tx == ty and tx >= 0:
        return SuiteCase(f"lockstep_{tx}_{ty}", text, "Reachable")
    return SuiteCase(f"lockstep_{tx}_{ty}", text, "Unreachable", lambda loc, v: v[0] == v[1] >= 0)


def _swap_shift(tx: int, ty: int) -> SuiteCase:
    text = f"""# x' = y + 1, y' = x: (0,0) (1,0) (1,1) (2,1) ...
vars x, y;
init a; final a;
I: x = 0 && y = 0; F: x = {tx} && y = {ty};
a -> a [x' = y + 1 && y' = x];
"""
    if ty >= 0 and tx - ty in (0, 1):
        return SuiteCase(f"swap_shift_{tx}_{ty}", text, "Reachable")
    return SuiteCase(f"swap_shift_{tx}_{ty}", text, "Unreachable",
                     lambda loc, v: v[1] >= 0 and v[0] - v[1] in (0, 1))


def _guarded(t: int) -> SuiteCase:
    text = f"""vars x;
init a; final b;
I: x = 0; F: x = {t};
a -> a [x <= 4 && x' = x + 1];
a -> b [x' = x];
"""
    if 0 <= t <= 5:
        return SuiteCase(f"guarded_to_{t}", text, "Reachable")
    return SuiteCase(f"guarded_to_{t}", text, "Unreachable", lambda loc, v: 0 <= v[0] <= 5)


def _two_cycle(tx: int, ty: int) -> SuiteCase:
    # at q: x = 2y + 1 with y >= 0; at p: x = 2y
    text = f"""vars x, y;
init p; final r;
I: x = 0 && y = 0; F: x = {tx} && y = {ty};
p -> q [x' = x + 1 && y' = y];
q -> p [x' = x + 1 && y' = y + 1];
q -> r [x' = x && y' = y];
"""
    if ty >= 0 and tx == 2 * ty + 1:
        return SuiteCase(f"two_cycle_{tx}_{ty}", text, "Reachable")

    def inv(loc, v):
        return v[1] >= 0 and v[0] == 2 * v[1] + (0 if loc == "p" else 1)

    return SuiteCase(f"two_cycle_{tx}_{ty}", text, "Unreachable", inv)


def _three_cycle(t: int) -> SuiteCase:
    text = f"""vars x;
init q0; final out;
I: x = 0; F: x = {t};
q0 -> q1 [x' = x + 1];
q1 -> q2 [x' = x + 1];
q2 -> q0 [x' = x + 1];
q2 -> out [x' = x];
"""
    if t >= 2 and t % 3 == 2:
        return SuiteCase(f"three_cycle_to_{t}", text, "Reachable")
    phase = {"q0": 0, "q1": 1, "q2": 2, "out": 2}
    return SuiteCase(f"three_cycle_to_{t}", text, "Unreachable",
                     lambda loc, v: v[0] >= 0 and v[0] % 3 == phase[loc])


def _negate(start: int, t: int) -> SuiteCase:
    text = f"""vars x;
init a; final b;
I: x = {start}; F: x = {t};
a -> a [x' = -x];
a -> b [x' = x];
"""
    if abs(t) == abs(start):
        return SuiteCase(f"negate_{start}_to_{t}", text, "Reachable")
    return SuiteCase(f"negate_{start}_to_{t}", text, "Unreachable", lambda loc, v: abs(v[0]) == abs(start))


def _rotate(tx: int, ty: int) -> SuiteCase:
    # quarter turn: (1,2) (2,-1) (-1,-2) (-2,1)
    text = f"""vars x, y;
init a; final b;
I: x = 1 && y = 2; F: x = {tx} && y = {ty};
a -> a [x' = y && y' = -x];
a -> b [x' = x && y' = y];
"""
    orbit = {(1, 2), (2, -1), (-1, -2), (-2, 1)}
    if (tx, ty) in orbit:
        return SuiteCase(f"rotate_to_{tx}_{ty}", text, "Reachable")
    return SuiteCase(f"rotate_to_{tx}_{ty}", text, "Unreachable", lambda loc, v: tuple(v) in orbit)


def _saturating(t: int) -> SuiteCase:
    # x >= 0 and x' <= 3 empties the loop after three iterations
    text = f"""vars x;
init a; final b;
I: x = 0; F: x = {t};
a -> a [x >= 0 && x' = x + 1 && x' <= 3];
a -> b [x' = x];
"""
    if 0 <= t <= 3:
        return SuiteCase(f"saturating_to_{t}", text, "Reachable")
    return SuiteCase(f"saturating_to_{t}", text, "Unreachable", lambda loc, v: 0 <= v[0] <= 3)


def _chase(tx: int) -> SuiteCase:
    # difference-bounds loop that dies once x catches up with y
    text = f"""vars x, y;
init a; final b;
I: x = 2 && y = 3; F: x = {tx};
a -> a [x' = x + 1 && y' = y && x' - y <= 0 && y - x <= 1];
a -> b [x' = x && y' = y];
"""
    if tx in (2, 3):
        return SuiteCase(f"chase_to_{tx}", text, "Reachable")
    return SuiteCase(f"chase_to_{tx}", text, "Unreachable", lambda loc, v: v[1] == 3 and 2 <= v[0] <= 3)


def _shift_register(tx: int, ty: int, tz: int) -> SuiteCase:
    text = f"""vars x, y, z;
init a; final b;
I: x = 0 && y = 0 && z = 0; F: x = {tx} && y = {ty} && z = {tz};
a -> a [x' = x + 1 && y' = x && z' = y];
a -> b [x' = x && y' = y && z' = z];
"""
    def inv(loc, v):
        x, y, z = v
        return (x, y, z) in ((0, 0, 0), (1, 0, 0)) or (x >= 2 and y == x - 1 and z == x - 2)

    reach = inv("b", (tx, ty, tz))
    return SuiteCase(f"shift_register_{tx}_{ty}_{tz}", text, "Reachable" if reach else "Unreachable",
                     None if reach else inv)


def _branches(t: int) -> SuiteCase:
    # two branches into a shared loop: x in {1, 2} then steps of 3
    text = f"""vars x;
init a; final d;
I: x = 0; F: x = {t};
a -> b [x' = x + 1];
a -> c [x' = x + 2];
b -> m [x' = x];
c -> m [x' = x];
m -> m [x' = x + 3];
m -> d [x' = x];
"""
    if t >= 1 and t % 3 in (1, 2):
        return SuiteCase(f"branches_to_{t}", text, "Reachable")

    def inv(loc, v):
        x = v[0]
        if loc == "a":
            return x == 0
        if loc == "b":
            return x == 1
        if loc == "c":
            return x == 2
        return x >= 1 and x % 3 in (1, 2)

    return SuiteCase(f"branches_to_{t}", text, "Unreachable", inv)


def _sequential(tx: int, ty: int) -> SuiteCase:
    # two parametric loops in sequence; only used for reachable targets
    text = f"""vars x, y;
init a; final c;
I: x = 0 && y = 0; F: x = {tx} && y = {ty};
a -> a [x' = x + 1 && y' = y];
a -> b [x' = x && y' = y];
b -> b [x' = x && y' = y + 3];
b -> c [x' = x && y' = y];
"""
    return SuiteCase(f"sequential_{tx}_{ty}", text, "Reachable")


def _transfer(t: int) -> SuiteCase:
    # octagonal sum transfer: x + y stays 5
    text = f"""vars x, y;
init a; final b;
I: x = 5 && y = 0; F: y = {t};
a -> a [x >= 1 && x' = x - 1 && y' = y + 1 && x' + y' <= 5 && -x' - y' <= -5];
a -> b [x' = x && y' = y];
"""
    if 0 <= t <= 5:
        return SuiteCase(f"transfer_to_{t}", text, "Reachable")
    return SuiteCase(f"transfer_to_{t}", text, "Unreachable", lambda loc, v: v[0] + v[1] == 5 and 0 <= v[0] <= 5)


WORKED_COUNT_UP = SuiteCase("worked_count_up", """vars x;
init a; final a;
I: x = 0; F: x >= 5;
a -> a [x' = x + 1];
""", "Reachable")

WORKED_PARITY = SuiteCase("worked_parity", """vars x;
init a; final a;
I: x = 0; F: x = 7;
a -> a [x' = x + 2];
""", "Unreachable", lambda loc, v: v[0] >= 0 and v[0] % 2 == 0)

WORKED_SWAP_SHIFT = SuiteCase("worked_swap_shift", _swap_shift(3, 3).text, "Reachable")


def machine_suite() -> list[SuiteCase]:
    cases = [
        WORKED_COUNT_UP, WORKED_PARITY, WORKED_SWAP_SHIFT,
        _step(2, 4), _step(3, 3), _step(3, 5),
        _countdown(0), _countdown(-1),
        _lockstep(5, 5), _lockstep(5, 4),
        _swap_shift(4, 3), _swap_shift(4, 2),
        _guarded(5), _guarded(-1),
        _two_cycle(5, 2), _two_cycle(4, 2),
        _three_cycle(5), _three_cycle(3),
        _negate(5, -5), _negate(5, 4),
        _rotate(-1, -2), _rotate(2, 1),
        _saturating(3), _saturating(4),
        _chase(3), _chase(4),
        _shift_register(4, 3, 2), _shift_register(4, 3, 3),
        _branches(5), _branches(3),
        _sequential(4, 3), _sequential(2, 0),
        _transfer(4), _transfer(-1),
    ]
    names = [c.name for c in cases]
    assert len(set(names)) == len(names)
    return cases
