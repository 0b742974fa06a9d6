"""An octagonal loop body that flips a sign: x' = -x + 2 while y drifts by at most 3 per step."""
import itertools

from flatreach.accel import closed_form
from flatreach.machine import format_relation, parse_relation
from flatreach.octagon import oct_compose

r, names = parse_relation("vars x, y;\nx' = -x + 2 && y' - y <= 3 && y - y' <= 3\n")
cf = closed_form(r)
print(f"class {cf.kind}, prefix {cf.prefix}, period {cf.period}")
for j in range(cf.period):
    print(f"  R^({cf.prefix + j} + {cf.period}k): rate entries",
          sorted({int(v) for v in cf.rates[j].ravel() if abs(v) < 1000}))

step = r
for n in range(2, 9):
    step = oct_compose(step, r)
    assert step == cf.instantiate(n)
    print(f"R^{n}: {format_relation(step, names)}")

# spot check one power semantically on a small box
r4 = cf.instantiate(4)
for x, y, y2 in itertools.product(range(-3, 4), range(-3, 4), range(-15, 16)):
    assert r4.holds([x, y], [x, y2]) == (abs(y2 - y) <= 12)
print("R^4 keeps x and moves y by at most 12")
