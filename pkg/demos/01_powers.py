"""Closed matrices of the first few powers of a two-counter difference relation."""
from pathlib import Path

from flatreach.accel import fast_power, naive_power
from flatreach.cli import format_matrix
from flatreach.machine import format_relation, parse_relation

r, names = parse_relation((Path(__file__).parent / "data" / "two_counter.rel").read_text())
labels = list(names) + [v + "'" for v in names]

for n in (1, 2, 3, 8):
    p = fast_power(r, n)
    assert p == naive_power(r, n)
    print(f"R^{n}: {format_relation(p, names)}")
    print(format_matrix(p.canonical(), labels))
    print()
