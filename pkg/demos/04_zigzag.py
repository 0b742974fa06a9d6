"""Zigzag table of the swap-shift relation and the cyclicity of its live cycles."""
from flatreach.accel import fast_power
from flatreach.corpus import swap_shift_relation
from flatreach.zigzag import build_table, entry_flavor, min_weight, scc_cyclicity

r = swap_shift_relation()
t = build_table(r)
print(f"{t.n_states} states, {len(t.src)} edges")

rep = scc_cyclicity(t)
for c in rep.components:
    if c.min_mean is not None:
        print(f"component of {len(c.nodes)} states: min mean {c.min_mean}, cyclicity {c.cyclicity}")
print("period bound", rep.period_bound)

# x - y' reads from odd-length runs; check a few against squaring
row, col = 0, 3
flavor, i, j = entry_flavor(r.n_vars, row, col)
for m in (1, 3, 5, 7, 9):
    w = min_weight(t, flavor, i, j, m)
    assert w == fast_power(r, m).closed()[row, col]
    print(f"{flavor}({i + 1},{j + 1}) length {m}: {w}")
