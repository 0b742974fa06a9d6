"""Decide the worked machines with both backends and print their witnesses."""
import shutil

from flatreach.machine import fold_loops, summarize
from flatreach.reach import decide_reach, replay
from flatreach.suite import WORKED_COUNT_UP, WORKED_PARITY, WORKED_SWAP_SHIFT

backends = ["bounded"] + (["smt"] if shutil.which("z3") else [])
for case in (WORKED_COUNT_UP, WORKED_PARITY, WORKED_SWAP_SHIFT):
    m = case.machine()
    print(f"== {case.name} (expected {case.expected})")
    print(summarize(fold_loops(m)).describe())
    for backend in backends:
        res = decide_reach(m, backend=backend)
        print(f"  {backend}: {res.verdict}")
        if res.witness is not None:
            assert replay(m, res.witness)
            print(f"    loops {res.witness.loop_iters}, trace {res.witness.trace}")
