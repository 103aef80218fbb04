"""Run every protocol variant on every input and watch NAND come out.

Each run draws fresh pad bits, executes the variant's full message flow
against an honest server, and decodes with XORs only. The printed table
shows the decoded output always equals NAND(a, b), independent of the pads.
"""

from itertools import product

from securenand import VARIANTS, run_protocol

for name in sorted(VARIANTS):
    print(f"== {name} ==")
    for a, b in product((0, 1), repeat=2):
        t = run_protocol(name, a, b, seed=10 * a + b)
        pads = ",".join(map(str, t.secrets.r_bits)) or "-"
        bits = ",".join(map(str, t.server_bits))
        print(f"  a={a} b={b}  pads={pads:<6} measured={bits:<6} out={t.out}  (NAND={1 ^ (a & b)})")
    shape = " -> ".join(f"{m.direction} [{m.kind}]" for m in t.messages)
    print(f"  flow: {shape}\n")
