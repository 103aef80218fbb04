"""How much can a server learn? Exact guessing probabilities.

For a uniformly random input pair the server's best guess from his entire
post-protocol view is computed exactly: 1/4 means he learned nothing. An
entangling attack (keep an ancilla entangled with the sent state) still
gets 1/4. Break the one-time pad, though, and a tuned probe state reads
the inputs back out with probability (3 + 2*sqrt(2))/8 = 0.7286.
"""

import numpy as np

from securenand import (
    HONEST,
    VARIANTS,
    entangling_strategy,
    leakage_under_strategy,
    pad_probe_strategy,
    random_malicious_strategy,
)

print("honest server, every variant:")
for name in sorted(VARIANTS):
    rep = leakage_under_strategy(name, HONEST)
    print(f"  {name:10s} guessing probability = {rep.guessing_probability:.12f}")

print("\nentangling attacks on the bounce variants:")
for name in ("sq-bounce", "ghz-bounce"):
    rep = leakage_under_strategy(name, entangling_strategy(name))
    print(f"  {name:10s} guessing probability = {rep.guessing_probability:.12f}")

print("\na random prepare-and-measure strategy (seeded):")
strategy = random_malicious_strategy("ghz-bounce", np.random.default_rng(42), kept_qubits=1)
rep = leakage_under_strategy("ghz-bounce", strategy)
print(f"  ghz-bounce guessing probability = {rep.guessing_probability:.12f}")

print("\nbroken pad (wires 1, 2 unpadded) + tuned probe:")
rep = leakage_under_strategy("ghz-bounce", pad_probe_strategy(), disabled_pads=(1, 2))
print(f"  guessing probability = {rep.guessing_probability:.12f}")
print(f"  analytic value       = {(3 + 2 * np.sqrt(2)) / 8:.12f}")
print("  pairwise Helstrom bounds:")
print(np.round(rep.helstrom_pairwise, 4))
