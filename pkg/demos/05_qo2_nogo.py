"""Why the quantum message must depend on the inputs: the offline trade-off.

An offline protocol would send input-independent states rho[x, y, r] and
later reveal only masked bits (x xor a, y xor b). The checkers make the
impossibility mechanism concrete: any candidate whose measurements are
deterministic-correct must use states in mutually orthogonal subspaces
(the orthogonality matrix), and orthogonal states let the server identify
(x, y) perfectly, unmasking the inputs. Correctness forces full leakage.
"""

import numpy as np

from securenand import (
    orthogonal_qo2_candidate,
    qo2_blindness_leakage,
    qo2_check_correctness,
    qo2_orthogonality_matrix,
    random_correct_qo2_candidate,
    uniform_qo2_candidate,
)

control = orthogonal_qo2_candidate()
ok, _ = qo2_check_correctness(control)
print(f"positive control: correct={ok}")
print("state overlap matrix (identity = orthogonal family):")
print(np.round(qo2_orthogonality_matrix(control), 3))
print(f"leakage of the masked bits: {qo2_blindness_leakage(control):.12f}\n")

rng = np.random.default_rng(7)
print("random correct candidates (pure and mixed families):")
for i in range(6):
    cand = random_correct_qo2_candidate(rng, mixed=i % 2 == 1)
    ok, _ = qo2_check_correctness(cand)
    leak = qo2_blindness_leakage(cand)
    print(f"  candidate {i}: correct={ok}, leakage={leak:.12f}")

hidden = uniform_qo2_candidate()
ok, violations = qo2_check_correctness(hidden)
print(
    f"\nthe flip side, identical states hide (x, y) perfectly: "
    f"leakage={qo2_blindness_leakage(hidden):.2f}, but correct={ok} "
    f"({len(violations)} of 32 outcome conditions violated)"
)
