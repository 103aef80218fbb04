"""Exhaustive proof-at-the-bounds: XOR-only clients cannot do this classically.

Every two-round classical protocol in which the client computes only affine
GF(2) maps is enumerated up to the size bounds: every encoder, every server
truth table, every decoder. A candidate would need to be simultaneously
blind (message distribution independent of the inputs) and correct
(deterministically NAND). None exists, at any of the swept bounds.
"""

from securenand import candidate_space_size, search_classical_nogo

for bounds in ((0, 2, 1), (1, 1, 1), (1, 2, 1), (2, 2, 1)):
    result = search_classical_nogo(*bounds)
    assert result.candidates_checked == candidate_space_size(*bounds)
    print(
        f"bounds random<={bounds[0]} msg<={bounds[1]} reply<={bounds[2]}: "
        f"{result.candidates_checked:>9} candidates in {result.elapsed_s:6.2f}s "
        f"-> witness: {result.witness or 'none'}"
    )

print("\nfor contrast, drop either requirement and candidates appear:")
from securenand import AffineMap, ClassicalProtocolCandidate, classical_blindness_holds, classical_correctness_holds

cleartext = ClassicalProtocolCandidate(
    0,
    AffineMap(2, 2, ((1, 0), (0, 1)), (0, 0)),      # message = (a, b) in the clear
    ((0,), (0,), (0,), (1,)),                        # server replies ab
    AffineMap(3, 1, ((0, 0, 1),), (1,)),             # out = 1 xor reply
)
print(f"  cleartext protocol: correct={classical_correctness_holds(cleartext)}, "
      f"blind={classical_blindness_holds(cleartext)}")
