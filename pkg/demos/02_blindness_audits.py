"""Blindness audits, positive and negative.

The emission audit averages everything the client sends over her pad bits
and compares across the four inputs. The channel audit compares the Choi
matrices of her averaged transformation, which covers every state a
malicious server could send, entangled ancillas included.

The negative control disables pad bits: the audits must then fail, which
shows they are not vacuous. Notice the subtlety on ghz-bounce: with only
wire 0 padded the emission for the honest resource still looks fixed, but
the channel audit catches the leak that a malicious input state exposes.
"""

import numpy as np

from securenand import (
    VARIANTS,
    audit_blindness_channel,
    audit_blindness_emission,
    averaged_client_emission,
)

print("averaged emission of ghz-prep (independent of a, b):")
print(np.round(averaged_client_emission("ghz-prep", 1, 1).matrix.real, 3), "\n")

for name in sorted(VARIANTS):
    rep = audit_blindness_emission(name)
    tag = "vacuous pass (client sends nothing)" if rep.vacuous else f"pass, max distance {rep.max_pairwise_trace_distance:.1e}"
    print(f"emission  {name:10s} {tag if rep.passed else 'FAIL'}")

for name in ("ghz-bounce", "sq-bounce"):
    rep = audit_blindness_channel(name)
    print(f"channel   {name:10s} pass={rep.passed}, Choi distance {rep.max_pairwise_trace_distance:.1e}")

print("\nnegative control: ghz-bounce with pads 1 and 2 disabled")
emission = audit_blindness_emission("ghz-bounce", disabled_pads=(1, 2))
channel = audit_blindness_channel("ghz-bounce", disabled_pads=(1, 2))
print(f"  emission audit (honest input only): pass={emission.passed}")
print(f"  channel audit (all inputs):         pass={channel.passed}, distance {channel.max_pairwise_trace_distance:.3f}")
