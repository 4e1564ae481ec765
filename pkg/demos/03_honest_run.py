"""
An honest commitment, message by message
=========================================

Bob hands Alice random BB84 qubits at P. Alice measures them in the basis
named by the bit, pads the outcomes and sends them to agents at Q0 and
Q1, who are spacelike separated. Both unveil and Bob compares at (0,0,0,2x).
"""

from relbc.protocol import RunConfig, run_honest
from relbc.spacetime import Message, deliver, standard_geometry

t = run_honest(RunConfig(n=64, bit=1, separation=2.0))
print(t.text_report())
print(t.summary())

# what Bob holds before the unveiling is pad ciphertext only
print("ciphertext bytes (first 16):", t.pre_unveiling_bytes()[:16].hex())

# the two agents cannot coordinate: a Q0 -> Q1 message is refused
g = standard_geometry(2.0)
print(deliver(Message("alice@Q0", "alice@Q1", b"help"), g.q0, g.q1))

# with channel noise, Bob needs a tolerance
noisy = run_honest(RunConfig(n=1000, bit=0, noise=0.1, tolerance=0.1))
print("noisy run:", noisy.verdict.kind.value, noisy.verdict.error_fractions)
