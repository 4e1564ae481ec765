"""
Declaring qubits lost
=====================

A cheater may declare lost any qubit whose guess looks unreliable. Losses
are announced at P before the outcome is known, so each surviving qubit is
still guessed with probability at most mu.
"""

from relbc import adversary as adv

for f, n in ((0.5, 20), (0.9, 100)):
    r = adv.loss_attack_check(f, n, trials=200_000, seed=1)
    print(f"f={f} n={n}  p = {r.estimate:.5f} +- {r.stderr:.5f}  "
          f"E[mu^M] = {r.oracle_exact:.5f}  per survivor = {r.per_state_rate:.4f}")
