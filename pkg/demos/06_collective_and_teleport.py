"""
Collective attacks and the teleportation reduction
==================================================

Measuring two qubits jointly does not help: the product Gamma still passes
the optimality check. A teleportation argument shows that guessing one
state while conditioning on others cannot beat mu either.
"""

import numpy as np

from relbc import discrimination as disc
from relbc import qcore

g2 = disc.collective_gamma(disc.optimal_povm(), disc.optimal_povm())
print("Gamma_2 =", np.round(np.diag(g2).real, 8), " 4 Tr Gamma_2 =", 4 * np.trace(g2).real, "mu^2 =", disc.MU**2)
print(disc.collective_certificate_n2(1e-10))
print("with one factor replaced:", disc.collective_certificate_n2(1e-10, second=disc.always_guess(1)).passed)

# teleport a random state and undo the Pauli
rng = qcore.make_rng(7)
psi = qcore.PureState.normalized(rng.normal(size=2) + 1j * rng.normal(size=2))
print("teleport fidelity:", qcore.teleport_demo(psi, rng).fidelity(psi))

# conditioned guessing over many runs
for n in (1, 2):
    reports = [disc.lemma2_demo(n, rng) for _ in range(5000)]
    print(f"n={n}  success = {np.mean([r.success for r in reports]):.4f}  "
          f"mean iterations = {np.mean([r.iterations for r in reports]):.2f}")
