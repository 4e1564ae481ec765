"""
Certifying the optimal subset-guessing measurement
===================================================

A cheater who wants to unveil either bit must, for each qubit, name a pair
of BB84 states S_i = {e_i, e_{i+1}}. Four half-projectors do this best.
"""

import numpy as np

from relbc import discrimination as disc
from relbc import qcore

# the four POVM elements, each half a projector onto a state at angle i*pi/4 - pi/8
povm = disc.optimal_povm()
for i, e in enumerate(povm.elements, start=1):
    print(f"pi_{i} =\n{np.round(e.real, 4)}")

# completeness and winning probability
print("sum of elements = I:", np.allclose(sum(povm.elements), np.eye(2)))
print("P_win =", disc.win_probability(povm), " mu =", disc.MU)

# Gamma is a multiple of the identity, so the optimality conditions reduce
# to an eigenvalue check against each pair mixture
gamma = disc.gamma_operator(povm)
print("Gamma =\n", np.round(gamma.real, 10))
cert = disc.holevo_certificate(povm)
print("certificate passed:", cert.passed, " min eigenvalues:", cert.min_eigenvalues)

# a suboptimal strategy fails the same check
bad = disc.holevo_certificate(disc.always_guess(1))
print("always guessing S_1 passes?", bad.passed, " worst eigenvalue:", bad.worst_eigenvalue)

# the eigenvalues come from a small Jacobi solver; compare with LAPACK
h = gamma - (qcore.bb84_density(1) + qcore.bb84_density(2)) / 8
print("jacobi:", qcore.eigenvalues(h), " lapack:", np.linalg.eigvalsh(h))
