"""
Cheating by subset guessing
===========================

Each strategy names a subset guess per qubit; Bob accepts both unveilings
only when every checked qubit is inside its guessed subset.
"""

import numpy as np

from relbc import adversary as adv
from relbc import discrimination as disc

for name in sorted(adv.BUILTIN_STRATEGIES):
    r = adv.estimate_cheat_probability(adv.strategy_by_name(name), n=1, trials=200_000, seed=1)
    print(f"{name:14s} p = {r.estimate:.4f} +- {r.stderr:.4f}")

# the bound decays as mu^n
for n in (1, 3, 5, 8):
    r = adv.estimate_cheat_probability(adv.AttackStrategy.optimal(), n, 200_000, seed=n)
    print(f"n={n}  p = {r.estimate:.4f}  mu^n = {r.bound:.4f}")

# random measurements never beat the optimum
rng = np.random.default_rng(0)
best = max(disc.win_probability(disc.random_guessing_strategy(rng)) for _ in range(500))
print("best of 500 random strategies:", best, "<= mu:", best <= disc.MU)

# tolerating errors: success rises with t but stays below the tail bound
for p in adv.cheat_with_tolerance_curve(adv.AttackStrategy.optimal(), 200, [0.0, 0.05, 0.1], 20_000, seed=3):
    print(p)
