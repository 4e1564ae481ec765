"""
Security bounds: exponential decay and the noisy regime
========================================================
"""

from relbc import discrimination as disc

# without noise, cheating on N qubits succeeds with probability at most mu^N
for n in (1, 2, 5, 10, 20, 50):
    print(f"N={n:3d}  mu^N = {disc.security_bound(n):.10f}")

# with an error tolerance t Bob must accept some wrong outcomes; the
# cheater then only needs a fraction 1 - t of correct subset guesses
print("noise threshold 1 - mu =", disc.NOISE_THRESHOLD)
for t in (0.0, 0.05, 0.1, 0.14):
    eps = disc.tolerance_to_epsilon(t)
    print(f"t={t:.2f}  eps={eps:.6f}  " + "  ".join(
        f"N={n}: {disc.azuma_bound(n, eps):.3e}" for n in (100, 1000, 10000)))
