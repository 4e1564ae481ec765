"""The subset-guessing game on a single BB84 state and its security constants.

A guess ``S_i`` names the two neighbouring states ``{|e_i>, |e_{i+1}>}``
(one per basis, indices mod 4). A strategy is a 4-outcome qubit POVM whose
k-th element triggers guess ``S_k``. Guessing the subset is, up to a factor
of two, minimum-error discrimination of the four equiprobable mixtures
``(rho_i + rho_{i+1}) / 2``, so optimality can be certified with the
operator inequality ``Gamma - p_j sigma_j >= 0``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qcore
from .errors import DomainError, InconsistencyError, NonTerminationError
from .qcore import Povm, PureState, bb84_density, bb84_wrap

MU = 0.5 * (1.0 + 1.0 / math.sqrt(2.0))
NOISE_THRESHOLD = 0.5 - 1.0 / (2.0 * math.sqrt(2.0))
LEMMA2_MAX_ITERATIONS = 10**6


@dataclass(frozen=True)
class SecurityConstants:
    mu: float = MU
    noise_threshold: float = NOISE_THRESHOLD


@dataclass(frozen=True)
class SubsetGuess:
    index: int

    def __post_init__(self):
        if self.index not in (1, 2, 3, 4):
            raise DomainError(f"subset index must be in 1..4, got {self.index!r}")

    @property
    def members(self) -> tuple[int, int]:
        return self.index, bb84_wrap(self.index + 1)

    @property
    def z_member(self) -> int:
        """Computational-basis member (BB84 index 1 or 3)."""
        return next(m for m in self.members if m in (1, 3))

    @property
    def x_member(self) -> int:
        """Hadamard-basis member (BB84 index 2 or 4)."""
        return next(m for m in self.members if m in (2, 4))

    def contains(self, bb84_index: int) -> bool:
        return bb84_index in self.members


@dataclass(frozen=True, eq=False)
class GuessingStrategy:
    povm: Povm

    def __post_init__(self):
        if not isinstance(self.povm, Povm):
            object.__setattr__(self, "povm", Povm(tuple(self.povm)))
        if len(self.povm) != 4 or self.povm.dim != 2:
            raise DomainError("a guessing strategy is a 4-outcome qubit POVM")

    @property
    def elements(self) -> tuple:
        return self.povm.elements

    def element(self, i: int) -> np.ndarray:
        """pi_i with the cyclic convention pi_{i+4} = pi_i."""
        return self.povm[bb84_wrap(i) - 1]

    @functools.cached_property
    def outcome_table(self) -> np.ndarray:
        """(4, 4) table: row j is the outcome distribution for prepared |e_{j+1}>."""
        return np.array([qcore.born_probabilities(bb84_density(j), self.povm) for j in range(1, 5)])


@dataclass(frozen=True)
class CertificateResult:
    passed: bool
    worst_eigenvalue: float
    worst_index: int
    min_eigenvalues: tuple
    tol: float


def _tr(a: np.ndarray) -> float:
    return float(np.trace(a).real)


def _mixture(i: int) -> np.ndarray:
    """(rho_i + rho_{i+1}) / 2"""
    return 0.5 * (bb84_density(i) + bb84_density(i + 1))


def phi_state(i: int) -> PureState:
    """cos(theta_i)|0> + sin(theta_i)|1> with theta_i = i*pi/4 - pi/8."""
    theta = i * math.pi / 4 - math.pi / 8
    return PureState((math.cos(theta), math.sin(theta)))


@functools.lru_cache(maxsize=None)
def optimal_povm() -> GuessingStrategy:
    return GuessingStrategy(Povm(tuple(0.5 * qcore.projector(phi_state(i)) for i in range(1, 5))))


def always_guess(i: int) -> GuessingStrategy:
    """Deterministic strategy: every outcome maps to S_i."""
    elems = [np.zeros((2, 2), dtype=complex) for _ in range(4)]
    elems[SubsetGuess(i).index - 1] = np.eye(2, dtype=complex)
    return GuessingStrategy(Povm(tuple(elems)))


def uniform_strategy() -> GuessingStrategy:
    return GuessingStrategy(Povm(tuple(0.25 * np.eye(2, dtype=complex) for _ in range(4))))


def win_probability(strategy: GuessingStrategy) -> float:
    return 0.25 * sum(
        _tr(bb84_density(i) @ (strategy.element(i) + strategy.element(i - 1))) for i in range(1, 5)
    )


def gamma_operator(strategy: GuessingStrategy) -> np.ndarray:
    # left-multiplied as written; not symmetrised
    return 0.25 * sum(_mixture(i) @ strategy.element(i) for i in range(1, 5))


def _certify(gamma: np.ndarray, weighted_states: Sequence[np.ndarray], tol: float) -> CertificateResult:
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not qcore.is_hermitian(gamma, qcore.PSD_TOL):
        raise InconsistencyError("Gamma is not Hermitian; the strategy cannot be a minimum-error measurement")
    gamma = 0.5 * (gamma + qcore.dagger(gamma))
    mins = tuple(qcore.min_eigenvalue(gamma - s) for s in weighted_states)
    worst = int(np.argmin(mins))
    return CertificateResult(mins[worst] >= -tol, mins[worst], worst + 1, mins, tol)


def holevo_certificate(strategy: GuessingStrategy, tol: float = qcore.PSD_TOL) -> CertificateResult:
    """Check Gamma - (rho_i + rho_{i+1}) / 8 >= 0 for i = 1..4."""
    return _certify(gamma_operator(strategy), [0.25 * _mixture(i) for i in range(1, 5)], tol)


def max_confidence_ratio(a: np.ndarray, i: int) -> float:
    """Probability that guess S_i is right given that outcome operator ``a`` fired."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise DomainError("outcome operator must act on one qubit")
    if not qcore.is_psd(a):
        raise DomainError("outcome operator must be Hermitian and positive semidefinite")
    trace = _tr(a)
    if trace <= 1e-12:
        raise DomainError("outcome operator has zero trace")
    return _tr(a @ (0.25 * (bb84_density(i) + bb84_density(i + 1)))) / (0.5 * trace)


def security_bound(n: int) -> float:
    if n < 1:
        raise DomainError("n must be >= 1")
    return MU**n


def azuma_bound(n: int, eps: float) -> float:
    """Tail bound on the number of correct subset guesses exceeding n*(mu + eps)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not eps > 0:
        raise DomainError("eps must be positive")
    return math.exp(-n * eps**2 / (2 * MU**2))


def tolerance_to_epsilon(tolerance: float) -> float:
    """Deviation eps matching an allowed failure fraction: (1 - t) - mu."""
    return (1.0 - tolerance) - MU


def collective_gamma(first: GuessingStrategy, second: GuessingStrategy) -> np.ndarray:
    """Gamma for the product POVM on two states, with 16 equiprobable hypotheses."""
    product = qcore.tensor_povm(first.povm, second.povm)
    gamma = np.zeros((4, 4), dtype=complex)
    for i in range(1, 5):
        for j in range(1, 5):
            state = qcore.tensor(_mixture(i), _mixture(j))
            gamma += state @ product[(i - 1) * 4 + (j - 1)] / 16
    return gamma


def collective_certificate_n2(
    tol: float = qcore.PSD_TOL,
    first: GuessingStrategy | None = None,
    second: GuessingStrategy | None = None,
) -> CertificateResult:
    """Certify that the two-fold product of a strategy is minimum-error on pairs."""
    first = first or optimal_povm()
    second = second or optimal_povm()
    gamma = collective_gamma(first, second)
    states = [qcore.tensor(_mixture(i), _mixture(j)) / 16 for i in range(1, 5) for j in range(1, 5)]
    return _certify(gamma, states, tol)


def random_psd(rng: np.random.Generator, dim: int = 2, rank: int | None = None) -> np.ndarray:
    """G^dagger G for a complex Gaussian G with ``rank`` rows."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(rank, dim)) + 1j * rng.normal(size=(rank, dim))
    return qcore.dagger(g) @ g


def random_guessing_strategy(rng: np.random.Generator) -> GuessingStrategy:
    """Four random PSD operators normalised by the inverse square root of their sum."""
    raw = [random_psd(rng, 2, rank=int(rng.integers(1, 3))) for _ in range(4)]
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(w**-0.5) @ qcore.dagger(v)
    elems = []
    for r in raw:
        e = inv_sqrt @ r @ inv_sqrt
        elems.append(0.5 * (e + qcore.dagger(e)))
    return GuessingStrategy(Povm(tuple(elems)))


@dataclass(frozen=True)
class DemoReport:
    n: int
    iterations: int
    unknown_index: int
    guess: int
    success: bool
    bell_outcome: int


def _pauli_image(unitary: np.ndarray, index: int) -> int:
    """BB84 index k with U|e_index> equal to |e_k> up to phase."""
    image = PureState.normalized(unitary @ qcore.bb84_state(index).amplitudes)
    return next(k for k in range(1, 5) if image.fidelity(qcore.bb84_state(k)) > 1 - 1e-9)


@functools.lru_cache(maxsize=None)
def _undo_table(outcome: int) -> tuple:
    """Subset U^dagger S_g for each guess g, U the teleportation map of ``outcome``."""
    u_dag = qcore.dagger(qcore.TELEPORT_UNITARIES[outcome - 1])
    table = []
    for g in range(1, 5):
        pair = {_pauli_image(u_dag, g), _pauli_image(u_dag, bb84_wrap(g + 1))}
        table.append(next(i for i in range(1, 5) if set(SubsetGuess(i).members) == pair))
    return tuple(table)


def lemma2_demo(
    n: int,
    rng: np.random.Generator,
    strategy: GuessingStrategy | None = None,
    known_indices: Sequence[int] | None = None,
    required_guesses: Sequence[int] | None = None,
    max_iterations: int = LEMMA2_MAX_ITERATIONS,
) -> DemoReport:
    """One pass of the teleportation reduction from the collective game to one state.

    The first ``n - 1`` states are prepared as ``known_indices`` (default all
    |0>) and the product strategy is rerun until its guesses on them equal
    ``required_guesses`` (default S_1 each, i.e. correct). A fresh unknown
    BB84 state is then teleported into the remaining singlet half, guessed
    with the strategy, and the guess mapped back through U^dagger.
    """
    if not 1 <= n <= 3:
        raise DomainError("lemma2_demo supports 1 <= n <= 3")
    strategy = strategy or optimal_povm()
    known = list(known_indices) if known_indices is not None else [1] * (n - 1)
    required = list(required_guesses) if required_guesses is not None else [1] * (n - 1)
    if len(known) != n - 1 or len(required) != n - 1:
        raise DomainError("need n - 1 known states and n - 1 required guesses")

    table = strategy.outcome_table
    known_probs = table[np.array(known, dtype=int) - 1] if known else None
    required = np.array(required, dtype=int)
    iterations = 0
    while True:
        iterations += 1
        if iterations > max_iterations:
            raise NonTerminationError(f"conditioning event not reached in {max_iterations} iterations")
        # Product strategy: its action on the known states is independent of the singlet half.
        if known_probs is None or np.array_equal(qcore.sample_categorical(known_probs, rng), required):
            break

    unknown = int(rng.integers(1, 5))
    tele = qcore.teleport(qcore.bb84_state(unknown), rng)
    raw_guess = qcore.born_sample(qcore.projector(tele.received), strategy.povm, rng)
    # U^dagger carries the guessed pair {e_g, e_g+1} back to another neighbouring pair
    guess = _undo_table(tele.outcome)[raw_guess - 1]
    return DemoReport(n, iterations, unknown, guess, SubsetGuess(guess).contains(unknown), tele.outcome)
