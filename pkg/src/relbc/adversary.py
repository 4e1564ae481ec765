"""Cheating committers and Monte Carlo estimates of their success.

A cheater who can unveil 0 at Q0 *and* 1 at Q1 must, for every qubit, name
one computational-basis outcome and one Hadamard-basis outcome. Such a pair
is a subset guess S_i, and Bob's two consistency checks both pass exactly
when each checked qubit lies in its guessed subset.

Batches of trials are drawn from generators keyed by ``(seed, chunk)`` so
results do not depend on how the work is scheduled.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Iterator, Sequence

import numpy as np

from . import qcore
from .discrimination import MU, GuessingStrategy, azuma_bound, optimal_povm, tolerance_to_epsilon
from .errors import DomainError
from .protocol import Basis, PreparedStates, bob_prepare, consistency_check, expected_outcome

STDERR_SLACK = 4.0
CHUNK_ELEMENTS = 1 << 20
_LOSS_STREAM = 1

# Subset S_i for each (z outcome, x outcome): S1={0,+}, S2={+,1}, S3={1,-}, S4={-,0}
_SUBSET_FOR_OUTCOMES = np.array([[1, 4], [2, 3]])
_Z_MEMBER = np.array([0, 1, 3, 3, 1])  # index by subset 1..4
_X_MEMBER = np.array([0, 2, 2, 4, 4])


class AttackKind(enum.Enum):
    OPTIMAL_SUBSET_GUESS = "optimal"
    FIXED_BASIS_THEN_FABRICATE = "fixed-basis"
    UNIFORM_GUESS = "uniform"
    CUSTOM_POVM = "custom"


@dataclass(frozen=True, eq=False)
class AttackStrategy:
    kind: AttackKind
    guessing: GuessingStrategy | None = None
    basis: int = 0

    def __post_init__(self):
        if self.kind is AttackKind.CUSTOM_POVM and not isinstance(self.guessing, GuessingStrategy):
            raise DomainError("a custom attack needs a GuessingStrategy")
        if self.kind is AttackKind.OPTIMAL_SUBSET_GUESS and self.guessing is None:
            object.__setattr__(self, "guessing", optimal_povm())
        Basis.for_bit(self.basis)

    @classmethod
    def optimal(cls) -> "AttackStrategy":
        return cls(AttackKind.OPTIMAL_SUBSET_GUESS)

    @classmethod
    def uniform(cls) -> "AttackStrategy":
        return cls(AttackKind.UNIFORM_GUESS)

    @classmethod
    def fixed_basis(cls, basis: int = 0) -> "AttackStrategy":
        return cls(AttackKind.FIXED_BASIS_THEN_FABRICATE, basis=basis)

    @classmethod
    def custom(cls, guessing: GuessingStrategy) -> "AttackStrategy":
        return cls(AttackKind.CUSTOM_POVM, guessing)

    @property
    def name(self) -> str:
        if self.kind is AttackKind.FIXED_BASIS_THEN_FABRICATE:
            return f"fixed-basis-{'z' if self.basis == 0 else 'x'}"
        return self.kind.value


BUILTIN_STRATEGIES = {
    "optimal": AttackStrategy.optimal,
    "uniform": AttackStrategy.uniform,
    "fixed-basis-z": lambda: AttackStrategy.fixed_basis(0),
    "fixed-basis-x": lambda: AttackStrategy.fixed_basis(1),
}


def strategy_by_name(name: str) -> AttackStrategy:
    try:
        return BUILTIN_STRATEGIES[name]()
    except KeyError:
        raise DomainError(f"unknown strategy {name!r}; choose from {sorted(BUILTIN_STRATEGIES)}") from None


def subset_for_outcomes(z_outcome, x_outcome) -> np.ndarray:
    return _SUBSET_FOR_OUTCOMES[np.asarray(z_outcome), np.asarray(x_outcome)]


def subset_contains(guess, prepared) -> np.ndarray:
    guess, prepared = np.asarray(guess), np.asarray(prepared)
    return (prepared == guess) | (prepared == guess % 4 + 1)


def declared_outcomes(guess) -> tuple[np.ndarray, np.ndarray]:
    """Z-record and X-record implied by subset guesses."""
    guess = np.asarray(guess)
    return expected_outcome(_Z_MEMBER[guess]), expected_outcome(_X_MEMBER[guess])


def sample_guesses(strategy: AttackStrategy, prepared: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Subset guess (1..4) for every prepared BB84 index in an array of any shape."""
    prepared = np.asarray(prepared)
    flat = prepared.reshape(-1)
    if strategy.kind is AttackKind.UNIFORM_GUESS:
        guesses = rng.integers(1, 5, size=flat.size)
    elif strategy.kind is AttackKind.FIXED_BASIS_THEN_FABRICATE:
        basis = Basis(strategy.basis)
        table = np.array([[abs(np.vdot(v, qcore.bb84_state(k).amplitudes)) ** 2 for v in basis.vectors]
                          for k in range(1, 5)])
        measured = qcore.sample_categorical(table[flat - 1], rng) - 1
        fabricated = rng.integers(0, 2, size=flat.size)
        if strategy.basis == 0:
            guesses = subset_for_outcomes(measured, fabricated)
        else:
            guesses = subset_for_outcomes(fabricated, measured)
    else:
        table = strategy.guessing.outcome_table
        guesses = qcore.sample_categorical(table[flat - 1], rng)
    return guesses.reshape(prepared.shape)


@dataclass(frozen=True, eq=False)
class CheatTrial:
    prepared: PreparedStates
    guesses: np.ndarray
    z_outcomes: np.ndarray
    x_outcomes: np.ndarray
    per_state_correct: np.ndarray
    success_q0: bool
    success_q1: bool

    @property
    def success(self) -> bool:
        return self.success_q0 and self.success_q1

    @property
    def n(self) -> int:
        return self.prepared.n


def run_cheat_trial(strategy: AttackStrategy, prepared: PreparedStates, tolerance: float,
                    rng: np.random.Generator) -> CheatTrial:
    """Try to unveil 0 at Q0 and 1 at Q1 against the same prepared list."""
    if not 0.0 <= tolerance < 1.0:
        raise DomainError("tolerance must lie in [0, 1)")
    guesses = sample_guesses(strategy, prepared.indices, rng)
    z, x = declared_outcomes(guesses)
    ok0 = consistency_check(0, z, prepared.indices, tolerance).passed
    ok1 = consistency_check(1, x, prepared.indices, tolerance).passed
    return CheatTrial(prepared, guesses, z, x, subset_contains(guesses, prepared.indices), ok0, ok1)


def _wing_pass(guesses: np.ndarray, prepared: np.ndarray, tolerance: float) -> np.ndarray:
    """Vectorised consistency check of both fabricated records, one row per trial."""
    z, x = declared_outcomes(guesses)
    expected = expected_outcome(prepared)
    ok = np.ones(prepared.shape[0], dtype=bool)
    for declared, members in ((z, (1, 3)), (x, (2, 4))):
        checkable = np.isin(prepared, members)
        wrong = np.count_nonzero(checkable & (declared != expected), axis=1)
        checked = np.count_nonzero(checkable, axis=1)
        frac = np.divide(wrong, checked, out=np.zeros(len(wrong)), where=checked > 0)
        ok &= frac <= tolerance
    return ok


def _chunks(n: int, trials: int) -> Iterator[tuple[int, int]]:
    rows = max(1, CHUNK_ELEMENTS // n)
    for k, start in enumerate(range(0, trials, rows)):
        yield k, min(rows, trials - start)


def _sample_chunks(strategy: AttackStrategy, n: int, trials: int, seed: int):
    """Yield (chunk index, prepared, guesses) with one generator per chunk."""
    for k, rows in _chunks(n, trials):
        rng = qcore.make_rng(seed, k)
        prepared = rng.integers(1, 5, size=(rows, n))
        yield k, prepared, sample_guesses(strategy, prepared, rng)


def _stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


@dataclass(frozen=True)
class MonteCarloReport:
    strategy: str
    n: int
    trials: int
    seed: int
    tolerance: float
    successes: int
    estimate: float
    stderr: float
    bound: float
    bound_violated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check_run_args(n: int, trials: int, seed: int) -> None:
    if n < 1:
        raise DomainError("n must be >= 1")
    if trials < 100:
        raise DomainError("trials must be >= 100")
    if seed < 0:
        raise DomainError("seed must be non-negative")


def estimate_cheat_probability(strategy: AttackStrategy, n: int, trials: int, tolerance: float = 0.0,
                               seed: int = 0) -> MonteCarloReport:
    _check_run_args(n, trials, seed)
    if not 0.0 <= tolerance < 1.0:
        raise DomainError("tolerance must lie in [0, 1)")
    successes = 0
    for _, prepared, guesses in _sample_chunks(strategy, n, trials, seed):
        successes += int(np.count_nonzero(_wing_pass(guesses, prepared, tolerance)))
    p = successes / trials
    se = _stderr(p, trials)
    bound = MU**n
    return MonteCarloReport(strategy.name, n, trials, seed, tolerance, successes, p, se, bound,
                            p > bound + STDERR_SLACK * se)


def correct_counts(strategy: AttackStrategy, n: int, trials: int, seed: int) -> np.ndarray:
    """Number of correct subset guesses in each of ``trials`` runs on n qubits."""
    _check_run_args(n, trials, seed)
    parts = [np.count_nonzero(subset_contains(g, p), axis=1) for _, p, g in _sample_chunks(strategy, n, trials, seed)]
    return np.concatenate(parts)


@dataclass(frozen=True)
class CurvePoint:
    tolerance: float
    estimate: float
    stderr: float
    epsilon: float | None
    azuma_bound: float | None


def cheat_with_tolerance_curve(strategy: AttackStrategy, n: int, tolerances: Sequence[float], trials: int,
                               seed: int = 0) -> list[CurvePoint]:
    """Success probability when up to a fraction t of subset guesses may be wrong.

    Each point is paired with the tail bound at eps = (1 - t) - mu, which is
    only defined while t stays below the noise threshold 1 - mu.
    """
    for t in tolerances:
        if not 0.0 <= t < 1.0:
            raise DomainError("each tolerance must lie in [0, 1)")
    fails = n - correct_counts(strategy, n, trials, seed)
    points = []
    for t in tolerances:
        allowed = math.floor(t * n + 1e-9)
        p = float(np.count_nonzero(fails <= allowed)) / trials
        eps = tolerance_to_epsilon(t)
        bound = azuma_bound(n, eps) if eps > 0 else None
        points.append(CurvePoint(t, p, _stderr(p, trials), eps if eps > 0 else None, bound))
    return points


@dataclass(frozen=True)
class AzumaTailRow:
    epsilon: float
    threshold: float
    fraction: float
    stderr: float
    bound: float
    passed: bool


def azuma_tail_check(n: int, trials: int, epsilons: Sequence[float], seed: int = 0,
                     strategy: AttackStrategy | None = None) -> list[AzumaTailRow]:
    """Empirical P(correct guesses >= n*(mu + eps)) against the Azuma bound."""
    counts = correct_counts(strategy or AttackStrategy.optimal(), n, trials, seed)
    rows = []
    for eps in epsilons:
        threshold = n * (MU + eps)
        frac = float(np.count_nonzero(counts >= threshold)) / trials
        se = _stderr(frac, trials)
        bound = azuma_bound(n, eps)
        rows.append(AzumaTailRow(eps, threshold, frac, se, bound, frac <= bound + STDERR_SLACK * se))
    return rows


@dataclass(frozen=True)
class LossReport:
    loss_rate: float
    n: int
    trials: int
    seed: int
    successes: int
    estimate: float
    stderr: float
    mean_survivors: float
    survivors_stderr: float
    oracle_observed: float
    oracle_exact: float
    per_state_rate: float
    per_state_stderr: float
    bound_violated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def loss_attack_check(f: float, n: int, trials: int, seed: int = 0,
                      strategy: AttackStrategy | None = None) -> LossReport:
    """Cheating with states declared lost at P.

    A trial succeeds when every surviving subset guess is right. The
    estimate is compared with mean(mu^M) over the observed survivor counts
    M, and with the exact binomial mixture (f + (1 - f) mu)^n.
    """
    if not 0.0 <= f < 1.0:
        raise DomainError("loss rate must lie in [0, 1)")
    if n * (1.0 - f) < 1.0:
        raise DomainError("expected number of surviving states must be >= 1")
    _check_run_args(n, trials, seed)
    strategy = strategy or AttackStrategy.optimal()
    successes = 0
    survivors_total = 0
    survivors_sq = 0
    correct_total = 0
    oracle_sum = 0.0
    for k, prepared, guesses in _sample_chunks(strategy, n, trials, seed):
        lost = qcore.make_rng(seed, k, _LOSS_STREAM).random(prepared.shape) < f
        correct = subset_contains(guesses, prepared) & ~lost
        survivors = np.count_nonzero(~lost, axis=1)
        ok = np.count_nonzero(correct, axis=1) == survivors
        successes += int(np.count_nonzero(ok))
        survivors_total += int(survivors.sum())
        survivors_sq += int(np.sum(survivors.astype(np.int64) ** 2))
        correct_total += int(np.count_nonzero(correct))
        oracle_sum += float(np.sum(MU ** survivors))
    p = successes / trials
    se = _stderr(p, trials)
    oracle_observed = oracle_sum / trials
    mean_m = survivors_total / trials
    var_m = max(survivors_sq / trials - mean_m**2, 0.0)
    rate = correct_total / survivors_total if survivors_total else 0.0
    rate_se = _stderr(rate, survivors_total) if survivors_total else 0.0
    violated = p > oracle_observed + STDERR_SLACK * se or rate > MU + STDERR_SLACK * rate_se
    return LossReport(f, n, trials, seed, successes, p, se, mean_m, math.sqrt(var_m / trials), oracle_observed,
                      (f + (1.0 - f) * MU) ** n, rate, rate_se, violated)


def fresh_trial(strategy: AttackStrategy, n: int, tolerance: float, rng: np.random.Generator) -> CheatTrial:
    """Prepare n new states and run one cheat trial on them."""
    return run_cheat_trial(strategy, bob_prepare(n, rng), tolerance, rng)
