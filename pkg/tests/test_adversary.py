import math

import numpy as np
import pytest

from relbc import adversary as adv
from relbc import discrimination as disc
from relbc.adversary import AttackStrategy
from relbc.errors import DomainError
from relbc.protocol import OutcomeRecord, PreparedStates, UnveilingClaim, bob_verify, consistency_check
from relbc.qcore import make_rng

MU = 0.5 * (1 + 1 / math.sqrt(2))


def binomial_mixture(f, n):
    """E[mu^M] for M ~ Binomial(n, 1 - f), summed term by term."""
    return sum(math.comb(n, m) * (1 - f) ** m * f ** (n - m) * MU**m for m in range(n + 1))


class TestTruthTable:
    @pytest.mark.parametrize("g", [1, 2, 3, 4])
    def test_always_guess(self, g):
        s = AttackStrategy.custom(disc.always_guess(g))
        members = disc.SubsetGuess(g).members
        for k in range(1, 5):
            trial = adv.run_cheat_trial(s, PreparedStates([k]), 0.0, make_rng(0))
            assert trial.success == (k in members)

    def test_subset_lookup(self):
        # (z, x) outcome pairs name the subset holding both eigenstates
        for z in (0, 1):
            for x in (0, 1):
                g = int(adv.subset_for_outcomes(z, x))
                zs, xs = adv.declared_outcomes(g)
                assert (int(zs), int(xs)) == (z, x)

    def test_strategy_names(self):
        assert sorted(adv.BUILTIN_STRATEGIES) == ["fixed-basis-x", "fixed-basis-z", "optimal", "uniform"]
        with pytest.raises(DomainError):
            adv.strategy_by_name("psychic")
        with pytest.raises(DomainError):
            AttackStrategy(adv.AttackKind.CUSTOM_POVM)


class TestSingleQubit:
    @pytest.mark.parametrize("name,exact", [("optimal", MU), ("uniform", 0.5), ("fixed-basis-z", 0.75),
                                            ("fixed-basis-x", 0.75)])
    def test_frequencies(self, name, exact):
        r = adv.estimate_cheat_probability(adv.strategy_by_name(name), 1, 2 * 10**5, seed=3)
        assert abs(r.estimate - exact) <= 4 * math.sqrt(exact * (1 - exact) / r.trials)

    def test_fixed_basis_multi(self):
        # conjugate-basis positions pass with probability 1/2 each
        r = adv.estimate_cheat_probability(AttackStrategy.fixed_basis(0), 4, 10**5, seed=4)
        assert abs(r.estimate - 0.75**4) <= 4 * r.stderr

    def test_per_wing_check_matches_verifier(self):
        rng = make_rng(5)
        for _ in range(10**4):
            trial = adv.fresh_trial(AttackStrategy.optimal(), 3, 0.0, rng)
            for bit, rec in ((0, trial.z_outcomes), (1, trial.x_outcomes)):
                r = OutcomeRecord(rec)
                verdict = bob_verify(UnveilingClaim(0, bit, r), UnveilingClaim(1, bit, r), trial.prepared)
                assert verdict.accepted == (trial.success_q0 if bit == 0 else trial.success_q1)
            assert trial.success == bool(np.all(trial.per_state_correct))

    def test_vectorised_wing_pass(self):
        rng = make_rng(6)
        prepared = rng.integers(1, 5, size=(2000, 6))
        guesses = adv.sample_guesses(AttackStrategy.uniform(), prepared, rng)
        for t in (0.0, 0.2, 0.5):
            fast = adv._wing_pass(guesses, prepared, t)
            for row in range(len(prepared)):
                z, x = adv.declared_outcomes(guesses[row])
                slow = (consistency_check(0, z, prepared[row], t).passed
                        and consistency_check(1, x, prepared[row], t).passed)
                assert fast[row] == slow


class TestBounds:
    def test_random_custom_strategies(self):
        rng = np.random.default_rng(8)
        for k in range(1000):
            s = AttackStrategy.custom(disc.random_guessing_strategy(rng))
            r = adv.estimate_cheat_probability(s, 1, 10**4, seed=k)
            assert r.estimate <= MU + 4 * r.stderr
            assert not r.bound_violated

    def test_replay(self):
        a = adv.estimate_cheat_probability(AttackStrategy.optimal(), 7, 5000, seed=11)
        b = adv.estimate_cheat_probability(AttackStrategy.optimal(), 7, 5000, seed=11)
        assert a == b
        c = adv.estimate_cheat_probability(AttackStrategy.optimal(), 7, 5000, seed=12)
        assert c.successes != a.successes

    def test_preconditions(self):
        with pytest.raises(DomainError):
            adv.estimate_cheat_probability(AttackStrategy.optimal(), 0, 1000)
        with pytest.raises(DomainError):
            adv.estimate_cheat_probability(AttackStrategy.optimal(), 1, 99)
        with pytest.raises(DomainError):
            adv.estimate_cheat_probability(AttackStrategy.optimal(), 1, 1000, seed=-1)


class TestToleranceCurve:
    def test_zero_tolerance_matches_estimate(self):
        pts = adv.cheat_with_tolerance_curve(AttackStrategy.optimal(), 20, [0.0], 10**4, seed=2)
        r = adv.estimate_cheat_probability(AttackStrategy.optimal(), 20, 10**4, seed=2)
        assert pts[0].estimate == r.estimate

    def test_no_bound_above_threshold(self):
        pts = adv.cheat_with_tolerance_curve(AttackStrategy.optimal(), 20, [0.1464467, 0.3], 1000, seed=2)
        assert all(p.azuma_bound is None and p.epsilon is None for p in pts)

    def test_below_azuma(self):
        (pt,) = adv.cheat_with_tolerance_curve(AttackStrategy.optimal(), 200, [0.05], 10**4, seed=3)
        assert pt.epsilon == pytest.approx(0.0964466094, abs=1e-9)
        assert pt.estimate <= disc.azuma_bound(200, 0.0964466094) + 4 * pt.stderr

    def test_monotone_in_tolerance(self):
        pts = adv.cheat_with_tolerance_curve(AttackStrategy.uniform(), 30, [0.0, 0.1, 0.2, 0.4], 5000, seed=4)
        est = [p.estimate for p in pts]
        assert est == sorted(est)

    def test_tail_check(self):
        rows = adv.azuma_tail_check(100, 10**4, [0.02, 0.05], seed=5)
        assert all(r.passed for r in rows)


class TestLoss:
    def test_no_loss_is_plain_estimate(self):
        r = adv.loss_attack_check(0.0, 5, 10**4, seed=1)
        base = adv.estimate_cheat_probability(AttackStrategy.optimal(), 5, 10**4, seed=1)
        assert r.successes == base.successes
        assert r.oracle_exact == pytest.approx(MU**5, abs=1e-15)

    def test_half_loss_matches_mixture(self):
        r = adv.loss_attack_check(0.5, 20, 10**5, seed=2)
        oracle = binomial_mixture(0.5, 20)
        assert r.oracle_exact == pytest.approx(oracle, rel=1e-12)
        assert abs(r.estimate - oracle) <= 4 * r.stderr
        assert not r.bound_violated

    def test_heavy_loss(self):
        r = adv.loss_attack_check(0.9, 100, 10**5, seed=3)
        assert not r.bound_violated
        assert abs(r.mean_survivors - 10) <= 4 * r.survivors_stderr + 1e-9
        assert abs(r.per_state_rate - MU) <= 4 * r.per_state_stderr

    def test_preconditions(self):
        with pytest.raises(DomainError):
            adv.loss_attack_check(0.95, 10, 1000)
        with pytest.raises(DomainError):
            adv.loss_attack_check(1.0, 10, 1000)
