import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relbc import qcore
from relbc.errors import CapacityError, DomainError, NumericalConsistencyError
from relbc.qcore import Povm, PureState, bb84_state, projector, tensor

SQ2 = 1 / math.sqrt(2)


def random_state(rng, dim=2):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.normalized(v)


def random_hermitian(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g + g.conj().T


def random_density(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g.conj().T @ g
    return rho / np.trace(rho).real


def random_povm(rng, dim, k):
    raw = []
    for _ in range(k):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(g.conj().T @ g)
    w, v = np.linalg.eigh(sum(raw))
    s = v @ np.diag(w**-0.5) @ v.conj().T
    elems = [s @ r @ s for r in raw]
    return Povm(tuple(0.5 * (e + e.conj().T) for e in elems))


class TestStates:
    def test_bb84_amplitudes(self):
        np.testing.assert_allclose(bb84_state(1).amplitudes, [1, 0])
        np.testing.assert_allclose(bb84_state(2).amplitudes, [SQ2, SQ2])
        np.testing.assert_allclose(bb84_state(3).amplitudes, [0, 1])
        np.testing.assert_allclose(bb84_state(4).amplitudes, [SQ2, -SQ2])

    def test_orthogonal_pair(self):
        assert bb84_state(1).overlap(bb84_state(3)) == 0

    @pytest.mark.parametrize("bad", [0, 5, -1, 2.5])
    def test_bb84_index_out_of_range(self, bad):
        with pytest.raises(DomainError):
            bb84_state(bad)

    def test_wrap_convention(self):
        assert [qcore.bb84_wrap(i) for i in range(1, 10)] == [1, 2, 3, 4, 1, 2, 3, 4, 1]

    def test_state_rejects_unnormalised_and_nan(self):
        with pytest.raises(DomainError):
            PureState([1.0, 1.0])
        with pytest.raises(DomainError):
            PureState([float("nan"), 0.0])
        with pytest.raises(DomainError):
            PureState([1.0, 0.0, 0.0])

    def test_amplitudes_are_read_only(self):
        s = bb84_state(1)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 2

    def test_fidelity_ignores_global_phase(self):
        s = bb84_state(2)
        assert PureState(1j * s.amplitudes).fidelity(s) == pytest.approx(1.0, abs=1e-15)


class TestProjector:
    def test_examples(self):
        np.testing.assert_allclose(projector(bb84_state(1)), [[1, 0], [0, 0]])
        np.testing.assert_allclose(projector(bb84_state(2)), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_idempotent_hermitian_unit_trace(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            dim = int(rng.choice([2, 4, 8, 16]))
            p = projector(random_state(rng, dim))
            assert np.max(np.abs(p @ p - p)) <= 1e-12
            assert qcore.is_hermitian(p)
            assert abs(np.trace(p) - 1) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 1e-3))
    def test_idempotent_property(self, v):
        p = projector(PureState.normalized(np.array(v[:2]) + 1j * np.array(v[2:])))
        assert np.max(np.abs(p @ p - p)) <= 1e-12


class TestTensor:
    def test_identity_and_basis(self):
        np.testing.assert_array_equal(tensor(qcore.identity(2), qcore.identity(2)), qcore.identity(4))
        p0 = projector(bb84_state(1))
        np.testing.assert_array_equal(tensor(p0, p0), np.diag([1, 0, 0, 0]))

    def test_trace_multiplicative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = random_hermitian(rng, 2), random_hermitian(rng, 4)
            assert np.trace(tensor(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-10)

    def test_associative_up_to_dim_16(self):
        rng = np.random.default_rng(4)
        for dims in [(2, 2, 2), (2, 2, 4), (2, 4, 2), (4, 2, 2)]:
            a, b, c = (random_hermitian(rng, d) for d in dims)
            assert np.max(np.abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c)))) <= 1e-12

    def test_psd_closed(self):
        rng = np.random.default_rng(5)
        a, b = random_density(rng, 2), random_density(rng, 4)
        assert qcore.min_eigenvalue(tensor(a, b)) >= -1e-12

    def test_capacity(self):
        with pytest.raises(CapacityError):
            tensor(qcore.identity(4), qcore.identity(8))


class TestPovm:
    def test_rejects_incomplete(self):
        with pytest.raises(DomainError):
            Povm((projector(bb84_state(1)),))

    def test_rejects_non_psd(self):
        with pytest.raises(DomainError):
            Povm((np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])))

    def test_tensor_povm_is_povm(self):
        rng = np.random.default_rng(6)
        a = random_povm(rng, 2, 3)
        b = random_povm(rng, 2, 4)
        prod = qcore.tensor_povm(a, b)
        assert len(prod) == 12 and prod.dim == 4


class TestEigen:
    def test_examples(self):
        assert qcore.min_eigenvalue(np.diag([3.0, -1.0])) == -1.0
        assert qcore.min_eigenvalue(qcore.identity(4)) == 1.0

    @pytest.mark.parametrize("dim", [2, 4, 8, 16])
    def test_rayleigh_quotient_oracle(self, dim):
        rng = np.random.default_rng(dim)
        for _ in range(10):
            h = random_hermitian(rng, dim)
            lo = qcore.min_eigenvalue(h)
            for _ in range(100):
                v = random_state(rng, dim).amplitudes
                assert lo <= np.vdot(v, h @ v).real + 1e-12

    @pytest.mark.parametrize("dim", [2, 4, 8, 16])
    def test_against_lapack(self, dim):
        rng = np.random.default_rng(100 + dim)
        for _ in range(30):
            h = random_hermitian(rng, dim)
            np.testing.assert_allclose(qcore.eigenvalues(h), np.linalg.eigvalsh(h), atol=1e-10)

    def test_degenerate_and_diagonal(self):
        np.testing.assert_allclose(qcore.eigenvalues(np.diag([2.0, 2.0, -3.0, 2.0])), [-3, 2, 2, 2])

    def test_non_hermitian_rejected(self):
        with pytest.raises(DomainError):
            qcore.min_eigenvalue(np.array([[0, 1], [0, 0]], dtype=complex))


class TestBornSample:
    def test_eigenstate(self):
        povm = qcore.basis_povm([bb84_state(1), bb84_state(3)])
        rng = np.random.default_rng(0)
        outcomes = qcore.born_sample(projector(bb84_state(1)), povm, rng, size=1000)
        assert np.all(outcomes == 1)
        assert qcore.born_sample(projector(bb84_state(1)), povm, rng) == 1

    def test_unbiased_superposition(self):
        povm = qcore.basis_povm([bb84_state(1), bb84_state(3)])
        outcomes = qcore.born_sample(projector(bb84_state(2)), povm, np.random.default_rng(1), size=10**6)
        assert abs(np.mean(outcomes == 1) - 0.5) <= 0.002

    def test_optimal_povm_on_zero(self):
        from relbc.discrimination import optimal_povm

        # |<0|phi_i>|^2 / 2 = cos^2(theta_i) / 2
        exact = [0.5 * math.cos(i * math.pi / 4 - math.pi / 8) ** 2 for i in range(1, 5)]
        outcomes = qcore.born_sample(projector(bb84_state(1)), optimal_povm().povm, np.random.default_rng(2),
                                     size=10**6)
        freq = np.bincount(outcomes, minlength=5)[1:] / 10**6
        np.testing.assert_allclose(freq, exact, atol=0.002)

    def test_random_pairs_within_four_stderr(self):
        rng = np.random.default_rng(7)
        draws = 10**6
        for k in range(10):
            dim = 2 if k < 5 else 4
            rho = random_density(rng, dim)
            povm = random_povm(rng, dim, 3 + k % 3)
            exact = np.array([np.trace(rho @ e).real for e in povm])
            freq = np.bincount(qcore.born_sample(rho, povm, rng, size=draws), minlength=len(povm) + 1)[1:] / draws
            se = np.sqrt(exact * (1 - exact) / draws)
            assert np.all(np.abs(freq - exact) <= 4 * se + 1e-12)

    def test_dimension_mismatch(self):
        povm = qcore.basis_povm([bb84_state(1), bb84_state(3)])
        with pytest.raises(DomainError):
            qcore.born_sample(qcore.identity(4) / 4, povm, np.random.default_rng(0))

    def test_inconsistent_total_raises(self):
        povm = qcore.basis_povm([bb84_state(1), bb84_state(3)])
        with pytest.raises(NumericalConsistencyError):
            qcore.born_probabilities(1.5 * projector(bb84_state(1)), povm, check_state=False)

    def test_dust_is_clamped(self):
        p = qcore._clean_probabilities(np.array([1.0 + 5e-13, -5e-13]))
        assert p[1] == 0.0 and p.sum() == 1.0

    def test_not_a_density_operator(self):
        povm = qcore.basis_povm([bb84_state(1), bb84_state(3)])
        with pytest.raises(DomainError):
            qcore.born_sample(np.diag([1.5, -0.5]), povm, np.random.default_rng(0))


class TestTeleport:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_bb84_round_trip(self, k):
        out = qcore.teleport_demo(bb84_state(k), np.random.default_rng(k))
        assert abs(out.fidelity(bb84_state(k)) - 1) <= 1e-12

    def test_random_states_all_outcomes(self):
        rng = np.random.default_rng(9)
        psi = random_state(rng)
        counts = np.zeros(5)
        for _ in range(1000):
            res = qcore.teleport(psi, rng)
            counts[res.outcome] += 1
            back = PureState.normalized(qcore.dagger(res.unitary) @ res.received.amplitudes)
            assert abs(back.fidelity(psi) - 1) <= 1e-12
        np.testing.assert_allclose(counts[1:] / 1000, 0.25, atol=0.05)

    def test_unitaries_are_unitary(self):
        for u in qcore.TELEPORT_UNITARIES:
            np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)

    def test_rejects_two_qubits(self):
        with pytest.raises(DomainError):
            qcore.teleport(qcore.BELL_STATES[0], np.random.default_rng(0))


def test_make_rng_is_deterministic():
    a = qcore.make_rng(5, 1).random(4)
    b = qcore.make_rng(5, 1).random(4)
    c = qcore.make_rng(5, 2).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
