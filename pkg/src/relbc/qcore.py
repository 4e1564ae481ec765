"""Small dense quantum primitives for qubit registers of up to four qubits.

Operators are plain complex ``numpy`` arrays. States and POVMs are thin,
validated, immutable wrappers around them. Every stochastic routine takes
an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, NumericalConsistencyError

MAX_DIM = 16
EQ_TOL = 1e-12
PSD_TOL = 1e-10
PROB_TOL = 1e-9
_JACOBI_OFF_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 100


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic generator for ``(seed, *stream)``.

    Distinct stream tuples give statistically independent generators, so
    parallel workers can derive their own from a shared seed.
    """
    if seed < 0 or any(s < 0 for s in stream):
        raise DomainError("seed and stream indices must be non-negative")
    return np.random.default_rng([int(seed), *map(int, stream)])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _check_dim(dim: int) -> None:
    if dim < 1 or dim > MAX_DIM or dim & (dim - 1):
        raise DomainError(f"dimension must be a power of two <= {MAX_DIM}, got {dim}")


def _check_finite(a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise DomainError("non-finite entries are not admitted")


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        _check_dim(amps.size)
        _check_finite(amps)
        if abs(np.linalg.norm(amps) - 1.0) > EQ_TOL:
            raise DomainError(f"state not normalised (norm {np.linalg.norm(amps)!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0:
            raise DomainError("cannot normalise a zero or non-finite vector")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "PureState") -> complex:
        """<self|other>"""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        """|<self|other>|^2, insensitive to global phase."""
        return abs(self.overlap(other)) ** 2

    def density(self) -> np.ndarray:
        return projector(self)


def identity(dim: int) -> np.ndarray:
    _check_dim(dim)
    return np.eye(dim, dtype=complex)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def is_hermitian(a: np.ndarray, tol: float = EQ_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.all(np.abs(a - dagger(a)) <= tol))


def hermitian_operator(a, tol: float = EQ_TOL) -> np.ndarray:
    """Validate ``a`` as a Hermitian operator and return a frozen copy."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"operator must be square, got shape {a.shape}")
    _check_dim(a.shape[0])
    _check_finite(a)
    if not is_hermitian(a, tol):
        raise DomainError("operator is not Hermitian")
    return _frozen(a)


_SQ2 = 1 / math.sqrt(2)
# |e_1>=|0>, |e_2>=|+>, |e_3>=|1>, |e_4>=|->
_BB84_AMPLITUDES = {
    1: (1.0, 0.0),
    2: (_SQ2, _SQ2),
    3: (0.0, 1.0),
    4: (_SQ2, -_SQ2),
}


def bb84_state(index: int) -> PureState:
    """BB84 state |e_index> with index taken cyclically in 1..4 order 0, +, 1, -."""
    if index not in _BB84_AMPLITUDES:
        raise DomainError(f"BB84 index must be in 1..4, got {index!r}")
    return PureState(_BB84_AMPLITUDES[index])


def bb84_wrap(index: int) -> int:
    """Map any integer onto 1..4 using |e_{i+4}> = |e_i>."""
    return (int(index) - 1) % 4 + 1


def bb84_density(index: int) -> np.ndarray:
    return projector(bb84_state(bb84_wrap(index)))


def projector(state: PureState) -> np.ndarray:
    v = state.amplitudes
    return _frozen(np.outer(v, np.conj(v)))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise CapacityError(f"tensor product dimension {dim} exceeds {MAX_DIM}")
    return _frozen(np.kron(a, b))


def tensor_state(a: PureState, b: PureState) -> PureState:
    if a.dim * b.dim > MAX_DIM:
        raise CapacityError(f"tensor product dimension {a.dim * b.dim} exceeds {MAX_DIM}")
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def _jacobi_eigenvalues(h: np.ndarray) -> np.ndarray:
    """Cyclic complex Jacobi sweeps; returns the diagonal after convergence."""
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    off_tol = _JACOBI_OFF_TOL * scale
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                theta = 0.5 * math.atan2(2.0 * r, (a[q, q] - a[p, p]).real)
                c, s = math.cos(theta), math.sin(theta)
                # columns p, q of D R with D = diag(1, conj(phase)) on (p, q)
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dagger(g) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        raise NumericalConsistencyError("Jacobi iteration did not converge")
    return np.sort(np.diag(a).real)


def eigenvalues(h: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian operator of dimension 2..16."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("operator must be square")
    _check_dim(h.shape[0])
    if not is_hermitian(h, EQ_TOL * max(1.0, float(np.max(np.abs(h))))):
        raise DomainError("eigenvalues requested for a non-Hermitian operator")
    if h.shape[0] == 1:
        return np.array([h[0, 0].real])
    if h.shape[0] == 2:
        a, d = h[0, 0].real, h[1, 1].real
        mean = 0.5 * (a + d)
        rad = math.hypot(0.5 * (a - d), abs(h[0, 1]))
        return np.array([mean - rad, mean + rad])
    return _jacobi_eigenvalues(h)


def min_eigenvalue(h: np.ndarray) -> float:
    return float(eigenvalues(h)[0])


def max_eigenvalue(h: np.ndarray) -> float:
    return float(eigenvalues(h)[-1])


def is_psd(a: np.ndarray, tol: float = PSD_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    return is_hermitian(a, PSD_TOL) and min_eigenvalue(0.5 * (a + dagger(a))) >= -tol


@dataclass(frozen=True, eq=False)
class Povm:
    elements: tuple

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not elems:
            raise DomainError("a POVM needs at least one element")
        dim = elems[0].shape[0]
        _check_dim(dim)
        total = np.zeros((dim, dim), dtype=complex)
        for k, e in enumerate(elems, start=1):
            if e.shape != (dim, dim):
                raise DomainError(f"element {k} has shape {e.shape}, expected {(dim, dim)}")
            _check_finite(e)
            if not is_hermitian(e, PSD_TOL):
                raise DomainError(f"element {k} is not Hermitian")
            if min_eigenvalue(0.5 * (e + dagger(e))) < -PSD_TOL:
                raise DomainError(f"element {k} is not positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(dim))) > PSD_TOL:
            raise DomainError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", tuple(_frozen(e) for e in elems))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.elements[k]


def tensor_povm(a: Povm, b: Povm) -> Povm:
    """Product measurement; element (i, j) sits at position i * len(b) + j."""
    return Povm(tuple(tensor(x, y) for x in a for y in b))


def basis_povm(states: Sequence[PureState]) -> Povm:
    return Povm(tuple(projector(s) for s in states))


def _clean_probabilities(p: np.ndarray) -> np.ndarray:
    total = float(np.sum(p))
    if abs(total - 1.0) > PROB_TOL or np.any(p < -PROB_TOL):
        raise NumericalConsistencyError(f"outcome probabilities inconsistent (sum {total!r})")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def born_probabilities(rho: np.ndarray, povm: Povm, check_state: bool = True) -> np.ndarray:
    """Tr(rho pi_k) for every element, checked and renormalised.

    ``check_state=False`` skips the density-operator test for states the
    caller built from a validated pure state.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (povm.dim, povm.dim):
        raise DomainError(f"state dimension {rho.shape} does not match POVM dimension {povm.dim}")
    if check_state and (not is_psd(rho) or abs(np.trace(rho).real - 1.0) > PSD_TOL):
        raise DomainError("rho is not a density operator")
    # Tr(rho E) = sum_ij rho_ij E_ji
    p = np.array([np.sum(rho * e.T).real for e in povm])
    return _clean_probabilities(p)


def sample_categorical(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one 1-based outcome per row of a (m, k) probability table."""
    probs = np.atleast_2d(probs)
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])[:, None]
    idx = np.sum(u >= cdf[:, :-1], axis=1)
    return idx + 1


def born_sample(rho: np.ndarray, povm: Povm, rng: np.random.Generator, size: int | None = None):
    """Sample 1-based outcome indices k with probability Tr(rho pi_k)."""
    p = born_probabilities(rho, povm)
    if size is None:
        return int(sample_categorical(p, rng)[0])
    return sample_categorical(np.broadcast_to(p, (size, p.size)), rng)


# Bell basis on two qubits: Phi+, Phi-, Psi+, Psi-
BELL_STATES = (
    PureState(np.array([1, 0, 0, 1]) * _SQ2),
    PureState(np.array([1, 0, 0, -1]) * _SQ2),
    PureState(np.array([0, 1, 1, 0]) * _SQ2),
    PureState(np.array([0, 1, -1, 0]) * _SQ2),
)
SINGLET = BELL_STATES[3]
BELL_POVM = Povm(tuple(projector(b) for b in BELL_STATES))


def _teleport_maps() -> tuple:
    # Bell outcome k on (input, B) leaves A in U_k |psi>; U_k = 2 (<beta_k| x I)(I x |singlet>)
    maps = []
    for bell in BELL_STATES:
        u = np.zeros((2, 2), dtype=complex)
        for j in range(2):
            joint = np.kron(np.eye(2)[j], SINGLET.amplitudes).reshape(4, 2)
            u[:, j] = 2.0 * (np.conj(bell.amplitudes) @ joint)
        maps.append(_frozen(u))
    return tuple(maps)


TELEPORT_UNITARIES = _teleport_maps()


@dataclass(frozen=True)
class TeleportResult:
    outcome: int
    unitary: np.ndarray
    received: PureState


def teleport(state: PureState, rng: np.random.Generator) -> TeleportResult:
    """Bell-measure ``state`` against one half of a singlet.

    The far half is left in ``unitary @ state`` (up to global phase); the
    caller decides whether and when to undo it.
    """
    if state.dim != 2:
        raise DomainError("only single qubits can be teleported")
    joint = np.kron(state.amplitudes, SINGLET.amplitudes)
    full = np.outer(joint, np.conj(joint)).reshape(4, 2, 4, 2)
    rho_sent = np.trace(full, axis1=1, axis2=3)
    outcome = int(sample_categorical(born_probabilities(rho_sent, BELL_POVM, check_state=False), rng)[0])
    bell = BELL_STATES[outcome - 1]
    received = PureState.normalized(np.conj(bell.amplitudes) @ joint.reshape(4, 2))
    return TeleportResult(outcome, TELEPORT_UNITARIES[outcome - 1], received)


def teleport_demo(state: PureState, rng: np.random.Generator) -> PureState:
    """Teleport ``state`` and undo the outcome-dependent unitary."""
    result = teleport(state, rng)
    return PureState.normalized(dagger(result.unitary) @ result.received.amplitudes)
