"""Honest commit/unveil runs of the measurement-outcome bit commitment.

Bob hands Alice random BB84 qubits at P. Alice measures them all in the
basis named by the committed bit and ships the outcomes, one-time-pad encrypted, to
the agents at Q0 and Q1. Each agent reveals the outcomes to Bob's local
agent; Bob compares both wings at a point in their joint future and checks
the outcomes against the states Bob sent.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import qcore
from .errors import DomainError, ProtocolFault
from .qcore import PureState
from .spacetime import DeliveryLog, DeliveryResult, EventPoint, Geometry, Message, standard_geometry

DEFAULT_SEED = 20120801
LOST = -1
_LOST_BYTE = 2

_SQ2 = 1 / math.sqrt(2)


class Basis(enum.Enum):
    COMPUTATIONAL = 0
    HADAMARD = 1

    @classmethod
    def for_bit(cls, bit: int) -> "Basis":
        if bit not in (0, 1):
            raise DomainError(f"bit must be 0 or 1, got {bit!r}")
        return cls(bit)

    @property
    def vectors(self) -> np.ndarray:
        """Rows are the outcome-0 and outcome-1 basis vectors."""
        if self is Basis.COMPUTATIONAL:
            return np.array([[1, 0], [0, 1]], dtype=complex)
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)

    @property
    def bb84_indices(self) -> tuple[int, int]:
        """BB84 indices of the outcome-0 and outcome-1 eigenstates."""
        return (1, 3) if self is Basis.COMPUTATIONAL else (2, 4)


def expected_outcome(bb84_index) -> np.ndarray:
    """Outcome an ideal in-basis measurement gives: 0 for |0>, |+>; 1 for |1>, |->."""
    return np.where(np.isin(bb84_index, (1, 2)), 0, 1)


@dataclass(frozen=True)
class NoiseModel:
    depolarizing: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.depolarizing <= 1.0:
            raise DomainError("depolarizing parameter must lie in [0, 1]")


@dataclass(frozen=True)
class LossModel:
    rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise DomainError("loss rate must lie in [0, 1)")

    @property
    def enabled(self) -> bool:
        return self.rate > 0.0


@dataclass(frozen=True, eq=False)
class PreparedStates:
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int8).reshape(-1)
        if idx.size == 0 or np.any((idx < 1) | (idx > 4)):
            raise DomainError("prepared indices must be a non-empty list of values in 1..4")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def n(self) -> int:
        return self.indices.size

    @property
    def states(self) -> list[PureState]:
        return [qcore.bb84_state(int(k)) for k in self.indices]

    @property
    def amplitudes(self) -> np.ndarray:
        table = np.array([qcore.bb84_state(k).amplitudes for k in range(1, 5)])
        return table[self.indices - 1]


def bob_prepare(n: int, rng: np.random.Generator) -> PreparedStates:
    if n < 1:
        raise DomainError("n must be >= 1")
    return PreparedStates(rng.integers(1, 5, size=n))


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    outcomes: np.ndarray
    loss_enabled: bool = False

    def __post_init__(self):
        out = np.array(self.outcomes, dtype=np.int8).reshape(-1)
        if np.any((out != 0) & (out != 1) & (out != LOST)):
            raise DomainError("outcomes must be 0, 1 or LOST")
        if not self.loss_enabled and np.any(out == LOST):
            raise DomainError("Lost entries require an enabled loss model")
        out.setflags(write=False)
        object.__setattr__(self, "outcomes", out)

    @property
    def n(self) -> int:
        return self.outcomes.size

    @property
    def lost(self) -> np.ndarray:
        return self.outcomes == LOST

    @property
    def loss_fraction(self) -> float:
        return float(np.mean(self.lost))

    def to_bytes(self) -> bytes:
        return np.where(self.lost, _LOST_BYTE, self.outcomes).astype(np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, loss_enabled: bool = False) -> "OutcomeRecord":
        raw = np.frombuffer(data, dtype=np.uint8)
        if np.any(raw > _LOST_BYTE):
            raise DomainError("corrupt outcome encoding")
        return cls(np.where(raw == _LOST_BYTE, LOST, raw), loss_enabled)

    def __eq__(self, other) -> bool:
        return isinstance(other, OutcomeRecord) and np.array_equal(self.outcomes, other.outcomes)

    __hash__ = None


def _amplitudes(states) -> np.ndarray:
    if isinstance(states, PreparedStates):
        return states.amplitudes
    amps = np.array([s.amplitudes for s in states])
    if amps.ndim != 2 or amps.shape[1] != 2:
        raise DomainError("Alice measures single qubits")
    return amps


def alice_commit(
    bit: int,
    states: PreparedStates | Sequence[PureState],
    rng: np.random.Generator,
    noise: NoiseModel = NoiseModel(),
    loss: LossModel = LossModel(),
) -> OutcomeRecord:
    """Measure every qubit in the basis for ``bit``; depolarise first, then drop losses.

    Loss flags are drawn before any measurement, as they are announced at P.
    """
    basis = Basis.for_bit(bit)
    amps = _amplitudes(states)
    lost = rng.random(len(amps)) < loss.rate if loss.enabled else np.zeros(len(amps), bool)
    # Born rule for the two basis projectors after the depolarising channel
    p0 = np.abs(amps @ np.conj(basis.vectors[0])) ** 2
    p0 = (1.0 - noise.depolarizing) * p0 + 0.5 * noise.depolarizing
    probs = np.clip(np.column_stack([p0, 1.0 - p0]), 0.0, 1.0)
    outcomes = qcore.sample_categorical(probs, rng) - 1
    outcomes = np.where(lost, LOST, outcomes)
    return OutcomeRecord(outcomes, loss.enabled)


@dataclass(eq=False)
class PadChannel:
    pad: bytes
    sender: str
    receiver: str
    emit: EventPoint
    receive: EventPoint
    consumed: bool = False

    @classmethod
    def fresh(cls, length: int, rng: np.random.Generator, sender: str, receiver: str,
              emit: EventPoint, receive: EventPoint) -> "PadChannel":
        return cls(rng.bytes(length), sender, receiver, emit, receive)


@dataclass(frozen=True)
class RelayResult:
    ciphertext: bytes
    delivery: DeliveryResult
    decrypted: OutcomeRecord | None

    @property
    def delivered(self) -> bool:
        return self.delivery.delivered


def _xor(a: bytes, b: bytes) -> bytes:
    return (np.frombuffer(a, np.uint8) ^ np.frombuffer(b[: len(a)], np.uint8)).tobytes()


def relay_outcomes(record: OutcomeRecord, channel: PadChannel, log: DeliveryLog | None = None) -> RelayResult:
    """Encrypt ``record`` with the channel's pad and send it along the channel's route."""
    if channel.consumed:
        raise ProtocolFault(f"one-time pad {channel.sender}->{channel.receiver} already used")
    plain = record.to_bytes()
    if len(channel.pad) < len(plain):
        raise DomainError("pad shorter than the message")
    channel.consumed = True
    cipher = _xor(plain, channel.pad)
    message = Message(channel.sender, channel.receiver, cipher, kind="ciphertext")
    log = log if log is not None else DeliveryLog()
    delivery = log.send(message, channel.emit, channel.receive)
    decrypted = None
    if delivery.delivered:
        decrypted = OutcomeRecord.from_bytes(_xor(cipher, channel.pad), record.loss_enabled)
    return RelayResult(cipher, delivery, decrypted)


@dataclass(frozen=True)
class UnveilingClaim:
    wing: int
    claimed_bit: int
    outcomes: OutcomeRecord
    revealed_at: EventPoint | None = None

    def __post_init__(self):
        if self.wing not in (0, 1):
            raise DomainError("wing must be 0 (Q0) or 1 (Q1)")
        Basis.for_bit(self.claimed_bit)

    def to_bytes(self) -> bytes:
        return bytes([self.claimed_bit]) + self.outcomes.to_bytes()


class VerdictKind(enum.Enum):
    ACCEPT = "Accept"
    REJECT_WING_MISMATCH = "RejectWingMismatch"
    REJECT_INCONSISTENT = "RejectInconsistent"
    REJECT_TIMING = "RejectTiming"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    error_fractions: tuple = (0.0, 0.0)
    mismatch_positions: tuple = ()
    loss_fraction: float = 0.0
    checked: int = 0

    @property
    def accepted(self) -> bool:
        return self.kind is VerdictKind.ACCEPT


@dataclass(frozen=True)
class ConsistencyResult:
    passed: bool
    error_fraction: float
    mismatches: tuple
    checked: int


def consistency_check(bit: int, outcomes: np.ndarray, prepared_indices: np.ndarray, tolerance: float) -> ConsistencyResult:
    """Compare declared outcomes with the prepared states that lie in the claimed basis.

    Lost positions and conjugate-basis positions are not constrained.
    """
    basis = Basis.for_bit(bit)
    outcomes = np.asarray(outcomes)
    prepared_indices = np.asarray(prepared_indices)
    if outcomes.shape != prepared_indices.shape:
        raise DomainError("outcome record and prepared list differ in length")
    checkable = np.isin(prepared_indices, basis.bb84_indices) & (outcomes != LOST)
    wrong = checkable & (outcomes != expected_outcome(prepared_indices))
    checked = int(np.count_nonzero(checkable))
    frac = float(np.count_nonzero(wrong)) / checked if checked else 0.0
    return ConsistencyResult(frac <= tolerance, frac, tuple(np.flatnonzero(wrong).tolist()), checked)


def bob_verify(
    claim0: UnveilingClaim,
    claim1: UnveilingClaim,
    prepared: PreparedStates,
    tolerance: float = 0.0,
    max_loss: float = 0.0,
    geometry: Geometry | None = None,
) -> Verdict:
    """Bob's acceptance decision on the two unveilings.

    With ``geometry`` given, each claim must also have been revealed at its
    wing's event.
    """
    if claim0.wing != 0 or claim1.wing != 1:
        raise DomainError("claims must come from Q0 and Q1 respectively")
    if not 0.0 <= tolerance < 1.0 or not 0.0 <= max_loss < 1.0:
        raise DomainError("tolerance and max_loss must lie in [0, 1)")
    for claim in (claim0, claim1):
        if claim.outcomes.n != prepared.n:
            raise DomainError("outcome record length does not match the prepared states")

    if geometry is not None:
        for claim in (claim0, claim1):
            if claim.revealed_at != geometry.wing(claim.wing):
                return Verdict(VerdictKind.REJECT_TIMING)

    a, b = claim0.outcomes.outcomes, claim1.outcomes.outcomes
    if claim0.claimed_bit != claim1.claimed_bit or not np.array_equal(a, b):
        return Verdict(VerdictKind.REJECT_WING_MISMATCH, mismatch_positions=tuple(np.flatnonzero(a != b).tolist()))

    loss_fraction = claim0.outcomes.loss_fraction
    if loss_fraction > max_loss:
        return Verdict(VerdictKind.REJECT_INCONSISTENT, loss_fraction=loss_fraction)

    checks = [consistency_check(c.claimed_bit, c.outcomes.outcomes, prepared.indices, tolerance) for c in (claim0, claim1)]
    kind = VerdictKind.ACCEPT if all(c.passed for c in checks) else VerdictKind.REJECT_INCONSISTENT
    return Verdict(
        kind,
        error_fractions=tuple(c.error_fraction for c in checks),
        mismatch_positions=checks[0].mismatches,
        loss_fraction=loss_fraction,
        checked=checks[0].checked,
    )


@dataclass(frozen=True)
class RunConfig:
    n: int = 100
    bit: int = 0
    separation: float = 1.0
    noise: float = 0.0
    loss: float = 0.0
    tolerance: float = 0.0
    max_loss: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        Basis.for_bit(self.bit)
        if not self.separation > 0:
            raise DomainError("separation must be positive")
        NoiseModel(self.noise)
        LossModel(self.loss)
        if not 0.0 <= self.tolerance < 1.0 or not 0.0 <= self.max_loss < 1.0:
            raise DomainError("tolerance and max_loss must lie in [0, 1)")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")

    @classmethod
    def from_mapping(cls, values: Mapping) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(values) - known
        if unknown:
            raise DomainError(f"unknown run-config fields: {sorted(unknown)}")
        return cls(**values)

    @property
    def geometry(self) -> Geometry:
        return standard_geometry(self.separation)


def digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class Transcript:
    config: RunConfig
    prepared: PreparedStates
    record: OutcomeRecord
    ciphertexts: tuple
    claims: tuple
    verdict: Verdict
    log: DeliveryLog = field(default_factory=DeliveryLog)

    def pre_unveiling_bytes(self) -> bytes:
        """Everything Bob could intercept before the unveiling."""
        return b"".join(self.ciphertexts)

    def text_report(self) -> str:
        lines = []
        for entry in self.log:
            m = entry.message
            status = "" if entry.delivered else " REFUSED"
            lines.append(f"{m.sender} -> {m.receiver} emit={entry.emitted_at} recv={entry.received_at} "
                         f"kind={m.kind} digest={digest(m.payload)}{status}")
        lines.append(f"verdict={self.verdict.kind.value}")
        return "\n".join(lines)

    def summary(self) -> dict:
        v = self.verdict
        return {
            "config": asdict(self.config),
            "verdict": v.kind.value,
            "error_fractions": list(v.error_fractions),
            "loss_fraction": v.loss_fraction,
            "checked_positions": v.checked,
            "mismatches": len(v.mismatch_positions),
            "messages": len(self.log),
            "causality_violations": len(self.log.violations()),
            "transcript_digest": digest(self.text_report().encode()),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def run_honest(config: RunConfig, rng: np.random.Generator | None = None) -> Transcript:
    """Prepare, commit, relay to both wings, unveil and verify."""
    rng = rng if rng is not None else qcore.make_rng(config.seed)
    geo = config.geometry
    log = DeliveryLog()
    comparison = geo.comparison_point

    prepared = bob_prepare(config.n, rng)
    log.send(Message("bob@P", "alice@P", f"{config.n} qubits".encode(), kind="quantum"), geo.p, geo.p)

    loss = LossModel(config.loss)
    record = alice_commit(config.bit, prepared, rng, NoiseModel(config.noise), loss)
    if loss.enabled:
        report = np.packbits(record.lost).tobytes()
        log.send(Message("alice@P", "bob@P", report, kind="loss-report"), geo.p, geo.p)

    ciphertexts, claims = [], []
    for wing in (0, 1):
        q = geo.wing(wing)
        channel = PadChannel.fresh(record.n, rng, "alice@P", f"alice@Q{wing}", geo.p, q)
        relayed = relay_outcomes(record, channel, log)
        ciphertexts.append(relayed.ciphertext)
        if relayed.decrypted is None:
            continue
        claim = UnveilingClaim(wing, config.bit, relayed.decrypted, revealed_at=q)
        log.send(Message(f"alice@Q{wing}", f"bob@Q{wing}", claim.to_bytes(), kind="unveil"), q, q)
        log.send(Message(f"bob@Q{wing}", "bob@C", claim.to_bytes(), kind="forward"), q, comparison)
        claims.append(claim)

    if len(claims) < 2:
        verdict = Verdict(VerdictKind.REJECT_TIMING)
    else:
        verdict = bob_verify(claims[0], claims[1], prepared, config.tolerance, config.max_loss, geo)
    return Transcript(config, prepared, record, tuple(ciphertexts), tuple(claims), verdict, log)
