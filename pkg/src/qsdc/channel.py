"""Transmission and adversary models for in-flight qubits.

Channels apply loss and single-qubit noise.  Attacks cover the strategies
analyzed for this protocol family:

* intercept-resend on the checking leg,
* substituting fake entangled pairs for the checking particles and
  harvesting the message particles later,
* coupling a probe qubit to each checking particle through a one-parameter
  unitary (error rate epsilon = beta^2 in both check bases),
* measuring only the message-leg particles, which provably yields nothing.

Ordering convention on each leg: the eavesdropper touches the qubit first
(she sits at the sender's output), then channel loss/noise applies on the
way to the receiver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BellState,
    MeasBasis,
    RandomSource,
    StateVector,
    apply_single,
    make_bell,
)
from .registers import RegisterPool
from . import bellcode

PROBE_ATOL = 1e-12


class ChannelError(RuntimeError):
    """Adversary bookkeeping violated (e.g. harvesting without a stored qubit)."""


class NoiseKind(Enum):
    IDEAL = "ideal"
    BIT_FLIP = "bit_flip"
    DEPOLARIZING = "depolarizing"


@dataclass(frozen=True)
class ChannelModel:
    """Per-photon transmission model: loss probability plus optional noise."""

    noise: NoiseKind = NoiseKind.IDEAL
    p: float = 0.0
    loss: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise probability must be in [0, 1], got {self.p}")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError(f"loss probability must be in [0, 1], got {self.loss}")
        if self.noise is NoiseKind.IDEAL and self.p != 0.0:
            raise ValueError("ideal channel takes no noise probability")

    @classmethod
    def ideal(cls, loss: float = 0.0) -> "ChannelModel":
        return cls(NoiseKind.IDEAL, 0.0, loss)

    @classmethod
    def bit_flip(cls, p: float, loss: float = 0.0) -> "ChannelModel":
        return cls(NoiseKind.BIT_FLIP, p, loss)

    @classmethod
    def depolarizing(cls, p: float, loss: float = 0.0) -> "ChannelModel":
        return cls(NoiseKind.DEPOLARIZING, p, loss)


_DEPOL_PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def transmit(
    state: StateVector,
    qubit: int,
    channel: ChannelModel,
    rand: RandomSource,
) -> StateVector | None:
    """Send one qubit of a register through the channel.

    Returns the (possibly disturbed) register state, or None if the photon
    was lost.  Loss is decided first and independently of the state.
    """
    if channel.loss > 0.0 and rand.random() < channel.loss:
        return None
    if channel.noise is NoiseKind.BIT_FLIP:
        if channel.p > 0.0 and rand.random() < channel.p:
            return apply_single(state, qubit, SIGMA_X)
    elif channel.noise is NoiseKind.DEPOLARIZING:
        if channel.p > 0.0 and rand.random() < channel.p:
            return apply_single(state, qubit, _DEPOL_PAULIS[rand.integers(3)])
    return state


@dataclass(frozen=True)
class ProbeParams:
    """Real amplitudes (alpha, beta) of the probe coupling, alpha^2 + beta^2 = 1.

    The conjugate branch uses alpha' = alpha and beta' = -beta, which
    satisfies the unitarity constraints identically.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if abs(self.alpha**2 + self.beta**2 - 1.0) > PROBE_ATOL:
            raise ValueError(
                f"alpha^2 + beta^2 must equal 1, got {self.alpha**2 + self.beta**2}"
            )

    @property
    def alpha_prime(self) -> float:
        return self.alpha

    @property
    def beta_prime(self) -> float:
        return -self.beta

    @property
    def error_rate(self) -> float:
        """Disturbance epsilon = beta^2 seen by the checking measurements."""
        return self.beta**2

    @classmethod
    def from_error_rate(cls, eps: float) -> "ProbeParams":
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"error rate must be in [0, 1], got {eps}")
        return cls(alpha=float(np.sqrt(1.0 - eps)), beta=float(np.sqrt(eps)))


def probe_unitary(params: ProbeParams) -> np.ndarray:
    """4x4 unitary on (photon, probe) realizing the probe coupling.

    With the probe prepared in |0>:
        |0>|0>  ->  alpha |0>|0> + beta |1>|1>
        |1>|0>  ->  alpha |1>|0> - beta |0>|1>
    i.e. the probe records |1> exactly on the error branch.  The action on
    probe-|1> inputs completes the map unitarily and is never exercised.
    """
    a, b = params.alpha, params.beta
    u = np.array(
        [
            [a, 0.0, 0.0, -b],
            [0.0, a, -b, 0.0],
            [0.0, b, a, 0.0],
            [b, 0.0, 0.0, a],
        ],
        dtype=complex,
    )
    return u


class AttackKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    FAKE_EPR = "fake_epr"
    UNITARY_PROBE = "unitary_probe"
    INTERCEPT_M_ONLY = "intercept_m_only"


@dataclass(frozen=True)
class AttackModel:
    """One adversary strategy, fixed for a whole run."""

    kind: AttackKind = AttackKind.NONE
    basis: MeasBasis | None = None
    probe: ProbeParams | None = None

    def __post_init__(self) -> None:
        needs_basis = self.kind in (AttackKind.INTERCEPT_RESEND, AttackKind.INTERCEPT_M_ONLY)
        if needs_basis and self.basis is None:
            raise ValueError(f"{self.kind.value} attack requires a measuring basis")
        if not needs_basis and self.basis is not None:
            raise ValueError(f"{self.kind.value} attack takes no measuring basis")
        if self.kind is AttackKind.UNITARY_PROBE and self.probe is None:
            raise ValueError("unitary_probe attack requires probe parameters")
        if self.kind is not AttackKind.UNITARY_PROBE and self.probe is not None:
            raise ValueError(f"{self.kind.value} attack takes no probe parameters")

    @classmethod
    def none(cls) -> "AttackModel":
        return cls()

    @classmethod
    def intercept_resend(cls, basis: MeasBasis = MeasBasis.Z) -> "AttackModel":
        return cls(AttackKind.INTERCEPT_RESEND, basis=basis)

    @classmethod
    def fake_epr(cls) -> "AttackModel":
        return cls(AttackKind.FAKE_EPR)

    @classmethod
    def unitary_probe(cls, probe: ProbeParams) -> "AttackModel":
        return cls(AttackKind.UNITARY_PROBE, probe=probe)

    @classmethod
    def intercept_m_only(cls, basis: MeasBasis = MeasBasis.Z) -> "AttackModel":
        return cls(AttackKind.INTERCEPT_M_ONLY, basis=basis)


@dataclass
class EveRecord:
    """Classical side of the adversary: outcomes, stored labels, guesses.

    Append-only while a run executes; dictionaries are keyed by pair index.
    """

    c_outcomes: dict[int, int] = field(default_factory=dict)
    m_outcomes: dict[int, int] = field(default_factory=dict)
    harvested: dict[int, int] = field(default_factory=dict)
    stored_c: dict[int, str] = field(default_factory=dict)
    fake_m: dict[int, str] = field(default_factory=dict)
    probe: dict[int, str] = field(default_factory=dict)


class Eavesdropper:
    """Applies the configured attack to each in-flight qubit.

    ``touch_c_leg`` / ``touch_m_leg`` take the label of the qubit entering
    the channel and return the label of the qubit that actually travels on
    to the receiver (differing from the input only for the fake-pair
    substitution).
    """

    def __init__(self, attack: AttackModel):
        self.attack = attack
        self.record = EveRecord()
        self._probe_u = probe_unitary(attack.probe) if attack.probe is not None else None

    def touch_c_leg(self, pool: RegisterPool, pair: int, label: str, rand: RandomSource) -> str:
        kind = self.attack.kind
        if kind in (AttackKind.NONE, AttackKind.INTERCEPT_M_ONLY):
            return label
        if kind is AttackKind.INTERCEPT_RESEND:
            outcome = pool.measure(label, self.attack.basis, rand)
            self.record.c_outcomes[pair] = outcome
            return label
        if kind is AttackKind.UNITARY_PROBE:
            probe_label = f"E{pair}"
            pool.add_qubit(label, probe_label, "0")
            pool.apply_pair(label, probe_label, self._probe_u)
            self.record.probe[pair] = probe_label
            return label
        # Fake-pair substitution: keep the genuine particle, forward one
        # half of a fresh singlet of Eve's own.
        fake_c, fake_m = f"FC{pair}", f"FM{pair}"
        pool.new_register([fake_c, fake_m], make_bell(BellState.PSI_MINUS))
        self.record.stored_c[pair] = label
        self.record.fake_m[pair] = fake_m
        return fake_c

    def touch_m_leg(self, pool: RegisterPool, pair: int, label: str, rand: RandomSource) -> str:
        kind = self.attack.kind
        if kind in (AttackKind.NONE, AttackKind.UNITARY_PROBE):
            return label
        if kind is AttackKind.INTERCEPT_RESEND:
            return label
        if kind is AttackKind.INTERCEPT_M_ONLY:
            outcome = pool.measure(label, self.attack.basis, rand)
            self.record.m_outcomes[pair] = outcome
            # Best-effort 2-bit guess: measured bit plus a coin.  The single
            # particle is maximally mixed whatever was encoded, so this sits
            # at random-guess accuracy.
            self.record.harvested[pair] = (outcome << 1) | int(rand.integers(2))
            return label
        # Fake-pair harvest: Bell-measure the captured M particle against the
        # stored C particle, then relay the recovered operation on the fake
        # pair so the substitution stays invisible to the second check.
        stored = self.record.stored_c.get(pair)
        if stored is None:
            raise ChannelError(f"no stored C particle for pair {pair}; cannot harvest")
        result = pool.bell_measure(stored, label, rand)
        code = bellcode.code_of(result)
        self.record.harvested[pair] = code
        fake_m = self.record.fake_m[pair]
        op = bellcode.op_for_bits(code)
        if op is not bellcode.CodeOp.U0:
            pool.apply(fake_m, op.matrix)
        return fake_m
