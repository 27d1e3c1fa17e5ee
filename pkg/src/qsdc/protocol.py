"""Two-phase EPR-block secure direct communication protocol.

One run plays both parties against a configurable channel and adversary:

1.  Alice prepares a block of N singlet pairs and splits it into the
    checking sequence (C, one particle per pair) and the message-coding
    sequence (M, the partners she keeps).
2.  The C particles travel to Bob; a random fraction is consumed by a
    joint Z/X eavesdropping check whose outcomes must be opposite.
3.  On acceptance Alice dense-codes 2 bits per pair onto her M particles
    (reserving random sampling pairs with ops known only to her), sends
    them, and Bob reads each pair out with a Bell-basis measurement.
4.  The revealed sampling pairs give the second error-rate estimate; the
    run accepts or aborts.  Error correction of the raw bit stream is out
    of scope: the report carries the pre-correction bits and error rates.

Against lossy channels an optional filter performs entanglement swapping
on consecutive received C particles as a particle-existence detection:
groups with a missing photon are discarded, and the protocol continues on
the surviving groups.  Swapping consumes Bob's C particles, so in this
mode a checked group compares Alice's local Bell measurement of her two
partner particles with Bob's announced swapping outcome (for two singlets
they must match exactly), each surviving group carries one 2-bit value via
an op on the lead partner particle, and Bob decodes a group by Bell-
measuring the two received M particles and XORing with his swap outcome.

Every random draw comes from one seeded generator, so a run is a pure
function of its configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import bellcode, security
from .bellcode import CodeOp, chunk_message, code_of, code_to_bits
from .channel import AttackKind, AttackModel, ChannelModel, Eavesdropper, transmit
from .qcore import BellState, MeasBasis, RandomSource, make_bell
from .registers import RegisterPool

U64_MASK = 0xFFFFFFFFFFFFFFFF


class ConfigError(ValueError):
    """A protocol or experiment configuration field is invalid."""


class ProtocolError(RuntimeError):
    """Protocol phases driven out of order."""


class Verdict(Enum):
    ACCEPT = "accept"
    ABORT_FIRST_CHECK = "abort_first_check"
    ABORT_SECOND_CHECK = "abort_second_check"


class Role(Enum):
    FIRST_CHECK = "first_check"
    SAMPLE = "sample"
    MESSAGE = "message"
    SWAP_PARTNER = "swap_partner"
    DISCARDED = "discarded"


@dataclass(slots=True)
class PairRecord:
    """Per-pair ledger: role, coding, measurements, loss and swap flags."""

    index: int
    prepared: BellState = BellState.PSI_MINUS
    role: Role | None = None
    applied_op: CodeOp | None = None
    alice_meas: tuple[MeasBasis, int] | None = None
    bob_meas: tuple[MeasBasis, int] | None = None
    alice_bell_result: BellState | None = None
    bob_bell_result: BellState | None = None
    decoded_code: int | None = None
    lost_c: bool = False
    lost_m: bool = False
    bob_c: str | None = None
    bob_m: str | None = None
    swap_group: int | None = None
    swap_partner_index: int | None = None
    swap_outcome: BellState | None = None
    swap_survived: bool | None = None


@dataclass(slots=True)
class Event:
    """One entry of the run's structured event log."""

    name: str
    info: dict


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything a run depends on; two identical configs replay identically.

    ``check_fraction`` and ``sample_fraction`` may be 0 to skip the
    respective check.  ``distance_m`` and ``photon_rate_hz``, when given,
    add the transmission-delay bound to the report.
    """

    n_pairs: int
    message: str = ""
    seed: int = 0
    check_fraction: float = 0.1
    sample_fraction: float = 0.05
    error_threshold: float = 0.05
    channel_c: ChannelModel = ChannelModel.ideal()
    channel_m: ChannelModel = ChannelModel.ideal()
    attack: AttackModel = AttackModel.none()
    swap_filter: bool = False
    min_usable_pairs: int = 0
    distance_m: float | None = None
    signal_speed_mps: float = 2.0e8
    photon_rate_hz: float | None = None

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ConfigError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if not 0 <= self.seed <= U64_MASK:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        for name in ("check_fraction", "sample_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {v}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ConfigError(f"error_threshold must be in [0, 1], got {self.error_threshold}")
        if any(c not in "01" for c in self.message):
            raise ConfigError("message must contain only '0' and '1'")
        if len(self.message) > 2 * self._max_units():
            raise ConfigError(
                f"message of {len(self.message)} bits exceeds the block's "
                f"capacity of {2 * self._max_units()} bits"
            )
        if self.min_usable_pairs < 0:
            raise ConfigError("min_usable_pairs must be >= 0")
        if self.signal_speed_mps <= 0:
            raise ConfigError("signal_speed_mps must be positive")
        for name in ("distance_m", "photon_rate_hz"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")

    def _max_units(self) -> int:
        return self.n_pairs // 2 if self.swap_filter else self.n_pairs


@dataclass
class RunReport:
    """Aggregate outcome of one protocol run."""

    verdict: Verdict
    first_check_error_rate: float
    second_check_error_rate: float | None
    decoded_message: str | None
    n_pairs: int
    pairs_lost: int
    n_checked: int
    n_sample: int
    n_message: int
    pad_bits: int
    lost_message_bits: int
    eve_harvest_bits: int
    eve_harvest_accuracy: float | None
    delay_bound_s: float | None
    seed: int

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["verdict"] = self.verdict.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def mix_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit trial seed from (seed, index).

    splitmix64 finalizer applied to seed + (index+1) * golden-gamma; any
    trial of an experiment can be replayed on its own.
    """
    x = (seed + (index + 1) * 0x9E3779B97F4A7C15) & U64_MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & U64_MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & U64_MASK
    x ^= x >> 31
    return x


class ProtocolRun:
    """Executes one run phase by phase; ``run()`` drives the whole pipeline.

    Phases must be called in order: prepare_block, transmit_c_leg,
    apply_swap_filter (optional), first_check, encode_and_send, decode,
    second_check, build_report.
    """

    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.rand: RandomSource = np.random.Generator(np.random.PCG64(config.seed))
        self.pool = RegisterPool()
        self.eve = Eavesdropper(config.attack)
        self.records: list[PairRecord] = []
        self.events: list[Event] = []
        self.verdict: Verdict | None = None
        self.first_check_error_rate = 0.0
        self.second_check_error_rate: float | None = None
        self.n_checked = 0
        self._phase = 0
        self._pad_bits = 0

    def _log(self, name: str, **info) -> None:
        self.events.append(Event(name, info))

    def _advance(self, expected: int, name: str) -> None:
        if self._phase != expected:
            raise ProtocolError(f"{name} called out of order (phase {self._phase})")
        self._phase = expected + 1

    # -- phase 1: block preparation ------------------------------------

    def prepare_block(self) -> list[PairRecord]:
        self._advance(0, "prepare_block")
        for i in range(self.config.n_pairs):
            self.pool.new_register([f"C{i}", f"M{i}"], make_bell(BellState.PSI_MINUS))
            self.records.append(PairRecord(index=i))
        self._log("block_prepared", n_pairs=self.config.n_pairs)
        return self.records

    # -- phase 2: checking-sequence transmission ------------------------

    def transmit_c_leg(self) -> None:
        self._advance(1, "transmit_c_leg")
        delivered = 0
        for rec in self.records:
            label = self.eve.touch_c_leg(self.pool, rec.index, f"C{rec.index}", self.rand)
            reg = self.pool.register_of(label)
            out = transmit(reg.state, reg.pos[label], self.config.channel_c, self.rand)
            if out is None:
                rec.lost_c = True
            else:
                reg.state = out
                rec.bob_c = label
                delivered += 1
        self._log("c_leg_done", delivered=delivered, lost=self.config.n_pairs - delivered)

    # -- phase 3: optional particle-existence detection ------------------

    def apply_swap_filter(self) -> None:
        self._advance(2, "apply_swap_filter")
        if not self.config.swap_filter:
            return
        n = self.config.n_pairs
        survivors = 0
        groups = 0
        for g, i in enumerate(range(0, n - 1, 2)):
            lead, partner = self.records[i], self.records[i + 1]
            lead.swap_group = partner.swap_group = g
            lead.swap_partner_index = partner.index
            groups += 1
            if lead.lost_c or partner.lost_c:
                # A missing photon makes the joint measurement fail; the
                # whole group is dropped.
                lead.swap_survived = partner.swap_survived = False
                lead.role = partner.role = Role.DISCARDED
                continue
            lead.swap_outcome = self.pool.bell_measure(lead.bob_c, partner.bob_c, self.rand)
            lead.swap_survived = partner.swap_survived = True
            partner.role = Role.SWAP_PARTNER
            survivors += 1
        if n % 2 == 1:
            self.records[-1].role = Role.DISCARDED
        self._log("swap_filter_done", groups=groups, survivors=survivors)

    # -- phase 4: first eavesdropping check ------------------------------

    def _usable_units(self) -> list[PairRecord]:
        """Units still eligible for checking or coding.

        Plain mode: delivered pairs.  Swap mode: lead records of surviving
        groups (the group is the coding unit).
        """
        if self.config.swap_filter:
            return [r for r in self.records if r.swap_outcome is not None and r.role is None]
        return [r for r in self.records if not r.lost_c and r.role is None]

    def first_check(self) -> Verdict:
        self._advance(3, "first_check")
        cfg = self.config
        units = self._usable_units()
        n_checked = math.ceil(cfg.check_fraction * len(units))
        order = self.rand.permutation(len(units))[:n_checked]
        chosen = sorted(int(i) for i in order)
        self._log("check_pairs_announced", indices=[units[i].index for i in chosen])
        errors = 0
        for i in chosen:
            u = units[i]
            u.role = Role.FIRST_CHECK
            if cfg.swap_filter:
                alice = self.pool.bell_measure(
                    f"M{u.index}", f"M{u.swap_partner_index}", self.rand
                )
                u.alice_bell_result = alice
                if alice is not u.swap_outcome:
                    errors += 1
            else:
                basis = MeasBasis.Z if self.rand.integers(2) == 0 else MeasBasis.X
                bob = self.pool.measure(u.bob_c, basis, self.rand)
                alice = self.pool.measure(f"M{u.index}", basis, self.rand)
                u.bob_meas = (basis, bob)
                u.alice_meas = (basis, alice)
                if bob == alice:  # results must be completely opposite
                    errors += 1
        self.n_checked = n_checked
        self.first_check_error_rate = errors / n_checked if n_checked else 0.0
        self._log(
            "first_check_done",
            checked=n_checked,
            errors=errors,
            error_rate=self.first_check_error_rate,
        )
        if self.first_check_error_rate > cfg.error_threshold:
            self.verdict = Verdict.ABORT_FIRST_CHECK
            self._log("verdict", verdict=self.verdict.value, reason="first_check_error_rate")
            return self.verdict
        remaining = len(units) - n_checked
        if remaining < cfg.min_usable_pairs:
            self.verdict = Verdict.ABORT_FIRST_CHECK
            self._log("verdict", verdict=self.verdict.value, reason="too_few_pairs")
            return self.verdict
        n_sample = math.ceil(cfg.sample_fraction * remaining)
        if len(cfg.message) > 2 * (remaining - n_sample):
            # Capacity shortfall discovered before any message qubit moves.
            self.verdict = Verdict.ABORT_FIRST_CHECK
            self._log("verdict", verdict=self.verdict.value, reason="capacity_shortfall")
            return self.verdict
        return Verdict.ACCEPT

    # -- phase 5: coding and message-sequence transmission ---------------

    def encode_and_send(self) -> None:
        self._advance(4, "encode_and_send")
        if self.verdict is not None:
            raise ProtocolError("encode_and_send requires an accepting first check")
        cfg = self.config
        remaining = self._usable_units()
        n_sample = math.ceil(cfg.sample_fraction * len(remaining))
        sample_idx = {int(i) for i in self.rand.permutation(len(remaining))[:n_sample]}
        chunks, self._pad_bits = chunk_message(cfg.message)
        chunk_iter = iter(chunks)
        for pos, u in enumerate(remaining):
            chunk = None if pos in sample_idx else next(chunk_iter, None)
            if pos in sample_idx:
                u.role = Role.SAMPLE
                u.applied_op = CodeOp(int(self.rand.integers(4)))
            elif chunk is not None:
                u.role = Role.MESSAGE
                u.applied_op = CodeOp(chunk)
            else:
                # Surplus capacity: transmitted untouched, carries nothing.
                u.role = Role.DISCARDED
                u.applied_op = CodeOp.U0
            if u.applied_op is not CodeOp.U0:
                self.pool.apply(f"M{u.index}", u.applied_op.matrix)
        self._log(
            "message_encoded",
            n_message=sum(1 for r in remaining if r.role is Role.MESSAGE),
            n_sample=n_sample,
            pad_bits=self._pad_bits,
        )
        sent = 0
        for u in remaining:
            indices = [u.index]
            if cfg.swap_filter:
                indices.append(u.swap_partner_index)
            for idx in indices:
                rec = self.records[idx]
                label = self.eve.touch_m_leg(self.pool, idx, f"M{idx}", self.rand)
                reg = self.pool.register_of(label)
                out = transmit(reg.state, reg.pos[label], cfg.channel_m, self.rand)
                if out is None:
                    rec.lost_m = True
                else:
                    reg.state = out
                    rec.bob_m = label
                    sent += 1
        self._log("m_leg_done", delivered=sent)
        self._log(
            "sample_positions_revealed",
            indices=[u.index for u in remaining if u.role is Role.SAMPLE],
            ops=[u.applied_op.value for u in remaining if u.role is Role.SAMPLE],
        )

    # -- phase 6: Bell-basis readout -------------------------------------

    def decode(self) -> None:
        self._advance(5, "decode")
        decoded = 0
        for u in self.records:
            if u.applied_op is None:
                continue
            if self.config.swap_filter:
                partner = self.records[u.swap_partner_index]
                if u.lost_m or partner.lost_m:
                    continue
                result = self.pool.bell_measure(u.bob_m, partner.bob_m, self.rand)
                u.bob_bell_result = result
                u.decoded_code = code_of(result) ^ code_of(u.swap_outcome)
            else:
                if u.lost_m or u.lost_c:
                    continue
                result = self.pool.bell_measure(u.bob_c, u.bob_m, self.rand)
                u.bob_bell_result = result
                u.decoded_code = code_of(result)
            decoded += 1
        self._log("bell_decode_done", decoded=decoded)

    # -- phase 7: second eavesdropping check -----------------------------

    def second_check(self) -> Verdict:
        self._advance(6, "second_check")
        samples = [r for r in self.records if r.role is Role.SAMPLE and r.decoded_code is not None]
        errors = sum(1 for r in samples if r.decoded_code != r.applied_op.value)
        self.second_check_error_rate = errors / len(samples) if samples else 0.0
        self._log(
            "second_check_done",
            checked=len(samples),
            errors=errors,
            error_rate=self.second_check_error_rate,
        )
        if self.second_check_error_rate > self.config.error_threshold:
            self.verdict = Verdict.ABORT_SECOND_CHECK
            self._log("verdict", verdict=self.verdict.value, reason="second_check_error_rate")
        else:
            self.verdict = Verdict.ACCEPT
            self._log("verdict", verdict=self.verdict.value, reason="accepted")
        return self.verdict

    # -- phase 8: reporting ----------------------------------------------

    def build_report(self) -> RunReport:
        cfg = self.config
        message_recs = [r for r in self.records if r.role is Role.MESSAGE]
        lost_message_bits = 2 * sum(1 for r in message_recs if r.decoded_code is None)
        decoded_message: str | None = None
        if self.verdict is Verdict.ACCEPT:
            bits = "".join(
                code_to_bits(r.decoded_code) for r in message_recs if r.decoded_code is not None
            )
            if lost_message_bits == 0:
                bits = bits[: len(cfg.message)]
            decoded_message = bits
        harvested = self.eve.record.harvested
        guessed = [
            r
            for r in self.records
            if r.role in (Role.SAMPLE, Role.MESSAGE) and r.index in harvested
        ]
        matches = sum(1 for r in guessed if harvested[r.index] == r.applied_op.value)
        accuracy = matches / len(guessed) if guessed else None
        delay = None
        if cfg.distance_m is not None and cfg.photon_rate_hz is not None:
            delay = security.min_delay(
                security.DelayInputs(
                    distance_m=cfg.distance_m,
                    signal_speed_mps=cfg.signal_speed_mps,
                    block_size=cfg.n_pairs,
                    photons_per_second=cfg.photon_rate_hz,
                )
            )
        return RunReport(
            verdict=self.verdict,
            first_check_error_rate=self.first_check_error_rate,
            second_check_error_rate=self.second_check_error_rate,
            decoded_message=decoded_message,
            n_pairs=cfg.n_pairs,
            pairs_lost=sum(1 for r in self.records if r.lost_c or r.lost_m),
            n_checked=self.n_checked,
            n_sample=sum(1 for r in self.records if r.role is Role.SAMPLE),
            n_message=len(message_recs),
            pad_bits=self._pad_bits,
            lost_message_bits=lost_message_bits,
            eve_harvest_bits=2 * len(harvested),
            eve_harvest_accuracy=accuracy,
            delay_bound_s=delay,
            seed=cfg.seed,
        )

    def run(self) -> RunReport:
        self.prepare_block()
        self.transmit_c_leg()
        self.apply_swap_filter()
        if self.first_check() is not Verdict.ACCEPT:
            return self.build_report()
        self.encode_and_send()
        self.decode()
        self.second_check()
        return self.build_report()


def run_protocol(config: ProtocolConfig) -> RunReport:
    """Execute one full protocol run; deterministic in (config, seed)."""
    return ProtocolRun(config).run()


def run_protocol_detailed(config: ProtocolConfig) -> ProtocolRun:
    """Like run_protocol but returns the finished run with records,
    event log and adversary bookkeeping attached (the report is available
    via ``build_report()``)."""
    run = ProtocolRun(config)
    run.report = run.run()
    return run
