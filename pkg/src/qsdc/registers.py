"""Labeled qubit registers with on-demand merging.

Protocol code names qubits by string labels ("C3", "M3", "E3", ...) and
does not care which amplitude vector currently holds them.  A RegisterPool
maps labels to registers, applies gates and measurements by label, and
transparently merges two registers (tensor product) when a joint operation
spans them, e.g. entanglement swapping across two pairs or Bell-measuring a
genuine particle against a substituted one.

Registers stay small by construction: pairs are 2-3 qubits and merges are
capped at MAX_QUBITS.
"""

from __future__ import annotations

import numpy as np

from . import qcore
from .qcore import BellState, MeasBasis, RandomSource, StateVector


class Register:
    """One amplitude vector plus the label -> qubit-index map."""

    __slots__ = ("state", "pos")

    def __init__(self, state: StateVector, labels: list[str]):
        if len(labels) != state.num_qubits:
            raise ValueError("one label per qubit required")
        self.state = state
        self.pos: dict[str, int] = {lab: i for i, lab in enumerate(labels)}

    @property
    def labels(self) -> list[str]:
        return sorted(self.pos, key=self.pos.get)


class RegisterPool:
    """All live registers of one run, addressed by qubit label."""

    def __init__(self) -> None:
        self._reg_of: dict[str, Register] = {}

    def new_register(self, labels: list[str], state: StateVector) -> Register:
        reg = Register(state, labels)
        for lab in labels:
            if lab in self._reg_of:
                raise ValueError(f"duplicate qubit label {lab!r}")
            self._reg_of[lab] = reg
        return reg

    def register_of(self, label: str) -> Register:
        return self._reg_of[label]

    def state_of(self, label: str) -> StateVector:
        return self._reg_of[label].state

    def index_of(self, label: str) -> int:
        return self._reg_of[label].pos[label]

    def add_qubit(self, anchor: str, new_label: str, bit: str = "0") -> None:
        """Extend the register holding ``anchor`` by one fresh qubit."""
        if new_label in self._reg_of:
            raise ValueError(f"duplicate qubit label {new_label!r}")
        reg = self._reg_of[anchor]
        reg.state = qcore.kron_states(reg.state, qcore.computational_state(bit))
        reg.pos[new_label] = reg.state.num_qubits - 1
        self._reg_of[new_label] = reg

    def merge(self, a: str, b: str) -> Register:
        """Tensor two registers into one; no-op if already shared."""
        ra, rb = self._reg_of[a], self._reg_of[b]
        if ra is rb:
            return ra
        offset = ra.state.num_qubits
        joint = Register.__new__(Register)
        joint.state = qcore.kron_states(ra.state, rb.state)
        joint.pos = dict(ra.pos)
        for lab, i in rb.pos.items():
            joint.pos[lab] = offset + i
        for lab in joint.pos:
            self._reg_of[lab] = joint
        return joint

    def apply(self, label: str, u: np.ndarray) -> None:
        reg = self._reg_of[label]
        reg.state = qcore.apply_single(reg.state, reg.pos[label], u)

    def apply_pair(self, a: str, b: str, u: np.ndarray) -> None:
        reg = self.merge(a, b)
        reg.state = qcore.apply_pair(reg.state, reg.pos[a], reg.pos[b], u)

    def measure(self, label: str, basis: MeasBasis, rand: RandomSource) -> int:
        reg = self._reg_of[label]
        outcome, reg.state = qcore.measure_qubit(reg.state, reg.pos[label], basis, rand)
        return outcome

    def bell_measure(self, a: str, b: str, rand: RandomSource) -> BellState:
        reg = self.merge(a, b)
        result, reg.state = qcore.bell_measure(reg.state, reg.pos[a], reg.pos[b], rand)
        return result

    def reduced(self, labels: list[str]) -> np.ndarray:
        """Reduced density matrix of the listed qubits (must share a register)."""
        regs = {id(self._reg_of[lab]) for lab in labels}
        if len(regs) != 1:
            raise ValueError("qubits live in different registers; merge first")
        reg = self._reg_of[labels[0]]
        return qcore.reduced_density(reg.state, [reg.pos[lab] for lab in labels])
