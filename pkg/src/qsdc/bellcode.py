"""Dense-coding dictionary: 2-bit values, coding unitaries, Bell states.

The agreed mapping is
    psi-  <->  00  <->  U0 = I
    psi+  <->  01  <->  U1 = sigma_z
    phi-  <->  10  <->  U2 = sigma_x
    phi+  <->  11  <->  U3 = i*sigma_y
Applying U_k to one qubit of any Bell state |b> yields the Bell state whose
code is code(b) XOR k, up to global phase; starting from the singlet that
means the result's code equals k directly.

Two-bit values are ints 0..3, most significant bit first ("10" is 2).
Within a pair register, qubit 0 is the C (checking) particle and qubit 1
the M (message) particle; coding unitaries act on the M particle.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .qcore import (
    IDENTITY2,
    SIGMA_X,
    SIGMA_Z,
    BellState,
    RandomSource,
    StateVector,
    apply_single,
    bell_measure,
)

M_QUBIT = 1
C_QUBIT = 0

_I_SIGMA_Y = np.array([[0, 1], [-1, 0]], dtype=complex)


class CodeOp(Enum):
    """The four coding unitaries; enum value is the 2-bit value carried."""

    U0 = 0
    U1 = 1
    U2 = 2
    U3 = 3

    @property
    def matrix(self) -> np.ndarray:
        return _OP_MATRICES[self]


_OP_MATRICES = {
    CodeOp.U0: IDENTITY2,
    CodeOp.U1: SIGMA_Z,
    CodeOp.U2: SIGMA_X,
    CodeOp.U3: _I_SIGMA_Y,
}


def code_of(b: BellState) -> int:
    """2-bit value assigned to a Bell state."""
    return b.value


def bell_of(code: int) -> BellState:
    """Inverse of code_of."""
    if code not in (0, 1, 2, 3):
        raise ValueError(f"2-bit value must be 0..3, got {code}")
    return BellState(code)


def op_for_bits(code: int) -> CodeOp:
    """Coding unitary carrying the given 2-bit value."""
    if code not in (0, 1, 2, 3):
        raise ValueError(f"2-bit value must be 0..3, got {code}")
    return CodeOp(code)


def encode_pair(pair_state: StateVector, code: int) -> StateVector:
    """Apply the coding unitary for ``code`` to the M qubit of a pair.

    On the singlet this produces the Bell state with that code, up to
    global phase.
    """
    if pair_state.num_qubits != 2:
        raise ValueError("encode_pair expects a 2-qubit pair state")
    return apply_single(pair_state, M_QUBIT, op_for_bits(code).matrix)


def decode_pair(pair_state: StateVector, rand: RandomSource) -> int:
    """Bell-measure a pair and return the code of the result."""
    if pair_state.num_qubits != 2:
        raise ValueError("decode_pair expects a 2-qubit pair state")
    result, _ = bell_measure(pair_state, 0, 1, rand)
    return code_of(result)


def code_to_bits(code: int) -> str:
    """2-bit value as a 2-character bit string, MSB first."""
    if code not in (0, 1, 2, 3):
        raise ValueError(f"2-bit value must be 0..3, got {code}")
    return format(code, "02b")


def chunk_message(message: str) -> tuple[list[int], int]:
    """Split a bit string into 2-bit values, padding with a trailing 0.

    Returns (chunks, pad_bits) with pad_bits in {0, 1}.
    """
    if any(c not in "01" for c in message):
        raise ValueError("message must contain only '0' and '1'")
    pad = len(message) % 2
    padded = message + "0" * pad
    chunks = [int(padded[i : i + 2], 2) for i in range(0, len(padded), 2)]
    return chunks, pad
