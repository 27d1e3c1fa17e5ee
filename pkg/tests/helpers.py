"""Shared test utilities: statistical tolerances and brute-force oracles."""

from __future__ import annotations

import math

import numpy as np

from qsdc.qcore import BellState, StateVector


def four_sigma(p: float, n: int) -> float:
    """4-standard-deviation band for a binomial proportion estimate."""
    return 4.0 * math.sqrt(p * (1.0 - p) / n)


def assert_within_four_sigma(p_hat: float, p: float, n: int) -> None:
    bound = four_sigma(p, n)
    assert abs(p_hat - p) <= bound, f"{p_hat} deviates from {p} by more than {bound} (n={n})"


def empirical_mi_bits(joint_counts: np.ndarray) -> float:
    """Mutual information in bits from a 2-D contingency table."""
    joint = np.asarray(joint_counts, dtype=float)
    total = joint.sum()
    assert total > 0
    p = joint / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / (px @ py)[mask])))


def random_state(rng: np.random.Generator, num_qubits: int) -> StateVector:
    """Haar-ish random pure state."""
    amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    amps /= np.linalg.norm(amps)
    return StateVector(num_qubits, amps)


def random_unitary2(rng: np.random.Generator) -> np.ndarray:
    """Random 2x2 unitary via QR of a complex Gaussian matrix."""
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# Independent amplitude vectors for the Bell basis, written out by hand and
# used only by oracles in this directory.
ORACLE_BELL = {
    BellState.PSI_MINUS: {0b01: 1 / math.sqrt(2), 0b10: -1 / math.sqrt(2)},
    BellState.PSI_PLUS: {0b01: 1 / math.sqrt(2), 0b10: 1 / math.sqrt(2)},
    BellState.PHI_MINUS: {0b00: 1 / math.sqrt(2), 0b11: -1 / math.sqrt(2)},
    BellState.PHI_PLUS: {0b00: 1 / math.sqrt(2), 0b11: 1 / math.sqrt(2)},
}


def oracle_bell_probs(state: StateVector, q1: int, q2: int) -> dict[BellState, float]:
    """Bell-measurement outcome distribution by explicit projector sums.

    Loops over every computational index in pure Python; deliberately
    independent of the vectorized implementation it cross-checks.
    """
    n = state.num_qubits
    probs: dict[BellState, float] = {}
    for bell, coeffs in ORACLE_BELL.items():
        # Partial inner product <bell|psi> leaves amplitudes over the rest.
        partial: dict[int, complex] = {}
        for idx in range(1 << n):
            j = (idx >> (n - 1 - q1)) & 1
            k = (idx >> (n - 1 - q2)) & 1
            c = coeffs.get((j << 1) | k)
            if c is None:
                continue
            rest = idx & ~(1 << (n - 1 - q1)) & ~(1 << (n - 1 - q2))
            partial[rest] = partial.get(rest, 0.0) + c.conjugate() * state.amps[idx]
        probs[bell] = float(sum(abs(v) ** 2 for v in partial.values()))
    return probs


def full_single_qubit_matrix(u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """kron(I, ..., u, ..., I) with u at tensor slot ``qubit``."""
    mat = np.array([[1.0]], dtype=complex)
    for q in range(n):
        mat = np.kron(mat, u if q == qubit else np.eye(2, dtype=complex))
    return mat
