"""Exact state-vector simulation of small qubit registers.

Everything downstream (dense coding, channel attacks, the protocol state
machine) is built on the handful of primitives in this module: Bell-state
preparation, single- and two-qubit unitaries, projective measurement in the
Z, X and Bell bases, partial trace, and von Neumann entropy.

Conventions, fixed here and used everywhere:

* Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
  the amplitude index.  ``amps[0b01]`` of a 2-qubit state is the amplitude
  of ``|0>|1>``.
* Measurement outcome 0 means ``|0>`` (Z basis) or ``|+>`` (X basis).
* State equality is modulo global phase: ``states_equal`` checks
  ``|<a|b>|^2 = 1`` within tolerance, because the dense-coding unitaries
  reach some Bell states only up to a sign.
* Randomness is always drawn from an injected ``numpy.random.Generator``
  so that any sequence of operations is reproducible from one seed.

Registers are deliberately tiny: a protocol pair is 2 qubits, 3 with an
adversary probe attached, and joint measurements across two pairs
(entanglement swapping, fake-pair decoding) need at most 6.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

RandomSource = np.random.Generator

ATOL = 1e-12
EIG_ATOL = 1e-9
MAX_QUBITS = 6

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class MeasBasis(Enum):
    """Single-qubit measuring basis: the Z or X Pauli eigenbasis."""

    Z = "Z"
    X = "X"


class BellState(Enum):
    """The four maximally entangled 2-qubit states.

    Enum values are the agreed 2-bit codes: psi- is 00, psi+ is 01,
    phi- is 10, phi+ is 11.
    """

    PSI_MINUS = 0
    PSI_PLUS = 1
    PHI_MINUS = 2
    PHI_PLUS = 3


_BELL_AMPS = {
    BellState.PSI_MINUS: np.array([0, _INV_SQRT2, -_INV_SQRT2, 0], dtype=complex),
    BellState.PSI_PLUS: np.array([0, _INV_SQRT2, _INV_SQRT2, 0], dtype=complex),
    BellState.PHI_MINUS: np.array([_INV_SQRT2, 0, 0, -_INV_SQRT2], dtype=complex),
    BellState.PHI_PLUS: np.array([_INV_SQRT2, 0, 0, _INV_SQRT2], dtype=complex),
}

# Rows indexed by BellState value; row b is <b| over |00>,|01>,|10>,|11>.
_BELL_MAT = np.array([_BELL_AMPS[BellState(i)] for i in range(4)])


class StateVector:
    """Normalized amplitude vector over 1..6 qubits.

    Treated as immutable: operations return new instances.  ``check=False``
    skips validation on internal paths where normalization is preserved by
    construction.
    """

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amps: np.ndarray, *, check: bool = True):
        self.num_qubits = num_qubits
        self.amps = np.asarray(amps, dtype=complex)
        if check:
            if not 1 <= num_qubits <= MAX_QUBITS:
                raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits}")
            if self.amps.shape != (1 << num_qubits,):
                raise ValueError(
                    f"amplitude vector must have length {1 << num_qubits}, got {self.amps.shape}"
                )
            if not np.all(np.isfinite(self.amps.view(float))):
                raise ValueError("amplitudes must be finite")
            norm = float(np.real(np.vdot(self.amps, self.amps)))
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"state is not normalized: sum |amp|^2 = {norm}")

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amps.copy(), check=False)

    def norm_error(self) -> float:
        """|sum of squared magnitudes - 1|, handy for invariant checks."""
        return abs(float(np.real(np.vdot(self.amps, self.amps))) - 1.0)

    def __repr__(self) -> str:
        return f"StateVector({self.num_qubits} qubits, {np.round(self.amps, 6)})"


def make_bell(which: BellState) -> StateVector:
    """Prepare the given Bell state as a fresh 2-qubit register."""
    return StateVector(2, _BELL_AMPS[which].copy(), check=False)


def computational_state(bits: str) -> StateVector:
    """Product state |b0>|b1>... from a string of '0'/'1' characters."""
    n = len(bits)
    if not 1 <= n <= MAX_QUBITS or any(c not in "01" for c in bits):
        raise ValueError(f"bits must be 1..{MAX_QUBITS} characters of 0/1, got {bits!r}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(n, amps, check=False)


def kron_states(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; a's qubits come first (most significant)."""
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"joint register would have {n} qubits (max {MAX_QUBITS})")
    return StateVector(n, np.kron(a.amps, b.amps), check=False)


def is_unitary(u: np.ndarray, tol: float = ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol))


def _require_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit index {qubit} out of range for {state.num_qubits} qubits")


def apply_single(state: StateVector, qubit: int, u: np.ndarray) -> StateVector:
    """Apply a 2x2 unitary to one qubit, identity on the rest."""
    _require_qubit(state, qubit)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise ValueError("u must be a 2x2 unitary matrix")
    t = state.amps.reshape(1 << qubit, 2, -1)
    a0, a1 = t[:, 0, :], t[:, 1, :]
    out = np.empty_like(t)
    out[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    out[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return StateVector(state.num_qubits, out.reshape(-1), check=False)


def apply_pair(state: StateVector, q1: int, q2: int, u: np.ndarray) -> StateVector:
    """Apply a 4x4 unitary to qubits (q1, q2); q1 is the more significant
    factor of the operator's basis ordering."""
    _require_qubit(state, q1)
    _require_qubit(state, q2)
    if q1 == q2:
        raise ValueError("q1 and q2 must differ")
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u):
        raise ValueError("u must be a 4x4 unitary matrix")
    n = state.num_qubits
    t = state.amps.reshape((2,) * n)
    t = np.moveaxis(t, (q1, q2), (n - 2, n - 1)).reshape(-1, 4)
    t = t @ u.T
    t = np.moveaxis(t.reshape((2,) * n), (n - 2, n - 1), (q1, q2))
    return StateVector(n, t.reshape(-1), check=False)


def measure_qubit(
    state: StateVector, qubit: int, basis: MeasBasis, rand: RandomSource
) -> tuple[int, StateVector]:
    """Projective measurement of one qubit; Born-rule sampling.

    Returns (outcome, collapsed state).  The collapsed state is renormalized,
    so measuring the same qubit again in the same basis repeats the outcome.
    """
    _require_qubit(state, qubit)
    t = state.amps.reshape(1 << qubit, 2, -1)
    if basis is MeasBasis.Z:
        sl1 = t[:, 1, :]
        p1 = float(np.real(np.vdot(sl1, sl1)))
        outcome = 1 if rand.random() < p1 else 0
        p = p1 if outcome == 1 else 1.0 - p1
        out = t.copy()
        out[:, 1 - outcome, :] = 0.0
        out *= 1.0 / np.sqrt(p)
    else:
        plus = (t[:, 0, :] + t[:, 1, :]) * _INV_SQRT2
        minus = (t[:, 0, :] - t[:, 1, :]) * _INV_SQRT2
        p_minus = float(np.real(np.vdot(minus, minus)))
        outcome = 1 if rand.random() < p_minus else 0
        if outcome == 0:
            v = plus / np.sqrt(1.0 - p_minus)
            sign = 1.0
        else:
            v = minus / np.sqrt(p_minus)
            sign = -1.0
        out = np.empty_like(t)
        out[:, 0, :] = v * _INV_SQRT2
        out[:, 1, :] = sign * v * _INV_SQRT2
    return outcome, StateVector(state.num_qubits, out.reshape(-1), check=False)


def bell_measure(
    state: StateVector, q1: int, q2: int, rand: RandomSource
) -> tuple[BellState, StateVector]:
    """Joint projective measurement of (q1, q2) in the Bell basis.

    All four Bell projectors are symmetric under qubit exchange, so the
    order of q1 and q2 does not affect outcomes or collapse.
    """
    _require_qubit(state, q1)
    _require_qubit(state, q2)
    if q1 == q2:
        raise ValueError("q1 and q2 must differ")
    n = state.num_qubits
    t = state.amps.reshape((2,) * n)
    t = np.moveaxis(t, (q1, q2), (n - 2, n - 1)).reshape(-1, 4)
    proj = t @ _BELL_MAT.conj().T  # column b holds <b|psi> partial amplitudes
    probs = np.real(proj.conj() * proj).sum(axis=0)
    r = rand.random() * probs.sum()
    acc = 0.0
    b = 3
    for i in range(4):
        acc += probs[i]
        if r < acc:
            b = i
            break
    result = BellState(b)
    rest = proj[:, b] / np.sqrt(probs[b])
    collapsed = np.outer(rest, _BELL_MAT[b]).reshape((2,) * n)
    collapsed = np.moveaxis(collapsed, (n - 2, n - 1), (q1, q2))
    return result, StateVector(n, collapsed.reshape(-1), check=False)


def reduced_density(state: StateVector, keep: tuple[int, ...] | list[int] | set[int]) -> np.ndarray:
    """Partial trace over the complement of ``keep``.

    ``keep`` preserves ascending qubit order in the output's basis.
    """
    keep = tuple(sorted(set(keep)))
    if not keep:
        raise ValueError("keep must be nonempty")
    for q in keep:
        _require_qubit(state, q)
    n = state.num_qubits
    k = len(keep)
    t = state.amps.reshape((2,) * n)
    t = np.moveaxis(t, keep, tuple(range(k))).reshape(1 << k, -1)
    return t @ t.conj().T


def _require_density_matrix(rho: np.ndarray, tol: float = ATOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise ValueError("density matrix must be Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"density matrix must have trace 1, got {tr}")
    return rho


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy -sum(l * log2 l) of a density matrix, in bits."""
    rho = _require_density_matrix(rho)
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -1e-8:
        raise ValueError(f"density matrix has negative eigenvalue {lam.min()}")
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > 0.0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def eigenvalues_hermitian(rho: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, descending."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(rho, rho.conj().T, atol=ATOL):
        raise ValueError("matrix must be Hermitian")
    lam = np.sort(np.linalg.eigvalsh(rho))[::-1]
    if abs(lam.sum() - float(np.real(np.trace(rho)))) > EIG_ATOL:
        raise ValueError("eigenvalue sum deviates from trace")
    return lam


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for pure states of equal size."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states must have the same number of qubits")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def states_equal(a: StateVector, b: StateVector, tol: float = ATOL) -> bool:
    """Equality modulo global phase."""
    return fidelity(a, b) >= 1.0 - tol
