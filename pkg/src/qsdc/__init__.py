"""Deterministic simulator and analytic toolkit for an EPR-pair-block
quantum secure direct communication protocol."""

from .qcore import (
    BellState,
    MeasBasis,
    StateVector,
    apply_single,
    bell_measure,
    eigenvalues_hermitian,
    fidelity,
    make_bell,
    measure_qubit,
    reduced_density,
    states_equal,
    von_neumann_entropy,
)
from .bellcode import CodeOp, bell_of, code_of, decode_pair, encode_pair, op_for_bits
from .channel import AttackModel, ChannelModel, Eavesdropper, ProbeParams, probe_unitary, transmit
from .protocol import (
    ConfigError,
    PairRecord,
    ProtocolConfig,
    ProtocolRun,
    Role,
    RunReport,
    Verdict,
    mix_seed,
    run_protocol,
    run_protocol_detailed,
)
from .security import (
    DelayInputs,
    OpDistribution,
    distinguishability_note,
    error_rate_of_probe,
    eve_information,
    eve_information_numeric,
    min_delay,
    rho_double_prime,
)

__version__ = "0.1.0"
