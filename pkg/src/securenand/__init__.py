"""securenand: exact simulation and security audits for blind NAND delegation.

A client limited to XOR-only classical computation delegates NAND gates (and
with them arbitrary boolean circuits) to a server holding a small quantum
device, without the server learning the inputs. This package simulates every
protocol variant exactly, verifies correctness and blindness mechanically
(including against malicious servers), runs bounded searches showing purely
classical XOR clients cannot do this, and composes protocol runs to evaluate
whole circuits.
"""

from .qsim import (
    ATOL,
    ChoiMatrix,
    DensityMatrix,
    GateOp,
    ObservableBasis,
    QuantumState,
    apply_choi,
    apply_gate,
    apply_gates,
    average_states,
    basis_state,
    choi_distance,
    choi_of_channel,
    fidelity,
    ghz_state,
    kron,
    measure_observables,
    observable_for_bit,
    partial_trace,
    plus_state,
    resource_conventions,
    sample_outcome,
    states_equal_up_to_phase,
    trace_distance,
)
from .protocols import (
    HONEST,
    VARIANTS,
    BitOps,
    ClientSecrets,
    Message,
    Povm,
    ProtocolTranscript,
    ServerStrategy,
    bounce_client_transform,
    choi_of_client_map,
    client_encode_ghz,
    decode,
    malicious_strategy,
    measuring_client_bases,
    run_protocol,
    single_qubit_client_transform,
    variant,
)
from .audit import (
    BlindnessReport,
    CorrectnessReport,
    LeakageReport,
    audit_blindness_channel,
    audit_blindness_emission,
    audit_correctness,
    averaged_client_emission,
    entangling_strategy,
    leakage_under_strategy,
    pad_probe_strategy,
    random_malicious_strategy,
)
from .nogo import (
    AffineMap,
    ClassicalProtocolCandidate,
    NogoSearchResult,
    Qo2Candidate,
    candidate_space_size,
    classical_blindness_holds,
    classical_correctness_holds,
    orthogonal_qo2_candidate,
    qo2_blindness_leakage,
    qo2_check_correctness,
    qo2_consistency_check,
    qo2_from_double_pad,
    qo2_orthogonality_matrix,
    random_correct_qo2_candidate,
    search_classical_nogo,
    uniform_qo2_candidate,
)
from .circuits import (
    BooleanCircuit,
    CircuitError,
    DelegationTrace,
    PolicyViolation,
    XorLimitedClient,
    evaluate_delegated,
    evaluate_plain,
    lower,
    parse_circuit,
)

__version__ = "0.1.0"
