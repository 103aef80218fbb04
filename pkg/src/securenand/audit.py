"""Mechanical correctness and blindness audits for every protocol variant.

All audits are exact: probabilities come straight from Born's rule and
channel equality is checked on Choi matrices, never estimated by sampling.
Negative controls deliberately disable pad bits to prove the audits can
fail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .qsim import (
    ATOL,
    ChoiMatrix,
    DensityMatrix,
    ObservableBasis,
    PAULI_X,
    PAULI_Y,
    QuantumState,
    apply_choi,
    average_states,
    choi_distance,
    kron,
    measure_observables,
    partial_trace,
    random_density_matrix,
    random_povm,
    trace_distance,
)
from .protocols import (
    ClientSecrets,
    Povm,
    ServerStrategy,
    Variant,
    VARIANTS,
    averaged_client_channel,
    choi_of_client_map,
    client_unitary,
    decode,
    honest_resource,
    malicious_strategy,
    measuring_client_bases,
    pad_assignments,
    variant,
    x_measurement_povm,
)

BLINDNESS_TOL = 1e-12
LEAKAGE_TOL = 1e-9


@dataclass(frozen=True)
class CorrectnessReport:
    variant: str
    cases: tuple  # (a, b, r_bits, probability that out == 1 xor ab)
    passed: bool
    tolerance: float = ATOL


@dataclass(frozen=True)
class BlindnessReport:
    variant: str
    form: str  # "emission" or "channel"
    per_input: dict | None
    max_pairwise_trace_distance: float
    passed: bool
    tolerance: float = BLINDNESS_TOL
    vacuous: bool = False


@dataclass(frozen=True)
class LeakageReport:
    variant: str
    strategy: str
    guessing_probability: float
    helstrom_pairwise: np.ndarray  # 4x4, indexed by input pairs
    passed: bool
    tolerance: float = LEAKAGE_TOL


INPUT_PAIRS = tuple(product((0, 1), repeat=2))


def _outcome_distribution(var: Variant, secrets: ClientSecrets) -> dict:
    """Exact distribution of the measured bits for an honest run."""
    if var.flow == "meas":
        if var.qubits == 3:
            bases = measuring_client_bases(secrets.a, secrets.b)
            return measure_observables(honest_resource(var), bases)
        U = client_unitary(var, secrets)
        rotated = QuantumState(1, U @ honest_resource(var).amplitudes)
        return measure_observables(rotated, [ObservableBasis("x")])
    U = client_unitary(var, secrets)
    state = QuantumState(var.qubits, U @ honest_resource(var).amplitudes)
    return measure_observables(state, [ObservableBasis("x")] * var.qubits)


def audit_correctness(var_name: str) -> CorrectnessReport:
    """Sweep every input and pad assignment; each must decode correctly with probability 1."""
    var = variant(var_name)
    cases = []
    for a, b in INPUT_PAIRS:
        want = 1 ^ (a & b)
        for r_bits in pad_assignments(var):
            secrets = ClientSecrets(a, b, r_bits)
            dist = _outcome_distribution(var, secrets)
            p_correct = sum(
                p for bits, p in dist.items() if decode(var, bits, secrets) == want
            )
            cases.append((a, b, r_bits, p_correct))
    passed = all(abs(p - 1.0) <= ATOL for *_, p in cases)
    return CorrectnessReport(var.name, tuple(cases), passed)


def averaged_client_emission(var_name: str, a: int, b: int, disabled_pads=()) -> DensityMatrix:
    """Everything the client sends, averaged uniformly over her pad bits."""
    var = variant(var_name)
    if var.flow == "meas":
        raise ValueError(f"{var.name}: the client sends nothing")
    base = honest_resource(var)
    emitted = []
    for r_bits in pad_assignments(var, disabled_pads):
        U = client_unitary(var, ClientSecrets(a, b, r_bits), disabled_pads)
        emitted.append(QuantumState(var.qubits, U @ base.amplitudes).density())
    return average_states(emitted)


def _pairwise_max_distance(items, dist_fn) -> float:
    worst = 0.0
    keys = list(items)
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            worst = max(worst, dist_fn(items[keys[i]], items[keys[j]]))
    return worst


def audit_blindness_emission(var_name: str, disabled_pads=(), tolerance: float = BLINDNESS_TOL) -> BlindnessReport:
    """Compare the pad-averaged emitted state across all four inputs.

    Measuring-client variants emit nothing, so they pass vacuously.
    """
    var = variant(var_name)
    if var.flow == "meas":
        return BlindnessReport(var.name, "emission", None, 0.0, True, tolerance, vacuous=True)
    per_input = {
        (a, b): averaged_client_emission(var_name, a, b, disabled_pads)
        for a, b in INPUT_PAIRS
    }
    worst = _pairwise_max_distance(per_input, trace_distance)
    return BlindnessReport(var.name, "emission", per_input, worst, worst <= tolerance, tolerance)


def audit_blindness_channel(var_name: str, disabled_pads=(), tolerance: float = BLINDNESS_TOL) -> BlindnessReport:
    """Compare the client's pad-averaged Choi matrices across all four inputs.

    Choi equality covers every server input state at once, so this audit is
    sound against entangled and otherwise adversarial preparations.
    """
    var = variant(var_name)
    if var.flow != "bounce":
        raise ValueError(f"{var.name} has no client-transform round to audit")
    per_input = {
        (a, b): choi_of_client_map(var_name, a, b, disabled_pads)
        for a, b in INPUT_PAIRS
    }
    worst = _pairwise_max_distance(per_input, choi_distance)
    return BlindnessReport(var.name, "channel", per_input, worst, worst <= tolerance, tolerance)


# ---------------------------------------------------------------------------
# Quantitative leakage against a concrete server strategy.
# ---------------------------------------------------------------------------


def server_view_states(var_name: str, strategy: ServerStrategy, disabled_pads=()) -> dict:
    """The server's post-protocol quantum view, per input pair, pad-averaged.

    prep flow: the received emission. bounce flow: the returned subsystem
    joint with any kept ancillas. meas flow: only whatever ancillas the
    server kept, which the client never touches.
    """
    var = variant(var_name)
    views = {}
    if var.flow == "prep":
        if strategy.prepared_state is not None:
            raise ValueError(f"{var.name}: the server prepares nothing")
        for a, b in INPUT_PAIRS:
            views[(a, b)] = averaged_client_emission(var_name, a, b, disabled_pads)
        return views

    joint = (
        honest_resource(var).density()
        if strategy.prepared_state is None
        else strategy.prepared_state
    )
    if joint.num_qubits != var.qubits + strategy.kept_qubits:
        raise ValueError("prepared state does not match sent + kept qubit counts")

    if var.flow == "meas":
        if strategy.kept_qubits == 0:
            scalar = DensityMatrix(1, np.eye(2, dtype=complex) / 2)
            return {pair: scalar for pair in INPUT_PAIRS}
        kept = partial_trace(joint, range(var.qubits, joint.num_qubits))
        return {pair: kept for pair in INPUT_PAIRS}

    eye_kept = np.eye(2**strategy.kept_qubits, dtype=complex)
    for a, b in INPUT_PAIRS:
        acc = np.zeros_like(joint.matrix)
        for w, U in averaged_client_channel(var_name, a, b, disabled_pads):
            full = kron(U, eye_kept) if strategy.kept_qubits else U
            acc += w * (full @ joint.matrix @ full.conj().T)
        views[(a, b)] = DensityMatrix(joint.num_qubits, acc)
    return views


def _default_view_povm(var: Variant, strategy: ServerStrategy) -> Povm:
    if var.flow == "meas":
        dim = 2 ** max(strategy.kept_qubits, 1)
        return Povm(((0,),), (np.eye(dim, dtype=complex),))
    return x_measurement_povm(var.qubits, strategy.kept_qubits)


def leakage_under_strategy(var_name: str, strategy: ServerStrategy, disabled_pads=()) -> LeakageReport:
    """Optimal input-guessing probability for the given strategy, plus Helstrom bounds.

    The four-hypothesis guessing probability assumes a uniformly random
    input pair and lets the server relabel his POVM outcomes optimally:
    p_guess = (1/4) sum_m max_(a,b) Tr(E_m view_ab). The pairwise Helstrom
    matrix (1/2)(1 + T(view_i, view_j)) upper-bounds any two-input
    discrimination independently of the POVM.
    """
    var = variant(var_name)
    views = server_view_states(var_name, strategy, disabled_pads)
    povm = strategy.measurement or _default_view_povm(var, strategy)
    dim = next(iter(views.values())).matrix.shape[0]
    if povm.dim != dim:
        raise ValueError("strategy POVM does not match the server's view dimension")

    p_guess = 0.0
    for element in povm.elements:
        p_guess += max(np.trace(element @ views[pair].matrix).real for pair in INPUT_PAIRS)
    p_guess = float(p_guess / 4.0)

    helstrom = np.full((4, 4), 0.5)
    for i, pi in enumerate(INPUT_PAIRS):
        for j, pj in enumerate(INPUT_PAIRS):
            if i != j:
                helstrom[i, j] = 0.5 * (1.0 + trace_distance(views[pi], views[pj]))

    passed = bool(p_guess <= 0.25 + LEAKAGE_TOL)
    return LeakageReport(var.name, strategy.description, p_guess, helstrom, passed)


# ---------------------------------------------------------------------------
# Canned strategies for audits and demos.
# ---------------------------------------------------------------------------


def entangling_strategy(var_name: str) -> ServerStrategy:
    """Bounce-variant attack: send qubits maximally entangled with a kept ancilla."""
    var = variant(var_name)
    if var.flow != "bounce":
        raise ValueError("the entangling attack targets bounce variants")
    n = var.qubits + 1
    vec = np.zeros(2**n, dtype=complex)
    if var.qubits == 1:
        vec[0b00] = vec[0b11] = 1 / np.sqrt(2)
    else:
        vec[0b0000] = vec[0b1111] = 1 / np.sqrt(2)
    joint = DensityMatrix(n, np.outer(vec, vec.conj()))
    povm = x_measurement_povm(var.qubits, 1)
    return malicious_strategy(joint, 1, povm, description=f"entangler({var.name})")


def _helstrom_projectors(rho0: np.ndarray, rho1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(rho0 - rho1)
    pos = evecs[:, evals > 0] @ evecs[:, evals > 0].conj().T
    return pos, np.eye(rho0.shape[0]) - pos


def pad_probe_strategy() -> ServerStrategy:
    """Three-qubit bounce attack tuned to a broken pad on wires 1 and 2.

    Sends |+>^3; with only wire 0 padded, the phase rotations survive on
    wires 1 and 2, so a per-wire Helstrom measurement between the X and Y
    eigenstates reads the inputs back out.
    """
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    vec = kron(plus.reshape(2, 1), plus.reshape(2, 1), plus.reshape(2, 1)).reshape(-1)
    joint = DensityMatrix(3, np.outer(vec, vec.conj()))

    plus_dm = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    y_minus = np.array([1, -1j], dtype=complex) / np.sqrt(2)
    y_dm = np.outer(y_minus, y_minus.conj())
    m0, m1 = _helstrom_projectors(plus_dm, y_dm)

    labels, elements = [], []
    for b1, b2 in product((0, 1), repeat=2):
        element = kron(np.eye(2, dtype=complex), (m0, m1)[b1], (m0, m1)[b2])
        elements.append(element)
        labels.append((0, b1, b2))
    return malicious_strategy(joint, 0, Povm(tuple(labels), tuple(elements)),
                              description="pad-probe(ghz-bounce)")


def random_malicious_strategy(var_name: str, rng: np.random.Generator, kept_qubits: int = 1,
                              n_outcomes: int | None = None) -> ServerStrategy:
    """Sampled strategy: random prepared joint state plus a random POVM."""
    var = variant(var_name)
    if var.flow == "prep":
        dim = 2**var.qubits
        n_outcomes = n_outcomes or dim
        povm = Povm(
            tuple(tuple(int(v) for v in rng.integers(0, 2, size=var.qubits)) for _ in range(n_outcomes)),
            tuple(random_povm(dim, n_outcomes, rng)),
        )
        return malicious_strategy(None, 0, povm, description=f"random({var.name})")
    if var.flow == "meas":
        joint = random_density_matrix(var.qubits + kept_qubits, rng)
        return malicious_strategy(joint, kept_qubits, None, description=f"random({var.name})")
    joint = random_density_matrix(var.qubits + kept_qubits, rng)
    dim = 2 ** (var.qubits + kept_qubits)
    n_outcomes = n_outcomes or 2**var.qubits
    povm = Povm(
        tuple(tuple(int(v) for v in rng.integers(0, 2, size=var.qubits)) for _ in range(n_outcomes)),
        tuple(random_povm(dim, n_outcomes, rng)),
    )
    return malicious_strategy(joint, kept_qubits, povm, description=f"random({var.name})")
