"""The acceptance suite: every headline property as one programmatic check.

Each criterion returns a CriterionResult; tests/test_acceptance.py asserts
them one by one and the `securenand selftest` CLI command prints them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import cli as _cli
from .audit import (
    audit_blindness_channel,
    audit_blindness_emission,
    audit_correctness,
    averaged_client_emission,
    entangling_strategy,
    leakage_under_strategy,
    pad_probe_strategy,
    random_malicious_strategy,
)
from .circuits import HALF_ADDER, RIPPLE_ADDER_2BIT, evaluate_delegated, evaluate_plain, lower, parse_circuit
from .nogo import (
    candidate_space_size,
    orthogonal_qo2_candidate,
    qo2_blindness_leakage,
    qo2_check_correctness,
    qo2_orthogonality_matrix,
    random_correct_qo2_candidate,
    search_classical_nogo,
)
from .protocols import HONEST, VARIANTS, ClientSecrets, client_encode_ghz
from .qsim import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    S_DAGGER,
    S_GATE,
    ghz_state,
    kron,
    observable_for_bit,
)

TOL = 1e-12
LEAK_TOL = 1e-9
CLASSICAL_NOGO_SPACE_2_2_1 = 1_206_784  # pinned closed-form count at bounds (2, 2, 1)


def _power(mat: np.ndarray, r: int) -> np.ndarray:
    return mat if r else np.eye(2, dtype=complex)


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, passed: bool, started: float, detail: str) -> CriterionResult:
    elapsed = time.perf_counter() - started
    return CriterionResult(name, passed, f"{detail} [{elapsed:.2f}s]")


def check_commutation_relations() -> CriterionResult:
    started = time.perf_counter()
    pauli = {0: PAULI_X, 1: PAULI_Y}
    worst = 0.0
    for b, r in product((0, 1), repeat=2):
        z_r = _power(PAULI_Z, r)
        s_r = _power(S_GATE, r)
        sd_r = _power(S_DAGGER, r)
        worst = max(worst, np.max(np.abs(pauli[b] @ z_r - (-1) ** r * z_r @ pauli[b])))
        worst = max(worst, np.max(np.abs(
            pauli[b] @ s_r - (-1) ** ((b ^ 1) * r) * s_r @ pauli[b ^ r]
        )))
        worst = max(worst, np.max(np.abs(
            pauli[b] @ sd_r - (-1) ** (b * r) * sd_r @ pauli[b ^ r]
        )))
    return _result(
        "commutation-relations", worst <= TOL, started,
        f"3 relation families x 4 (b, r) cases, worst residual {worst:.2e}",
    )


def check_resource_state_identities() -> CriterionResult:
    started = time.perf_counter()
    psi = ghz_state().amplitudes
    worst = 0.0
    for a, b in product((0, 1), repeat=2):
        obs = kron(
            observable_for_bit(a).operator(),
            observable_for_bit(b).operator(),
            observable_for_bit(a ^ b).operator(),
        )
        worst = max(worst, np.max(np.abs(obs @ psi - (-1) ** (1 ^ (a & b)) * psi)))
    xxx = kron(PAULI_X, PAULI_X, PAULI_X)
    for a, b, r in product((0, 1), repeat=3):
        enc = client_encode_ghz(ClientSecrets(a, b, (r,))).amplitudes
        worst = max(worst, np.max(np.abs(xxx @ enc - (-1) ** (1 ^ (a & b) ^ r) * enc)))
    return _result(
        "resource-state-identities", worst <= TOL, started,
        f"4 resource + 8 encoded eigen-identities, worst residual {worst:.2e}",
    )


def check_correctness_sweeps() -> CriterionResult:
    started = time.perf_counter()
    total_cases = 0
    ok = True
    for name in sorted(VARIANTS):
        report = audit_correctness(name)
        total_cases += len(report.cases)
        ok &= report.passed
    return _result(
        "correctness-sweeps", ok, started,
        f"6 variants, {total_cases} (a, b, pads) cases, all decode NAND with probability 1",
    )


def check_emission_blindness() -> CriterionResult:
    started = time.perf_counter()
    expected = np.zeros((8, 8), dtype=complex)
    expected[0b001, 0b001] = 0.5
    expected[0b110, 0b110] = 0.5
    worst = 0.0
    for a, b in product((0, 1), repeat=2):
        emission = averaged_client_emission("ghz-prep", a, b)
        worst = max(worst, np.max(np.abs(emission.matrix - expected)))
    distances = []
    for name in ("ghz-prep", "sq-prep"):
        rep = audit_blindness_emission(name)
        distances.append(rep.max_pairwise_trace_distance)
    ok = worst <= TOL and all(d <= TOL for d in distances)
    return _result(
        "emission-blindness", ok, started,
        f"fixed-emission residual {worst:.2e}; pairwise distances "
        + ", ".join(f"{d:.2e}" for d in distances),
    )


def check_channel_blindness() -> CriterionResult:
    started = time.perf_counter()
    distances = []
    for name in ("ghz-bounce", "sq-bounce"):
        rep = audit_blindness_channel(name)
        distances.append(rep.max_pairwise_trace_distance)
    ok = all(d <= TOL for d in distances)
    return _result(
        "channel-blindness", ok, started,
        "Choi distances " + ", ".join(f"{d:.2e}" for d in distances),
    )


def check_leakage_floor() -> CriterionResult:
    started = time.perf_counter()
    probs = []
    for name in sorted(VARIANTS):
        probs.append(leakage_under_strategy(name, HONEST).guessing_probability)
    for name in ("sq-bounce", "ghz-bounce"):
        probs.append(leakage_under_strategy(name, entangling_strategy(name)).guessing_probability)
    sampled = [
        ("ghz-prep", 11, 0), ("sq-bounce", 12, 1), ("ghz-meas", 13, 2), ("ghz-bounce", 14, 1),
        ("sq-prep", 15, 0), ("sq-meas", 16, 1),
    ]
    for name, seed, kept in sampled:
        strategy = random_malicious_strategy(name, np.random.default_rng(seed), kept_qubits=kept)
        probs.append(leakage_under_strategy(name, strategy).guessing_probability)
    floor_ok = all(abs(p - 0.25) <= LEAK_TOL for p in probs)
    broken = leakage_under_strategy("ghz-bounce", pad_probe_strategy(), disabled_pads=(1, 2))
    control_ok = broken.guessing_probability > 0.25 + 0.05
    return _result(
        "leakage-floor", floor_ok and control_ok, started,
        f"{len(probs)} blind-case strategies at 1/4 (max dev "
        f"{max(abs(p - 0.25) for p in probs):.2e}); broken-pad control "
        f"{broken.guessing_probability:.4f} > 0.30",
    )


def check_classical_nogo_bounds(fast: bool = False) -> CriterionResult:
    started = time.perf_counter()
    bounds = (1, 2, 1) if fast else (2, 2, 1)
    result = search_classical_nogo(*bounds)
    expected = candidate_space_size(*bounds)
    ok = result.witness is None and result.candidates_checked == expected
    if not fast:
        ok &= result.candidates_checked == CLASSICAL_NOGO_SPACE_2_2_1
    return _result(
        "classical-nogo-bounds", ok, started,
        f"bounds {bounds}: {result.candidates_checked} candidates, witness: none",
    )


def check_qo2_mechanism(fast: bool = False) -> CriterionResult:
    started = time.perf_counter()
    control = orthogonal_qo2_candidate()
    ok, _ = qo2_check_correctness(control)
    overlaps = qo2_orthogonality_matrix(control)
    off = float(np.max(np.abs(overlaps - np.diag(np.diag(overlaps)))))
    ok &= off <= LEAK_TOL
    leak = qo2_blindness_leakage(control)
    ok &= abs(leak - 1.0) <= LEAK_TOL
    rng = np.random.default_rng(2024)
    n = 20 if fast else 100
    worst_leak_dev = 0.0
    for i in range(n):
        cand = random_correct_qo2_candidate(rng, mixed=i % 2 == 1)
        correct, _ = qo2_check_correctness(cand)
        leak_i = qo2_blindness_leakage(cand)
        worst_leak_dev = max(worst_leak_dev, abs(leak_i - 1.0))
        ok &= correct and abs(leak_i - 1.0) <= LEAK_TOL
    return _result(
        "qo2-orthogonality-leakage", ok, started,
        f"positive control overlap {off:.2e}, leakage {leak:.12f}; "
        f"{n} random correct candidates, worst leakage deviation {worst_leak_dev:.2e}",
    )


def check_delegation_equivalence() -> CriterionResult:
    started = time.perf_counter()
    ok = True
    runs = 0
    for text in (HALF_ADDER, RIPPLE_ADDER_2BIT):
        circuit = parse_circuit(text)
        lowered = lower(circuit)
        n = len(circuit.inputs)
        for bits in product((0, 1), repeat=n):
            want = evaluate_plain(circuit, bits)
            for vi, name in enumerate(sorted(VARIANTS)):
                trace = evaluate_delegated(circuit, bits, name, seed=1000 + 31 * runs + vi)
                runs += 1
                ok &= trace.outputs == want
                ok &= len(trace.transcripts) == lowered.nand_count()
                ok &= all(trace.census.get(op, 0) == 0 for op in ("nand", "and", "or"))
    return _result(
        "delegation-equivalence", ok, started,
        f"half-adder + 2-bit adder, {runs} delegated runs match the plain evaluator",
    )


def check_determinism() -> CriterionResult:
    from .reports import canonical_payload

    started = time.perf_counter()
    builders = [
        lambda: _cli.build_run_nand_report("ghz-bounce", 1, 0, 7),
        lambda: _cli.build_run_nand_report("sq-prep", 1, 1, 99),
        lambda: _cli.build_audit_report("leakage", "sq-bounce", None, (), "random", 5, 1),
        lambda: _cli.build_nogo_classical_report(1, 1, 1),
        lambda: _cli.build_nogo_qo2_report(3, 17),
        lambda: _cli.build_delegate_report(HALF_ADDER, "11", "ghz-prep", 3, "half-adder"),
    ]
    ok = True
    for build in builders:
        first, _, _ = build()
        second, _, _ = build()
        ok &= canonical_payload(first) == canonical_payload(second)
    return _result(
        "determinism", ok, started,
        f"{len(builders)} seeded commands rebuilt byte-identically",
    )


def run_all(fast: bool = False) -> list[CriterionResult]:
    return [
        check_commutation_relations(),
        check_resource_state_identities(),
        check_correctness_sweeps(),
        check_emission_blindness(),
        check_channel_blindness(),
        check_leakage_floor(),
        check_classical_nogo_bounds(fast),
        check_qo2_mechanism(fast),
        check_delegation_equivalence(),
        check_determinism(),
    ]
