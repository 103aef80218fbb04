import numpy as np
import pytest
from itertools import product

from scipy.stats import chisquare

from securenand.circuits import (
    HALF_ADDER,
    RIPPLE_ADDER_2BIT,
    BooleanCircuit,
    CircuitError,
    DelegationTrace,
    Gate,
    PolicyViolation,
    XorLimitedClient,
    evaluate_delegated,
    evaluate_plain,
    lower,
    parse_circuit,
)
from securenand.protocols import VARIANTS, run_protocol, variant
from securenand.audit import _outcome_distribution
from securenand.protocols import ClientSecrets


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def test_parse_single_gate():
    circuit = parse_circuit("in a b\ng1 = NAND a b\nout g1\n")
    assert circuit.inputs == ("a", "b")
    assert circuit.outputs == ("g1",)
    assert circuit.gates == (Gate("g1", "NAND", ("a", "b")),)


def test_parse_allows_comments_and_forward_refs():
    text = """\
# outputs first, definitions later
out g
in a
g = XOR a k   # uses k before its line
k = CONST 1
"""
    circuit = parse_circuit(text)
    assert [g.out for g in circuit.gates] == ["k", "g"]


def test_parse_not_gate():
    circuit = parse_circuit("in a\ng = NOT a\nout g\n")
    assert circuit.gates[0].kind == "NOT"


def test_parse_error_kinds_and_locations():
    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\ng = NAND a g\nout g\n")
    assert err.value.kind == "cycle"
    assert err.value.line == 2

    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\ng = NAND a missing\nout g\n")
    assert err.value.kind == "undefined-wire"
    assert err.value.line == 2 and err.value.column is not None

    with pytest.raises(CircuitError) as err:
        parse_circuit("in a a\nout a\n")
    assert err.value.kind == "duplicate-wire"

    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\na = NAND a a\nout a\n")
    assert err.value.kind == "duplicate-wire"

    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\ng = FROB a\nout g\n")
    assert err.value.kind == "syntax"

    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\ng = CONST 2\nout g\n")
    assert err.value.kind == "syntax"

    with pytest.raises(CircuitError) as err:
        parse_circuit("in A\nout A\n")
    assert err.value.kind == "syntax"

    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\nout a missing\n")
    assert err.value.kind == "undefined-wire"


def test_two_gate_cycle_detected():
    with pytest.raises(CircuitError) as err:
        parse_circuit("in a\np = XOR a q\nq = XOR a p\nout p\n")
    assert err.value.kind == "cycle"


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------


def test_lower_not_to_xor_with_one():
    circuit = parse_circuit("in a\ng = NOT a\nout g\n")
    lowered = lower(circuit)
    kinds = [g.kind for g in lowered.gates]
    assert set(kinds) == {"CONST", "XOR"}
    for bits in ((0,), (1,)):
        assert evaluate_plain(lowered, bits) == evaluate_plain(circuit, bits)


def test_lower_and_to_nand_xor():
    circuit = parse_circuit("in a b\ng = AND a b\nout g\n")
    lowered = lower(circuit)
    assert [g.kind for g in lowered.gates].count("NAND") == 1
    for bits in product((0, 1), repeat=2):
        assert evaluate_plain(lowered, bits) == (bits[0] & bits[1],)


def test_lower_is_idempotent():
    circuit = parse_circuit(RIPPLE_ADDER_2BIT)
    lowered = lower(circuit)
    assert lower(lowered) == lowered
    already = parse_circuit("in a b\ng = NAND a b\nout g\n")
    assert lower(already) is already


# ---------------------------------------------------------------------------
# Plain evaluation
# ---------------------------------------------------------------------------


def test_evaluate_plain_gate_semantics():
    circuit = parse_circuit("in a b\nn = NAND a b\nx = XOR a b\nk = CONST 1\nout n x k\n")
    assert evaluate_plain(circuit, (1, 1)) == (0, 0, 1)
    assert evaluate_plain(circuit, (1, 0)) == (1, 1, 1)


def test_evaluate_plain_arity_mismatch():
    circuit = parse_circuit("in a b\ng = XOR a b\nout g\n")
    with pytest.raises(CircuitError) as err:
        evaluate_plain(circuit, (1,))
    assert err.value.kind == "arity"


def test_half_adder_truth_table():
    circuit = parse_circuit(HALF_ADDER)
    table = {bits: evaluate_plain(circuit, bits) for bits in product((0, 1), repeat=2)}
    assert table == {(0, 0): (0, 0), (0, 1): (1, 0), (1, 0): (1, 0), (1, 1): (0, 1)}


def test_ripple_adder_adds():
    circuit = parse_circuit(RIPPLE_ADDER_2BIT)
    for bits in product((0, 1), repeat=4):
        s0, s1, cout = evaluate_plain(circuit, bits)
        lhs = bits[0] + 2 * bits[1] + bits[2] + 2 * bits[3]
        assert s0 + 2 * s1 + 4 * cout == lhs


# ---------------------------------------------------------------------------
# Capability policy
# ---------------------------------------------------------------------------


def test_policy_rejects_boolean_gates():
    client = XorLimitedClient()
    with pytest.raises(PolicyViolation):
        client.nand(1, 1)
    with pytest.raises(PolicyViolation):
        client.and_(1, 1)
    with pytest.raises(PolicyViolation):
        client.or_(0, 1)
    assert client.census["nand"] == 1


def test_trace_rejects_tainted_census():
    with pytest.raises(PolicyViolation):
        DelegationTrace("ghz-prep", (0,), (), {"nand": 1})


# ---------------------------------------------------------------------------
# Delegated evaluation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_delegated_half_adder_matches_oracle(name):
    circuit = parse_circuit(HALF_ADDER)
    for bits in product((0, 1), repeat=2):
        trace = evaluate_delegated(circuit, bits, name, seed=5)
        assert trace.outputs == evaluate_plain(circuit, bits)


def test_delegated_single_nand():
    circuit = parse_circuit("in a b\ng = NAND a b\nout g\n")
    trace = evaluate_delegated(circuit, (1, 1), "sq-bounce", seed=0)
    assert trace.outputs == (0,)
    assert len(trace.transcripts) == 1
    trace = evaluate_delegated(circuit, (1, 0), "ghz-meas", seed=0)
    assert trace.outputs == (1,)


def test_delegated_ripple_adder_matches_oracle():
    circuit = parse_circuit(RIPPLE_ADDER_2BIT)
    lowered = lower(circuit)
    for bits in product((0, 1), repeat=4):
        trace = evaluate_delegated(circuit, bits, "ghz-bounce", seed=13)
        assert trace.outputs == evaluate_plain(circuit, bits)
        assert len(trace.transcripts) == lowered.nand_count()


def test_census_is_clean_and_randomness_is_fresh():
    circuit = parse_circuit(RIPPLE_ADDER_2BIT)
    trace = evaluate_delegated(circuit, (1, 0, 1, 1), "ghz-bounce", seed=23)
    for op in ("nand", "and", "or"):
        assert trace.census.get(op, 0) == 0
    # every pad bit is drawn exactly once, through the metered client
    pad_draws = sum(len(t.secrets.r_bits) for t in trace.transcripts)
    assert trace.census["random_bit"] == pad_draws
    seeds = [t.seed for t in trace.transcripts]
    assert len(set(seeds)) == len(seeds)


def test_delegation_arity_checked():
    circuit = parse_circuit(HALF_ADDER)
    with pytest.raises(CircuitError):
        evaluate_delegated(circuit, (1,), "ghz-prep", seed=1)


def test_delegation_deterministic():
    circuit = parse_circuit(HALF_ADDER)
    t1 = evaluate_delegated(circuit, (1, 1), "ghz-prep", seed=77)
    t2 = evaluate_delegated(circuit, (1, 1), "ghz-prep", seed=77)
    assert t1.outputs == t2.outputs
    assert [t.server_bits for t in t1.transcripts] == [t.server_bits for t in t2.transcripts]


def test_per_gate_transcripts_follow_exact_distribution():
    # chi-squared over (pad bits, outcome bits) for a fixed variant and input,
    # against the exact joint distribution: uniform pads x Born probabilities
    name, a, b = "ghz-prep", 0, 1
    var = variant(name)
    expected = {}
    for r in (0, 1):
        dist = _outcome_distribution(var, ClientSecrets(a, b, (r,)))
        for bits, p in dist.items():
            if p > 1e-12:
                expected[(r, bits)] = 0.5 * p
    n_samples = 3000
    counts = {key: 0 for key in expected}
    for seed in range(n_samples):
        t = run_protocol(name, a, b, seed)
        counts[(t.secrets.r_bits[0], t.server_bits)] += 1
    observed = np.array([counts[k] for k in sorted(expected)])
    want = np.array([expected[k] * n_samples for k in sorted(expected)])
    _, p_value = chisquare(observed, want)
    assert p_value > 0.01
