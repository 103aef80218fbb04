import numpy as np
import pytest
from itertools import product

from securenand import reports
from securenand.protocols import (
    CLIENT_TO_SERVER,
    HONEST,
    SERVER_TO_CLIENT,
    VARIANTS,
    ClientSecrets,
    Message,
    Povm,
    ProtocolTranscript,
    bounce_client_transform,
    choi_of_client_map,
    client_encode_ghz,
    client_unitary,
    decode,
    malicious_strategy,
    measuring_client_bases,
    pad_assignments,
    run_protocol,
    single_qubit_client_transform,
    variant,
    x_measurement_povm,
)
from securenand.qsim import (
    DensityMatrix,
    GateOp,
    ObservableBasis,
    apply_gate,
    embed_gate,
    ghz_state,
    kron,
    measure_observables,
    plus_state,
    random_density_matrix,
)

ALL_BITS = [(a, b) for a in (0, 1) for b in (0, 1)]
ALL_VARIANTS = sorted(VARIANTS)


def test_variant_table_shape():
    assert len(VARIANTS) == 6
    assert variant("ghz-prep").pad_bits == 1
    assert variant("ghz-bounce").pad_bits == 3
    assert variant("ghz-meas").pad_bits == 0
    assert variant("sq-meas").pad_bits == 0
    with pytest.raises(ValueError):
        variant("nope")


def test_secrets_validation():
    with pytest.raises(ValueError):
        ClientSecrets(2, 0)
    with pytest.raises(ValueError):
        ClientSecrets(0, 0, (0, 2))
    with pytest.raises(ValueError):
        decode("ghz-prep", (0, 0, 0), ClientSecrets(0, 0, ()))  # pad length mismatch


# ---------------------------------------------------------------------------
# Client encodings
# ---------------------------------------------------------------------------


def test_encode_ghz_identity_case():
    out = client_encode_ghz(ClientSecrets(0, 0, (0,)))
    assert np.allclose(out.amplitudes, ghz_state().amplitudes, atol=1e-12)


def test_encode_ghz_pad_only():
    out = client_encode_ghz(ClientSecrets(0, 0, (1,)))
    expected = apply_gate(ghz_state(), GateOp("z", 0)).amplitudes
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


def test_encode_ghz_both_inputs_set():
    # a = b = 1 leaves the third wire untouched (exponent 1 xor 1 = 0)
    out = client_encode_ghz(ClientSecrets(1, 1, (0,)))
    state = ghz_state()
    state = apply_gate(state, GateOp("sdag", 0))
    state = apply_gate(state, GateOp("sdag", 1))
    assert np.allclose(out.amplitudes, state.amplitudes, atol=1e-12)


def test_bounce_transform_identity_and_pads():
    rho = ghz_state().density()
    same = bounce_client_transform(rho, ClientSecrets(0, 0, (0, 0, 0)))
    assert np.allclose(same.matrix, rho.matrix, atol=1e-12)
    padded = bounce_client_transform(rho, ClientSecrets(0, 0, (1, 1, 0)))
    U = embed_gate(GateOp("z", 0), 3) @ embed_gate(GateOp("z", 1), 3)
    expected = U @ rho.matrix @ U.conj().T
    assert np.allclose(padded.matrix, expected, atol=1e-12)


def test_bounce_transform_acts_on_first_factor_only():
    rng = np.random.default_rng(8)
    joint = random_density_matrix(4, rng)  # 3 client wires + 1 kept ancilla
    secrets = ClientSecrets(1, 0, (1, 0, 1))
    moved = bounce_client_transform(joint, secrets)
    U = kron(client_unitary(variant("ghz-bounce"), secrets), np.eye(2, dtype=complex))
    assert np.allclose(moved.matrix, U @ joint.matrix @ U.conj().T, atol=1e-12)
    with pytest.raises(ValueError):
        bounce_client_transform(plus_state().density(), secrets)


@pytest.mark.parametrize("a,b,r,pads_z", [(1, 1, 0, 1), (1, 0, 0, 0), (0, 0, 1, 1)])
def test_single_qubit_transform_cases(a, b, r, pads_z):
    out = single_qubit_client_transform(plus_state().density(), ClientSecrets(a, b, (r,)))
    expected = plus_state()
    if pads_z:
        expected = apply_gate(expected, GateOp("z", 0))
    assert np.allclose(out.matrix, expected.density().matrix, atol=1e-12)


def test_measuring_client_bases():
    assert [b.kind for b in measuring_client_bases(0, 0)] == ["x", "x", "x"]
    assert [b.kind for b in measuring_client_bases(1, 1)] == ["y", "y", "x"]
    assert [b.kind for b in measuring_client_bases(1, 0)] == ["y", "x", "y"]


# ---------------------------------------------------------------------------
# Decode
# ---------------------------------------------------------------------------


def test_decode_examples():
    assert decode("ghz-prep", (1, 0, 0), ClientSecrets(0, 0, (0,))) == 1
    assert decode("sq-bounce", (1,), ClientSecrets(0, 0, (0,))) == 0
    assert decode("ghz-bounce", (1, 1, 1), ClientSecrets(0, 0, (1, 1, 1))) == 0
    assert decode("sq-meas", (0,), ClientSecrets(0, 0, ())) == 1
    with pytest.raises(ValueError):
        decode("ghz-prep", (1, 0), ClientSecrets(0, 0, (0,)))


# ---------------------------------------------------------------------------
# Honest runs
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ALL_VARIANTS)
@pytest.mark.parametrize("a,b", ALL_BITS)
def test_honest_runs_compute_nand(name, a, b):
    for seed in (0, 1, 42):
        t = run_protocol(name, a, b, seed)
        assert t.out == 1 ^ (a & b)
        assert t.variant == name
        assert t.seed == seed


@pytest.mark.parametrize("name", ALL_VARIANTS)
def test_message_shapes_match_flow(name):
    t = run_protocol(name, 1, 0, 5)
    shape = [(m.direction, m.kind) for m in t.messages]
    flow = variant(name).flow
    if flow == "prep":
        assert shape == [(CLIENT_TO_SERVER, "quantum"), (SERVER_TO_CLIENT, "classical")]
    elif flow == "meas":
        assert shape == [(SERVER_TO_CLIENT, "quantum")]
    else:
        assert shape == [
            (SERVER_TO_CLIENT, "quantum"),
            (CLIENT_TO_SERVER, "quantum"),
            (SERVER_TO_CLIENT, "classical"),
        ]


@pytest.mark.parametrize("name", ["ghz-meas", "sq-meas"])
def test_measuring_variants_send_nothing(name):
    t = run_protocol(name, 1, 1, 3)
    assert all(m.direction == SERVER_TO_CLIENT for m in t.messages)


@pytest.mark.parametrize("name", ALL_VARIANTS)
def test_run_protocol_is_deterministic(name):
    first = run_protocol(name, 0, 1, 97)
    second = run_protocol(name, 0, 1, 97)
    assert first.server_bits == second.server_bits
    assert first.secrets == second.secrets
    assert first.out == second.out


@pytest.mark.parametrize("name", ["ghz-prep", "ghz-bounce", "ghz-meas"])
@pytest.mark.parametrize("a,b", ALL_BITS)
def test_parity_determinism_of_ghz_outcomes(name, a, b):
    # every outcome with nonzero probability has the pinned parity
    var = variant(name)
    for r_bits in pad_assignments(var):
        secrets = ClientSecrets(a, b, r_bits)
        if var.flow == "meas":
            dist = measure_observables(ghz_state(), measuring_client_bases(a, b))
        else:
            U = client_unitary(var, secrets)
            from securenand.qsim import QuantumState

            state = QuantumState(3, U @ ghz_state().amplitudes)
            dist = measure_observables(state, [ObservableBasis("x")] * 3)
        want_parity = 1 ^ (a & b)
        for r in r_bits:
            want_parity ^= r
        for bits, p in dist.items():
            if p > 1e-12:
                assert bits[0] ^ bits[1] ^ bits[2] == want_parity


@pytest.mark.parametrize("name", ALL_VARIANTS)
def test_exhaustive_outcome_decode(name):
    # every Born outcome with nonzero probability decodes to NAND
    var = variant(name)
    from securenand.audit import _outcome_distribution

    for a, b in ALL_BITS:
        for r_bits in pad_assignments(var):
            secrets = ClientSecrets(a, b, r_bits)
            for bits, p in _outcome_distribution(var, secrets).items():
                if p > 1e-12:
                    assert decode(var, bits, secrets) == 1 ^ (a & b)


# ---------------------------------------------------------------------------
# Transcript integrity and serialization
# ---------------------------------------------------------------------------


def test_transcript_decode_invariant_enforced():
    t = run_protocol("ghz-prep", 1, 1, 9)
    with pytest.raises(ValueError):
        ProtocolTranscript(t.variant, t.secrets, t.messages, t.server_bits, t.out ^ 1, t.seed)


def test_transcript_rejects_wrong_message_shape():
    t = run_protocol("ghz-prep", 1, 1, 9)
    with pytest.raises(ValueError):
        ProtocolTranscript(t.variant, t.secrets, t.messages[:1], t.server_bits, t.out, t.seed)


@pytest.mark.parametrize("name", ALL_VARIANTS)
def test_transcript_json_round_trip_bit_exact(name):
    t = run_protocol(name, 1, 0, 1234)
    doc = reports.transcript_to_json(t)
    back = reports.transcript_from_json(doc)
    assert back.variant == t.variant
    assert back.secrets == t.secrets
    assert back.server_bits == t.server_bits
    assert back.out == t.out
    assert back.seed == t.seed
    for m1, m2 in zip(t.messages, back.messages):
        assert (m1.direction, m1.kind) == (m2.direction, m2.kind)
        if m1.kind == "classical":
            assert m1.bits == m2.bits
        else:
            a1 = m1.state.amplitudes if hasattr(m1.state, "amplitudes") else m1.state.matrix
            a2 = m2.state.amplitudes if hasattr(m2.state, "amplitudes") else m2.state.matrix
            assert np.array_equal(a1, a2)  # bit-exact, not approximate


def test_round_trip_through_json_text():
    import json

    t = run_protocol("sq-bounce", 1, 1, 77)
    text = json.dumps(reports.transcript_to_json(t))
    back = reports.transcript_from_json(json.loads(text))
    q1 = [m for m in t.messages if m.kind == "quantum"]
    q2 = [m for m in back.messages if m.kind == "quantum"]
    for m1, m2 in zip(q1, q2):
        a1 = m1.state.amplitudes if hasattr(m1.state, "amplitudes") else m1.state.matrix
        a2 = m2.state.amplitudes if hasattr(m2.state, "amplitudes") else m2.state.matrix
        assert np.array_equal(a1, a2)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


def test_povm_validation():
    eye = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        Povm(((0,),), (np.array([[1, 0], [0, -0.5]], dtype=complex),))  # not PSD
    with pytest.raises(ValueError):
        Povm(((0,), (1,)), (eye, eye))  # sums to 2I
    povm = x_measurement_povm(2)
    total = sum(povm.elements)
    assert np.max(np.abs(total - np.eye(4))) < 1e-12


def test_strategy_compatibility_errors():
    state = ghz_state().density()
    with pytest.raises(ValueError):
        run_protocol("ghz-prep", 0, 0, 1, malicious_strategy(state, 0))
    povm = x_measurement_povm(3)
    with pytest.raises(ValueError):
        run_protocol("ghz-meas", 0, 0, 1, malicious_strategy(None, 0, povm))
    bad_labels = Povm((((0,)),) * 8, x_measurement_povm(3).elements)
    with pytest.raises(ValueError):
        run_protocol("ghz-bounce", 0, 0, 1, malicious_strategy(None, 0, bad_labels))


def test_kept_ancillas_capped():
    with pytest.raises(ValueError):
        malicious_strategy(None, 3, None)


def test_malicious_bounce_run_produces_valid_transcript():
    # server sends half of an entangled pair and measures everything with X
    vec = np.zeros(4, dtype=complex)
    vec[0b00] = vec[0b11] = 1 / np.sqrt(2)
    joint = DensityMatrix(2, np.outer(vec, vec.conj()))
    strategy = malicious_strategy(joint, 1, x_measurement_povm(1, 1))
    t = run_protocol("sq-bounce", 1, 1, 11, strategy)
    assert t.server_bits in ((0,), (1,))
    assert len(t.messages) == 3  # transcript validated on construction


def test_malicious_measuring_run_works():
    rng = np.random.default_rng(4)
    joint = random_density_matrix(4, rng)  # 3 wires + 1 kept
    strategy = malicious_strategy(joint, 1, None)
    t = run_protocol("ghz-meas", 0, 1, 6, strategy)
    assert len(t.server_bits) == 3


# ---------------------------------------------------------------------------
# Client channel in Choi form
# ---------------------------------------------------------------------------


def test_choi_of_client_map_requires_bounce():
    with pytest.raises(ValueError):
        choi_of_client_map("ghz-prep", 0, 0)
    with pytest.raises(ValueError):
        choi_of_client_map("sq-meas", 0, 0)


@pytest.mark.parametrize("name", ["sq-bounce", "ghz-bounce"])
def test_client_choi_matrices_input_independent(name):
    from securenand.qsim import choi_distance

    chois = {pair: choi_of_client_map(name, *pair) for pair in ALL_BITS}
    pairs = list(chois)
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            assert choi_distance(chois[pairs[i]], chois[pairs[j]]) < 1e-12


def test_message_constructor_validation():
    with pytest.raises(ValueError):
        Message("sideways", "classical", bits=(0,))
    with pytest.raises(ValueError):
        Message(CLIENT_TO_SERVER, "classical", bits=None)
    with pytest.raises(ValueError):
        Message(CLIENT_TO_SERVER, "quantum", state=None, qubits=(0,))
