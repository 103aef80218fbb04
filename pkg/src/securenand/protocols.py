"""State machines for the six blind-NAND delegation protocol variants.

Every variant computes NAND(a, b) = 1 xor ab for the client while hiding
(a, b) from the server. The six variants differ in who touches the quantum
resource:

  ghz-prep    client prepares an encoded 3-qubit resource and sends it;
              the server X-measures all three qubits and returns the bits.
  ghz-meas    server sends the bare 3-qubit resource; the client measures
              it in input-dependent X/Y bases and never replies.
  ghz-bounce  server sends the resource; the client only rotates it and
              bounces it back for the server to X-measure.
  sq-bounce   single-qubit bounce: server sends |+>, the client rotates by
              Z^r S^a S^b (S†)^(a xor b) and returns it.
  sq-prep     client prepares the rotated |+> herself and sends it.
  sq-meas     server sends |+>; the client rotates locally and X-measures.

The client's classical work in every variant is XOR, constants and coin
flips. All of that is routed through a BitOps instance so a capability
policy can meter or forbid operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import product

import numpy as np

from .qsim import (
    ATOL,
    PSD_SLACK,
    ChoiMatrix,
    DensityMatrix,
    GateOp,
    ObservableBasis,
    QuantumState,
    choi_of_channel,
    embed_gate,
    ghz_state,
    kron,
    measure_observables,
    observable_for_bit,
    partial_trace,
    plus_state,
    sample_outcome,
)

GHZ_PREP = "ghz-prep"
GHZ_MEAS = "ghz-meas"
GHZ_BOUNCE = "ghz-bounce"
SQ_BOUNCE = "sq-bounce"
SQ_PREP = "sq-prep"
SQ_MEAS = "sq-meas"


@dataclass(frozen=True)
class Variant:
    """Static description of one protocol variant.

    flow is "prep" (client sends a state), "meas" (client measures, nothing
    goes back to the server) or "bounce" (server's state visits the client
    and returns). pad_bits counts the client's one-time-pad coin flips and
    decode_adds_one marks the variants whose decode XORs in a constant 1.
    """

    name: str
    qubits: int
    pad_bits: int
    flow: str
    decode_adds_one: bool


VARIANTS: dict[str, Variant] = {
    GHZ_PREP: Variant(GHZ_PREP, 3, 1, "prep", False),
    GHZ_MEAS: Variant(GHZ_MEAS, 3, 0, "meas", False),
    GHZ_BOUNCE: Variant(GHZ_BOUNCE, 3, 3, "bounce", False),
    SQ_BOUNCE: Variant(SQ_BOUNCE, 1, 1, "bounce", True),
    SQ_PREP: Variant(SQ_PREP, 1, 1, "prep", True),
    SQ_MEAS: Variant(SQ_MEAS, 1, 0, "meas", True),
}


def variant(name: str) -> Variant:
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown protocol variant {name!r}; known: {sorted(VARIANTS)}") from None


class BitOps:
    """The client's classical compute surface: XOR, constants, coin flips.

    The default implementation just computes. Subclasses may meter calls or
    reject disallowed operations; decode() and the delegation layer perform
    every classical step through one of these.
    """

    def xor(self, x: int, y: int) -> int:
        return (x ^ y) & 1

    def const(self, bit: int) -> int:
        return int(bit) & 1

    def random_bits(self, rng: np.random.Generator, n: int) -> tuple[int, ...]:
        return tuple(int(b) for b in rng.integers(0, 2, size=n))


DEFAULT_OPS = BitOps()


@dataclass(frozen=True)
class ClientSecrets:
    """The client's input bits and her one-time-pad bits for a single run."""

    a: int
    b: int
    r_bits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError("inputs a, b must be bits")
        if any(r not in (0, 1) for r in self.r_bits):
            raise ValueError("pad bits must be bits")
        object.__setattr__(self, "r_bits", tuple(self.r_bits))


def _check_pad_length(var: Variant, secrets: ClientSecrets):
    if len(secrets.r_bits) != var.pad_bits:
        raise ValueError(
            f"{var.name} needs {var.pad_bits} pad bit(s), got {len(secrets.r_bits)}"
        )


def ghz_encoding_ops(a: int, b: int) -> list[GateOp]:
    """(S1†)^a (S2†)^b (S3†)^(a xor b): the basis-switch rotations on the resource."""
    return [
        GateOp("sdag", 0, a),
        GateOp("sdag", 1, b),
        GateOp("sdag", 2, a ^ b),
    ]


def single_qubit_encoding_ops(a: int, b: int) -> list[GateOp]:
    """S^a S^b (S†)^(a xor b) on one wire; algebraically equal to Z^(ab)."""
    return [
        GateOp("s", 0, a),
        GateOp("s", 0, b),
        GateOp("sdag", 0, a ^ b),
    ]


def pad_ops(r_bits, disabled_pads=()) -> list[GateOp]:
    """Z^r pads, one per wire; disabled positions are forced to the identity."""
    return [
        GateOp("z", i, 0 if i in disabled_pads else r)
        for i, r in enumerate(r_bits)
    ]


def client_unitary(var: Variant, secrets: ClientSecrets, disabled_pads=()) -> np.ndarray:
    """Full matrix of the client's encoding followed by her Z pads."""
    _check_pad_length(var, secrets)
    if var.qubits == 3:
        ops = ghz_encoding_ops(secrets.a, secrets.b)
    else:
        ops = single_qubit_encoding_ops(secrets.a, secrets.b)
    ops += pad_ops(secrets.r_bits, disabled_pads)
    mats = [embed_gate(op, var.qubits) for op in ops]
    return reduce(lambda acc, m: m @ acc, mats, np.eye(2**var.qubits, dtype=complex))


def honest_resource(var: Variant) -> QuantumState:
    """The state an honest server (or preparing client) starts from."""
    return ghz_state() if var.qubits == 3 else plus_state()


def client_encode_ghz(secrets: ClientSecrets) -> QuantumState:
    """The ghz-prep client's outgoing state: Z1^r then the three S† rotations on the resource."""
    var = VARIANTS[GHZ_PREP]
    _check_pad_length(var, secrets)
    state = ghz_state()
    for op in ghz_encoding_ops(secrets.a, secrets.b):
        state = _apply(state, op)
    state = _apply(state, GateOp("z", 0, secrets.r_bits[0]))
    return state


def prepare_client_state(var: Variant, secrets: ClientSecrets) -> QuantumState:
    """Outgoing state for the preparing-client variants."""
    if var.flow != "prep":
        raise ValueError(f"{var.name} has no client preparation round")
    U = client_unitary(var, secrets)
    base = honest_resource(var)
    return QuantumState(var.qubits, U @ base.amplitudes)


def _apply(state: QuantumState, op: GateOp) -> QuantumState:
    return QuantumState(state.num_qubits, embed_gate(op, state.num_qubits) @ state.amplitudes)


def _transform_first_subsystem(incoming: DensityMatrix, U: np.ndarray, client_qubits: int) -> DensityMatrix:
    if incoming.num_qubits < client_qubits:
        raise ValueError(f"incoming state must carry at least {client_qubits} qubit(s)")
    kept = incoming.num_qubits - client_qubits
    full = kron(U, np.eye(2**kept, dtype=complex)) if kept else U
    return DensityMatrix(incoming.num_qubits, full @ incoming.matrix @ full.conj().T)


def bounce_client_transform(incoming: DensityMatrix, secrets: ClientSecrets, disabled_pads=()) -> DensityMatrix:
    """ghz-bounce client round: conjugate the first three qubits by pads + rotations.

    The incoming operator may be larger than three qubits when the server
    kept ancillas entangled with what he sent; the client only ever touches
    the first factor.
    """
    var = VARIANTS[GHZ_BOUNCE]
    U = client_unitary(var, secrets, disabled_pads)
    return _transform_first_subsystem(incoming, U, 3)


def single_qubit_client_transform(incoming: DensityMatrix, secrets: ClientSecrets, disabled_pads=()) -> DensityMatrix:
    """sq-bounce client round on the first qubit of the incoming operator."""
    var = VARIANTS[SQ_BOUNCE]
    U = client_unitary(var, secrets, disabled_pads)
    return _transform_first_subsystem(incoming, U, 1)


def measuring_client_bases(a: int, b: int) -> list[ObservableBasis]:
    """Bases for the measuring client: observable switch per input bit, third wire gets a xor b."""
    return [observable_for_bit(a), observable_for_bit(b), observable_for_bit(a ^ b)]


def decode(var_name, server_bits, secrets: ClientSecrets, ops: BitOps = DEFAULT_OPS) -> int:
    """Client decode: XOR of the reply bits, the pad bits, and possibly a constant 1."""
    var = var_name if isinstance(var_name, Variant) else variant(var_name)
    server_bits = tuple(int(b) for b in server_bits)
    expected = var.qubits
    if len(server_bits) != expected:
        raise ValueError(f"{var.name} decode expects {expected} bit(s), got {len(server_bits)}")
    _check_pad_length(var, secrets)
    acc = ops.const(0)
    for bit in server_bits:
        acc = ops.xor(acc, bit)
    for r in secrets.r_bits:
        acc = ops.xor(acc, r)
    if var.decode_adds_one:
        acc = ops.xor(acc, ops.const(1))
    return acc


# ---------------------------------------------------------------------------
# Messages, transcripts, server strategies.
# ---------------------------------------------------------------------------

CLIENT_TO_SERVER = "client->server"
SERVER_TO_CLIENT = "server->client"


@dataclass(frozen=True)
class Message:
    """One channel event: a quantum payload on tagged wires, or classical bits."""

    direction: str
    kind: str
    bits: tuple[int, ...] | None = None
    state: QuantumState | DensityMatrix | None = None
    qubits: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.direction not in (CLIENT_TO_SERVER, SERVER_TO_CLIENT):
            raise ValueError("bad message direction")
        if self.kind == "classical":
            if self.bits is None or self.state is not None:
                raise ValueError("classical message carries bits only")
        elif self.kind == "quantum":
            if self.state is None or self.bits is not None or self.qubits is None:
                raise ValueError("quantum message carries a state and wire tags")
        else:
            raise ValueError("message kind must be 'quantum' or 'classical'")

    @classmethod
    def classical(cls, direction: str, bits) -> "Message":
        return cls(direction, "classical", bits=tuple(int(b) for b in bits))

    @classmethod
    def quantum(cls, direction: str, state, qubits) -> "Message":
        return cls(direction, "quantum", state=state, qubits=tuple(qubits))


_FLOW_SHAPES = {
    "prep": ((CLIENT_TO_SERVER, "quantum"), (SERVER_TO_CLIENT, "classical")),
    "meas": ((SERVER_TO_CLIENT, "quantum"),),
    "bounce": (
        (SERVER_TO_CLIENT, "quantum"),
        (CLIENT_TO_SERVER, "quantum"),
        (SERVER_TO_CLIENT, "classical"),
    ),
}


@dataclass(frozen=True)
class ProtocolTranscript:
    """Everything observable about one protocol run, plus the client's secrets."""

    variant: str
    secrets: ClientSecrets
    messages: tuple[Message, ...]
    server_bits: tuple[int, ...]
    out: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "server_bits", tuple(int(b) for b in self.server_bits))
        self.validate()

    def validate(self):
        var = variant(self.variant)
        shape = tuple((m.direction, m.kind) for m in self.messages)
        if shape != _FLOW_SHAPES[var.flow]:
            raise ValueError(f"message sequence {shape} does not match the {var.name} flow")
        if decode(var, self.server_bits, self.secrets) != self.out:
            raise ValueError("transcript decode invariant violated")


@dataclass(frozen=True)
class Povm:
    """Generalized measurement with an outcome label (a bit tuple) per element."""

    labels: tuple[tuple[int, ...], ...]
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        labels = tuple(tuple(int(b) for b in lab) for lab in self.labels)
        elements = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if len(labels) != len(elements) or not elements:
            raise ValueError("one label per POVM element required")
        dim = elements[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for e in elements:
            if e.shape != (dim, dim):
                raise ValueError("POVM elements must share one dimension")
            if np.max(np.abs(e - e.conj().T)) > PSD_SLACK:
                raise ValueError("POVM element is not Hermitian")
            if np.min(np.linalg.eigvalsh((e + e.conj().T) / 2)) < -PSD_SLACK:
                raise ValueError("POVM element is not PSD")
            total += e
        if np.max(np.abs(total - np.eye(dim))) > PSD_SLACK:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def x_measurement_povm(num_qubits: int, kept_qubits: int = 0) -> Povm:
    """Projective X measurement on the first wires, identity on kept ancillas."""
    plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
    eye_kept = np.eye(2**kept_qubits, dtype=complex)
    labels, elements = [], []
    for bits in product((0, 1), repeat=num_qubits):
        proj = kron(*[minus if b else plus for b in bits])
        elements.append(kron(proj, eye_kept) if kept_qubits else proj)
        labels.append(bits)
    return Povm(tuple(labels), tuple(elements))


@dataclass(frozen=True)
class ServerStrategy:
    """What the server actually does: honest, or an arbitrary prepare/measure pair.

    A malicious strategy may supply the joint state it prepares (the client's
    wires first, kept ancillas after) and/or a POVM it applies to everything
    it holds once the client's round is over. POVM outcome labels are the
    classical bits it reports, so classical lying is plain relabeling.
    """

    kind: str = "honest"
    prepared_state: DensityMatrix | None = None
    kept_qubits: int = 0
    measurement: Povm | None = None
    description: str = "honest"

    def __post_init__(self):
        if self.kind not in ("honest", "malicious"):
            raise ValueError("strategy kind must be 'honest' or 'malicious'")
        if self.kind == "honest" and (self.prepared_state or self.measurement):
            raise ValueError("honest strategy carries no custom state or measurement")
        if self.kept_qubits < 0 or self.kept_qubits > 2:
            raise ValueError("kept ancillas are capped at 2 qubits")


HONEST = ServerStrategy()


def malicious_strategy(prepared_state=None, kept_qubits=0, measurement=None, description="malicious") -> ServerStrategy:
    return ServerStrategy("malicious", prepared_state, kept_qubits, measurement, description)


def _strategy_initial_state(var: Variant, strategy: ServerStrategy) -> DensityMatrix:
    if strategy.prepared_state is None:
        return honest_resource(var).density()
    state = strategy.prepared_state
    if state.num_qubits != var.qubits + strategy.kept_qubits:
        raise ValueError(
            f"prepared state must cover {var.qubits} sent + {strategy.kept_qubits} kept qubits"
        )
    return state


def _check_strategy_compatible(var: Variant, strategy: ServerStrategy):
    if strategy.kind == "honest":
        return
    if var.flow == "prep" and strategy.prepared_state is not None:
        raise ValueError(f"{var.name}: the server sends nothing, it cannot prepare a state")
    if var.flow == "meas" and strategy.measurement is not None:
        raise ValueError(f"{var.name}: the server receives nothing back to measure")
    if strategy.measurement is not None:
        wanted_dim = 2 ** (var.qubits + strategy.kept_qubits)
        if strategy.measurement.dim != wanted_dim:
            raise ValueError("strategy POVM dimension does not match sent + kept qubits")
        if any(len(lab) != var.qubits for lab in strategy.measurement.labels):
            raise ValueError(f"{var.name}: POVM labels must be {var.qubits} bit(s) wide")


def _measure_povm_probs(povm: Povm, rho: np.ndarray) -> list[float]:
    return [max(np.trace(e @ rho).real, 0.0) for e in povm.elements]


def run_protocol(var_name: str, a: int, b: int, seed: int, strategy: ServerStrategy = HONEST,
                 ops: BitOps = DEFAULT_OPS) -> ProtocolTranscript:
    """Execute one full protocol run and return its transcript.

    The seeded generator drives, in order, the client's pad coin flips and
    then the single measurement sampling event, so transcripts are
    reproducible bit for bit.
    """
    var = variant(var_name)
    _check_strategy_compatible(var, strategy)
    rng = np.random.default_rng(seed)
    secrets = ClientSecrets(a, b, ops.random_bits(rng, var.pad_bits))
    messages: list[Message] = []
    wires = tuple(range(var.qubits))

    if var.flow == "prep":
        outgoing = prepare_client_state(var, secrets)
        messages.append(Message.quantum(CLIENT_TO_SERVER, outgoing, wires))
        if strategy.measurement is None:
            dist = measure_observables(outgoing, [ObservableBasis("x")] * var.qubits)
            bits = sample_outcome(dist, rng)
        else:
            probs = _measure_povm_probs(strategy.measurement, outgoing.density().matrix)
            idx = _sample_index(probs, rng)
            bits = strategy.measurement.labels[idx]
        messages.append(Message.classical(SERVER_TO_CLIENT, bits))

    elif var.flow == "meas":
        joint = _strategy_initial_state(var, strategy)
        client_part = partial_trace(joint, wires) if strategy.kept_qubits else joint
        shown = honest_resource(var) if strategy.prepared_state is None else client_part
        messages.append(Message.quantum(SERVER_TO_CLIENT, shown, wires))
        if var.qubits == 3:
            bases = measuring_client_bases(secrets.a, secrets.b)
            dist = measure_observables(client_part, bases)
        else:
            U = client_unitary(var, secrets)
            rotated = DensityMatrix(1, U @ client_part.matrix @ U.conj().T)
            dist = measure_observables(rotated, [ObservableBasis("x")])
        bits = sample_outcome(dist, rng)

    else:  # bounce
        joint = _strategy_initial_state(var, strategy)
        incoming_shown = honest_resource(var) if strategy.prepared_state is None else partial_trace(joint, wires)
        messages.append(Message.quantum(SERVER_TO_CLIENT, incoming_shown, wires))
        U = client_unitary(var, secrets)
        if strategy.prepared_state is None:
            returned_pure = QuantumState(var.qubits, U @ honest_resource(var).amplitudes)
            messages.append(Message.quantum(CLIENT_TO_SERVER, returned_pure, wires))
            if strategy.measurement is None:
                dist = measure_observables(returned_pure, [ObservableBasis("x")] * var.qubits)
                bits = sample_outcome(dist, rng)
            else:
                probs = _measure_povm_probs(strategy.measurement, returned_pure.density().matrix)
                bits = strategy.measurement.labels[_sample_index(probs, rng)]
        else:
            full = kron(U, np.eye(2**strategy.kept_qubits, dtype=complex)) if strategy.kept_qubits else U
            after = DensityMatrix(joint.num_qubits, full @ joint.matrix @ full.conj().T)
            messages.append(Message.quantum(CLIENT_TO_SERVER, partial_trace(after, wires), wires))
            povm = strategy.measurement or x_measurement_povm(var.qubits, strategy.kept_qubits)
            probs = _measure_povm_probs(povm, after.matrix)
            bits = povm.labels[_sample_index(probs, rng)]
        messages.append(Message.classical(SERVER_TO_CLIENT, bits))

    out = decode(var, bits, secrets, ops)
    return ProtocolTranscript(var.name, secrets, tuple(messages), tuple(bits), out, seed)


def _sample_index(probs, rng: np.random.Generator) -> int:
    p = np.array(probs, dtype=float)
    p = p / p.sum()
    return int(rng.choice(len(p), p=p))


# ---------------------------------------------------------------------------
# The client's averaged action as a channel.
# ---------------------------------------------------------------------------


def pad_assignments(var: Variant, disabled_pads=()):
    """All equally likely pad settings, with disabled positions pinned to 0."""
    free = [i for i in range(var.pad_bits) if i not in disabled_pads]
    for values in product((0, 1), repeat=len(free)):
        bits = [0] * var.pad_bits
        for pos, v in zip(free, values):
            bits[pos] = v
        yield tuple(bits)


def averaged_client_channel(var_name: str, a: int, b: int, disabled_pads=()):
    """Uniform mixture of the client's unitaries over her pad bits.

    Returns (weight, unitary) pairs; the weights sum to 1.
    """
    var = variant(var_name)
    assignments = list(pad_assignments(var, disabled_pads))
    weight = 1.0 / len(assignments)
    return [
        (weight, client_unitary(var, ClientSecrets(a, b, bits), disabled_pads))
        for bits in assignments
    ]


def choi_of_client_map(var_name: str, a: int, b: int, disabled_pads=()) -> ChoiMatrix:
    """Choi matrix of the client's pad-averaged transformation at fixed inputs.

    Only bounce variants expose a transformation of server-supplied states,
    so only they have a channel to audit. Equality of these Choi matrices
    across inputs certifies input independence against every adversarial
    input state, entangled ancillas included.
    """
    var = variant(var_name)
    if var.flow != "bounce":
        raise ValueError(f"{var.name} has no client-transform round")
    mixture = averaged_client_channel(var_name, a, b, disabled_pads)
    dim = 2**var.qubits

    def apply_fn(mat):
        return sum(w * (U @ mat @ U.conj().T) for w, U in mixture)

    choi = choi_of_channel(apply_fn, dim, dim)
    marginal = choi.output_partial_trace()
    if np.max(np.abs(marginal - np.eye(dim))) > PSD_SLACK:
        raise AssertionError("averaged client channel is not trace preserving")
    return choi
