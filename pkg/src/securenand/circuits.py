"""Boolean circuits: parsing, lowering to NAND + XOR, and delegated evaluation.

Circuit text format, one declaration per line:

    # comment to end of line
    in  <name> [<name> ...]
    out <name> [<name> ...]
    <name> = NAND <w> <w>
    <name> = XOR <w> <w>
    <name> = NOT <w>
    <name> = AND <w> <w>        (sugar; lowered to NAND + XOR)
    <name> = CONST <0|1>

Names match [a-z][a-z0-9_]*. Definitions may appear in any order; the
parser topologically sorts them and reports syntax errors, undefined
wires, duplicate definitions and cycles, each with a line and column.

Delegated evaluation runs one protocol instance per NAND gate while the
client itself executes nothing but XOR, constants, coin flips and bit
memory, enforced by a run-time capability policy with an operation census.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .protocols import BitOps, ProtocolTranscript, run_protocol, variant

NAME_RE = re.compile(r"[a-z][a-z0-9_]*$")
GATE_ARITY = {"NAND": 2, "XOR": 2, "AND": 2, "NOT": 1, "CONST": 1}
LOWERED_KINDS = ("NAND", "XOR", "CONST")


class CircuitError(ValueError):
    """Parse or evaluation failure with a location and a distinct kind."""

    def __init__(self, kind: str, message: str, line: int | None = None, column: int | None = None):
        self.kind = kind
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{kind}: {message}{where}")


class PolicyViolation(RuntimeError):
    """The client attempted a classical operation outside its capability set."""


@dataclass(frozen=True)
class Gate:
    out: str
    kind: str
    args: tuple

    def wires(self) -> tuple[str, ...]:
        return () if self.kind == "CONST" else self.args


@dataclass(frozen=True)
class BooleanCircuit:
    inputs: tuple[str, ...]
    gates: tuple[Gate, ...]  # topologically ordered
    outputs: tuple[str, ...]

    def nand_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "NAND")

    def format(self) -> str:
        lines = ["in " + " ".join(self.inputs)]
        for g in self.gates:
            args = " ".join(str(a) for a in g.args)
            lines.append(f"{g.out} = {g.kind} {args}")
        lines.append("out " + " ".join(self.outputs))
        return "\n".join(lines) + "\n"


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = []
        for match in re.finditer(r"\S+", line):
            tokens.append((match.group(), lineno, match.start() + 1))
        if tokens:
            yield tokens


def parse_circuit(text: str) -> BooleanCircuit:
    """Parse circuit text into a validated, topologically ordered circuit."""
    inputs: list[str] = []
    outputs: list[tuple[str, int, int]] = []
    defs: dict[str, tuple[Gate, int, int]] = {}
    order: list[str] = []

    def check_name(token, lineno, col):
        if not NAME_RE.match(token):
            raise CircuitError("syntax", f"bad wire name {token!r}", lineno, col)
        return token

    for tokens in _tokenize(text):
        head, lineno, col = tokens[0]
        if head == "in":
            if len(tokens) < 2:
                raise CircuitError("syntax", "'in' needs at least one name", lineno, col)
            for tok, ln, c in tokens[1:]:
                name = check_name(tok, ln, c)
                if name in inputs or name in defs:
                    raise CircuitError("duplicate-wire", f"wire {name!r} already defined", ln, c)
                inputs.append(name)
        elif head == "out":
            if len(tokens) < 2:
                raise CircuitError("syntax", "'out' needs at least one name", lineno, col)
            for tok, ln, c in tokens[1:]:
                outputs.append((check_name(tok, ln, c), ln, c))
        else:
            if len(tokens) < 3 or tokens[1][0] != "=":
                raise CircuitError("syntax", "expected '<name> = GATE args'", lineno, col)
            name = check_name(head, lineno, col)
            kind_tok, kind_ln, kind_col = tokens[2]
            if kind_tok not in GATE_ARITY:
                raise CircuitError("syntax", f"unknown gate {kind_tok!r}", kind_ln, kind_col)
            args = tokens[3:]
            if len(args) != GATE_ARITY[kind_tok]:
                raise CircuitError(
                    "syntax",
                    f"{kind_tok} takes {GATE_ARITY[kind_tok]} argument(s), got {len(args)}",
                    kind_ln, kind_col,
                )
            if kind_tok == "CONST":
                bit_tok, bit_ln, bit_col = args[0]
                if bit_tok not in ("0", "1"):
                    raise CircuitError("syntax", "CONST takes 0 or 1", bit_ln, bit_col)
                gate = Gate(name, "CONST", (int(bit_tok),))
            else:
                gate = Gate(name, kind_tok, tuple(check_name(t, ln, c) for t, ln, c in args))
            if name in defs or name in inputs:
                raise CircuitError("duplicate-wire", f"wire {name!r} already defined", lineno, col)
            defs[name] = (gate, lineno, col)
            order.append(name)

    if not inputs and not defs:
        raise CircuitError("syntax", "empty circuit", 1, 1)

    known = set(inputs) | set(defs)
    for tokens in _tokenize(text):
        if tokens[0][0] in ("in", "out"):
            continue
        gate, _, _ = defs[tokens[0][0]]
        for (tok, ln, c), wire in zip(tokens[3:], gate.wires()):
            if wire not in known:
                raise CircuitError("undefined-wire", f"wire {wire!r} is never defined", ln, c)
    for name, ln, c in outputs:
        if name not in known:
            raise CircuitError("undefined-wire", f"output wire {name!r} is never defined", ln, c)
    if not outputs:
        raise CircuitError("syntax", "circuit declares no outputs", 1, 1)

    # Topological sort over the definition graph; leftovers mean a cycle.
    deps = {name: {w for w in defs[name][0].wires() if w in defs} for name in order}
    ordered: list[Gate] = []
    placed: set[str] = set()
    progress = True
    while progress:
        progress = False
        for name in order:
            if name not in placed and deps[name] <= placed:
                ordered.append(defs[name][0])
                placed.add(name)
                progress = True
    if len(placed) != len(order):
        stuck = next(n for n in order if n not in placed)
        _, ln, c = defs[stuck]
        raise CircuitError("cycle", f"wire {stuck!r} is part of a dependency cycle", ln, c)

    return BooleanCircuit(tuple(inputs), tuple(ordered), tuple(n for n, _, _ in outputs))


def _fresh_name(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def lower(circuit: BooleanCircuit) -> BooleanCircuit:
    """Rewrite to NAND + XOR + CONST only: NOT w -> XOR(w, 1); AND -> NOT(NAND).

    Already-lowered circuits come back unchanged, so lowering is idempotent.
    """
    if all(g.kind in LOWERED_KINDS for g in circuit.gates):
        return circuit
    taken = set(circuit.inputs) | {g.out for g in circuit.gates}
    one_wire: str | None = None
    gates: list[Gate] = []

    def ensure_one() -> str:
        nonlocal one_wire
        if one_wire is None:
            one_wire = _fresh_name("one", taken)
            gates.append(Gate(one_wire, "CONST", (1,)))
        return one_wire

    for gate in circuit.gates:
        if gate.kind in LOWERED_KINDS:
            gates.append(gate)
        elif gate.kind == "NOT":
            gates.append(Gate(gate.out, "XOR", (gate.args[0], ensure_one())))
        elif gate.kind == "AND":
            inner = _fresh_name(gate.out + "_nand", taken)
            gates.append(Gate(inner, "NAND", gate.args))
            gates.append(Gate(gate.out, "XOR", (inner, ensure_one())))
        else:
            raise CircuitError("syntax", f"cannot lower gate kind {gate.kind!r}")
    return BooleanCircuit(circuit.inputs, tuple(gates), circuit.outputs)


def evaluate_plain(circuit: BooleanCircuit, input_bits) -> tuple[int, ...]:
    """In-the-clear reference evaluation; the oracle for delegation tests."""
    input_bits = tuple(int(b) for b in input_bits)
    if len(input_bits) != len(circuit.inputs):
        raise CircuitError(
            "arity", f"circuit takes {len(circuit.inputs)} input bit(s), got {len(input_bits)}"
        )
    values = dict(zip(circuit.inputs, input_bits))
    for gate in circuit.gates:
        if gate.kind == "CONST":
            values[gate.out] = gate.args[0]
        elif gate.kind == "XOR":
            values[gate.out] = values[gate.args[0]] ^ values[gate.args[1]]
        elif gate.kind == "NOT":
            values[gate.out] = 1 ^ values[gate.args[0]]
        elif gate.kind == "AND":
            values[gate.out] = values[gate.args[0]] & values[gate.args[1]]
        elif gate.kind == "NAND":
            values[gate.out] = 1 ^ (values[gate.args[0]] & values[gate.args[1]])
    return tuple(values[w] for w in circuit.outputs)


class XorLimitedClient(BitOps):
    """Policy-enforcing client: XOR, constants, coin flips, bit memory.

    Every operation is tallied in the census. Boolean gates beyond XOR are
    present only to refuse loudly, so a buggy evaluator cannot quietly
    compute NAND on the client.
    """

    def __init__(self):
        self.census: Counter = Counter()
        self.memory: dict[str, int] = {}

    def xor(self, x, y):
        self.census["xor"] += 1
        return super().xor(x, y)

    def const(self, bit):
        self.census["const"] += 1
        return super().const(bit)

    def random_bits(self, rng, n):
        self.census["random_bit"] += n
        return super().random_bits(rng, n)

    def store(self, wire: str, bit: int):
        self.census["store"] += 1
        self.memory[wire] = int(bit) & 1

    def load(self, wire: str) -> int:
        self.census["load"] += 1
        return self.memory[wire]

    def nand(self, *_):
        self.census["nand"] += 1
        raise PolicyViolation("client attempted a local NAND")

    def and_(self, *_):
        self.census["and"] += 1
        raise PolicyViolation("client attempted a local AND")

    def or_(self, *_):
        self.census["or"] += 1
        raise PolicyViolation("client attempted a local OR")


FORBIDDEN_OPS = ("nand", "and", "or")


@dataclass(frozen=True)
class DelegationTrace:
    """Result of one delegated circuit run: outputs, per-NAND transcripts, op census."""

    variant: str
    outputs: tuple[int, ...]
    transcripts: tuple[ProtocolTranscript, ...]
    census: dict

    def __post_init__(self):
        bad = [op for op in FORBIDDEN_OPS if self.census.get(op)]
        if bad:
            raise PolicyViolation(f"client census contains forbidden ops: {bad}")


def evaluate_delegated(circuit: BooleanCircuit, input_bits, variant_name: str, seed: int) -> DelegationTrace:
    """Evaluate a circuit with every NAND delegated through the chosen protocol.

    XOR and CONST gates run locally under the capability policy; each NAND
    consumes a fresh per-gate seed derived from the master seed, so pad bits
    are never shared between gates.
    """
    var = variant(variant_name)
    lowered = lower(circuit)
    input_bits = tuple(int(b) for b in input_bits)
    if len(input_bits) != len(lowered.inputs):
        raise CircuitError(
            "arity", f"circuit takes {len(lowered.inputs)} input bit(s), got {len(input_bits)}"
        )
    client = XorLimitedClient()
    rng = np.random.default_rng(seed)
    for wire, bit in zip(lowered.inputs, input_bits):
        client.store(wire, bit)
    transcripts: list[ProtocolTranscript] = []
    for gate in lowered.gates:
        if gate.kind == "CONST":
            client.store(gate.out, client.const(gate.args[0]))
        elif gate.kind == "XOR":
            client.store(gate.out, client.xor(client.load(gate.args[0]), client.load(gate.args[1])))
        elif gate.kind == "NAND":
            a = client.load(gate.args[0])
            b = client.load(gate.args[1])
            gate_seed = int(rng.integers(0, 2**63))
            transcript = run_protocol(var.name, a, b, gate_seed, ops=client)
            transcripts.append(transcript)
            client.store(gate.out, transcript.out)
        else:  # pragma: no cover - lower() leaves nothing else
            raise AssertionError(f"unlowered gate {gate.kind} reached the evaluator")
    outputs = tuple(client.load(w) for w in lowered.outputs)
    return DelegationTrace(var.name, outputs, tuple(transcripts), dict(client.census))


HALF_ADDER = """\
# half adder: sum = a xor b, carry = a and b
in a b
s = XOR a b
c = AND a b
out s c
"""

RIPPLE_ADDER_2BIT = """\
# two-bit ripple-carry adder: (a1 a0) + (b1 b0) -> (s1 s0) with carry out
in a0 a1 b0 b1
s0 = XOR a0 b0
c0 = AND a0 b0
t1 = XOR a1 b1
s1 = XOR t1 c0
u1 = AND a1 b1
v1 = AND t1 c0
nu = NOT u1
nv = NOT v1
cout = NAND nu nv
out s0 s1 cout
"""
