"""JSON report format shared by the CLI and the library.

Complex matrices serialize as row-major arrays of [re, im] pairs. Floats go
through Python's shortest round-trip repr, which is exact for IEEE doubles
(at most 17 significant digits), so serialize/parse is bit-exact and report
payloads are byte-identical across repeated seeded runs. Timing lives in
its own key so determinism checks can drop it.
"""

from __future__ import annotations

import json

import numpy as np

from .audit import BlindnessReport, CorrectnessReport, LeakageReport
from .circuits import DelegationTrace
from .nogo import AffineMap, ClassicalProtocolCandidate, NogoSearchResult
from .protocols import ClientSecrets, Message, ProtocolTranscript
from .qsim import ChoiMatrix, DensityMatrix, QuantumState

SCHEMA_VERSION = "1"
RNG_ALGORITHM = "numpy-default-pcg64"


def complex_pairs(matrix) -> list:
    """Row-major [re, im] encoding of a complex vector or matrix."""
    arr = np.asarray(matrix)
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def from_complex_pairs(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(state: QuantumState) -> dict:
    return {"type": "state", "num_qubits": state.num_qubits,
            "amplitudes": complex_pairs(state.amplitudes)}


def dm_to_json(dm: DensityMatrix) -> dict:
    return {"type": "density", "num_qubits": dm.num_qubits,
            "matrix": complex_pairs(dm.matrix)}


def choi_to_json(choi: ChoiMatrix) -> dict:
    return {"type": "choi", "dim_in": choi.dim_in, "dim_out": choi.dim_out,
            "matrix": complex_pairs(choi.matrix)}


def quantum_from_json(data: dict):
    if data["type"] == "state":
        return QuantumState(data["num_qubits"], from_complex_pairs(data["amplitudes"]))
    if data["type"] == "density":
        return DensityMatrix(data["num_qubits"], from_complex_pairs(data["matrix"]))
    if data["type"] == "choi":
        return ChoiMatrix(data["dim_in"], data["dim_out"], from_complex_pairs(data["matrix"]))
    raise ValueError(f"unknown quantum payload type {data['type']!r}")


def message_to_json(msg: Message) -> dict:
    if msg.kind == "classical":
        return {"direction": msg.direction, "kind": "classical", "bits": list(msg.bits)}
    payload = state_to_json(msg.state) if isinstance(msg.state, QuantumState) else dm_to_json(msg.state)
    return {"direction": msg.direction, "kind": "quantum",
            "qubits": list(msg.qubits), "payload": payload}


def message_from_json(data: dict) -> Message:
    if data["kind"] == "classical":
        return Message.classical(data["direction"], data["bits"])
    return Message.quantum(data["direction"], quantum_from_json(data["payload"]), data["qubits"])


def transcript_to_json(t: ProtocolTranscript) -> dict:
    return {
        "variant": t.variant,
        "a": t.secrets.a,
        "b": t.secrets.b,
        "r_bits": list(t.secrets.r_bits),
        "messages": [message_to_json(m) for m in t.messages],
        "server_bits": list(t.server_bits),
        "out": t.out,
        "seed": t.seed,
    }


def transcript_from_json(data: dict) -> ProtocolTranscript:
    secrets = ClientSecrets(data["a"], data["b"], tuple(data["r_bits"]))
    messages = tuple(message_from_json(m) for m in data["messages"])
    return ProtocolTranscript(
        data["variant"], secrets, messages, tuple(data["server_bits"]), data["out"], data["seed"]
    )


def _input_key(pair) -> str:
    return f"a{pair[0]}b{pair[1]}"


def correctness_to_json(report: CorrectnessReport) -> dict:
    return {
        "kind": "correctness",
        "variant": report.variant,
        "pass": report.passed,
        "tolerance": report.tolerance,
        "cases": [
            {"a": a, "b": b, "r_bits": list(r), "probability_correct": p}
            for a, b, r, p in report.cases
        ],
    }


def blindness_to_json(report: BlindnessReport) -> dict:
    doc = {
        "kind": f"blindness-{report.form}",
        "variant": report.variant,
        "pass": report.passed,
        "vacuous": report.vacuous,
        "max_pairwise_trace_distance": report.max_pairwise_trace_distance,
        "tolerance": report.tolerance,
    }
    if report.per_input is not None and not report.passed:
        # full matrices only on failure; a scalar summary suffices on a pass
        encode = choi_to_json if report.form == "channel" else dm_to_json
        doc["per_input"] = {_input_key(k): encode(v) for k, v in report.per_input.items()}
    return doc


def leakage_to_json(report: LeakageReport) -> dict:
    return {
        "kind": "leakage",
        "variant": report.variant,
        "strategy": report.strategy,
        "pass": report.passed,
        "guessing_probability": report.guessing_probability,
        "tolerance": report.tolerance,
        "helstrom_pairwise": [[float(v) for v in row] for row in report.helstrom_pairwise],
    }


def affine_to_json(m: AffineMap) -> dict:
    return {"in_bits": m.in_bits, "out_bits": m.out_bits,
            "matrix": [list(row) for row in m.matrix], "offset": list(m.offset)}


def candidate_to_json(cand: ClassicalProtocolCandidate) -> dict:
    return {
        "n_random": cand.n_random,
        "encoder": affine_to_json(cand.encoder),
        "server_fn": [list(reply) for reply in cand.server_fn],
        "decoder": affine_to_json(cand.decoder),
    }


def nogo_result_to_json(result: NogoSearchResult) -> dict:
    return {
        "kind": "classical-nogo-search",
        "bounds": {
            "max_random_bits": result.bounds[0],
            "max_msg_bits": result.bounds[1],
            "max_reply_bits": result.bounds[2],
        },
        "witness": None if result.witness is None else candidate_to_json(result.witness),
        "candidates_checked": result.candidates_checked,
        "pruned": result.pruned,
        "elapsed_s": result.elapsed_s,
    }


def delegation_to_json(trace: DelegationTrace) -> dict:
    return {
        "kind": "delegation",
        "variant": trace.variant,
        "outputs": list(trace.outputs),
        "nand_transcripts": [transcript_to_json(t) for t in trace.transcripts],
        "client_op_census": dict(sorted(trace.census.items())),
    }


def report_envelope(command: dict, result: dict, seed: int | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "rng": {"algorithm": RNG_ALGORITHM, "seed": seed},
        "result": result,
    }
    return doc


def canonical_payload(report: dict) -> bytes:
    """Deterministic bytes of a report with volatile timing stripped."""
    trimmed = {k: v for k, v in report.items() if k != "timing"}
    if isinstance(trimmed.get("result"), dict):
        trimmed["result"] = {k: v for k, v in trimmed["result"].items() if k != "elapsed_s"}
    return json.dumps(trimmed, sort_keys=True, separators=(",", ":")).encode()


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
