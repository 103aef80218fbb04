"""Command-line front door: run protocols, audits, no-go searches, delegation.

Exit codes: 0 success / audit pass, 1 audit failure or witness found,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import reports
from .audit import (
    audit_blindness_channel,
    audit_blindness_emission,
    audit_correctness,
    entangling_strategy,
    leakage_under_strategy,
    pad_probe_strategy,
    random_malicious_strategy,
)
from .circuits import CircuitError, parse_circuit, evaluate_delegated
from .nogo import (
    DEFAULT_BUDGET,
    orthogonal_qo2_candidate,
    qo2_blindness_leakage,
    qo2_check_correctness,
    qo2_orthogonality_matrix,
    random_correct_qo2_candidate,
    search_classical_nogo,
)
from .protocols import HONEST, VARIANTS, run_protocol

MIN_TOLERANCE = 1e-14
VARIANT_CHOICES = sorted(VARIANTS)


def build_run_nand_report(variant: str, a: int, b: int, seed: int):
    transcript = run_protocol(variant, a, b, seed, HONEST)
    command = {"command": "run-nand", "variant": variant, "a": a, "b": b, "seed": seed}
    report = reports.report_envelope(command, reports.transcript_to_json(transcript), seed)
    return report, 0, [f"out = {transcript.out}"]


def _parse_disabled_pads(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(sorted({int(v) for v in text.split(",")}))
    except ValueError:
        raise ValueError(f"bad --disable-pads value {text!r}; expected e.g. '1,2'") from None


def _leakage_strategy(name: str, variant: str, seed: int, kept: int):
    if name == "honest":
        return HONEST
    if name == "entangler":
        return entangling_strategy(variant)
    if name == "pad-probe":
        if variant != "ghz-bounce":
            raise ValueError("the pad-probe strategy targets ghz-bounce")
        return pad_probe_strategy()
    if name == "random":
        return random_malicious_strategy(variant, np.random.default_rng(seed), kept_qubits=kept)
    raise ValueError(f"unknown strategy {name!r}")


def build_audit_report(kind: str, variant: str, tolerance: float | None,
                       disabled_pads=(), strategy="honest", seed: int = 0, kept: int = 1):
    command = {
        "command": "audit", "kind": kind, "variant": variant,
        "tolerance": tolerance, "disabled_pads": list(disabled_pads),
    }
    if kind == "correctness":
        rep = audit_correctness(variant)
        result = reports.correctness_to_json(rep)
    elif kind == "blindness":
        rep = audit_blindness_emission(variant, disabled_pads, tolerance or 1e-12)
        result = reports.blindness_to_json(rep)
    elif kind == "channel":
        rep = audit_blindness_channel(variant, disabled_pads, tolerance or 1e-12)
        result = reports.blindness_to_json(rep)
    elif kind == "leakage":
        command.update({"strategy": strategy, "seed": seed, "kept": kept})
        strat = _leakage_strategy(strategy, variant, seed, kept)
        rep = leakage_under_strategy(variant, strat, disabled_pads)
        result = reports.leakage_to_json(rep)
    else:
        raise ValueError(f"unknown audit kind {kind!r}")
    passed = result["pass"]
    report = reports.report_envelope(command, result, seed if kind == "leakage" else None)
    line = f"audit {kind} {variant}: {'pass' if passed else 'FAIL'}"
    if kind == "leakage":
        line += f" (guessing probability {result['guessing_probability']:.6f})"
    return report, (0 if passed else 1), [line]


def build_nogo_classical_report(random_bits: int, msg_bits: int, reply_bits: int,
                                budget: int = DEFAULT_BUDGET, prune: bool = True):
    result = search_classical_nogo(random_bits, msg_bits, reply_bits, budget, prune)
    command = {
        "command": "nogo", "kind": "classical",
        "random_bits": random_bits, "msg_bits": msg_bits, "reply_bits": reply_bits,
        "budget": budget, "prune": prune,
    }
    report = reports.report_envelope(command, reports.nogo_result_to_json(result))
    found = result.witness is not None
    line = (
        f"searched {result.candidates_checked} candidates: "
        + ("WITNESS FOUND (refutation?)" if found else "no blind-and-correct candidate")
    )
    return report, (1 if found else 0), [line]


def build_nogo_qo2_report(candidates: int, seed: int, mixed: bool = False):
    rng = np.random.default_rng(seed)
    summaries = []
    all_pass = True
    cands = [("positive-control", orthogonal_qo2_candidate())]
    for i in range(candidates):
        cands.append((f"random-{i}", random_correct_qo2_candidate(rng, mixed=mixed and i % 2 == 1)))
    for name, cand in cands:
        correct, violations = qo2_check_correctness(cand)
        overlaps = qo2_orthogonality_matrix(cand)
        off = float(np.max(np.abs(overlaps - np.diag(np.diag(overlaps)))))
        leakage = float(qo2_blindness_leakage(cand))
        ok = bool(correct and off <= 1e-9 and abs(leakage - 1.0) <= 1e-9)
        all_pass &= ok
        summaries.append({
            "candidate": name, "correct": correct, "violations": len(violations),
            "max_offdiagonal_overlap": off, "leakage": leakage, "pass": ok,
        })
    command = {"command": "nogo", "kind": "qo2", "candidates": candidates,
               "seed": seed, "mixed": mixed}
    result = {"kind": "qo2-check", "pass": all_pass, "candidates": summaries}
    report = reports.report_envelope(command, result, seed)
    line = (
        f"{len(cands)} correct candidates: all leak the masked bits with probability 1"
        if all_pass else "QO2 check FAILED (a correct candidate did not leak fully)"
    )
    return report, (0 if all_pass else 1), [line]


def build_delegate_report(circuit_text: str, inputs: str, variant: str, seed: int,
                          circuit_name: str = "<stdin>"):
    circuit = parse_circuit(circuit_text)
    try:
        input_bits = tuple(int(c) for c in inputs)
    except ValueError:
        raise ValueError(f"--inputs must be a bit string, got {inputs!r}") from None
    if any(b not in (0, 1) for b in input_bits):
        raise ValueError(f"--inputs must be a bit string, got {inputs!r}")
    trace = evaluate_delegated(circuit, input_bits, variant, seed)
    command = {"command": "delegate", "circuit": circuit_name, "inputs": inputs,
               "variant": variant, "seed": seed}
    report = reports.report_envelope(command, reports.delegation_to_json(trace), seed)
    outs = " ".join(str(b) for b in trace.outputs)
    lines = [f"outputs: {outs}", f"delegated NAND gates: {len(trace.transcripts)}"]
    return report, 0, lines


def _emit(report, lines, out_path: str | None) -> None:
    for line in lines:
        print(line)
    text = reports.dump_report(report)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"report written to {out_path}")
    else:
        sys.stdout.write(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the JSON report to this path")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="audit tolerance override (min 1e-14)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securenand",
        description="simulate and audit quantum-assisted blind NAND delegation",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run-nand", help="run one honest protocol instance")
    p.add_argument("--variant", required=True, choices=VARIANT_CHOICES)
    p.add_argument("--a", type=int, required=True, choices=(0, 1))
    p.add_argument("--b", type=int, required=True, choices=(0, 1))
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("audit", help="correctness / blindness / channel / leakage audits")
    p.add_argument("kind", choices=("correctness", "blindness", "channel", "leakage"))
    p.add_argument("--variant", required=True, choices=VARIANT_CHOICES)
    p.add_argument("--disable-pads", default=None,
                   help="comma-separated pad positions forced to 0 (negative controls)")
    p.add_argument("--strategy", default="honest",
                   choices=("honest", "entangler", "pad-probe", "random"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kept", type=int, default=1, help="ancilla qubits for random strategies")
    _add_common(p)

    p = sub.add_parser("nogo", help="bounded impossibility searches")
    nogo_sub = p.add_subparsers(dest="nogo_kind", required=True)

    pc = nogo_sub.add_parser("classical", help="exhaustive XOR-client search")
    pc.add_argument("--random-bits", type=int, required=True)
    pc.add_argument("--msg-bits", type=int, required=True)
    pc.add_argument("--reply-bits", type=int, required=True)
    pc.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    pc.add_argument("--no-prune", action="store_true")
    _add_common(pc)

    pq = nogo_sub.add_parser("qo2", help="offline-message candidate checks")
    pq.add_argument("--candidates", type=int, default=20)
    pq.add_argument("--seed", type=int, default=0)
    pq.add_argument("--mixed", action="store_true",
                    help="use mixed-state candidates for every second draw")
    _add_common(pq)

    p = sub.add_parser("delegate", help="evaluate a circuit with delegated NANDs")
    p.add_argument("circuit", help="circuit file path, or '-' for stdin")
    p.add_argument("--inputs", required=True, help="input bits, e.g. 1011")
    p.add_argument("--variant", default="ghz-prep", choices=VARIANT_CHOICES)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("selftest", help="run the full acceptance/invariant suite")
    p.add_argument("--fast", action="store_true", help="skip the slowest sweeps")
    _add_common(p)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if getattr(args, "tolerance", None) is not None and args.tolerance < MIN_TOLERANCE:
        print(f"--tolerance must be at least {MIN_TOLERANCE}", file=sys.stderr)
        return 2

    started = time.perf_counter()
    try:
        if args.cmd == "run-nand":
            report, code, lines = build_run_nand_report(args.variant, args.a, args.b, args.seed)
        elif args.cmd == "audit":
            report, code, lines = build_audit_report(
                args.kind, args.variant, args.tolerance,
                _parse_disabled_pads(args.disable_pads),
                args.strategy, args.seed, args.kept,
            )
        elif args.cmd == "nogo" and args.nogo_kind == "classical":
            report, code, lines = build_nogo_classical_report(
                args.random_bits, args.msg_bits, args.reply_bits,
                args.budget, not args.no_prune,
            )
        elif args.cmd == "nogo":
            report, code, lines = build_nogo_qo2_report(args.candidates, args.seed, args.mixed)
        elif args.cmd == "delegate":
            if args.circuit == "-":
                text, name = sys.stdin.read(), "<stdin>"
            else:
                with open(args.circuit, "r", encoding="utf-8") as fh:
                    text = fh.read()
                name = args.circuit
            report, code, lines = build_delegate_report(text, args.inputs, args.variant,
                                                        args.seed, name)
        else:  # selftest
            from .selftest import run_all

            results = run_all(fast=args.fast)
            for res in results:
                print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
            all_ok = all(r.passed for r in results)
            summary = {
                "kind": "selftest",
                "pass": all_ok,
                "criteria": [
                    {"name": r.name, "pass": r.passed, "detail": r.detail} for r in results
                ],
            }
            report = reports.report_envelope({"command": "selftest"}, summary)
            code, lines = (0 if all_ok else 1), []
    except (CircuitError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report["timing"] = {"elapsed_s": time.perf_counter() - started}
    _emit(report, lines, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
