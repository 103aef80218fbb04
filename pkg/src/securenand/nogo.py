"""Bounded impossibility searches.

Two families of results are operationalized here:

* classical: a client limited to affine GF(2) computation (XOR plus
  constants) cannot delegate NAND to a server both blindly and
  deterministically. We enumerate every two-round protocol shape up to
  small size bounds and confirm no candidate is simultaneously blind and
  correct.

* quantum-offline (QO2): if the quantum message is independent of the
  inputs and the protocol is deterministic, the eight indexed states must
  live in orthogonal subspaces, which lets the server read the client's
  masked bits perfectly. We implement exact checkers for the trace
  conditions, the orthogonality structure and the resulting leakage, plus
  seeded generators for correct candidates.

Sizes here are tiny by design; the searches are complete at their bounds,
nothing more.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from itertools import product

import numpy as np

from .qsim import DensityMatrix, fidelity, random_unitary, trace_distance

DEFAULT_BUDGET = 1 << 24
UNPRUNED_CAP = 1 << 17
QO2_TOL = 1e-9


# ---------------------------------------------------------------------------
# Affine GF(2) machinery.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """y = M x xor c over GF(2), with bit tuples in and out."""

    in_bits: int
    out_bits: int
    matrix: tuple[tuple[int, ...], ...]
    offset: tuple[int, ...]

    def __post_init__(self):
        if len(self.matrix) != self.out_bits or len(self.offset) != self.out_bits:
            raise ValueError("matrix/offset row count must equal out_bits")
        if any(len(row) != self.in_bits for row in self.matrix):
            raise ValueError("matrix row width must equal in_bits")

    def apply(self, bits) -> tuple[int, ...]:
        bits = tuple(bits)
        if len(bits) != self.in_bits:
            raise ValueError(f"expected {self.in_bits} input bits, got {len(bits)}")
        out = []
        for row, c in zip(self.matrix, self.offset):
            acc = c
            for coeff, bit in zip(row, bits):
                acc ^= coeff & bit
            out.append(acc)
        return tuple(out)


def enumerate_affine_maps(in_bits: int, out_bits: int):
    """All 2**(out_bits*(in_bits+1)) affine maps, in a fixed order."""
    rows = list(product((0, 1), repeat=in_bits))
    for chosen in product(rows, repeat=out_bits):
        for offset in product((0, 1), repeat=out_bits):
            yield AffineMap(in_bits, out_bits, chosen, offset)


@dataclass(frozen=True)
class ClassicalProtocolCandidate:
    """A full two-round shape: affine encoder, arbitrary server table, affine decoder.

    server_fn is a truth table over the whole message space: entry m is the
    reply bit tuple for message integer m (first message bit most
    significant).
    """

    n_random: int
    encoder: AffineMap
    server_fn: tuple[tuple[int, ...], ...]
    decoder: AffineMap

    def __post_init__(self):
        if self.encoder.in_bits != 2 + self.n_random:
            raise ValueError("encoder must read (a, b) plus the random bits")
        if len(self.server_fn) != 2**self.encoder.out_bits:
            raise ValueError("server table must cover the whole message space")
        reply_bits = len(self.server_fn[0])
        if self.decoder.in_bits != 2 + self.n_random + reply_bits:
            raise ValueError("decoder must read (a, b), the random bits and the reply")
        if self.decoder.out_bits != 1:
            raise ValueError("decoder emits a single output bit")

    @property
    def reply_bits(self) -> int:
        return len(self.server_fn[0])


def _bits_to_int(bits) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | bit
    return value


def classical_blindness_holds(cand: ClassicalProtocolCandidate) -> bool:
    """The message distribution over uniform random bits must not depend on (a, b)."""
    reference = None
    for a, b in product((0, 1), repeat=2):
        dist = Counter(
            cand.encoder.apply((a, b) + x)
            for x in product((0, 1), repeat=cand.n_random)
        )
        if reference is None:
            reference = dist
        elif dist != reference:
            return False
    return True


def classical_correctness_holds(cand: ClassicalProtocolCandidate) -> bool:
    """decode(a, b, x, reply) must equal NAND(a, b) for every input and randomness."""
    for a, b in product((0, 1), repeat=2):
        want = 1 ^ (a & b)
        for x in product((0, 1), repeat=cand.n_random):
            message = cand.encoder.apply((a, b) + x)
            reply = cand.server_fn[_bits_to_int(message)]
            if cand.decoder.apply((a, b) + x + reply) != (want,):
                return False
    return True


# ---------------------------------------------------------------------------
# Exhaustive search.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NogoSearchResult:
    bounds: tuple[int, int, int]  # (max random bits, max message bits, max reply bits)
    witness: ClassicalProtocolCandidate | None
    candidates_checked: int
    pruned: bool
    elapsed_s: float


def candidate_space_size(max_random_bits: int, max_msg_bits: int, max_reply_bits: int) -> int:
    """Closed-form size of the candidate space swept by the search."""
    total = 0
    for nr in range(max_random_bits + 1):
        p = 2 + nr
        for nm in range(1, max_msg_bits + 1):
            n_enc = 2 ** (nm * (p + 1))
            for nk in range(1, max_reply_bits + 1):
                n_sfn = 2 ** (nk * 2**nm)
                n_dec = 2 ** (p + nk + 1)
                total += n_enc * n_sfn * n_dec
    return total


def _variable_masks(p: int) -> list[int]:
    # bit j of mask i is the value of variable i at domain point j,
    # points ordered as integers whose bits read (a, b, x1, ...) MSB first
    masks = []
    for i in range(p):
        mask = 0
        for j in range(1 << p):
            if (j >> (p - 1 - i)) & 1:
                mask |= 1 << j
        masks.append(mask)
    return masks


def _linear_truth_tables(p: int):
    """Truth tables of the 2**p linear forms, indexed by coefficient vector,
    plus the inverse lookup from table to coefficients."""
    var_masks = _variable_masks(p)
    by_coeff = []
    by_mask = {}
    for c in range(1 << p):
        tt = 0
        for i in range(p):
            if (c >> (p - 1 - i)) & 1:
                tt ^= var_masks[i]
        by_coeff.append(tt)
        by_mask[tt] = c
    return by_coeff, by_mask


def _coeff_bits(c: int, width: int) -> tuple[int, ...]:
    return tuple((c >> (width - 1 - i)) & 1 for i in range(width))


def search_classical_nogo(max_random_bits: int, max_msg_bits: int, max_reply_bits: int,
                          budget: int = DEFAULT_BUDGET, prune: bool = True) -> NogoSearchResult:
    """Sweep every candidate up to the bounds; return a witness or confirm none.

    With pruning on, two sound reductions keep the sweep fast: non-blind
    encoders rule out all their candidates at once, and server tables are
    enumerated only on messages the encoder can actually produce (behavior
    on unreachable messages cannot matter). candidates_checked always counts
    the full space either way.
    """
    size = candidate_space_size(max_random_bits, max_msg_bits, max_reply_bits)
    if size > budget:
        raise ValueError(
            f"candidate space has {size} members, over the budget of {budget}; "
            "refusing the search"
        )
    if not prune and size > UNPRUNED_CAP:
        raise ValueError(
            f"pruning may only be disabled for tiny bounds (space {size} > {UNPRUNED_CAP})"
        )
    started = time.perf_counter()
    if prune:
        witness, checked = _search_pruned(max_random_bits, max_msg_bits, max_reply_bits)
    else:
        witness, checked = _search_unpruned(max_random_bits, max_msg_bits, max_reply_bits)
    if checked != size:
        raise AssertionError(f"enumeration covered {checked} candidates, expected {size}")
    if witness is not None:
        if not (classical_blindness_holds(witness) and classical_correctness_holds(witness)):
            raise AssertionError("search produced a witness that fails re-verification")
    return NogoSearchResult(
        (max_random_bits, max_msg_bits, max_reply_bits),
        witness,
        checked,
        prune,
        time.perf_counter() - started,
    )


def _search_pruned(max_r: int, max_m: int, max_k: int):
    checked = 0
    for nr in range(max_r + 1):
        p = 2 + nr
        points = 1 << p
        full = (1 << points) - 1
        linear_fwd, linear_inv = _linear_truth_tables(p)
        target = 0  # truth table of NAND(a, b) over the domain
        for j in range(points):
            a = (j >> (p - 1)) & 1
            b = (j >> (p - 2)) & 1
            if 1 ^ (a & b):
                target |= 1 << j
        row_forms = [(c, d) for c in range(1 << p) for d in (0, 1)]
        row_tts = {(c, d): linear_fwd[c] ^ (full if d else 0) for c, d in row_forms}
        for nm in range(1, max_m + 1):
            for nk in range(1, max_k + 1):
                n_sfn_full = 2 ** (nk * 2**nm)
                n_dec = 2 ** (p + nk + 1)
                for rows in product(row_forms, repeat=nm):
                    checked += n_sfn_full * n_dec
                    msgs = [0] * points
                    for pos, (c, d) in enumerate(rows):
                        tt = row_tts[(c, d)]
                        for j in range(points):
                            if (tt >> j) & 1:
                                msgs[j] |= 1 << (nm - 1 - pos)
                    if not _messages_blind(msgs, nr):
                        continue
                    reachable = sorted(set(msgs))
                    witness = _scan_server_tables(
                        nr, nm, nk, p, points, full, linear_inv, target, rows, msgs, reachable
                    )
                    if witness is not None:
                        return witness, checked
    return None, checked


def _messages_blind(msgs, nr: int) -> bool:
    block = 1 << nr
    reference = sorted(msgs[0:block])
    for k in range(1, 4):
        if sorted(msgs[k * block:(k + 1) * block]) != reference:
            return False
    return True


def _scan_server_tables(nr, nm, nk, p, points, full, linear_inv, target, rows, msgs, reachable):
    for replies in product(range(1 << nk), repeat=len(reachable)):
        table = dict(zip(reachable, replies))
        reply_tts = [0] * nk
        for j in range(points):
            value = table[msgs[j]]
            for i in range(nk):
                if (value >> (nk - 1 - i)) & 1:
                    reply_tts[i] |= 1 << j
        for e in range(1 << nk):
            mixed = 0
            for i in range(nk):
                if (e >> (nk - 1 - i)) & 1:
                    mixed ^= reply_tts[i]
            for d in (0, 1):
                needed = target ^ mixed ^ (full if d else 0)
                c = linear_inv.get(needed)
                if c is None:
                    continue
                return _build_candidate(nr, nm, nk, p, rows, table, c, e, d)
    return None


def _build_candidate(nr, nm, nk, p, rows, table, c, e, d) -> ClassicalProtocolCandidate:
    encoder = AffineMap(
        p, nm,
        tuple(_coeff_bits(rc, p) for rc, _ in rows),
        tuple(rd for _, rd in rows),
    )
    server_fn = tuple(
        _coeff_bits(table.get(m, 0), nk) for m in range(1 << nm)
    )
    decoder = AffineMap(
        p + nk, 1,
        (_coeff_bits(c, p) + _coeff_bits(e, nk),),
        (d,),
    )
    return ClassicalProtocolCandidate(nr, encoder, server_fn, decoder)


def _search_unpruned(max_r: int, max_m: int, max_k: int):
    checked = 0
    witness = None
    for nr in range(max_r + 1):
        p = 2 + nr
        for nm in range(1, max_m + 1):
            for nk in range(1, max_k + 1):
                for encoder in enumerate_affine_maps(p, nm):
                    for table in product(product((0, 1), repeat=nk), repeat=2**nm):
                        for decoder in enumerate_affine_maps(p + nk, 1):
                            checked += 1
                            cand = ClassicalProtocolCandidate(nr, encoder, table, decoder)
                            if witness is None and classical_blindness_holds(cand) \
                                    and classical_correctness_holds(cand):
                                witness = cand
    return witness, checked


# ---------------------------------------------------------------------------
# Quantum-offline (QO2) checkers.
# ---------------------------------------------------------------------------

QO2_TUPLES = tuple(product((0, 1), repeat=3))  # (x, y, r)


def _expected_outcome(aprime: int, bprime: int, x: int, y: int, r: int) -> int:
    return ((aprime ^ x) & (bprime ^ y)) ^ r


@dataclass(frozen=True)
class Qo2Candidate:
    """An input-independent-message protocol shape.

    states maps (x, y, r) to the quantum message; povms maps the client's
    two masked bits (a', b') to a two-outcome measurement (element for
    outcome 0, element for outcome 1).
    """

    states: dict
    povms: dict

    def __post_init__(self):
        if set(self.states) != set(QO2_TUPLES):
            raise ValueError("states must be indexed by all (x, y, r) tuples")
        if set(self.povms) != set(product((0, 1), repeat=2)):
            raise ValueError("povms must be indexed by all (a', b') pairs")
        dims = {s.matrix.shape[0] for s in self.states.values()}
        if len(dims) != 1:
            raise ValueError("all states must share one dimension")
        dim = dims.pop()
        for key, (pi0, pi1) in self.povms.items():
            for pi in (pi0, pi1):
                if pi.shape != (dim, dim):
                    raise ValueError("POVM element dimension mismatch")
                if np.min(np.linalg.eigvalsh((pi + pi.conj().T) / 2)) < -1e-10:
                    raise ValueError(f"POVM element for message {key} is not PSD")
            if np.max(np.abs(pi0 + pi1 - np.eye(dim))) > 1e-10:
                raise ValueError(f"POVM pair for message {key} does not sum to identity")

    @property
    def dim(self) -> int:
        return next(iter(self.states.values())).matrix.shape[0]


def qo2_check_correctness(cand: Qo2Candidate, tol: float = QO2_TOL):
    """Check the deterministic-outcome trace condition on all 32 index tuples.

    Returns (ok, violations) where each violation is
    (a', b', x, y, r, achieved trace value).
    """
    violations = []
    for aprime, bprime in product((0, 1), repeat=2):
        pis = cand.povms[(aprime, bprime)]
        for x, y, r in QO2_TUPLES:
            want = _expected_outcome(aprime, bprime, x, y, r)
            value = np.trace(pis[want] @ cand.states[(x, y, r)].matrix).real
            if abs(value - 1.0) > tol:
                violations.append((aprime, bprime, x, y, r, float(value)))
    return not violations, violations


def qo2_orthogonality_matrix(cand: Qo2Candidate) -> np.ndarray:
    """8x8 fidelity overlaps between the indexed states, index = 4x + 2y + r."""
    overlaps = np.zeros((8, 8))
    for i, ti in enumerate(QO2_TUPLES):
        for j, tj in enumerate(QO2_TUPLES):
            overlaps[i, j] = fidelity(cand.states[ti], cand.states[tj])
    return overlaps


def _averaged_mask_states(cand: Qo2Candidate) -> dict:
    return {
        (x, y): DensityMatrix(
            cand.states[(x, y, 0)].num_qubits,
            (cand.states[(x, y, 0)].matrix + cand.states[(x, y, 1)].matrix) / 2,
        )
        for x, y in product((0, 1), repeat=2)
    }


def _support_projector(matrix: np.ndarray, cutoff: float = 1e-9) -> np.ndarray:
    evals, evecs = np.linalg.eigh(matrix)
    cols = evecs[:, evals > cutoff]
    return cols @ cols.conj().T


def _discrimination_sdp(states: list[np.ndarray]) -> float:
    import cvxpy as cp

    dim = states[0].shape[0]
    povm = [cp.Variable((dim, dim), hermitian=True) for _ in states]
    constraints = [m >> 0 for m in povm]
    constraints.append(sum(povm) == np.eye(dim))
    objective = cp.Maximize(
        cp.real(sum(cp.trace(m @ s) for m, s in zip(povm, states))) / len(states)
    )
    problem = cp.Problem(objective, constraints)
    problem.solve(solver=cp.CLARABEL)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"state-discrimination solve failed: {problem.status}")
    return float(problem.value)


def qo2_blindness_leakage(cand: Qo2Candidate) -> float:
    """Optimal probability of identifying (x, y) from the r-averaged message.

    Orthogonal families are resolved exactly (support measurement, optimal
    because 1 is an absolute ceiling); identical families are exactly 1/4
    under any measurement; everything in between goes through a
    discrimination SDP.
    """
    tau = _averaged_mask_states(cand)
    keys = sorted(tau)
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    max_fidelity = max(fidelity(tau[keys[i]], tau[keys[j]]) for i, j in pairs)
    if max_fidelity <= QO2_TOL:
        value = sum(
            np.trace(_support_projector(tau[k].matrix) @ tau[k].matrix).real for k in keys
        ) / 4.0
        return float(min(value, 1.0))
    max_distance = max(trace_distance(tau[keys[i]], tau[keys[j]]) for i, j in pairs)
    if max_distance <= 1e-12:
        return 0.25
    return _discrimination_sdp([tau[k].matrix for k in keys])


def qo2_consistency_check(cand: Qo2Candidate, tol: float = QO2_TOL) -> dict:
    """Cross-check the correctness/orthogonality link on one candidate.

    A candidate passing the trace conditions must show orthogonal states;
    if it does not, that would be a numerical refutation attempt, so it is
    flagged and correctness is re-verified at a 100x tighter tolerance.
    """
    correct, violations = qo2_check_correctness(cand, tol)
    overlaps = qo2_orthogonality_matrix(cand)
    off = overlaps - np.diag(np.diag(overlaps))
    max_off = float(np.max(np.abs(off)))
    result = {
        "correct": correct,
        "violations": len(violations),
        "max_offdiagonal_overlap": max_off,
        "flagged": bool(correct and max_off > tol),
    }
    if result["flagged"]:
        tight_ok, tight_violations = qo2_check_correctness(cand, tol / 100)
        result["recheck"] = {
            "tolerance": tol / 100,
            "correct": tight_ok,
            "violations": len(tight_violations),
        }
    return result


# ---------------------------------------------------------------------------
# Candidate constructors.
# ---------------------------------------------------------------------------


def _projector_candidate(columns: np.ndarray, weights=None) -> Qo2Candidate:
    dim = columns.shape[0]
    block = columns.shape[1] // 8
    states = {}
    projectors = {}
    for i, t in enumerate(QO2_TUPLES):
        cols = columns[:, i * block:(i + 1) * block]
        proj = cols @ cols.conj().T
        projectors[t] = proj
        if block == 1:
            states[t] = DensityMatrix(int(np.log2(dim)), proj)
        else:
            w = weights[t]
            mix = sum(wk * np.outer(cols[:, k], cols[:, k].conj()) for k, wk in enumerate(w))
            states[t] = DensityMatrix(int(np.log2(dim)), mix)
    povms = {}
    for aprime, bprime in product((0, 1), repeat=2):
        pi1 = np.zeros((dim, dim), dtype=complex)
        for t in QO2_TUPLES:
            if _expected_outcome(aprime, bprime, *t) == 1:
                pi1 += projectors[t]
        povms[(aprime, bprime)] = (np.eye(dim) - pi1, pi1)
    return Qo2Candidate(states, povms)


def orthogonal_qo2_candidate() -> Qo2Candidate:
    """Deterministic positive control: the eight states are the canonical basis."""
    return _projector_candidate(np.eye(8, dtype=complex))


def random_correct_qo2_candidate(rng: np.random.Generator, mixed: bool = False) -> Qo2Candidate:
    """A correct-by-construction candidate on a random orthonormal family.

    With mixed=True each indexed state is a random mixture inside its own
    two-dimensional subspace of a 16-dimensional space.
    """
    if not mixed:
        return _projector_candidate(random_unitary(8, rng))
    columns = random_unitary(16, rng)
    weights = {}
    for t in QO2_TUPLES:
        w = rng.uniform(0.2, 0.8)
        weights[t] = (w, 1.0 - w)
    return _projector_candidate(columns, weights)


def uniform_qo2_candidate() -> Qo2Candidate:
    """Degenerate control: every indexed state is the maximally mixed state."""
    dim = 8
    eye = np.eye(dim, dtype=complex)
    states = {t: DensityMatrix(3, eye / dim) for t in QO2_TUPLES}
    povms = {m: (eye / 2, eye / 2) for m in product((0, 1), repeat=2)}
    return Qo2Candidate(states, povms)


def qo2_from_double_pad(states, povms) -> Qo2Candidate:
    """Collapse a two-pad-bit family to the single-pad shape via r = r1 xor r2.

    states maps (x, y, r1, r2) to density matrices; the returned candidate
    uses rho[x, y, r] = (rho[x, y, 0, r] + rho[x, y, 1, 1 xor r]) / 2.
    """
    collapsed = {}
    for x, y, r in QO2_TUPLES:
        lhs = states[(x, y, 0, r)]
        rhs = states[(x, y, 1, 1 ^ r)]
        collapsed[(x, y, r)] = DensityMatrix(lhs.num_qubits, (lhs.matrix + rhs.matrix) / 2)
    return Qo2Candidate(collapsed, povms)
