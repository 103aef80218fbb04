import numpy as np
import pytest
from itertools import product

from securenand.nogo import (
    AffineMap,
    ClassicalProtocolCandidate,
    Qo2Candidate,
    candidate_space_size,
    classical_blindness_holds,
    classical_correctness_holds,
    enumerate_affine_maps,
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
from securenand.qsim import DensityMatrix

QO2_TUPLES = tuple(product((0, 1), repeat=3))


# ---------------------------------------------------------------------------
# Affine machinery
# ---------------------------------------------------------------------------


def test_affine_apply():
    m = AffineMap(3, 2, ((1, 0, 1), (0, 1, 0)), (1, 0))
    assert m.apply((1, 1, 0)) == (0, 1)
    assert m.apply((0, 0, 1)) == (0, 0)
    with pytest.raises(ValueError):
        m.apply((0, 0))
    with pytest.raises(ValueError):
        AffineMap(2, 2, ((1, 0),), (0, 0))


def test_enumerate_affine_maps_count():
    maps = list(enumerate_affine_maps(2, 1))
    assert len(maps) == 2 ** (1 * 3)
    assert len(set(maps)) == len(maps)


def _candidate(n_random, enc_rows, enc_off, table, dec_row, dec_off):
    n_msg = len(enc_rows)
    n_reply = len(table[0])
    return ClassicalProtocolCandidate(
        n_random,
        AffineMap(2 + n_random, n_msg, enc_rows, enc_off),
        tuple(tuple(r) for r in table),
        AffineMap(2 + n_random + n_reply, 1, (dec_row,), (dec_off,)),
    )


def test_blindness_predicate_examples():
    # message = x1 ignores the inputs entirely
    cand = _candidate(1, ((0, 0, 1),), (0,), [(0,), (0,)], (0, 0, 0, 0), 0)
    assert classical_blindness_holds(cand)
    # message = a xor x1 is one-time padded
    cand = _candidate(1, ((1, 0, 1),), (0,), [(0,), (0,)], (0, 0, 0, 0), 0)
    assert classical_blindness_holds(cand)
    # message = a leaks the input
    cand = _candidate(1, ((1, 0, 0),), (0,), [(0,), (0,)], (0, 0, 0, 0), 0)
    assert not classical_blindness_holds(cand)


def test_correctness_predicate_examples():
    # decoder constantly 1 fails at a = b = 1
    cand = _candidate(0, ((0, 0),), (0,), [(0,), (0,)], (0, 0, 0), 1)
    assert not classical_correctness_holds(cand)
    # cleartext protocol: message = (a, b), server computes ab, decode = 1 xor s
    cand = ClassicalProtocolCandidate(
        0,
        AffineMap(2, 2, ((1, 0), (0, 1)), (0, 0)),
        ((0,), (0,), (0,), (1,)),
        AffineMap(3, 1, ((0, 0, 1),), (1,)),
    )
    assert classical_correctness_holds(cand)
    assert not classical_blindness_holds(cand)


# ---------------------------------------------------------------------------
# Exhaustive search
# ---------------------------------------------------------------------------


def test_candidate_space_size_closed_form():
    assert candidate_space_size(1, 1, 1) == 2560
    assert candidate_space_size(0, 2, 1) == 16896
    assert candidate_space_size(2, 2, 1) == 1_206_784


def test_search_small_bounds_no_witness():
    result = search_classical_nogo(1, 1, 1)
    assert result.witness is None
    assert result.candidates_checked == 2560
    assert result.pruned


def test_search_no_randomness_no_witness():
    result = search_classical_nogo(0, 2, 1)
    assert result.witness is None
    assert result.candidates_checked == 16896


def test_pruned_and_unpruned_searches_agree():
    pruned = search_classical_nogo(1, 1, 1, prune=True)
    unpruned = search_classical_nogo(1, 1, 1, prune=False)
    assert pruned.witness is None and unpruned.witness is None
    assert pruned.candidates_checked == unpruned.candidates_checked


def test_budget_refusal_carries_estimate():
    with pytest.raises(ValueError) as err:
        search_classical_nogo(2, 2, 1, budget=1000)
    assert "1206784" in str(err.value)


def test_unpruned_cap():
    with pytest.raises(ValueError):
        search_classical_nogo(2, 2, 1, prune=False)


# ---------------------------------------------------------------------------
# QO2 checkers
# ---------------------------------------------------------------------------


def test_positive_control_is_correct_and_orthogonal():
    cand = orthogonal_qo2_candidate()
    ok, violations = qo2_check_correctness(cand)
    assert ok and violations == []
    overlaps = qo2_orthogonality_matrix(cand)
    assert np.allclose(np.diag(overlaps), 1.0, atol=1e-9)
    off = overlaps - np.diag(np.diag(overlaps))
    assert np.max(np.abs(off)) < 1e-9


def test_positive_control_leaks_fully():
    assert qo2_blindness_leakage(orthogonal_qo2_candidate()) == pytest.approx(1.0, abs=1e-9)


def test_uniform_candidate_fails_correctness_and_hides():
    cand = uniform_qo2_candidate()
    ok, violations = qo2_check_correctness(cand)
    assert not ok and violations
    assert qo2_blindness_leakage(cand) == pytest.approx(0.25, abs=1e-9)


def test_empty_violations_iff_true():
    ok, violations = qo2_check_correctness(orthogonal_qo2_candidate())
    assert ok == (violations == [])


@pytest.mark.parametrize("mixed", [False, True])
def test_random_correct_candidates_leak_fully(mixed):
    rng = np.random.default_rng(77 if mixed else 78)
    for _ in range(5):
        cand = random_correct_qo2_candidate(rng, mixed=mixed)
        ok, _ = qo2_check_correctness(cand)
        assert ok
        assert qo2_blindness_leakage(cand) == pytest.approx(1.0, abs=1e-9)


def _flat_povms(dim):
    eye = np.eye(dim, dtype=complex)
    return {m: (eye / 2, eye / 2) for m in product((0, 1), repeat=2)}


def test_two_cluster_discrimination_value():
    # two orthogonal clusters of two identical states each: optimum is exactly 1/2
    zero = DensityMatrix(1, np.diag([1.0, 0.0]).astype(complex))
    one = DensityMatrix(1, np.diag([0.0, 1.0]).astype(complex))
    states = {}
    for x, y, r in QO2_TUPLES:
        states[(x, y, r)] = zero if x == 0 else one
    cand = Qo2Candidate(states, _flat_povms(2))
    assert qo2_blindness_leakage(cand) == pytest.approx(0.5, abs=1e-6)


def test_partial_overlap_leakage_in_open_interval():
    angles = {(0, 0): 0.0, (0, 1): np.pi / 8, (1, 0): np.pi / 4, (1, 1): 3 * np.pi / 8}
    states = {}
    for (x, y), theta in angles.items():
        vec = np.array([np.cos(theta), np.sin(theta)], dtype=complex)
        dm = DensityMatrix(1, np.outer(vec, vec.conj()))
        states[(x, y, 0)] = states[(x, y, 1)] = dm
    cand = Qo2Candidate(states, _flat_povms(2))
    leak = qo2_blindness_leakage(cand)
    assert 0.25 + 0.01 < leak < 1.0 - 0.01


def test_double_pad_reduction_preserves_correctness():
    control = orthogonal_qo2_candidate()
    states4 = {}
    for x, y, r1, r2 in product((0, 1), repeat=4):
        states4[(x, y, r1, r2)] = control.states[(x, y, r1 ^ r2)]
    reduced = qo2_from_double_pad(states4, control.povms)
    ok, _ = qo2_check_correctness(reduced)
    assert ok
    for key in QO2_TUPLES:
        assert np.allclose(reduced.states[key].matrix, control.states[key].matrix, atol=1e-12)


def test_malformed_povm_rejected():
    control = orthogonal_qo2_candidate()
    bad = dict(control.povms)
    eye = np.eye(8, dtype=complex)
    bad[(0, 0)] = (eye, eye)  # sums to 2I
    with pytest.raises(ValueError):
        Qo2Candidate(control.states, bad)
    with pytest.raises(ValueError):
        Qo2Candidate({k: v for k, v in list(control.states.items())[:4]}, control.povms)


# ---------------------------------------------------------------------------
# Correctness/orthogonality consistency procedure
# ---------------------------------------------------------------------------


def _two_way_perturbed_control(delta):
    control = orthogonal_qo2_candidate()
    states = dict(control.states)
    t1, t2 = (0, 0, 0), (1, 1, 0)
    m1, m2 = states[t1].matrix, states[t2].matrix
    states[t1] = DensityMatrix(3, (1 - delta) * m1 + delta * m2)
    states[t2] = DensityMatrix(3, (1 - delta) * m2 + delta * m1)
    return Qo2Candidate(states, control.povms)


def test_consistency_check_clean_candidate_not_flagged():
    result = qo2_consistency_check(orthogonal_qo2_candidate())
    assert result["correct"] and not result["flagged"]


def test_consistency_check_incorrect_candidate_not_flagged():
    result = qo2_consistency_check(uniform_qo2_candidate())
    assert not result["correct"] and not result["flagged"]


def test_consistency_check_flags_apparent_refutation_and_dissolves_it():
    # two-way mixing at delta: correctness residual is delta (passes 1e-9)
    # while the pairwise overlap is 4*delta*(1-delta) (fails 1e-9); the
    # tightened re-check shows the candidate was never exactly correct
    cand = _two_way_perturbed_control(5e-10)
    result = qo2_consistency_check(cand)
    assert result["correct"]
    assert result["max_offdiagonal_overlap"] > 1e-9
    assert result["flagged"]
    assert not result["recheck"]["correct"]
