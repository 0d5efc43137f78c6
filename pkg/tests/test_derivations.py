import time

import pytest
from hypothesis import given, settings, strategies as st

from infmat import matrices as mx
from infmat.derivations import (REQUIRED_CHECKS, Ambient, MatrixDerivation, coefficient_map,
                                cocycle_correct, decompose, derivation_sum, evaluate, extract_v,
                                inner, lemma2_operator, lemma3_row_probe, lift, reduced,
                                validate_derivation)
from infmat.rings import (UsageError, d_dt, inner_ring_derivation, scaled_derivation,
                          zero_derivation)

from conftest import M3, P, Z, Z3, Z6


def e(i, j, r=1, ring=Z):
    return mx.unit(ring, i, j, r)


def dense_ad(a, x, n):
    """ad(a)(x) on a window, by products only."""
    return mx.window_of(mx.sub(mx.mul(a, x), mx.mul(x, a)), n)


# construction and evaluation

def test_inner_examples():
    d = inner(e(0, 1))
    assert d(1, 1, 1) == e(0, 1)
    assert evaluate(d, e(1, 1)) == e(0, 1)
    I = inner(mx.identity(Z))
    assert all(not I(i, j, 3) for i in range(4) for j in range(4))
    S = inner(mx.shift(Z))
    assert S(0, 0, 1) == e(1, 0)
    assert S(2, 2, 1) == e(3, 2) - e(2, 1)


def test_inner_rejects_column_only_operator():
    with pytest.raises(UsageError):
        inner(mx.ones_row(Z, 0))
    d = inner(mx.ones_row(Z, 0), Ambient.M_FULL)
    assert mx.window_of(d(0, 0, 1), 3) == -(e(0, 1) + e(0, 2))


def test_lift_examples():
    d = lift(d_dt())
    assert d(2, 5, (0, 0, 1)) == mx.unit(P, 2, 5, (0, 2))
    z = lift(zero_derivation(Z))
    assert not z(1, 2, 7)
    r0 = (0, 1, 0, 0)
    u = inner_ring_derivation(M3, r0)
    d = lift(u)
    x = (1, 2, 0, 1)
    assert d(1, 3, x) == mx.unit(M3, 1, 3, M3.sub(M3.mul(r0, x), M3.mul(x, r0)))


def test_lift_rejects_non_derivation():
    from infmat.rings import CoefficientDerivation
    with pytest.raises(ValueError):
        lift(CoefficientDerivation(Z, lambda x: x * x, "square"))


def test_evaluate_is_additive():
    d1, d2 = inner(e(0, 1)), inner(mx.shift(Z))
    x = e(1, 1, 2) + e(0, 3, -1) + e(2, 0, 5)
    assert not evaluate(d1, mx.zero_matrix(Z))
    assert evaluate(derivation_sum(d1, d2), x) == evaluate(d1, x) + evaluate(d2, x)
    assert evaluate(d1 - d1, x) == mx.zero_matrix(Z)


# validation

@pytest.mark.parametrize("n", [1, 3, 6])
def test_true_derivations_validate(n):
    assert validate_derivation(inner(mx.shift(Z)), n) == []
    assert validate_derivation(lift(d_dt()), n) == []
    assert validate_derivation(inner(mx.diag(Z6, lambda i: i)), n) == []


def _perturbed_shift():
    base = inner(mx.shift(Z))
    return MatrixDerivation(
        Z, Ambient.M_INF,
        lambda i, j, r: mx.zero_matrix(Z) if (i, j) == (0, 0) else base(i, j, r),
        name="perturbed")


def test_perturbed_box_gives_leibniz_diagnostic():
    diags = validate_derivation(_perturbed_shift(), 4)
    assert diags and diags[0].check == "leibniz"
    i, k, j = diags[0].witness[:3]
    assert 0 in (i, k, j)


def test_two_sided_map_fails_antisymmetry_only():
    # x -> Ax - xB with A - B = e_01 satisfies Leibniz only on products
    # where the difference cancels, and always breaks antisymmetry
    B = mx.shift(Z)
    A = mx.add(B, e(0, 1))
    d = MatrixDerivation(Z, Ambient.M_INF,
                         lambda i, j, r: mx.sub(mx.mul(A, e(i, j, r)), mx.mul(e(i, j, r), B)))
    names = [diag.check for diag in validate_derivation(d, 4)]
    assert "antisymmetry" in names


# extraction and the row probe

def test_extract_v_examples():
    assert extract_v(inner(e(0, 1)), 2) == e(0, 1)
    assert extract_v(inner(e(0, 1)), 5) == e(0, 1)
    assert not extract_v(inner(mx.diag(Z, lambda i: i)), 6)
    for n in (1, 2, 7):
        assert extract_v(inner(mx.shift(Z)), n) == mx.window_of(mx.shift(Z), n)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(1, 4))
def test_extraction_is_nested_window_invariant(n, extra):
    a = mx.add(mx.shift(Z, 2), e(0, 3, -1) + e(4, 1, 5))
    d = inner(a)
    small, big = extract_v(d, n), extract_v(d, n + extra)
    assert mx.window_of(big, n) == small


def test_lift_has_no_inner_part():
    assert not extract_v(lift(d_dt()), 5)


def test_lemma3_probe_examples():
    S = mx.shift(Z)
    for n in (1, 4, 9):
        assert lemma3_row_probe(S, n)
    assert lemma3_row_probe(mx.zero_matrix(Z), 5)
    for n in (4, 7, 12):
        probe = lemma3_row_probe(mx.ones_row(Z, 0), n)
        assert not probe and probe.witness_row == 0
        # [r0, e_00] = e_00 - r0: the (0, 0) entry cancels
        assert probe.counts[0] == n - 1


def test_lemma2_operator_reads_black_box():
    v = lemma2_operator(inner(mx.shift(Z)))
    assert mx.window_of(v, 8) == mx.window_of(mx.shift(Z), 8)
    assert isinstance(v, mx.RcfOperator)


# coefficient maps and correction

def test_coefficient_map_examples():
    u = coefficient_map(lift(d_dt()), 1, 3, P)
    assert u((1, 2, 3)) == (2, 6)
    D = inner(mx.diag(Z, lambda i: i))
    for i, j in [(0, 0), (1, 0), (2, 5), (4, 1)]:
        m = coefficient_map(D, i, j, Z)
        assert m(3) == (i - j) * 3
    zero = MatrixDerivation(Z, Ambient.M_INF, lambda i, j, r: mx.zero_matrix(Z))
    assert coefficient_map(zero, 2, 1, Z)(9) == 0


def test_cocycle_correct_examples():
    c, u = cocycle_correct(inner(mx.diag(Z, lambda i: i)), 6, 0, ring=Z)
    assert c == {i: i for i in range(6)}
    assert all(u(r) == 0 for r in Z.samples(0, 8))
    c, u = cocycle_correct(lift(d_dt()), 4, 0, ring=P)
    assert all(not ci for ci in c.values())
    assert all(u(r) == d_dt()(r) for r in P.samples(0, 8))
    c, u = cocycle_correct(inner(mx.diag(Z, lambda i: 5)), 4, 2, ring=Z)
    assert set(c.values()) == {0} and all(u(r) == 0 for r in Z.samples(0, 8))


def test_cocycle_correct_with_other_base_index():
    c, _ = cocycle_correct(inner(mx.diag(Z, lambda i: i)), 5, 3, ring=Z)
    assert c == {i: i - 3 for i in range(5)}


# the full pipeline

def _round_trip_by_products(report, d, n):
    a = report.assembled()
    for r in report.samples:
        for i in range(n):
            for j in range(n):
                x = mx.unit(report.ring, i, j, r)
                expected = mx.add(dense_ad(a, x, n),
                                  mx.unit(report.ring, i, j, report.residual(r)))
                assert mx.window_of(d(i, j, r), n) == mx.window_of(expected, n)


def test_decompose_polynomial_example():
    a = mx.unit(P, 0, 1, (1,)) + mx.unit(P, 1, 2, (2,))
    d = derivation_sum(inner(a), lift(d_dt()))
    rep = decompose(d, 6)
    assert rep.status == "decomposed"
    assert rep.v == a
    assert all(not ci for ci in rep.correction.values())
    assert rep.residual_description()["description"] == "d/dt"
    assert tuple(rep.checks) == REQUIRED_CHECKS
    _round_trip_by_products(rep, d, 6)


def test_decompose_diag_needs_correction():
    rep = decompose(inner(mx.diag(Z, lambda i: i)), 6)
    assert rep.status == "decomposed"
    assert not rep.v
    assert rep.correction == {i: i for i in range(6)}
    assert rep.residual_description()["description"] == "zero"
    assert rep.notes


def test_decompose_zero():
    rep = decompose(lift(zero_derivation(Z)), 4)
    assert rep.decomposed and not rep.v
    assert set(rep.correction.values()) == {0}


@pytest.mark.parametrize("ring", [Z, Z6, Z3, P, M3], ids=str)
def test_decompose_round_trips(ring):
    a = mx.add(mx.shift(ring), mx.unit(ring, 0, 2, ring.samples(1, 4)[-1]))
    u = ring.derivations()[-1]
    d = derivation_sum(inner(a), lift(u))
    rep = decompose(d, 5, seed=3)
    assert rep.decomposed, rep.failed_checks()
    _round_trip_by_products(rep, d, 5)


def test_inner_part_in_m2_absorbs_scalar_diagonal():
    r0 = (0, 1, 0, 0)
    d = lift(inner_ring_derivation(M3, r0))
    rep = decompose(d, 4)
    assert rep.decomposed
    _round_trip_by_products(rep, d, 4)


def test_decompose_refutes_perturbed_box():
    rep = decompose(_perturbed_shift(), 4)
    assert rep.status == "refuted"
    assert rep.witness.check == "leibniz"


def test_decompose_refutes_ones_row_in_rcf_ambient():
    J = mx.ones_row(Z, 0)
    d = MatrixDerivation(Z, Ambient.M_RCF, lambda i, j, r: mx.bracket(J, e(i, j, r)))
    rep = decompose(d, 6)
    assert rep.status == "refuted"
    assert rep.witness.check == "lemma3_row_probe" and rep.witness.witness == (0,)


def test_decompose_ones_row_in_full_ambient():
    rep = decompose(inner(mx.ones_row(Z, 0), Ambient.M_FULL), 6)
    assert rep.decomposed
    assert rep.checks["lemma3_row_probe"].status == "skipped"
    assert rep.v == mx.window_of(mx.ones_row(Z, 0), 6) - e(0, 0)


def test_timeout_gives_inconclusive():
    base = inner(mx.shift(Z))

    def slow(i, j, r):
        if (i, j) == (1, 1):
            time.sleep(0.5)
        return base(i, j, r)

    rep = decompose(MatrixDerivation(Z, Ambient.M_INF, slow), 3, call_timeout=0.05)
    assert rep.status == "inconclusive" and "exceeded" in rep.reason


def test_probe_budget_gives_inconclusive():
    d = inner(mx.shift(Z))
    rep = decompose(MatrixDerivation(Z, Ambient.M_INF, d._eval), 4, max_probes=5)
    assert rep.status == "inconclusive" and "budget" in rep.reason


def test_raising_box_gives_inconclusive():
    def boom(i, j, r):
        raise ArithmeticError("overflow in box")

    rep = decompose(MatrixDerivation(Z, Ambient.M_INF, boom), 3)
    assert rep.status == "inconclusive" and "overflow" in rep.reason


def test_malformed_value_gives_inconclusive():
    rep = decompose(MatrixDerivation(Z, Ambient.M_INF, lambda i, j, r: "nope"), 3)
    assert rep.status == "inconclusive"
    rep = decompose(MatrixDerivation(Z, Ambient.M_INF, lambda i, j, r: mx.shift(Z)), 3)
    assert rep.status == "inconclusive"


def test_parallel_prefetch_matches_serial():
    a = mx.add(mx.shift(Z6, 2), mx.unit(Z6, 1, 3, 5))
    serial = decompose(inner(a), 6).to_json()
    parallel = decompose(inner(a), 6, workers=4).to_json()
    assert serial == parallel


def test_report_is_deterministic():
    d = derivation_sum(inner(mx.shift(P)), lift(scaled_derivation((1, 1), d_dt())))
    assert decompose(d, 5, seed=2).to_json() == decompose(d, 5, seed=2).to_json()


def test_reduced_kills_inner_part():
    a = mx.add(mx.shift(Z), e(0, 2, 3))
    d = inner(a)
    v = extract_v(d, 5)
    dp = reduced(d, v, 5)
    assert all(not dp(i, j, 1) for i in range(5) for j in range(5))
