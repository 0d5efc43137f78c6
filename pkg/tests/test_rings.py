import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from infmat.rings import (CoefficientDerivation, Integers, IntegersMod, Matrix2Mod, UsageError,
                          check_derivation_law, check_ring_axioms, commutator, d_dt,
                          derivation_bracket, inner_ring_derivation, parse_ring,
                          scaled_derivation, zero_derivation)

from conftest import M3, P, Z, Z3, Z6, elements, matmul2, poly_at, polys

ALL = [Z, Z6, Z3, P, M3, IntegersMod(2)]


def test_parse_ring():
    assert parse_ring("Z") == Z
    assert parse_ring("Z/6") == Z6
    assert parse_ring("Z[t]") == P
    assert parse_ring("M2(Z/3)") == M3
    for bad in ["Q", "Z/0", "Z/x", "M2(Z/4)", ""]:
        with pytest.raises(ValueError):
            parse_ring(bad)


def test_commutator_examples():
    assert commutator(Z, 3, 5) == 0
    for ring in ALL:
        for r in ring.samples(0, 6):
            assert ring.is_zero(commutator(ring, r, r))
    assert commutator(M3, (0, 1, 0, 0), (0, 0, 1, 0)) == (1, 0, 0, 2)


@pytest.mark.parametrize("ring", ALL, ids=str)
def test_axioms_hold(ring):
    assert check_ring_axioms(ring, seed=3, trials=200) == []


@dataclasses.dataclass(frozen=True)
class _BrokenZ(Integers):
    def mul(self, r, s):
        return 1


def test_broken_descriptor_names_distributivity():
    diags = check_ring_axioms(_BrokenZ(), seed=0, trials=20)
    names = [d.check for d in diags]
    assert any("distributivity" in n for n in names)
    d = next(d for d in diags if "distributivity" in d.check)
    a, b, c = d.witness
    broken = _BrokenZ()
    # a(b + c) = 1 while ab + ac = 2 under the broken product
    assert broken.mul(a, b + c) == 1
    assert broken.mul(a, b) + broken.mul(a, c) == 2


def test_half_presence():
    assert Z.half is None
    assert Z6.half is None
    assert Z3.half == 2 and Z3.add(Z3.half, Z3.half) == 1
    assert P.half is None
    h = M3.half
    assert M3.add(h, h) == M3.one()


def test_text_round_trip():
    cases = [(Z, -7), (Z6, 5), (P, (1, 0, 3)), (M3, (1, 2, 0, 1))]
    for ring, x in cases:
        assert ring.from_text(ring.to_text(x)) == x
    assert M3.to_text((1, 2, 0, 1)) == "[[1,2],[0,1]]"
    assert P.to_text((0, 1)) == "[0,1]"
    assert Z6.to_text(5) == "5"


def test_commutator_span_membership():
    assert Z.commutator_span_member(0) and not Z.commutator_span_member(1)
    assert not Z6.commutator_span_member(3)
    assert M3.commutator_span_member((1, 0, 0, 2))
    assert not M3.commutator_span_member((1, 0, 0, 0))


# product oracles independent of the ring code

@given(elements(P), elements(P), st.integers(-3, 3))
def test_poly_product_matches_evaluation(p, q, x):
    assert poly_at(P.mul(p, q), x) == poly_at(p, x) * poly_at(q, x)
    assert poly_at(P.add(p, q), x) == poly_at(p, x) + poly_at(q, x)


@given(elements(M3), elements(M3))
def test_m2_product_matches_nested_lists(a, b):
    assert M3.mul(a, b) == matmul2(a, b)


# derivations of the coefficient ring

def test_inner_ring_examples():
    u = inner_ring_derivation(Z, 7)
    assert all(u(x) == 0 for x in Z.samples(0, 10))
    u = inner_ring_derivation(M3, (0, 1, 0, 0))
    assert u((0, 0, 1, 0)) == (1, 0, 0, 2)
    for ring in ALL:
        u = inner_ring_derivation(ring, ring.one())
        assert all(ring.is_zero(u(x)) for x in ring.samples(1, 10))


def test_d_dt_example():
    u = d_dt()
    t, t2 = (0, 1), (0, 0, 1)
    assert u(P.mul(t, t2)) == (0, 0, 3)
    assert u(P.mul(t, t2)) == P.add(P.mul(u(t), t2), P.mul(t, u(t2)))
    assert check_derivation_law(u) == []


@pytest.mark.parametrize("ring", ALL, ids=str)
def test_builtin_derivations_pass(ring):
    for u in ring.derivations():
        assert check_derivation_law(u, seed=2) == [], u.name
    for r in ring.samples(5, 5):
        assert check_derivation_law(inner_ring_derivation(ring, r)) == []


def test_square_map_fails_at_one_one():
    sq = CoefficientDerivation(Z, lambda x: x * x, "square")
    leibniz = [d for d in check_derivation_law(sq) if d.check == "leibniz"]
    # witness (a, b, u(ab), u(a) b + a u(b))
    assert leibniz and leibniz[0].witness == (1, 1, 1, 2)


def test_non_derivation_detected_by_unit_law():
    const = CoefficientDerivation(Z6, lambda x: 1, "const")
    assert check_derivation_law(const)


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_bracket_of_derivations_is_derivation(p, q):
    u1, u2 = scaled_derivation(p, d_dt()), scaled_derivation(q, d_dt())
    assert check_derivation_law(derivation_bracket(u1, u2), trials=10) == []


@settings(max_examples=25, deadline=None)
@given(elements(M3), elements(M3))
def test_bracket_of_inner_derivations_on_m2(a, b):
    u = derivation_bracket(inner_ring_derivation(M3, a), inner_ring_derivation(M3, b))
    assert check_derivation_law(u, trials=10) == []
    # [ad a, ad b] = ad [a, b]
    w = inner_ring_derivation(M3, commutator(M3, a, b))
    assert all(u(x) == w(x) for x in M3.samples(0, 12))


def test_derivation_arithmetic_and_ring_mismatch():
    u = d_dt() + d_dt()
    assert u((0, 0, 1)) == (0, 4)
    assert (u - d_dt())((0, 0, 1)) == (0, 2)
    with pytest.raises(UsageError):
        d_dt() + zero_derivation(Z)


def test_samples_deterministic():
    for ring in ALL:
        assert ring.samples(9, 12) == ring.samples(9, 12)


def test_matrix2_requires_prime():
    with pytest.raises(ValueError):
        Matrix2Mod(4)
