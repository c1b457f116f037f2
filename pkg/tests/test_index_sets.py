from fractions import Fraction
from math import isqrt

import pytest
from hypothesis import given, settings, strategies as st

from roughlab.errors import NoDensityData
from roughlab.services.index_sets import (
    ArithProg,
    Complement,
    Difference,
    DyadicValuation,
    FamilyUnion,
    Finite,
    Full,
    IndexFamily,
    Intersection,
    PolyImage,
    Powers,
    TailSolution,
    Union,
    is_cofinite,
    is_finite,
    iroot,
    members_upto,
    natural_density,
    tail_union_upper_density,
    v2,
)

BIG = 10**5


def is_power(n: int, base: int) -> bool:
    if n < base:
        return False
    while n % base == 0:
        n //= base
    return n == 1


base_sets = st.one_of(
    st.builds(ArithProg, st.integers(1, 6), st.integers(0, 7)),
    st.builds(Powers, st.integers(2, 4), st.integers(1, 3)),
    st.builds(PolyImage, st.integers(1, 3), st.integers(2, 3)),
    st.builds(DyadicValuation, st.integers(0, 3)),
    st.builds(lambda xs: Finite(frozenset(xs)), st.sets(st.integers(1, 60), max_size=5)),
    st.just(Full()),
)

index_sets = st.recursive(
    base_sets,
    lambda inner: st.one_of(
        st.builds(lambda a, b: Union((a, b)), inner, inner),
        st.builds(lambda a, b: Intersection((a, b)), inner, inner),
        st.builds(Complement, inner),
        st.builds(Difference, inner, inner),
    ),
    max_leaves=4,
)


def test_members_of_base_sets():
    assert members_upto(DyadicValuation(0), 10) == [1, 3, 5, 7, 9]
    assert members_upto(Powers(2), 10) == [2, 4, 8]
    assert members_upto(PolyImage(1, 2), 20) == [1, 4, 9, 16]
    assert members_upto(ArithProg(4, 1), 10) == [1, 5, 9]
    assert members_upto(ArithProg(3, 0), 10) == [3, 6, 9]
    assert members_upto(Powers(3, 2), 60) == [6, 18, 54]
    assert members_upto(Full(), 0) == []


def test_tail_solution_members():
    tail = TailSolution(True, 6, frozenset({2, 4}))
    assert members_upto(tail, 8) == [2, 4, 6, 7, 8]
    assert members_upto(TailSolution(False, 10, frozenset(range(1, 10))), 20) == list(range(1, 10))
    with pytest.raises(ValueError):
        TailSolution(True, 3, frozenset({5}))


@pytest.mark.slow
def test_prefix_consistency_against_direct_predicates():
    assert members_upto(DyadicValuation(3), BIG) == [n for n in range(1, BIG + 1) if v2(n) == 3]
    assert members_upto(Powers(3), BIG) == [n for n in range(1, BIG + 1) if is_power(n, 3)]
    assert members_upto(PolyImage(2, 2), BIG) == [
        n for n in range(1, BIG + 1) if n % 2 == 0 and isqrt(n // 2) ** 2 == n // 2
    ]
    assert members_upto(ArithProg(7, 3), BIG) == [n for n in range(1, BIG + 1) if n % 7 == 3]


@settings(max_examples=150, deadline=None)
@given(index_sets, st.integers(1, 300))
def test_members_match_contains(a, limit):
    members = members_upto(a, limit)
    assert members == [n for n in range(1, limit + 1) if a.contains(n)]


@settings(max_examples=150, deadline=None)
@given(index_sets, index_sets)
def test_boolean_laws_on_prefix(a, b):
    for n in range(1, 200):
        assert (a | b).contains(n) == (a.contains(n) or b.contains(n))
        assert (a & b).contains(n) == (a.contains(n) and b.contains(n))
        assert (a - b).contains(n) == (a.contains(n) and not b.contains(n))
        assert (~(a | b)).contains(n) == ((~a) & (~b)).contains(n)


def test_integer_helpers():
    assert [v2(n) for n in (1, 2, 12, 40)] == [0, 1, 2, 3]
    assert iroot(10**12, 3) == 10**4
    assert iroot(26, 3) == 2


# ── Densities ───────────────────────────────────────────────────────────────


def test_dyadic_density():
    assert natural_density(DyadicValuation(2)).value == Fraction(1, 8)


def test_thin_sets_have_density_zero():
    for a in (PolyImage(1, 2), Powers(2), Finite(frozenset({1, 5}))):
        result = natural_density(a)
        assert result.is_exact and result.value == 0


def test_progression_density():
    assert natural_density(ArithProg(4, 1)).value == Fraction(1, 4)
    assert natural_density(Full()).value == 1
    assert natural_density(Complement(ArithProg(2, 1))).value == Fraction(1, 2)


def test_union_and_intersection_densities():
    assert natural_density(Union((ArithProg(3, 1), Powers(2)))).value == Fraction(1, 3)
    both = Intersection((ArithProg(2, 1), ArithProg(3, 0)))
    assert members_upto(both, 20) == [3, 9, 15]
    assert natural_density(both).value == Fraction(1, 6)


def test_family_union_density():
    fam = IndexFamily(2, -1)
    assert natural_density(FamilyUnion(fam, 1)).value == Fraction(1, 3)
    mixed = natural_density(Union((FamilyUnion(fam, 1), ArithProg(2, 1))))
    assert mixed.to_json() == {"kind": "interval", "lower": "1/2", "upper": "5/6"}


def test_finite_family_union_is_periodic():
    first_three = FamilyUnion(IndexFamily(), 1, 4)
    assert natural_density(first_three).value == Fraction(7, 8)
    assert members_upto(first_three, 8) == [1, 2, 3, 4, 5, 6, 7]


@settings(max_examples=100, deadline=None)
@given(index_sets)
def test_exact_density_matches_counting(a):
    result = natural_density(a)
    if not result.is_exact:
        return
    limit = 20_000
    ratio = Fraction(len(members_upto(a, limit)), limit)
    # Thin parts and the periodic remainder stay well below N/10 members.
    assert abs(ratio - result.value) <= Fraction(1, 10)


def test_family_member_densities():
    fam = IndexFamily()
    assert [fam.density(j) for j in (1, 2, 3)] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert fam.member(3) == DyadicValuation(2)
    assert fam.index_of(12) == 3


def test_tail_union_bounds():
    dyadic = IndexFamily()
    bound = tail_union_upper_density(dyadic, 3)
    assert (bound.lower, bound.upper) == (0, Fraction(1, 8))
    assert tail_union_upper_density(dyadic, 0).upper == 1
    assert tail_union_upper_density(IndexFamily(2, -1), 2).upper == Fraction(1, 48)


def test_family_exclusion_must_be_thin():
    with pytest.raises(NoDensityData):
        IndexFamily(1, -1, ArithProg(3, 0)).tail_density(0)
    assert IndexFamily(1, -1, Powers(2)).tail_density(0) == 1


# ── Finiteness ──────────────────────────────────────────────────────────────


def test_finiteness_of_base_sets():
    assert is_finite(Finite(frozenset({1, 2}))) is True
    assert is_finite(ArithProg(2, 1)) is False
    assert is_finite(TailSolution(False, 9)) is True
    assert is_cofinite(TailSolution(True, 9)) is True


def test_powers_meeting_residue_classes():
    assert is_finite(Intersection((Powers(2), ArithProg(2, 1)))) is True
    assert is_finite(Intersection((Powers(2), ArithProg(3, 1)))) is False
    assert is_finite(Intersection((PolyImage(1, 2), ArithProg(4, 3)))) is True


def test_text_forms():
    assert Union((ArithProg(4, 1), Complement(Powers(2)))).text() == "ap(4,1) | ~powers(2)"
    assert Difference(Full(), Finite(frozenset({3, 1}))).text() == "full \\ finite{1,3}"
    assert FamilyUnion(IndexFamily(), 2).text() == "members(dyadic(j-1),2)"
