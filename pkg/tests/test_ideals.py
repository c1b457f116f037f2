from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from roughlab.services.ideals import (
    DYADIC_BLOCK,
    HARMONIC,
    IN,
    NOT_IN,
    UNKNOWN,
    Ideal,
    dual_filter_member,
    exh_ladder,
    ideal_member,
    replay,
    submeasure_value,
)
from roughlab.services.index_sets import (
    ArithProg,
    Complement,
    DyadicValuation,
    FamilyUnion,
    Finite,
    Full,
    IndexFamily,
    Intersection,
    PolyImage,
    Powers,
    Union,
)

CATALOG = [Ideal.fin(), Ideal.density(), Ideal.summable()]
EXH = Ideal.exh(HARMONIC)

base_sets = st.one_of(
    st.builds(ArithProg, st.integers(1, 6), st.integers(0, 7)),
    st.builds(Powers, st.integers(2, 4)),
    st.builds(PolyImage, st.integers(1, 2), st.integers(2, 3)),
    st.builds(DyadicValuation, st.integers(0, 3)),
    st.builds(lambda xs: Finite(frozenset(xs)), st.sets(st.integers(1, 40), max_size=4)),
)

index_sets = st.recursive(
    base_sets,
    lambda inner: st.one_of(
        st.builds(lambda a, b: Union((a, b)), inner, inner),
        st.builds(lambda a, b: Intersection((a, b)), inner, inner),
        st.builds(Complement, inner),
    ),
    max_leaves=3,
)


def test_powers_of_two_summable():
    verdict = ideal_member(Ideal.summable(), Powers(2))
    assert verdict.answer == IN
    assert verdict.certificate["rule"] == "convergent_tail"
    assert verdict.certificate["sum_bound"] == "1"


def test_squares_density_zero():
    verdict = ideal_member(Ideal.density(), PolyImage(1, 2))
    assert verdict.answer == IN
    assert verdict.certificate["density"] == "0"


def test_odd_numbers_not_finite():
    verdict = ideal_member(Ideal.fin(), ArithProg(2, 1))
    assert verdict.answer == NOT_IN
    assert verdict.certificate["rule"] == "infinite_structure"


def test_summable_divergence_certificates():
    progression = ideal_member(Ideal.summable(), ArithProg(4, 1))
    assert progression.answer == NOT_IN
    assert progression.certificate["rule"] == "harmonic_comparison"
    assert progression.certificate["residue"] == 1
    dyadic = ideal_member(Ideal.summable(), DyadicValuation(2))
    assert dyadic.answer == NOT_IN
    assert dyadic.certificate["modulus"] == 8 and dyadic.certificate["residue"] == 4


def test_summable_union_of_thin_sets():
    verdict = ideal_member(Ideal.summable(), Union((Powers(2), PolyImage(1, 2))))
    assert verdict.answer == IN
    assert verdict.certificate["sum_bound"] == "3"


def test_density_only_interval_leaves_summable_open():
    a = Intersection((FamilyUnion(IndexFamily(2, -1), 1), Powers(3)))
    assert ideal_member(Ideal.density(), a).answer == IN
    blocked = ideal_member(Ideal.summable(), a)
    assert blocked.answer == UNKNOWN
    assert "blocking" in blocked.certificate


def test_dual_filter():
    assert dual_filter_member(Ideal.density(), Complement(PolyImage(1, 2))).answer == IN
    assert dual_filter_member(Ideal.fin(), Full()).answer == IN
    assert dual_filter_member(Ideal.density(), ArithProg(2, 1)).answer == NOT_IN


@pytest.mark.parametrize("ideal", CATALOG, ids=lambda i: i.kind)
def test_properness(ideal):
    assert ideal_member(ideal, Full()).answer == NOT_IN


@pytest.mark.parametrize("ideal", [*CATALOG, EXH], ids=lambda i: i.kind)
@pytest.mark.parametrize("t", [1, 2, 17, 1000])
def test_admissibility(ideal, t):
    assert ideal_member(ideal, Finite(frozenset({t}))).answer == IN


@settings(max_examples=120, deadline=None)
@given(index_sets, index_sets)
def test_ideal_axioms(a, b):
    for ideal in CATALOG:
        if ideal_member(ideal, a).answer != IN:
            continue
        assert ideal_member(ideal, Intersection((a, b))).answer != NOT_IN
        if ideal_member(ideal, b).answer == IN:
            assert ideal_member(ideal, Union((a, b))).answer == IN
        assert ideal_member(ideal, Complement(a)).answer != IN


@settings(max_examples=80, deadline=None)
@given(index_sets)
def test_certificates_replay(a):
    for ideal in CATALOG:
        verdict = ideal_member(ideal, a)
        assert replay(ideal, a, verdict, horizon=512)


# ── Truncated Exh ───────────────────────────────────────────────────────────


def test_submeasures():
    assert submeasure_value(HARMONIC, [1, 2]) == Fraction(3, 2)
    assert submeasure_value(DYADIC_BLOCK, [4, 5, 6, 7]) == 1
    assert submeasure_value(DYADIC_BLOCK, [4, 5, 9]) == Fraction(1, 2)
    assert submeasure_value(DYADIC_BLOCK, []) == 0


def test_exh_ladder_certifies_powers():
    verdict = ideal_member(EXH, Powers(2))
    assert verdict.answer == IN
    assert verdict.certificate["truncation_based"] is True
    assert exh_ladder(EXH, Powers(2))[0] == (64, Fraction(1, 128))
    assert replay(EXH, Powers(2), verdict)


def test_exh_windows_have_fixed_width():
    ideal = Ideal.exh(HARMONIC, depth=4, rungs=3)
    expected = [(t, sum((Fraction(1, n) for n in range(t + 1, t + 5)), Fraction(0))) for t in (4, 8, 16)]
    assert exh_ladder(ideal, Full()) == expected
    assert exh_ladder(EXH, Powers(2))[1] == (128, Fraction(0))


def test_exh_never_rejects():
    for a in (ArithProg(2, 1), Full(), DyadicValuation(0)):
        verdict = ideal_member(EXH, a)
        assert verdict.answer == UNKNOWN
        assert len(verdict.certificate["ladder"]) == EXH.rungs
    assert ideal_member(Ideal.exh(DYADIC_BLOCK, depth=16), ArithProg(2, 1)).answer == UNKNOWN


def test_exh_validation():
    with pytest.raises(ValueError):
        Ideal.exh("counting")
    with pytest.raises(ValueError):
        Ideal.exh(HARMONIC, rungs=1)


def test_ideal_text():
    assert EXH.text() == "exh harmonic depth 64 rungs 8 tol 1/1000"
    assert Ideal.summable().to_json() == {"kind": "summable"}
