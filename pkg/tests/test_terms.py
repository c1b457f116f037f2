import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from roughlab.errors import GrammarViolation, OutsideValidity
from roughlab.services.index_sets import TailSolution
from roughlab.services.terms import (
    ONE,
    ZERO,
    Const,
    Exponential,
    IndexedConst,
    Monomial,
    ProbFn,
    ReciprocalShift,
    exceeds_from,
    indexed_exceeds_from,
    threshold_solution,
)

quarters = st.fractions(min_value=0, max_value=1, max_denominator=4)


@st.composite
def prob_fns(draw):
    """Small probability functions: a constant plus 1/n, 1/n^2 and 2^-n terms."""
    const = draw(quarters)
    recips = {k: draw(st.fractions(min_value=-1, max_value=1, max_denominator=4)) for k in (1, 2)}
    geoms = {Fraction(1, 2): draw(st.fractions(min_value=-1, max_value=1, max_denominator=4))}
    return ProbFn.make(const, recips, geoms)


def test_reciprocal_exceeds_tenth():
    solution = threshold_solution(ProbFn.recip(1, 1), ">", Fraction(1, 10))
    assert solution == TailSolution(False, 10, frozenset(range(1, 10)))


def test_one_minus_inverse_square():
    solution = threshold_solution(1 - ProbFn.recip(1, 2), ">=", Fraction(99, 100))
    assert solution == TailSolution(True, 10, frozenset())


def test_geometric_positive_everywhere():
    assert threshold_solution(ProbFn.geom(Fraction(1, 2)), ">", 0) == TailSolution(True, 1)


def test_comparator_checked():
    with pytest.raises(ValueError):
        threshold_solution(ONE, "<", 0)


def test_crossing_beyond_scan_limit():
    with pytest.raises(OutsideValidity):
        threshold_solution(ProbFn.recip(1, 1), ">", Fraction(1, 10**8))


@settings(max_examples=100, deadline=None)
@given(prob_fns(), quarters, st.sampled_from([">", ">="]))
def test_solution_matches_direct_evaluation(f, delta, comparator):
    solution = threshold_solution(f, comparator, delta)
    for n in range(1, 300):
        diff = f.at(n) - delta
        assert solution.contains(n) == (diff > 0 if comparator == ">" else diff >= 0)


def test_probability_arithmetic():
    assert ProbFn.recip(1, 1) + ProbFn.recip(-1, 1) == ZERO
    f = 1 - ProbFn.geom(Fraction(1, 2))
    assert f.at(1) == Fraction(1, 2)
    assert f.at(3) == Fraction(7, 8)
    assert (f * 2).at(1) == 1
    assert (ONE - f).is_constant is False
    assert ProbFn.constant(Fraction(1, 3)).is_constant


def test_limit_and_approach():
    f = ProbFn.constant(Fraction(1, 3)) + ProbFn.recip(1, 1)
    assert f.limit == Fraction(1, 3)
    assert f.approach() == 1
    assert (1 - ProbFn.geom(Fraction(1, 2))).approach() == -1
    assert ONE.approach() == 0


def test_grammar_rejects_bad_terms():
    with pytest.raises(GrammarViolation):
        ProbFn.geom(Fraction(3, 2))
    with pytest.raises(GrammarViolation):
        ProbFn.recip(1, 0)
    with pytest.raises(GrammarViolation):
        Monomial(Fraction(0), 1)
    with pytest.raises(GrammarViolation):
        Exponential(Fraction(1), Fraction(1))


def test_validity_index():
    assert (ProbFn.constant(Fraction(1, 2)) + ProbFn.recip(1, 1)).validity_index() == 2
    assert (ProbFn.constant(Fraction(1, 2)) - ProbFn.recip(1, 1)).validity_index() == 2
    assert ProbFn.recip(1, 2).validity_index() == 1
    with pytest.raises(GrammarViolation):
        (2 - ProbFn.recip(1, 1)).validity_index()


def test_monotone_from():
    f = ProbFn.recip(1, 1) + ProbFn.recip(-3, 2)
    assert f.monotone_from() == 6
    assert ProbFn.recip(1, 1).monotone_from() == 1


def test_probability_text():
    assert (1 - ProbFn.geom(Fraction(1, 2))).text() == "1 - (1/2)^n"
    assert ProbFn.make(Fraction(1, 2), {1: Fraction(1, 3)}).text() == "1/2 + 1/(3*n)"
    assert ProbFn.recip(-2, 2).text() == "-2/n^2"
    assert ZERO.text() == "0"


# ── Value functions ─────────────────────────────────────────────────────────


def test_value_limits_and_trends():
    assert Monomial(Fraction(2), 1).limit() == math.inf
    assert Monomial(Fraction(-1), 3).trend() == -1
    assert Exponential(Fraction(1), Fraction(2)).at(10) == 1024
    assert ReciprocalShift(Fraction(3), 2).limit() == 0
    assert ReciprocalShift(Fraction(3), 2).trend() == -1
    assert Const(Fraction(5)).trend() == 0


def test_value_text():
    assert Monomial(Fraction(-1), 3).text() == "-n^3"
    assert Exponential(Fraction(1), Fraction(2)).text() == "2^n"
    assert Exponential(Fraction(1), Fraction(3, 2)).text() == "(3/2)^n"
    assert ReciprocalShift(Fraction(1, 3), 1).text() == "1/(3*n)"


def test_indexed_constant():
    fn = IndexedConst(Fraction(1), Fraction(-1), Fraction(1), Fraction(0))
    assert fn.value(4) == Fraction(3, 4)
    assert fn.limit_in_j() == 1
    assert fn.trend_in_j() == 1
    assert fn.text() == "(j-1)/j"
    assert IndexedConst(Fraction(2), Fraction(0), Fraction(2), Fraction(2)).text() == "j/(j+1)"
    with pytest.raises(GrammarViolation):
        fn.at(3)
    assert indexed_exceeds_from(fn, Fraction(1, 2)) == (True, 3)


def test_exceeds_from():
    assert exceeds_from(Monomial(Fraction(1), 2), Fraction(10)) == (True, 4)
    assert exceeds_from(Exponential(Fraction(1), Fraction(2)), Fraction(1000)) == (True, 10)
    assert exceeds_from(ReciprocalShift(Fraction(1), 1), Fraction(0)) == (True, 1)
    assert exceeds_from(ReciprocalShift(Fraction(-1), 1), Fraction(0)) == (False, 1)
    assert exceeds_from(Const(Fraction(1, 2)), Fraction(1, 4)) == (True, 1)
