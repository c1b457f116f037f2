from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from roughlab.errors import (
    InvalidCoupling,
    InvalidValueSpace,
    MassNotOne,
    NegativeMass,
    PointNotInSpace,
    SpaceMismatch,
)
from roughlab.services.exact_dist import (
    REAL_LINE,
    FiniteDist,
    ValueSpace,
    as_rational,
    bernoulli,
    coupling_from_json,
    degenerate,
    diagonal_coupling,
    distance_law,
    explicit_joint,
    make_dist,
    product_coupling,
    uniform,
)

HALF = Fraction(1, 2)


@st.composite
def laws(draw, max_atoms=5):
    """A finite law on small rationals with exact masses."""
    values = draw(st.lists(st.fractions(min_value=-8, max_value=8, max_denominator=6),
                           min_size=1, max_size=max_atoms, unique=True))
    weights = draw(st.lists(st.integers(min_value=1, max_value=9), min_size=len(values), max_size=len(values)))
    total = sum(weights)
    return make_dist(REAL_LINE, [(v, Fraction(w, total)) for v, w in zip(values, weights)])


def test_bernoulli_half():
    law = make_dist(REAL_LINE, [(0, 1 - HALF), (1, HALF)])
    assert law == bernoulli(HALF)
    assert law.atoms == ((Fraction(0), HALF), (Fraction(1), HALF))


def test_degenerate_law():
    law = make_dist(REAL_LINE, [(Fraction(1, 4), 1)])
    assert law.is_degenerate
    assert law == degenerate(Fraction(1, 4))


def test_duplicate_atoms_merge():
    law = make_dist(REAL_LINE, [(3, HALF), (3, HALF)])
    assert law.atoms == ((Fraction(3), Fraction(1)),)


def test_atoms_sorted_by_value():
    law = make_dist(REAL_LINE, [(2, HALF), (-1, HALF)])
    assert law.support == (Fraction(-1), Fraction(2))


def test_zero_mass_atoms_dropped():
    law = make_dist(REAL_LINE, [(0, 1), (5, 0)])
    assert law.support == (Fraction(0),)


def test_mass_not_one_reports_deficit():
    with pytest.raises(MassNotOne) as info:
        make_dist(REAL_LINE, [(0, HALF), (1, Fraction(1, 3))])
    assert info.value.deficit == Fraction(1, 6)
    assert "5/6" in info.value.message


def test_negative_mass_rejected():
    with pytest.raises(NegativeMass):
        make_dist(REAL_LINE, [(0, Fraction(3, 2)), (1, -HALF)])


def test_float_points_rejected():
    with pytest.raises(PointNotInSpace):
        make_dist(REAL_LINE, [(0.5, 1)])


def test_as_rational_refuses_decimal_text():
    assert as_rational("3/6") == HALF
    with pytest.raises(ValueError):
        as_rational("0.5")
    with pytest.raises(TypeError):
        as_rational(True)


def test_product_of_halves():
    coupling = product_coupling(bernoulli(HALF), bernoulli(HALF))
    assert len(coupling.table) == 4
    assert {p for _, _, p in coupling.table} == {Fraction(1, 4)}


def test_product_with_degenerate_factor():
    y = uniform([0, 1, 5])
    coupling = product_coupling(degenerate(7), y)
    assert [(a, b, p) for a, b, p in coupling.table] == [(Fraction(7), v, p) for v, p in y.atoms]


def test_product_three_by_two():
    coupling = product_coupling(uniform([0, 1, 2]), uniform([0, 1]))
    assert len(coupling.table) == 6
    assert all(p == Fraction(1, 6) for _, _, p in coupling.table)


def test_distance_of_opposite_points():
    law = distance_law(product_coupling(degenerate(Fraction(1, 4)), degenerate(Fraction(-1, 4))))
    assert law == degenerate(HALF)


def test_distance_with_escaping_atom():
    z = uniform([0, 2])
    law = distance_law(product_coupling(uniform([0, 2**10]), z))
    assert law.tail(Fraction(1)) == Fraction(3, 4)
    assert law.tail(Fraction(1) + Fraction(1, 4)) == Fraction(3, 4)


def test_diagonal_distance_is_zero():
    x = uniform([0, 3, 7])
    assert distance_law(diagonal_coupling(x)) == degenerate(0)


@given(laws(), laws())
def test_product_distance_symmetric(x, y):
    assert distance_law(product_coupling(x, y)) == distance_law(product_coupling(y, x))


@given(laws())
def test_diagonal_is_point_mass_at_zero(x):
    assert distance_law(diagonal_coupling(x)) == degenerate(0)


@given(laws(), laws())
def test_distance_law_conserves_mass(x, y):
    law = distance_law(product_coupling(x, y))
    assert sum(p for _, p in law.atoms) == 1
    assert all(v >= 0 for v in law.support)


def test_explicit_joint_checks_marginals():
    x, y = bernoulli(HALF), bernoulli(HALF)
    joint = explicit_joint(x, y, [(0, 1, HALF), (1, 0, HALF)])
    assert distance_law(joint) == degenerate(1)
    with pytest.raises(InvalidCoupling):
        explicit_joint(x, y, [(0, 0, Fraction(3, 4)), (1, 1, Fraction(1, 4))])


def test_transpose_swaps_marginals():
    x, y = bernoulli(HALF), uniform([0, 2])
    coupling = product_coupling(x, y).transpose()
    assert coupling.x == y and coupling.y == x
    assert distance_law(coupling) == distance_law(product_coupling(y, x))


def test_finite_space_distances():
    space = ValueSpace.finite_points(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    x = make_dist(space, [("a", HALF), ("c", HALF)])
    assert distance_law(product_coupling(x, degenerate("b", space))) == degenerate(1)


def test_finite_space_rejects_broken_triangle():
    with pytest.raises(InvalidValueSpace):
        ValueSpace.finite_points(["a", "b", "c"], [[0, 1, 3], [1, 0, 1], [3, 1, 0]])


def test_finite_space_rejects_unknown_point():
    space = ValueSpace.finite_points(["a"], [[0]])
    with pytest.raises(PointNotInSpace):
        degenerate("z", space)


def test_space_mismatch():
    space = ValueSpace.finite_points(["a"], [[0]])
    with pytest.raises(SpaceMismatch):
        product_coupling(degenerate("a", space), degenerate(0))


def test_json_form():
    law = bernoulli(HALF)
    assert law.to_json() == {"space": {"kind": "real"}, "atoms": [["0", "1/2"], ["1", "1/2"]]}
    assert FiniteDist.from_json(law.to_json()) == law


def test_coupling_from_json():
    x, y = bernoulli(HALF), bernoulli(HALF)
    assert coupling_from_json("product", x, y).kind == "independent"
    joint = coupling_from_json({"table": [["0", "0", "1/2"], ["1", "1", "1/2"]]}, x, y)
    assert distance_law(joint) == degenerate(0)
