from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from roughlab.errors import SpecSemanticError, SpecSyntaxError
from roughlab.services import registry
from roughlab.services.exact_dist import REAL_LINE, make_dist
from roughlab.services.ideals import EXH, HARMONIC, Ideal
from roughlab.services.index_sets import (
    ArithProg,
    Complement,
    Difference,
    DyadicValuation,
    Finite,
    Intersection,
    Powers,
    Union,
)
from roughlab.services.spec_dsl import (
    ClusterQuery,
    KyFanQuery,
    LimitQuery,
    MetricQuery,
    SandwichQuery,
    parse,
    parse_ideal,
    parse_index_set,
    parse_law,
    print_document,
    query_text,
)
from roughlab.services.terms import IndexedConst

SMALL = 64

MINIMAL = """\
ideal density
sequence {
  piece full { atom 0 prob 1 }
}
target { atom 0 prob 1 }
"""


def test_fixtures_print_and_parse_back(docs):
    for name, doc in docs.items():
        text = print_document(doc)
        assert parse(text, registry.FIXTURE_HORIZON) == doc, name


def test_printed_form_is_canonical(docs):
    text = print_document(docs["ex3.3"])
    assert "family dyadic(j-1) {" in text
    assert "atom 1/(j+1) prob 1/n^2" in text
    assert print_document(parse(text, registry.FIXTURE_HORIZON)) == text


def test_family_values_depend_on_j(docs):
    values = [a.value for a in docs["ex3.3"].sequence.family.model.atoms]
    assert all(isinstance(v, IndexedConst) for v in values)
    assert sorted(v.value(3) for v in values) == [Fraction(1, 4), Fraction(1, 3)]


def test_minimal_document_defaults():
    doc = parse(MINIMAL, SMALL)
    assert doc.coupling == "independent"
    assert doc.queries == ()
    assert doc.ideal == Ideal.density()


def test_queries_parse():
    doc = parse(MINIMAL + "query metric at 3\nquery kyfan\nquery cluster r 1/2\n"
                          "query limit r 0 eps {1/2, 1/10} delta {1/4}\n", SMALL)
    assert doc.queries == (
        MetricQuery(3),
        KyFanQuery(),
        ClusterQuery(Fraction(1, 2)),
        LimitQuery(Fraction(0), (Fraction(1, 10), Fraction(1, 2)), (Fraction(1, 4),)),
    )
    assert query_text(doc.queries[3]) == "query limit r 0 eps {1/10, 1/2} delta {1/4}"


def test_sandwich_query(docs):
    query = docs["ex2.5"].queries[1]
    assert isinstance(query, SandwichQuery)
    assert [c.diagonal for c in query.candidates] == [False, False, True]


def test_mass_error_names_the_total():
    text = MINIMAL.replace("atom 0 prob 1 }\n}", "atom 0 prob 1/2 atom 1 prob 1/3 }\n}")
    with pytest.raises(SpecSemanticError) as info:
        parse(text, SMALL)
    assert "5/6" in info.value.message
    assert info.value.details["cause"] == "mass_not_one"
    assert info.value.line == 3


def test_syntax_error_position():
    text = "ideal density\nsequence {\n  piece ap(2 1) { atom 0 prob 1 }\n}\n"
    with pytest.raises(SpecSyntaxError) as info:
        parse(text, SMALL)
    assert (info.value.line, info.value.column) == (3, 14)
    assert info.value.expected == (")",)


def test_float_literals_refused():
    with pytest.raises(SpecSyntaxError) as info:
        parse(MINIMAL.replace("target { atom 0 prob 1 }", "target { atom 0.5 prob 1 }"), SMALL)
    assert info.value.line == 5


def test_unknown_keyword():
    with pytest.raises(SpecSyntaxError) as info:
        parse("ideal density\nlimit r 0\n", SMALL)
    assert "query" in info.value.expected


def test_missing_and_duplicate_declarations():
    with pytest.raises(SpecSemanticError, match="missing target"):
        parse("ideal fin\nsequence { piece full { atom 0 prob 1 } }\n", SMALL)
    with pytest.raises(SpecSemanticError, match="duplicate ideal"):
        parse("ideal fin\n" + MINIMAL, SMALL)


def test_coverage_reported_as_semantic_error():
    text = MINIMAL.replace("piece full", "piece ap(2,1)")
    with pytest.raises(SpecSemanticError) as info:
        parse(text, SMALL)
    assert info.value.details["cause"] == "coverage_error"


def test_j_outside_family():
    with pytest.raises(SpecSemanticError):
        parse(MINIMAL.replace("atom 0 prob 1 }\n}", "atom 1/j prob 1 }\n}"), SMALL)


def test_joint_cells_need_joint_coupling(docs):
    text = print_document(docs["quarter"]).replace("coupling joint", "coupling independent")
    with pytest.raises(SpecSemanticError, match="independent coupling"):
        parse(text, SMALL)


def test_negative_radius_rejected():
    with pytest.raises(SpecSemanticError):
        parse(MINIMAL + "query cluster r -1\n", SMALL)


# ── Fragments ───────────────────────────────────────────────────────────────


def test_parse_law_sorts_atoms():
    law = parse_law("{ atom 2 prob 1/2 atom 0 prob 1/2 }")
    assert law == make_dist(REAL_LINE, [(0, Fraction(1, 2)), (2, Fraction(1, 2))])
    assert law.support == (Fraction(0), Fraction(2))


def test_parse_index_set_precedence():
    assert parse_index_set("ap(4,1) | ~powers(2)") == Union((ArithProg(4, 1), Complement(Powers(2))))
    assert parse_index_set("ap(2,1) & dyadic(0) \\ finite{1}") == Difference(
        Intersection((ArithProg(2, 1), DyadicValuation(0))), Finite(frozenset({1}))
    )


def test_parse_ideal():
    ideal = parse_ideal("exh harmonic depth 32")
    assert (ideal.kind, ideal.submeasure, ideal.depth) == (EXH, HARMONIC, 32)
    assert parse_ideal("summable") == Ideal.summable()


def test_fragments_reject_trailing_input():
    with pytest.raises(SpecSyntaxError):
        parse_index_set("ap(2,1) ap(2,2)")


# ── Round trips ─────────────────────────────────────────────────────────────

VALUES = ["0", "1", "-2", "1/3", "-5/2", "n^2", "-n^3", "2^n", "1/n", "3*(3/2)^n"]
TWO_ATOM_MASSES = [
    ("1 - 1/n", "1/n"),
    ("1/2 - 1/(2*n^2)", "1/2 + 1/(2*n^2)"),
    ("1 - (1/2)^n", "(1/2)^n"),
    ("1/3", "2/3"),
]
IDEALS = ["fin", "density", "summable", "exh harmonic depth 16 rungs 3", "exh dyadic_block"]
QUERIES = [
    "query metric at 3",
    "query kyfan",
    "query cluster r 1/2",
    "query limit r 0 eps {1/2} delta {1/4, 1/2}",
    "query diameter r 1 members { law { atom 0 prob 1 } law { atom 1 prob 1/2 atom 2 prob 1/2 } }",
    "query sandwich r 1 star { atom 0 prob 1 } candidates { law { atom 1 prob 1 } law { atom 0 prob 1 } diagonal }",
]


@st.composite
def piece_bodies(draw):
    if draw(st.integers(0, 5)) == 0:
        return "binomial " + draw(st.sampled_from(["1/2", "1/3", "3/4"]))
    values = draw(st.lists(st.sampled_from(VALUES), min_size=1, max_size=2, unique=True))
    if len(values) == 1:
        return f"{{ atom {values[0]} prob 1 }}"
    first, second = draw(st.sampled_from(TWO_ATOM_MASSES))
    return f"{{\n    atom {values[0]} prob {first}\n    atom {values[1]} prob {second}\n  }}"


# Each entry partitions the positive integers; the language only knows `space real`.
PARTITIONS = [
    ["powers(2)", "~powers(2)"],
    ["poly(1,2)", "~poly(1,2)"],
    ["dyadic(0)", "~dyadic(0)"],
    ["ap(2,1) \\ powers(3)", "ap(2,2) | powers(3)"],
    ["ap(3,1) & poly(1,2)", "ap(3,1) & ~poly(1,2)", "~ap(3,1)"],
]
FAMILY_BODIES = [
    "{\n    atom 1/j prob 1 - 1/n^2\n    atom 1/(j+1) prob 1/n^2\n  }",
    "{\n    atom (2*j+1)/(j+3) prob 1/2\n    atom 0 prob 1/2\n  }",
    "{ atom 1/j prob 1 }",
]
FAIR_BIT = "{ atom 0 prob 1/2 atom 1 prob 1/2 }"


@st.composite
def joint_bodies(draw):
    a, b = draw(st.lists(st.sampled_from(VALUES), min_size=2, max_size=2, unique=True))
    if draw(st.booleans()):
        cells = [f"pair {v} with {y} prob 1/4" for v in (a, b) for y in (0, 1)]
    else:
        cells = [f"pair {a} with 1 prob 1/2", f"pair {b} with 0 prob 1/2"]
    lines = [f"atom {a} prob 1/2", f"atom {b} prob 1/2", *cells]
    return "{\n" + "".join(f"    {line}\n" for line in lines) + "  }"


@st.composite
def sequence_blocks(draw, body):
    layout = draw(st.sampled_from(["ap", "partition", "family", "family_excluding"]))
    if layout == "ap":
        modulus = draw(st.integers(1, 3))
        heads = [f"piece ap({modulus},{residue})" for residue in range(1, modulus + 1)]
    elif layout == "partition":
        heads = [f"piece {index}" for index in draw(st.sampled_from(PARTITIONS))]
    else:
        family = draw(st.sampled_from(FAMILY_BODIES))
        if layout == "family":
            return [f"  family dyadic(j-1) {family}"]
        return [f"  piece powers(2) {draw(body)}", f"  family dyadic(j-1) exclude powers(2) {family}"]
    return [f"  {head} {draw(body)}" for head in heads]


@st.composite
def documents(draw):
    joint = draw(st.integers(0, 3)) == 0
    lines = [f"ideal {draw(st.sampled_from(IDEALS))}"]
    if draw(st.booleans()):
        lines.append("space real")
    lines.append("sequence {")
    if joint:
        modulus = draw(st.integers(1, 2))
        lines += [f"  piece ap({modulus},{residue}) {draw(joint_bodies())}" for residue in range(1, modulus + 1)]
        target = FAIR_BIT
    else:
        lines += draw(sequence_blocks(piece_bodies()))
        target = draw(st.sampled_from(["{ atom 0 prob 1 }", FAIR_BIT, "{ atom -1/2 prob 1/3 atom 3 prob 2/3 }"]))
    lines.append("}")
    lines.append(f"target {target}")
    if joint:
        lines.append("coupling joint")
    lines += draw(st.lists(st.sampled_from(QUERIES), max_size=3))
    return "\n".join(lines) + "\n"


@settings(max_examples=500, deadline=None)
@given(documents())
def test_print_parse_round_trip(text):
    doc = parse(text, SMALL)
    printed = print_document(doc)
    again = parse(printed, SMALL)
    assert again == doc
    assert print_document(again) == printed


@st.composite
def mutated_documents(draw):
    text = draw(documents())
    words = text.split()
    if draw(st.booleans()):
        del words[draw(st.integers(0, len(words) - 1))]
        return text, " ".join(words)
    masses = [i for i, word in enumerate(words) if word == "prob"]
    at = draw(st.sampled_from(masses))
    words.insert(at + 1, "1/7 +")
    return text, " ".join(words)


@settings(max_examples=300, deadline=None)
@given(mutated_documents())
def test_single_edits_are_rejected_or_change_the_document(case):
    text, mutated = case
    original = parse(text, SMALL)
    try:
        changed = parse(mutated, SMALL)
    except (SpecSyntaxError, SpecSemanticError):
        return
    assert changed != original
