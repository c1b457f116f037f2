"""
Reproduction registry and document runner.

Each entry embeds a .rcl document for one worked example together with the values
the example asserts. Every expected value carries its provenance:

    PAPER    stated by the source example itself
    TRIVIAL  follows from the definitions with no computation
    DERIVED  computed by hand from the example's data, not stated in the source

`reproduce` re-runs the computation and compares with exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable

import structlog

from roughlab.config import settings
from roughlab.errors import FatalInconsistency, RoughLabError, UnknownRegistryId
from roughlab.services.analysis import (
    check_rough_limit,
    classify_cluster,
    replay_weak,
    replay_witness,
)
from roughlab.services.exact_dist import (
    degenerate,
    diagonal_coupling,
    distance_law,
    product_coupling,
    uniform,
)
from roughlab.services.ideals import Ideal, ideal_member
from roughlab.services.index_sets import ArithProg, Powers, tail_union_upper_density
from roughlab.services.kyfan import kyfan_between
from roughlab.services.probes import (
    closedness_probe,
    diameter_probe,
    ias_equivalence_probe,
    kyfan_agreement_probe,
    non_maximality_witness,
    sandwich_probe,
)
from roughlab.services.sequence_model import (
    EXCEED,
    law_at,
    pointwise_exceedance,
    proximity_at,
    solution_set,
    symbolic_exceedance,
)
from roughlab.services.spec_dsl import (
    ClusterQuery,
    DiameterQuery,
    KyFanQuery,
    LimitQuery,
    MetricQuery,
    SandwichQuery,
    SpecDocument,
    parse,
    query_text,
)

log = structlog.get_logger(__name__)

PAPER = "PAPER"
TRIVIAL = "TRIVIAL"
DERIVED = "DERIVED"

# Fixtures are small; a short coverage horizon keeps parsing fast.
FIXTURE_HORIZON = 2048


def _s(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass(frozen=True)
class Check:
    entry: str
    name: str
    expected: str
    computed: str
    provenance: str

    @property
    def passed(self) -> bool:
        return self.expected == self.computed

    def row(self) -> dict:
        return {
            "id": self.entry,
            "check": self.name,
            "expected": self.expected,
            "computed": self.computed,
            "provenance": self.provenance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class RegistryEntry:
    id: str
    title: str
    source: str
    run: Callable[[SpecDocument], list[tuple[str, object, object, str]]]

    def document(self) -> SpecDocument:
        return parse(self.source, FIXTURE_HORIZON)


def _half(k: int) -> Fraction:
    return Fraction(1, 2**k)


# ── Sharpness of the diameter bound ─────────────────────────────────────────

THM21_SOURCE = """\
# Bad indices 2^m form a set with a convergent harmonic sum.
ideal summable
space real
sequence {
  piece powers(2) {
    atom -5 prob 1/2
    atom 5 prob 1/2
  }
  piece ~powers(2) {
    atom 0 prob 1 - 1/n
    atom 1 prob 1/n
  }
}
target { atom 1/4 prob 1 }
coupling independent
query limit r 1/4
query diameter r 1/4 members { law { atom 1/4 prob 1 } law { atom -1/4 prob 1 } }
"""


def _thm21(doc: SpecDocument):
    r = Fraction(1, 4)
    x_star, y_star = degenerate(r), degenerate(-r)
    pair = diameter_probe(doc.sequence, [x_star, y_star], r, doc.ideal)
    three = diameter_probe(doc.sequence, [x_star, y_star, degenerate(0)], r, doc.ideal)
    return [
        ("X* = 1/4 is a rough limit", "yes", check_rough_limit(doc.sequence, x_star, r, doc.ideal).answer, PAPER),
        ("Y* = -1/4 is a rough limit", "yes", check_rough_limit(doc.sequence, y_star, r, doc.ideal).answer, PAPER),
        ("rho(X*, Y*)", Fraction(1, 2), kyfan_between(x_star, y_star, product_coupling(x_star, y_star)).rho, PAPER),
        ("diameter of {X*, Y*}", Fraction(1, 2), pair.rho, PAPER),
        ("bound min(1, 2r) attained", True, pair.attained, PAPER),
        ("diameter of {r, -r, 0}", Fraction(1, 2), three.rho, DERIVED),
    ]


# ── Strict inclusions of the rough limit set ────────────────────────────────

EX25_SOURCE = """\
# Squares carry a binomial law; every other index is 0 or 2^n.
ideal density
space real
sequence {
  piece ~poly(1,2) {
    atom 0 prob 1 - (1/2)^n
    atom 2^n prob (1/2)^n
  }
  piece poly(1,2) binomial 1/2
}
target { atom 0 prob 1 }
coupling independent
query limit r 0
query sandwich r 1 star { atom 0 prob 1 } candidates { law { atom 1 prob 1 } law { atom 0 prob 1/2 atom 2 prob 1/2 } law { atom 0 prob 1 } diagonal }
"""


def _ex25(doc: SpecDocument):
    seq, ideal = doc.sequence, doc.ideal
    one, z = degenerate(1), uniform([0, 2])
    eps = Fraction(1, 2)
    non_squares = [n for n in range(2, 21) if isqrt(n) ** 2 != n]
    powers_match = all(
        pointwise_exceedance(seq, one, Fraction(1), eps, n) == _half(n)
        and symbolic_exceedance(seq, one, Fraction(1), eps, n) == _half(n)
        for n in non_squares
    )
    rejected = check_rough_limit(seq, z, Fraction(1), ideal)
    star = degenerate(0)
    rows = sandwich_probe(seq, star, Fraction(1), ideal, [
        (one, product_coupling(star, one)),
        (z, product_coupling(star, z)),
        (star, diagonal_coupling(star)),
    ])
    at_ten = distance_law(product_coupling(uniform([0, 2**10]), z)).tail(Fraction(1))
    return [
        ("Y* = 1 is a rough limit at r=1", "yes", check_rough_limit(seq, one, Fraction(1), ideal).answer, PAPER),
        ("Z fair on {0,2} is a rough limit at r=1", "no", rejected.answer, PAPER),
        ("X* = 0 is an ideal limit (r=0)", "yes", check_rough_limit(seq, star, Fraction(0), ideal).answer, PAPER),
        ("P(d(X_n, 1) > 3/2) = (1/2)^n off the squares, 2 <= n <= 20", True, powers_match, PAPER),
        # The published 3/4 is the exceedance for X_n fair on {0, 2^n}. This fixture puts mass
        # (1/2)^n on 2^n, so its limiting law is 0 and the witness sees only Z = 2: 1/2.
        ("P(d(X_10, Z) > 1) for X_10 fair on {0, 2^10}", Fraction(3, 4), at_ten, PAPER),
        ("limiting exceedance in the rejection witness", Fraction(1, 2),
         rejected.witness["limiting_exceedance"], DERIVED),
        ("rejection witness replays", True, replay_witness(seq, z, Fraction(1), ideal, rejected.witness), TRIVIAL),
        ("Y* = 1 outside the closed r-ball of X*", False, rows[0].inner, PAPER),
        ("Y* = 1 inside the rho-ball of X*", True, rows[0].ball, PAPER),
        ("Z inside the rho-ball of X*", True, rows[1].ball, PAPER),
        ("diagonal copy of X* in all three sets", True,
         rows[2].inner and rows[2].rough_limit == "yes" and rows[2].ball, TRIVIAL),
    ]


# ── Strong cluster point that is not a limit point ──────────────────────────

EX33_SOURCE = """\
# Member j of the dyadic partition sits near 1/j.
ideal density
space real
sequence {
  family dyadic(j-1) {
    atom 1/j prob 1 - 1/n^2
    atom 1/(j+1) prob 1/n^2
  }
}
target { atom 0 prob 1 }
coupling independent
query cluster r 0
"""


def _ex33(doc: SpecDocument):
    seq, ideal, zero = doc.sequence, doc.ideal, Fraction(0)
    fam = seq.family.family
    report = classify_cluster(seq, doc.target, zero, ideal)
    members = [(degenerate(Fraction(1, j)), product_coupling(degenerate(Fraction(1, j)), doc.target))
               for j in range(1, 6)]
    closed = closedness_probe(seq, zero, ideal, members, doc.target)
    return [
        ("Z = 0 strong cluster point", "yes", report.strong_cluster.answer, PAPER),
        ("Z = 0 limit point", "no", report.limit_point.answer, PAPER),
        ("member densities 2^-j, j <= 20", True, all(fam.density(j) == _half(j) for j in range(1, 21)), PAPER),
        ("tail bounds 2^-j, j <= 20", True,
         all(tail_union_upper_density(fam, j).upper == _half(j) for j in range(1, 21)), DERIVED),
        ("Y_j = 1/j limit points, j <= 5", True,
         all(rep.limit_point.answer == "yes" for _, rep in closed.members), PAPER),
        ("rho(Y_j, Z) = 1/j", True, list(closed.rhos) == [Fraction(1, j) for j in range(1, 6)], DERIVED),
        ("Z inherits strong membership", "yes", closed.limit_report.strong_cluster.answer, PAPER),
    ]


# ── Weak but not strong cluster point ───────────────────────────────────────

EX35_SOURCE = """\
# Odd indices split evenly between -2 and 1; even indices run away.
ideal density
space real
sequence {
  piece ap(2,1) {
    atom -2 prob 1/2 - 1/(2*n^2)
    atom 1 prob 1/2 + 1/(2*n^2)
  }
  piece ap(2,2) {
    atom -1 prob 1/n
    atom n^2 prob 1 - 1/n
  }
}
target { atom 0 prob 1/2 atom 1 prob 1/2 }
coupling independent
query cluster r 1
"""


def _ex35(doc: SpecDocument):
    seq, ideal, r = doc.sequence, doc.ideal, Fraction(1)
    report = classify_cluster(seq, doc.target, r, ideal)
    under_fin = classify_cluster(seq, doc.target, r, Ideal.fin())
    grid = [Fraction(1, 10), Fraction(1, 2), Fraction(1)]
    return [
        ("weak cluster point", "yes", report.weak_cluster.answer, PAPER),
        ("delta* supremum", Fraction(1, 2), report.delta_star_sup, PAPER),
        ("strong cluster point", "no", report.strong_cluster.answer, PAPER),
        ("limit point", "no", report.limit_point.answer, DERIVED),
        ("same answers under fin", True, under_fin.answers == report.answers, DERIVED),
        ("delta* = 1/4 replays", True, replay_weak(seq, doc.target, r, ideal, Fraction(1, 4), grid), DERIVED),
    ]


# ── Weak cluster set that is not closed ─────────────────────────────────────


def _geometric_atoms(k: int) -> str:
    """a_i = 2^-i with mass 2^-i for i < k; the last atom takes the remaining 2^-(k-1)."""
    lines = [f"    atom 1/{2**i} prob 1/{2**i}" for i in range(1, k)]
    lines.append(f"    atom 1/{2**k} prob 1/{2 ** (k - 1)}")
    return "\n".join(lines)


def ex312_source(k: int | None = None) -> str:
    k = k or settings.geometric_truncation
    return f"""\
# Geometric law on the odd indices, escaping mass on the even ones.
ideal density
space real
sequence {{
  piece ap(2,1) {{
{_geometric_atoms(k)}
  }}
  piece ap(2,2) {{
    atom -n^3 prob 1/3
    atom n^2 prob 2/3
  }}
}}
target {{ atom 0 prob 1 }}
coupling independent
query cluster r 0
"""


def _ex312(doc: SpecDocument):
    seq, ideal, zero = doc.sequence, doc.ideal, Fraction(0)
    family = [(degenerate(_half(k)), product_coupling(degenerate(_half(k)), doc.target)) for k in range(1, 9)]
    closed = closedness_probe(seq, zero, ideal, family, doc.target, expect_weak_failure=True)
    sups = [rep.delta_star_sup for _, rep in closed.members]
    grid = [Fraction(1, 1000), Fraction(1, 10), Fraction(1, 2)]
    return [
        ("delta* sup of Y_k = 2^-k, k <= 8", True, sups == [_half(k) for k in range(1, 9)], PAPER),
        ("Y_k strong cluster points", False,
         any(rep.strong_cluster.answer == "yes" for _, rep in closed.members), DERIVED),
        ("Z = 0 weak cluster point", "no", closed.limit_report.weak_cluster.answer, PAPER),
        ("inf delta* bounded away from 0", False, closed.weak_inf_positive, PAPER),
        ("delta* = 2^-4 replays for Y_3", True,
         replay_weak(seq, degenerate(_half(3)), zero, ideal, _half(4), grid), DERIVED),
    ]


def _weak_closed(doc: SpecDocument):
    seq, ideal, r = doc.sequence, doc.ideal, Fraction(1)
    z = degenerate(0)
    family = [(degenerate(_half(k)), product_coupling(degenerate(_half(k)), z)) for k in range(1, 7)]
    closed = closedness_probe(seq, r, ideal, family, z)
    return [
        ("inf delta* bounded away from 0", True, closed.weak_inf_positive, DERIVED),
        ("Z = 0 weak cluster point", "yes", closed.limit_report.weak_cluster.answer, PAPER),
        ("delta* sup of Z", Fraction(1, 2), closed.limit_report.delta_star_sup, DERIVED),
    ]


# ── Probability criterion vs rho criterion ──────────────────────────────────


def _equiv(doc: SpecDocument):
    cases = [
        ("ex2.5", EX25_SOURCE, [degenerate(0), degenerate(1), uniform([0, 2])]),
        ("ex3.3", EX33_SOURCE, [degenerate(0), degenerate(Fraction(1, 2))]),
        ("ex3.5", EX35_SOURCE, [uniform([0, 1])]),
        ("thm2.1", THM21_SOURCE, [degenerate(0), degenerate(Fraction(1, 4))]),
    ]
    out = []
    for name, source, targets in [("prop1.7", None, [degenerate(0), degenerate(1)])] + cases:
        seq, ideal = (doc.sequence, doc.ideal) if source is None else _fixture(source)
        agree = all(kyfan_agreement_probe(seq, y, ideal, 200).agree for y in targets)
        out.append((f"probability and rho verdicts agree on {name}", True, agree, PAPER))
    return out


PROP17_SOURCE = """\
# Converges in probability to 0 along every index.
ideal fin
space real
sequence {
  piece full {
    atom 0 prob 1 - 1/n
    atom 1 prob 1/n
  }
}
target { atom 0 prob 1 }
coupling independent
query kyfan
query limit r 0
"""


# ── Sequences equal off an ideal set ────────────────────────────────────────

IAS_SOURCE = """\
# The dyadic family again, replaced by a constant on the powers of two.
ideal density
space real
sequence {
  piece powers(2) {
    atom 5 prob 1
  }
  family dyadic(j-1) exclude powers(2) {
    atom 1/j prob 1 - 1/n^2
    atom 1/(j+1) prob 1/n^2
  }
}
target { atom 0 prob 1 }
coupling independent
query cluster r 0
"""


def _ias(doc: SpecDocument):
    base, _ = _fixture(EX33_SOURCE)
    report = ias_equivalence_probe(base, doc.sequence, doc.ideal, doc.target, Fraction(0), Powers(2), 512)
    self_report = ias_equivalence_probe(base, base, doc.ideal, doc.target, Fraction(0), Powers(2), 512)
    return [
        ("identical verdicts after changing the powers of two", True, report.identical, PAPER),
        ("strong cluster answers", "yes", report.cluster[1][1], PAPER),
        ("identical verdicts against itself", True, self_report.identical, TRIVIAL),
    ]


# ── Quarter-mass proximity ──────────────────────────────────────────────────

QUARTER_SOURCE = """\
# X_n uniform on {0, n} and Y uniform on {0, 1}; every joint cell has mass 1/4.
ideal density
space real
sequence {
  piece full {
    atom 0 prob 1/2
    atom n prob 1/2
    pair 0 with 0 prob 1/4
    pair 0 with 1 prob 1/4
    pair n with 0 prob 1/4
    pair n with 1 prob 1/4
  }
}
target { atom 0 prob 1/2 atom 1 prob 1/2 }
coupling joint
query cluster r 0
"""


def _quarter(doc: SpecDocument):
    piece = doc.sequence.pieces[0]
    report = classify_cluster(doc.sequence, doc.target, Fraction(0), doc.ideal)
    near = {proximity_at(piece, doc.target, Fraction(0), Fraction(1, 2), n) for n in range(2, 50)}
    return [
        ("P(|X_n - Y| < 1/2) = 1/4 for 2 <= n < 50", True, near == {Fraction(1, 4)}, PAPER),
        ("weak cluster point", "yes", report.weak_cluster.answer, DERIVED),
        ("delta* supremum", Fraction(1, 4), report.delta_star_sup, DERIVED),
        ("strong cluster point", "no", report.strong_cluster.answer, DERIVED),
    ]


# ── Strong cluster point that is not a rough limit ──────────────────────────

SPLIT_SOURCE = """\
# X_n = 0 on odd indices and 1 on even ones.
ideal density
space real
sequence {
  piece ap(2,1) { atom 0 prob 1 }
  piece ap(2,2) { atom 1 prob 1 }
}
target { atom 0 prob 1 }
coupling independent
query cluster r 1/2
query limit r 1/2
"""


def _split(doc: SpecDocument):
    y, z = degenerate(0), degenerate(1)
    report = non_maximality_witness(doc.ideal, ArithProg(2, 1), y, z, product_coupling(y, z), Fraction(1, 2))
    direct = classify_cluster(doc.sequence, y, Fraction(1, 2), doc.ideal)
    return [
        ("rho(Y, Z)", Fraction(1), report.alpha, DERIVED),
        ("strong cluster but not rough limit at beta = 1/2", True, report.witnessed, PAPER),
        ("document agrees with the built sequence", "yes", direct.strong_cluster.answer, TRIVIAL),
        ("document limit verdict", "no", check_rough_limit(doc.sequence, y, Fraction(1, 2), doc.ideal).answer,
         TRIVIAL),
    ]


def _fixture(source: str):
    doc = parse(source, FIXTURE_HORIZON)
    return doc.sequence, doc.ideal


REGISTRY: tuple[RegistryEntry, ...] = (
    RegistryEntry("thm2.1-sharpness", "diameter bound min(1, 2r) is attained", THM21_SOURCE, _thm21),
    RegistryEntry("ex2.5", "both inclusions of the rough limit set are strict", EX25_SOURCE, _ex25),
    RegistryEntry("ex3.3", "strong cluster point that is not a limit point", EX33_SOURCE, _ex33),
    RegistryEntry("ex3.5", "weak cluster point that is not strong", EX35_SOURCE, _ex35),
    RegistryEntry("ex3.12", "weak cluster set is not closed", ex312_source(), _ex312),
    RegistryEntry("weak-closedness", "weak cluster set closed when delta* stays positive", EX35_SOURCE,
                  _weak_closed),
    RegistryEntry("prop1.7-equiv", "convergence in probability matches rho-convergence", PROP17_SOURCE, _equiv),
    RegistryEntry("ias-equivalence", "ideal-almost-surely equal sequences share verdicts", IAS_SOURCE, _ias),
    RegistryEntry("quarter-mass", "joint coupling with quarter mass on every cell", QUARTER_SOURCE, _quarter),
    RegistryEntry("non-maximality", "split sequence separates cluster points from limits", SPLIT_SOURCE,
                  _split),
)


def entry_ids() -> list[str]:
    return [e.id for e in REGISTRY]


def get_entry(entry_id: str) -> RegistryEntry:
    for entry in REGISTRY:
        if entry.id == entry_id:
            return entry
    raise UnknownRegistryId(f"unknown registry id {entry_id!r}", id=entry_id, known=entry_ids())


def reproduce(entry_id: str) -> list[Check]:
    entry = get_entry(entry_id)
    checks = [
        Check(entry.id, name, _s(expected), _s(computed), provenance)
        for name, expected, computed, provenance in entry.run(entry.document())
    ]
    failed = [c.name for c in checks if not c.passed]
    log.info("registry_entry", id=entry.id, checks=len(checks), failed=failed)
    return checks


def reproduce_all() -> list[Check]:
    """Every entry in registry order."""
    return [check for entry in REGISTRY for check in reproduce(entry.id)]


# ── Document runner ─────────────────────────────────────────────────────────


def _run_query(doc: SpecDocument, query) -> dict:
    seq, ideal, target = doc.sequence, doc.ideal, doc.target
    if isinstance(query, MetricQuery):
        piece, j = seq.locate(query.n)
        coupling = piece.coupling_at(query.n, target, j)
        result = kyfan_between(coupling.x, target, coupling)
        return {"n": query.n, "law": law_at(seq, query.n).to_json(), **result.to_json()}
    if isinstance(query, LimitQuery):
        verdict = check_rough_limit(seq, target, query.r, ideal)
        out = verdict.to_json()
        if verdict.witness is not None:
            out["witness_replays"] = replay_witness(seq, target, query.r, ideal, verdict.witness)
        if query.eps and query.delta:
            out["grid"] = [
                {"eps": str(e), "delta": str(d),
                 "answer": ideal_member(ideal, solution_set(seq, target, query.r, e, d, EXCEED)).answer}
                for e in query.eps for d in query.delta
            ]
        return out
    if isinstance(query, ClusterQuery):
        return classify_cluster(seq, target, query.r, ideal).to_json()
    if isinstance(query, KyFanQuery):
        return kyfan_agreement_probe(seq, target, ideal, settings.pointwise_horizon).to_json()
    if isinstance(query, DiameterQuery):
        return diameter_probe(seq, list(query.members), query.r, ideal).to_json()
    if isinstance(query, SandwichQuery):
        candidates = [
            (c.law, diagonal_coupling(query.star) if c.diagonal else product_coupling(query.star, c.law))
            for c in query.candidates
        ]
        return {"rows": [row.to_json() for row in sandwich_probe(seq, query.star, query.r, ideal, candidates)]}
    raise TypeError(f"unsupported query {query!r}")


def run_document(doc: SpecDocument) -> dict:
    """Execute every query. Probe errors are reported per query; `fatal` flags a broken implication."""
    results, fatal = [], False
    for query in doc.queries:
        entry = {"query": query_text(query)}
        try:
            entry["result"] = _run_query(doc, query)
        except FatalInconsistency as exc:
            fatal = True
            entry["error"] = exc.to_dict()
        except RoughLabError as exc:
            entry["error"] = exc.to_dict()
        results.append(entry)
    return {
        "ideal": doc.ideal.to_json(),
        "target": doc.target.to_json(),
        "coupling": doc.coupling,
        "results": results,
        "fatal": fatal,
    }
