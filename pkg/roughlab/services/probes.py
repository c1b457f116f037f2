"""
Finite probes of the structural theorems about rough limit and cluster-point sets.

Each probe runs the decision procedures of `analysis` on a concrete instance and
checks the implication the theorem asserts. A broken implication is never reported
as a result: it raises FatalInconsistency.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import structlog

from roughlab.errors import (
    FatalInconsistency,
    HypothesisNotEstablished,
    NotConvergentFamily,
    NotIdealAlmostSure,
    UnverifiedMember,
)
from roughlab.services.analysis import (
    NO,
    UNKNOWN,
    YES,
    ClusterReport,
    Verdict,
    check_rough_limit,
    classify_cluster,
    constant_model,
    kyfan_verdict,
)
from roughlab.services.exact_dist import (
    Coupling,
    FiniteDist,
    distance_law,
)
from roughlab.services.ideals import IN, NOT_IN, Ideal, ideal_member
from roughlab.services.index_sets import Complement, IndexSet
from roughlab.services.kyfan import kyfan_between, max_pairwise
from roughlab.services.sequence_model import (
    EXCEED,
    NEAR,
    Pair,
    PieceModel,
    PiecewiseSequence,
    make_sequence,
    solution_set,
)
from roughlab.services.terms import Const, ProbFn

log = structlog.get_logger(__name__)


def _inconsistent(message: str, **details) -> FatalInconsistency:
    log.error("fatal_inconsistency", message=message, **{k: str(v) for k, v in details.items()})
    return FatalInconsistency(message, **details)


# ── Sandwich: closed r-ball of X* ⊆ LIM^r ⊆ ball of radius r ────────────────


@dataclass(frozen=True)
class SandwichRow:
    candidate: FiniteDist
    coupling: str
    inner: bool
    rough_limit: str
    ball: bool
    rho: Fraction

    def to_json(self) -> dict:
        return {
            "candidate": self.candidate.to_json(),
            "coupling": self.coupling,
            "inner": self.inner,
            "rough_limit": self.rough_limit,
            "ball": self.ball,
            "rho": str(self.rho),
        }


def sandwich_probe(seq: PiecewiseSequence, star: FiniteDist, r: Fraction, ideal: Ideal,
                   candidates: list[tuple[FiniteDist, Coupling]]) -> list[SandwichRow]:
    """
    For each candidate Y with a declared coupling to X*: P(d(X*, Y) >= r) = 0,
    membership in the rough limit set (X_n coupled independently with Y), and
    rho(X*, Y) <= r. The first implies the second, the second the third.
    """
    base = check_rough_limit(seq, star, Fraction(0), ideal)
    if base.answer != YES:
        raise HypothesisNotEstablished(
            "the sequence is not shown to converge in probability to the star",
            answer=base.answer,
        )
    rows = []
    for law, coupling in candidates:
        inner = distance_law(coupling).mass_where(lambda d: d >= r) == 0
        verdict = check_rough_limit(seq, law, r, ideal).answer
        rho = kyfan_between(star, law, coupling).rho
        ball = rho <= r
        if inner and verdict == NO:
            raise _inconsistent("inner ball point rejected as rough limit", candidate=law.to_json())
        if verdict == YES and not ball:
            raise _inconsistent("rough limit outside the closed rho-ball", candidate=law.to_json(), rho=rho)
        rows.append(SandwichRow(law, coupling.kind, inner, verdict, ball, rho))
    return rows


# ── Diameter ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class DiameterReport:
    rho: Fraction
    bound: Fraction
    pair: tuple[int, int] | None

    @property
    def attained(self) -> bool:
        return self.pair is not None and self.rho == self.bound

    def to_json(self) -> dict:
        return {
            "max_rho": str(self.rho),
            "bound": str(self.bound),
            "pair": list(self.pair) if self.pair else None,
            "attained": self.attained,
        }


def diameter_probe(seq: PiecewiseSequence, members: list[FiniteDist], r: Fraction, ideal: Ideal,
                   couplings: dict[tuple[int, int], Coupling] | None = None) -> DiameterReport:
    for k, member in enumerate(members):
        answer = check_rough_limit(seq, member, r, ideal).answer
        if answer != YES:
            raise UnverifiedMember(f"member {k} is not a verified rough limit", member=k, answer=answer)
    rho, pair = max_pairwise(members, couplings)
    bound = min(Fraction(1), 2 * r)
    if rho > bound:
        raise _inconsistent("rough limit set wider than min(1, 2r)", rho=rho, bound=bound)
    return DiameterReport(rho, bound, pair)


# ── Ideal-almost-sure equivalence ───────────────────────────────────────────


@dataclass(frozen=True)
class EquivalenceReport:
    limit: tuple[str, str]
    cluster: tuple[tuple[str, str, str], tuple[str, str, str]]

    @property
    def identical(self) -> bool:
        return self.limit[0] == self.limit[1] and self.cluster[0] == self.cluster[1]

    def to_json(self) -> dict:
        return {"limit": list(self.limit), "cluster": [list(c) for c in self.cluster], "identical": self.identical}


def ias_equivalence_probe(seq_x: PiecewiseSequence, seq_y: PiecewiseSequence, ideal: Ideal, y: FiniteDist,
                          r: Fraction, differ_on: IndexSet, horizon: int = 1000) -> EquivalenceReport:
    """Sequences that agree off an ideal set have the same limit and cluster verdicts."""
    membership = ideal_member(ideal, differ_on)
    if membership.answer != IN:
        raise NotIdealAlmostSure("the set where the sequences differ is not shown to be in the ideal",
                                 set=differ_on.text(), answer=membership.answer)
    for n in range(1, horizon + 1):
        if differ_on.contains(n):
            continue
        px, jx = seq_x.locate(n)
        py, jy = seq_y.locate(n)
        if px.coupling_at(n, y, jx) != py.coupling_at(n, y, jy):
            raise NotIdealAlmostSure(f"the sequences differ at n={n} outside the declared set", n=n)
    limits = (check_rough_limit(seq_x, y, r, ideal).answer, check_rough_limit(seq_y, y, r, ideal).answer)
    clusters = (classify_cluster(seq_x, y, r, ideal).answers, classify_cluster(seq_y, y, r, ideal).answers)
    report = EquivalenceReport(limits, clusters)
    if not report.identical:
        raise _inconsistent("ideal-almost-surely equal sequences got different verdicts", report=report.to_json())
    return report


# ── Closedness ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ClosednessReport:
    rhos: tuple[Fraction, ...]
    members: tuple[tuple[str, ClusterReport], ...]
    limit_verdict: str
    limit_report: ClusterReport
    weak_inf_positive: bool
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "rho_to_limit": [str(x) for x in self.rhos],
            "members": [
                {"rough_limit": lim, **rep.to_json()} for lim, rep in self.members
            ],
            "limit": {"rough_limit": self.limit_verdict, **self.limit_report.to_json()},
            "weak_inf_positive": self.weak_inf_positive,
            "notes": list(self.notes),
        }


def closedness_probe(seq: PiecewiseSequence, r: Fraction, ideal: Ideal,
                     family: list[tuple[FiniteDist, Coupling]], z: FiniteDist,
                     expect_weak_failure: bool = False) -> ClosednessReport:
    """
    Y_k -> Z in rho. Rough limit sets and strong cluster sets are closed, so Z inherits
    those memberships from the whole family. The weak cluster set is closed only when
    inf_k delta* > 0; a finite family cannot show an infimum, so the probe treats the
    sups as bounded away from 0 when the last two agree.
    """
    if not family:
        raise NotConvergentFamily("empty family")
    rhos = tuple(kyfan_between(law, z, coupling).rho for law, coupling in family)
    if any(b > a for a, b in zip(rhos, rhos[1:])) or (len(rhos) > 1 and rhos[-1] == rhos[0] != 0):
        raise NotConvergentFamily("rho(Y_k, Z) is not decreasing towards 0", rhos=[str(x) for x in rhos])

    members = tuple(
        (check_rough_limit(seq, law, r, ideal).answer, classify_cluster(seq, law, r, ideal)) for law, _ in family
    )
    z_limit = check_rough_limit(seq, z, r, ideal).answer
    z_report = classify_cluster(seq, z, r, ideal)
    notes = ["closedness is probed on the declared family, not proved"]

    if all(lim == YES for lim, _ in members) and z_limit == NO:
        raise _inconsistent("rough limit set not closed on the declared family")
    if all(rep.strong_cluster.answer == YES for _, rep in members) and z_report.strong_cluster.answer == NO:
        raise _inconsistent("strong cluster set not closed on the declared family")

    sups = [rep.delta_star_sup for _, rep in members]
    weak_all = all(rep.weak_cluster.answer == YES for _, rep in members)
    inf_positive = weak_all and len(sups) >= 2 and sups[-1] == sups[-2] and sups[-1] > 0
    if inf_positive and z_report.weak_cluster.answer == NO:
        raise _inconsistent("weak cluster set not closed although delta* stays bounded away from 0")
    if expect_weak_failure:
        if z_report.weak_cluster.answer != NO:
            raise _inconsistent("expected the limit to fall outside the weak cluster set",
                                answer=z_report.weak_cluster.answer)
        notes.append("weak cluster set not closed: the limit is not a weak cluster point")
    return ClosednessReport(rhos, members, z_limit, z_report, inf_positive, tuple(notes))


# ── Monotonicity in (eps, delta) ────────────────────────────────────────────


@dataclass(frozen=True)
class MonotonicityReport:
    cells: int
    violations: tuple[dict, ...]

    def to_json(self) -> dict:
        return {"cells": self.cells, "violations": list(self.violations)}


def _grid_answers(seq, y, r, ideal, kind, eps_grid, delta_grid) -> dict:
    return {
        (e, d): ideal_member(ideal, solution_set(seq, y, r, e, d, kind)).answer
        for e in eps_grid for d in delta_grid
    }


def monotonicity_probe(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, ideal: Ideal,
                       eps_grid: list[Fraction], delta_grid: list[Fraction]) -> MonotonicityReport:
    """
    Exceedance sets shrink as eps or delta grows; proximity sets shrink as eps
    shrinks or delta grows. Membership in the ideal must follow the inclusions.
    """
    eps_grid, delta_grid = sorted(set(eps_grid)), sorted(set(delta_grid))
    violations = []
    for kind, eps_down in ((EXCEED, False), (NEAR, True)):
        answers = _grid_answers(seq, y, r, ideal, kind, eps_grid, delta_grid)
        for (e1, d1), a1 in answers.items():
            if a1 != IN:
                continue
            for (e2, d2), a2 in answers.items():
                smaller = d2 >= d1 and (e2 <= e1 if eps_down else e2 >= e1)
                if smaller and a2 == NOT_IN:
                    violations.append({"kind": kind, "in_at": [str(e1), str(d1)], "not_in_at": [str(e2), str(d2)]})
    if violations:
        log.error("monotonicity_violation", count=len(violations))
    return MonotonicityReport(2 * len(eps_grid) * len(delta_grid), tuple(violations))


# ── Non-emptiness of the strong cluster set ─────────────────────────────────


@dataclass(frozen=True)
class NonEmptyReport:
    r: Fraction
    tried: tuple[FiniteDist, ...]
    found: FiniteDist | None

    def to_json(self) -> dict:
        return {
            "r": str(self.r),
            "tried": [c.to_json() for c in self.tried],
            "strong_cluster_point": None if self.found is None else self.found.to_json(),
        }


def _constant_law(model: PieceModel) -> FiniteDist | None:
    if model.binomial is not None or not all(isinstance(a.value, Const) for a in model.atoms):
        return None
    if not all(a.prob.is_constant for a in model.atoms):
        return None
    return model.law(1)


def nonempty_probe(seq: PiecewiseSequence, r: Fraction, ideal: Ideal) -> NonEmptyReport:
    """
    Candidates are the laws of the non-ideal pieces whose law does not move with n.
    A candidate is coupled diagonally on its own piece and independently elsewhere.
    """
    tried = []
    for k, piece in enumerate(seq.pieces):
        law = _constant_law(piece)
        if law is None or ideal_member(ideal, piece.index).answer != NOT_IN:
            continue
        tried.append(law)
        diagonal = tuple(Pair(a.value, a.value.at(1), a.prob) for a in piece.atoms)
        pieces = [replace(p, pairs=diagonal if i == k else ()) for i, p in enumerate(seq.pieces)]
        family = seq.family and replace(seq.family, model=replace(seq.family.model, pairs=()))
        coupled = PiecewiseSequence(tuple(pieces), family)
        if classify_cluster(coupled, law, r, ideal).strong_cluster.answer == YES:
            return NonEmptyReport(r, tuple(tried), law)
    return NonEmptyReport(r, tuple(tried), None)


# ── Non-maximality witness ──────────────────────────────────────────────────


@dataclass(frozen=True)
class NonMaximalityReport:
    alpha: Fraction
    beta: Fraction
    strong_cluster: Verdict
    rough_limit: Verdict

    @property
    def witnessed(self) -> bool:
        return self.strong_cluster.answer == YES and self.rough_limit.answer == NO

    def to_json(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "strong_cluster": self.strong_cluster.to_json(),
            "rough_limit": self.rough_limit.to_json(),
            "witnessed": self.witnessed,
        }


def non_maximality_witness(ideal: Ideal, split: IndexSet, y: FiniteDist, z: FiniteDist, coupling: Coupling,
                           beta: Fraction, horizon: int = 1000) -> NonMaximalityReport:
    """
    X_n = Y on `split` and Z off it. When neither side is in the ideal, Y is a strong
    beta-cluster point for every beta, but not a beta-rough limit once beta < rho(Y, Z).
    """
    for side in (split, Complement(split)):
        answer = ideal_member(ideal, side).answer
        if answer != NOT_IN:
            raise HypothesisNotEstablished("both sides of the split must lie outside the ideal",
                                           set=side.text(), answer=answer)
    if coupling.x != y or coupling.y != z:
        raise HypothesisNotEstablished("coupling marginals differ from Y and Z")
    alpha = kyfan_between(y, z, coupling).rho
    if not 0 <= beta < alpha:
        raise HypothesisNotEstablished("need 0 <= beta < rho(Y, Z)", alpha=alpha, beta=beta)
    on = constant_model(split, y)
    on = replace(on, pairs=tuple(Pair(Const(v), v, ProbFn.constant(p)) for v, p in y.atoms))
    off = constant_model(Complement(split), z)
    off = replace(off, pairs=tuple(Pair(Const(b), a, ProbFn.constant(p)) for a, b, p in coupling.table))
    seq = make_sequence([on, off], None, horizon)
    report = NonMaximalityReport(alpha, beta, classify_cluster(seq, y, beta, ideal).strong_cluster,
                                 check_rough_limit(seq, y, beta, ideal))
    if not report.witnessed and UNKNOWN not in (report.strong_cluster.answer, report.rough_limit.answer):
        raise _inconsistent("split sequence did not separate strong cluster points from rough limits")
    return report


# ── Probability criterion vs Ky Fan criterion at r = 0 ──────────────────────


@dataclass(frozen=True)
class AgreementReport:
    probability: Verdict
    kyfan: Verdict

    @property
    def agree(self) -> bool:
        return self.probability.answer == self.kyfan.answer

    def to_json(self) -> dict:
        return {"probability": self.probability.answer, "kyfan": self.kyfan.answer, "agree": self.agree,
                "kyfan_certificate": self.kyfan.certificate}


def kyfan_agreement_probe(seq: PiecewiseSequence, y: FiniteDist, ideal: Ideal,
                          horizon: int = 1000) -> AgreementReport:
    report = AgreementReport(check_rough_limit(seq, y, Fraction(0), ideal), kyfan_verdict(seq, y, ideal, horizon))
    if not report.agree and UNKNOWN not in (report.probability.answer, report.kyfan.answer):
        raise _inconsistent("convergence in probability and rho-convergence disagree")
    return report
