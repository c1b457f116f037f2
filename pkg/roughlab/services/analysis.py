"""
Rough ideal convergence in probability and rough cluster points.

A sequence is split into regions: its plain pieces, the family members below the
index where their limiting behaviour stabilises, and one region for all remaining
members. Regions in the ideal never matter; every other region is judged by its
limiting mass profile, i.e. by c_plus = lim_n P(d(X_n, Y) <= r) along the region.
Probability terms do not depend on j, so the tail region resolves uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import structlog

from roughlab.errors import OutsideValidity
from roughlab.services.exact_dist import REAL_LINE, FiniteDist, make_dist
from roughlab.services.ideals import (
    DENSITY,
    IN,
    NOT_IN,
    UNKNOWN as MEMBERSHIP_UNKNOWN,
    Ideal,
    MembershipVerdict,
    ideal_member,
)
from roughlab.services.index_sets import (
    FamilyUnion,
    IndexSet,
    tail_union_upper_density,
)
from roughlab.services.kyfan import kyfan_between, kyfan_of_law
from roughlab.services.sequence_model import (
    EXCEED,
    NEAR,
    Atom,
    FamilyPiece,
    MassProfile,
    PieceModel,
    PiecewiseSequence,
    family_limit_profile,
    limiting_mass_profile,
    make_sequence,
    plus_stable_index,
    solution_set,
)
from roughlab.services.terms import INF, ONE, Const, IndexedConst, ProbFn, ValueFn, indexed_exceeds_from

log = structlog.get_logger(__name__)

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    answer: str
    certificate: dict = field(default_factory=dict)
    witness: dict | None = None

    def to_json(self) -> dict:
        data = {"answer": self.answer, "certificate": self.certificate}
        if self.witness is not None:
            data["witness"] = self.witness
        return data


@dataclass(frozen=True)
class ClusterReport:
    limit_point: Verdict
    strong_cluster: Verdict
    weak_cluster: Verdict
    delta_star_sup: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "limit_point": self.limit_point.to_json(),
            "strong_cluster": self.strong_cluster.to_json(),
            "weak_cluster": self.weak_cluster.to_json(),
            "delta_star_sup": None if self.delta_star_sup is None else str(self.delta_star_sup),
        }

    @property
    def answers(self) -> tuple[str, str, str]:
        return self.limit_point.answer, self.strong_cluster.answer, self.weak_cluster.answer


# ── Regions ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Region:
    label: str
    index: IndexSet
    model: PieceModel
    j: int | None
    membership: MembershipVerdict
    profile: MassProfile
    tail: bool = False

    def describe(self) -> dict:
        data = {"piece": self.label, "membership": self.membership.answer, "c_plus": str(self.profile.c_plus)}
        if self.j is not None:
            data["j"] = self.j
            data["all_later_members"] = self.tail
        return data


@dataclass(frozen=True)
class Regions:
    items: tuple[Region, ...]
    family_limit: MassProfile | None = None
    tail_membership: MembershipVerdict | None = None
    stable_index: int | None = None


def regions(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, ideal: Ideal) -> Regions:
    items = [
        Region(p.label, p.index, p, None, ideal_member(ideal, p.index), limiting_mass_profile(p, y, r))
        for p in seq.pieces
    ]
    if seq.family is None:
        return Regions(tuple(items))
    fam, model = seq.family.family, seq.family.model
    stable = plus_stable_index(model, y, r)
    for j in range(1, stable):
        member = fam.member(j)
        items.append(Region(f"member {j}", member, model, j, ideal_member(ideal, member),
                            limiting_mass_profile(model, y, r, j)))
    # Members are dyadic classes minus a density-zero set; membership is uniform in j.
    tail_membership = ideal_member(ideal, fam.member(stable))
    later = FamilyUnion(fam, stable)
    items.append(Region(f"members >= {stable}", later, model, stable,
                        _union_membership(ideal, later, tail_membership),
                        limiting_mass_profile(model, y, r, stable), tail=True))
    return Regions(tuple(items), family_limit_profile(model, y, r), tail_membership, stable)


def _union_membership(ideal: Ideal, later: FamilyUnion, member: MembershipVerdict) -> MembershipVerdict:
    """The later members are judged as one set; one member outside the ideal keeps the union outside."""
    verdict = ideal_member(ideal, later)
    if verdict.answer == MEMBERSHIP_UNKNOWN and member.answer == NOT_IN:
        return MembershipVerdict(NOT_IN, {"rule": "contains_non_member", "set": later.text(),
                                          "member": member.certificate})
    return verdict


def _witness_eps(profile: MassProfile) -> Fraction:
    points = profile.breakpoints
    return min(points) / 2 if points else Fraction(1)


# ── Rough convergence ───────────────────────────────────────────────────────


def check_rough_limit(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, ideal: Ideal) -> Verdict:
    """Is Y a rough I-limit in probability of degree r?"""
    if r < 0:
        raise OutsideValidity("roughness degree must be >= 0", r=r)
    parts = regions(seq, y, r, ideal)
    blocking = []
    for region in parts.items:
        if region.profile.c_plus == 1 or region.membership.answer == IN:
            continue
        if region.membership.answer == NOT_IN:
            eps = _witness_eps(region.profile)
            excess = region.profile.exceedance(eps)
            witness = {
                "eps": str(eps),
                "delta": str(excess / 2),
                "piece": region.label,
                "j": region.j,
                "limiting_exceedance": str(excess),
                "not_in_certificate": region.membership.certificate,
            }
            return Verdict(NO, {"rule": "positive_limiting_exceedance", "regions": [region.describe()]}, witness)
        blocking.append(region.describe())
    if blocking:
        log.info("rough_limit_unknown", r=str(r), ideal=ideal.text(), blocking=len(blocking))
        return Verdict(UNKNOWN, {"blocking": blocking})
    return Verdict(YES, {"rule": "limiting_exceedance_vanishes", "regions": [p.describe() for p in parts.items]})


def replay_witness(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, ideal: Ideal, witness: dict,
                   cap: int = 2**40) -> bool:
    """Rebuild {n : P(d > r + eps) > delta} and confirm it is not in the ideal."""
    eps, delta = Fraction(witness["eps"]), Fraction(witness["delta"])
    bad = solution_set(seq, y, r, eps, delta, EXCEED, cap)
    return ideal_member(ideal, bad).answer == NOT_IN


# ── Cluster points ──────────────────────────────────────────────────────────


def classify_cluster(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, ideal: Ideal) -> ClusterReport:
    if r < 0:
        raise OutsideValidity("roughness degree must be >= 0", r=r)
    parts = regions(seq, y, r, ideal)
    outside = [g for g in parts.items if g.membership.answer == NOT_IN]
    undecided = [g for g in parts.items if g.membership.answer == MEMBERSHIP_UNKNOWN]
    limit_c = parts.family_limit.c_plus if parts.family_limit is not None else None
    tail_answer = parts.tail_membership.answer if parts.tail_membership is not None else None

    # strong
    full = [g for g in outside if g.profile.c_plus == 1]
    if full:
        strong = Verdict(YES, {"rule": "single_piece", "region": full[0].describe()})
    elif limit_c == 1 and tail_answer == NOT_IN:
        strong = Verdict(YES, {"rule": "family_limit", "c_plus_limit": "1",
                               "members_from": parts.stable_index})
    elif any(g.profile.c_plus == 1 for g in undecided) or (limit_c == 1 and tail_answer == MEMBERSHIP_UNKNOWN):
        strong = Verdict(UNKNOWN, {"blocking": "membership undecided for a full-mass region"})
    else:
        strong = Verdict(NO, {"rule": "no_full_mass_region",
                              "regions": [g.describe() for g in outside]})

    # weak
    values = [g.profile.c_plus for g in outside]
    if limit_c is not None and tail_answer == NOT_IN:
        values.append(limit_c)
    best = max(values, default=Fraction(0))
    hidden = [g for g in undecided if g.profile.c_plus > best]
    if limit_c is not None and tail_answer == MEMBERSHIP_UNKNOWN and limit_c > best:
        hidden.append(None)
    if best > 0:
        cert = {"rule": "positive_mass_region", "delta_star_sup": str(best)}
        if hidden:
            cert["sup_is_lower_bound"] = True
        weak = Verdict(YES, cert)
        sup = best
    elif hidden:
        weak, sup = Verdict(UNKNOWN, {"blocking": "membership undecided for a positive-mass region"}), None
    else:
        weak, sup = Verdict(NO, {"rule": "no_positive_mass_region"}), None

    # limit point
    if full:
        limit = Verdict(YES, {"rule": "single_piece", "region": full[0].describe()})
    elif strong.answer == NO:
        limit = Verdict(NO, {"rule": "not_a_strong_cluster_point"})
    elif _vanishing_tail_applies(parts, ideal, undecided):
        bounds = [
            {"members_after": k, "upper_density": tail_union_upper_density(seq.family.family, k).to_json()}
            for k in (parts.stable_index, parts.stable_index + 4, parts.stable_index + 16)
        ]
        limit = Verdict(NO, {"rule": "vanishing_tail_density", "tail_bounds": bounds})
    else:
        limit = Verdict(UNKNOWN, {"blocking": "family assembly not decided"})

    report = ClusterReport(limit, strong, weak, sup)
    if UNKNOWN in report.answers:
        log.info("cluster_unknown", r=str(r), ideal=ideal.text(), answers=report.answers)
    return report


def _vanishing_tail_applies(parts: Regions, ideal: Ideal, undecided: list[Region]) -> bool:
    """
    Under the density ideal, a set along which X_n converges meets each region with
    c_plus < 1 in a finite set; if every region is like that, the set lies in the
    ideal members plus finite pieces of members j > k for every k, so its upper
    density is below every family tail bound.
    """
    if ideal.kind != DENSITY or parts.family_limit is None or undecided:
        return False
    return all(g.profile.c_plus < 1 or g.membership.answer == IN for g in parts.items)


def replay_weak(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, ideal: Ideal, delta_star: Fraction,
                eps_grid: list[Fraction], cap: int = 2**40) -> bool:
    """For every eps in the grid, {n : P(d < r + eps) > delta_star} is outside the ideal."""
    return all(
        ideal_member(ideal, solution_set(seq, y, r, eps, delta_star, NEAR, cap)).answer == NOT_IN
        for eps in eps_grid
    )


# ── Ky Fan based convergence ────────────────────────────────────────────────


def _limit_distance_law(profile: MassProfile) -> FiniteDist:
    atoms = [(Fraction(2) if c.limit == INF else c.limit, c.mass) for c in profile.cells if c.mass]
    return make_dist(REAL_LINE, atoms)


def kyfan_verdict(seq: PiecewiseSequence, y: FiniteDist, ideal: Ideal, horizon: int = 1000,
                  trace: int = 8) -> Verdict:
    """
    I-convergence of rho(X_n, Y) to 0. The limit of rho along a region is the Ky Fan
    value of the limiting distance law; escaped mass sits at distance 2.
    """
    parts = regions(seq, y, Fraction(0), ideal)
    rows, blocking, failing = [], [], None
    for region in parts.items:
        rho_limit = kyfan_of_law(_limit_distance_law(region.profile)).rho
        sample = region.index.members_upto(horizon)[-trace:]
        evidence = []
        for n in sample:
            j = seq.family.family.index_of(n) if region.j is not None else None
            coupling = region.model.coupling_at(n, y, j)
            evidence.append([n, str(kyfan_between(coupling.x, y, coupling).rho)])
        rows.append({**region.describe(), "rho_limit": str(rho_limit), "rho_trace": evidence})
        if rho_limit == 0 or region.membership.answer == IN:
            continue
        if region.membership.answer == NOT_IN:
            failing = failing or rows[-1]
        else:
            blocking.append(rows[-1])
    if failing is not None:
        return Verdict(NO, {"rule": "rho_limit_positive", "regions": rows}, {"region": failing})
    if blocking:
        return Verdict(UNKNOWN, {"blocking": blocking})
    return Verdict(YES, {"rule": "rho_limit_zero", "regions": rows})


# ── Deterministic sequences ─────────────────────────────────────────────────


def associated_sequence(pieces: list[tuple[IndexSet, ValueFn]],
                        family: tuple[FamilyPiece, ValueFn] | None = None,
                        horizon: int = 10_000) -> PiecewiseSequence:
    """Lift a deterministic sequence to one-point laws."""
    models = [PieceModel(index, (Atom(value, ONE),)) for index, value in pieces]
    fam = None
    if family is not None:
        fam = FamilyPiece(family[0].family, PieceModel(None, (Atom(family[1], ONE),)))
    return make_sequence(models, fam, horizon)


def rough_ideal_converges(pieces: list[tuple[IndexSet, ValueFn]], x_star: Fraction, r: Fraction,
                          ideal: Ideal, family: tuple[FamilyPiece, ValueFn] | None = None) -> Verdict:
    """Deterministic rough I-convergence: every non-ideal region has limsup |x_n - x*| <= r."""
    checks: list[tuple[str, IndexSet, Fraction | float]] = []
    for index, value in pieces:
        lim = value.limit()
        checks.append((index.text(), index, INF if lim in (INF, -INF) else abs(lim - x_star)))
    if family is not None:
        fam, value = family[0].family, family[1]
        if isinstance(value, IndexedConst):
            _, high = indexed_exceeds_from(value, x_star + r)
            _, low = indexed_exceeds_from(value.scaled(Fraction(-1)), -(x_star - r))
            stable = max(high, low)
            for j in range(1, stable):
                checks.append((f"member {j}", fam.member(j), abs(value.value(j) - x_star)))
            checks.append((f"members >= {stable}", fam.member(stable), abs(value.value(stable) - x_star)))
        else:
            lim = value.limit()
            checks.append(("members", fam.member(1), INF if lim in (INF, -INF) else abs(lim - x_star)))
    blocking = []
    for label, index, distance in checks:
        if distance <= r:
            continue
        answer = ideal_member(ideal, index).answer
        if answer == NOT_IN:
            return Verdict(NO, {"rule": "limit_distance_exceeds_r"}, {"piece": label, "distance": str(distance)})
        if answer == MEMBERSHIP_UNKNOWN:
            blocking.append(label)
    if blocking:
        return Verdict(UNKNOWN, {"blocking": blocking})
    return Verdict(YES, {"rule": "limit_distance_within_r"})


def constant_model(index: IndexSet | None, law: FiniteDist) -> PieceModel:
    return PieceModel(index, tuple(Atom(Const(v), ProbFn.constant(p)) for v, p in law.atoms))
