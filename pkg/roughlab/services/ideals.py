"""
Ideals on N and three-valued membership.

Catalog: the finite-set ideal, the density-zero ideal, the summable ideal
(weights 1/n) and Exh(phi) for a catalog submeasure, the last one decided only by
a truncation ladder. In / NotIn answers carry a certificate dict whose "rule"
names the argument; `replay` re-checks it against the set by direct evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from roughlab.services.index_sets import (
    Complement,
    Finite,
    IndexSet,
    PolyImage,
    Powers,
    Shape,
    density_bounds,
    is_finite,
    shape_of,
)

FIN = "fin"
DENSITY = "density"
SUMMABLE = "summable"
EXH = "exh"

IN = "in"
NOT_IN = "not_in"
UNKNOWN = "unknown"

HARMONIC = "harmonic"
DYADIC_BLOCK = "dyadic_block"
SUBMEASURES = (HARMONIC, DYADIC_BLOCK)

# Prefix length used when replaying periodic certificates.
REPLAY_HORIZON = 4096


def submeasure_value(name: str, members: list[int]) -> Fraction:
    """phi(F) for a finite set F given as a list of positive integers."""
    if name == HARMONIC:
        return sum((Fraction(1, n) for n in members), Fraction(0))
    if name == DYADIC_BLOCK:
        blocks: dict[int, int] = {}
        for n in members:
            k = n.bit_length() - 1
            blocks[k] = blocks.get(k, 0) + 1
        return max((Fraction(c, 2**k) for k, c in blocks.items()), default=Fraction(0))
    raise ValueError(f"unknown submeasure {name!r}")


@dataclass(frozen=True)
class Ideal:
    kind: str
    submeasure: str | None = None
    depth: int = 64
    rungs: int = 8
    tolerance: Fraction = Fraction(1, 1000)

    @classmethod
    def fin(cls) -> "Ideal":
        return cls(FIN)

    @classmethod
    def density(cls) -> "Ideal":
        return cls(DENSITY)

    @classmethod
    def summable(cls) -> "Ideal":
        return cls(SUMMABLE)

    @classmethod
    def exh(cls, submeasure: str = HARMONIC, depth: int = 64, rungs: int = 8,
            tolerance: Fraction = Fraction(1, 1000)) -> "Ideal":
        if submeasure not in SUBMEASURES:
            raise ValueError(f"unknown submeasure {submeasure!r}")
        if depth < 1 or rungs < 2 or tolerance <= 0:
            raise ValueError("exh needs depth >= 1, rungs >= 2 and a positive tolerance")
        return cls(EXH, submeasure, depth, rungs, Fraction(tolerance))

    def text(self) -> str:
        if self.kind != EXH:
            return self.kind
        return f"exh {self.submeasure} depth {self.depth} rungs {self.rungs} tol {self.tolerance}"

    def to_json(self) -> dict:
        data = {"kind": self.kind}
        if self.kind == EXH:
            data.update(submeasure=self.submeasure, depth=self.depth, rungs=self.rungs,
                        tolerance=str(self.tolerance))
        return data


@dataclass(frozen=True)
class MembershipVerdict:
    answer: str
    certificate: dict
    shape: Shape | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {"answer": self.answer, "certificate": self.certificate}


def _periodic_cert(shape: Shape) -> dict:
    cert = {
        "modulus": shape.modulus,
        "residue_count": shape.count,
        "thin": [t.text() for t in shape.thin],
    }
    if len(shape.residues) <= 16:
        cert["residues"] = sorted(shape.residues)
        cert["negated"] = shape.negated
    return cert


def _witness_residue(shape: Shape) -> int:
    for r in range(shape.modulus):
        if shape.holds(r):
            return r if r else shape.modulus
    raise ValueError("shape has no residues")


def _thin_sum_bound(t: IndexSet) -> Fraction:
    if isinstance(t, Finite):
        return sum((Fraction(1, n) for n in t.members), Fraction(0))
    if isinstance(t, Powers):
        return Fraction(1, t.scale * (t.base - 1))
    if isinstance(t, PolyImage):
        return Fraction(t.degree, t.scale * (t.degree - 1))
    raise TypeError(f"not a thin base set: {t!r}")


# ── Membership ──────────────────────────────────────────────────────────────


def ideal_member(ideal: Ideal, a: IndexSet) -> MembershipVerdict:
    if ideal.kind == FIN:
        return _fin_member(a)
    if ideal.kind == DENSITY:
        return _density_member(a)
    if ideal.kind == SUMMABLE:
        return _summable_member(a)
    if ideal.kind == EXH:
        return _exh_member(ideal, a)
    raise ValueError(f"unknown ideal kind {ideal.kind!r}")


def dual_filter_member(ideal: Ideal, a: IndexSet) -> MembershipVerdict:
    """Membership of `a` in the dual filter: its complement lies in the ideal."""
    return ideal_member(ideal, Complement(a))


def _fin_member(a: IndexSet) -> MembershipVerdict:
    finite = is_finite(a)
    if finite is True:
        return MembershipVerdict(IN, {"rule": "finite_structure", "set": a.text()})
    if finite is False:
        return MembershipVerdict(NOT_IN, {"rule": "infinite_structure", "set": a.text()})
    return MembershipVerdict(UNKNOWN, {"blocking": "finiteness undecided", "set": a.text()})


def _density_member(a: IndexSet) -> MembershipVerdict:
    shape = shape_of(a)
    if shape is not None:
        if shape.count == 0:
            return MembershipVerdict(IN, {"rule": "density_zero", "density": "0", **_periodic_cert(shape)}, shape)
        return MembershipVerdict(
            NOT_IN,
            {"rule": "positive_density", "density": str(shape.density), **_periodic_cert(shape)},
            shape,
        )
    bounds = density_bounds(a)
    if bounds is None:
        return MembershipVerdict(UNKNOWN, {"blocking": "no density data", "set": a.text()})
    lower, upper = bounds
    if upper == 0:
        return MembershipVerdict(IN, {"rule": "density_zero", "density": "0", "upper": "0"})
    if lower > 0:
        return MembershipVerdict(NOT_IN, {"rule": "positive_lower_density", "lower": str(lower)})
    return MembershipVerdict(
        UNKNOWN, {"blocking": "density interval contains 0", "lower": str(lower), "upper": str(upper)}
    )


def _summable_member(a: IndexSet) -> MembershipVerdict:
    shape = shape_of(a)
    if shape is not None:
        if shape.count == 0:
            bounds = [_thin_sum_bound(t) for t in shape.thin]
            return MembershipVerdict(
                IN,
                {"rule": "convergent_tail", "sum_bound": str(sum(bounds, Fraction(0))),
                 "pieces": [{"set": t.text(), "bound": str(b)} for t, b in zip(shape.thin, bounds)],
                 **_periodic_cert(shape)},
                shape,
            )
        r = _witness_residue(shape)
        return MembershipVerdict(
            NOT_IN,
            {"rule": "harmonic_comparison", "modulus": shape.modulus, "residue": r,
             "comparison": f"contains n = {r} + {shape.modulus}k outside a summable set; "
                           f"sum 1/({shape.modulus}k + {r}) diverges",
             **_periodic_cert(shape)},
            shape,
        )
    if is_finite(a) is True:
        return MembershipVerdict(IN, {"rule": "finite_structure", "set": a.text()})
    bounds = density_bounds(a)
    if bounds is not None and bounds[0] > 0:
        return MembershipVerdict(
            NOT_IN, {"rule": "positive_lower_density", "lower": str(bounds[0]),
                     "comparison": "positive lower density forces a divergent harmonic sum"}
        )
    return MembershipVerdict(UNKNOWN, {"blocking": "no summability certificate", "set": a.text()})


def exh_ladder(ideal: Ideal, a: IndexSet) -> list[tuple[int, Fraction]]:
    """phi(A ∩ (t, t + depth]) for t = depth * 2**i, i < rungs."""
    ladder = []
    for i in range(ideal.rungs):
        t = ideal.depth * 2**i
        window = [n for n in a.members_upto(t + ideal.depth) if n > t]
        ladder.append((t, submeasure_value(ideal.submeasure, window)))
    return ladder


def _exh_member(ideal: Ideal, a: IndexSet) -> MembershipVerdict:
    if is_finite(a) is True:
        return MembershipVerdict(IN, {"rule": "finite_structure", "set": a.text()})
    ladder = exh_ladder(ideal, a)
    values = [v for _, v in ladder]
    shown = [[t, str(v)] for t, v in ladder]
    monotone = all(b <= c for c, b in zip(values, values[1:]))
    if monotone and values[-1] <= ideal.tolerance:
        return MembershipVerdict(
            IN,
            {"rule": "truncation_ladder", "truncation_based": True, "ladder": shown,
             "tolerance": str(ideal.tolerance)},
        )
    return MembershipVerdict(UNKNOWN, {"blocking": "ladder does not certify a vanishing tail",
                                       "ladder": shown})


# ── Certificate replay ──────────────────────────────────────────────────────


def _shape_agrees(a: IndexSet, shape: Shape, horizon: int) -> bool:
    for n in range(1, horizon + 1):
        if a.contains(n) != shape.holds(n) and not any(t.contains(n) for t in shape.thin):
            return False
    return True


def replay(ideal: Ideal, a: IndexSet, verdict: MembershipVerdict, horizon: int = REPLAY_HORIZON) -> bool:
    """Re-check a certificate against direct membership evaluation on a prefix."""
    if verdict.answer == UNKNOWN:
        return True
    rule = verdict.certificate.get("rule")
    if verdict.shape is not None:
        shape = verdict.shape
        if not _shape_agrees(a, shape, max(horizon, min(2 * shape.modulus, 1 << 16))):
            return False
        if rule == "density_zero" or rule == "convergent_tail":
            return shape.count == 0
        if rule == "positive_density":
            return Fraction(verdict.certificate["density"]) == shape.density > 0
        if rule == "harmonic_comparison":
            return shape.holds(verdict.certificate["residue"])
        return False
    if rule == "truncation_ladder":
        shown = [[t, str(v)] for t, v in exh_ladder(ideal, a)]
        return shown == verdict.certificate["ladder"]
    if rule == "finite_structure":
        return is_finite(a) is True
    if rule == "infinite_structure":
        return is_finite(a) is False
    if rule == "positive_lower_density":
        bounds = density_bounds(a)
        return bounds is not None and bounds[0] == Fraction(verdict.certificate["lower"]) > 0
    if rule == "density_zero":
        bounds = density_bounds(a)
        return bounds is not None and bounds[1] == 0
    return False
