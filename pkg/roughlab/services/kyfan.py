"""
Ky Fan metric on finite laws.

rho(X, Y) = inf{eps > 0 : P(d(X, Y) > eps) <= eps}, computed exactly from the law of
d(X, Y). Between consecutive support points the tail P(D > eps) is constant, so the
least feasible eps is found interval by interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from roughlab.errors import InvalidCoupling, NegativeSupport
from roughlab.services.exact_dist import (
    REAL_LINE,
    Coupling,
    FiniteDist,
    distance_law,
    explicit_joint,
    make_dist,
    product_coupling,
)


@dataclass(frozen=True)
class KyFanResult:
    rho: Fraction
    attained_tail: Fraction

    def to_json(self) -> dict:
        return {"rho": str(self.rho), "attained_tail": str(self.attained_tail)}


def kyfan_of_law(law: FiniteDist) -> KyFanResult:
    if law.space != REAL_LINE:
        raise NegativeSupport("distance laws live on the real line")
    negative = [v for v in law.support if v < 0]
    if negative:
        raise NegativeSupport(f"negative distance {negative[0]}", value=negative[0])

    breakpoints = sorted({Fraction(0), *law.support})
    for k, left in enumerate(breakpoints):
        right = breakpoints[k + 1] if k + 1 < len(breakpoints) else None
        tail = law.tail(left)
        candidate = max(left, tail)
        if right is None or candidate < right:
            return KyFanResult(candidate, law.tail(candidate))
    raise AssertionError("the last interval always has an empty tail")


def kyfan_between(x: FiniteDist, y: FiniteDist, coupling: Coupling) -> KyFanResult:
    if coupling.x != x or coupling.y != y:
        raise InvalidCoupling("coupling marginals differ from the given laws")
    return kyfan_of_law(distance_law(coupling))


def kyfan_degenerate(a: Fraction, b: Fraction) -> Fraction:
    """rho between two one-point laws on the real line: min(|a - b|, 1)."""
    return min(abs(a - b), Fraction(1))


# ── Metric-axiom utilities ──────────────────────────────────────────────────


@dataclass(frozen=True)
class TripleJoint:
    """A joint law of (X, Y, Z) on the real line, given by cells (x, y, z, p)."""

    cells: tuple[tuple[Fraction, Fraction, Fraction, Fraction], ...]

    def marginal(self, axis: int) -> FiniteDist:
        return make_dist(REAL_LINE, [(c[axis], c[3]) for c in self.cells])

    def pair(self, first: int, second: int) -> Coupling:
        return explicit_joint(
            self.marginal(first),
            self.marginal(second),
            [(c[first], c[second], c[3]) for c in self.cells],
        )

    def rho(self, first: int, second: int) -> Fraction:
        return kyfan_of_law(distance_law(self.pair(first, second))).rho


def triangle_gap(joint: TripleJoint) -> Fraction:
    """rho(X,Y) + rho(Y,Z) - rho(X,Z); nonnegative when the triangle inequality holds."""
    return joint.rho(0, 1) + joint.rho(1, 2) - joint.rho(0, 2)


def symmetric(coupling: Coupling) -> bool:
    return kyfan_of_law(distance_law(coupling)) == kyfan_of_law(distance_law(coupling.transpose()))


def max_pairwise(members: list[FiniteDist], couplings: dict[tuple[int, int], Coupling] | None = None) -> tuple[Fraction, tuple[int, int] | None]:
    """Largest pairwise rho among the members (product couplings unless declared)."""
    best, where = Fraction(0), None
    for a, b in combinations(range(len(members)), 2):
        coupling = (couplings or {}).get((a, b)) or product_coupling(members[a], members[b])
        rho = kyfan_of_law(distance_law(coupling)).rho
        if where is None or rho > best:
            best, where = rho, (a, b)
    return best, where
