"""
Symbolic sequences of random variables.

A sequence is a finite list of pieces, each an index set with atoms (value term,
probability term), plus at most one dyadic family whose member j carries a piece
model that may depend on j. Pieces may instead carry the law of a sum of n
Bernoulli(p) variables, or explicit joint cells with the target.

Couplings to a target Y are either independent or given by the piece's joint cells;
nothing here invents a coupling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor
from typing import Iterable

from roughlab.errors import (
    CoverageError,
    GrammarViolation,
    InvalidCoupling,
    MassNotOne,
    OutsideValidity,
)
from roughlab.services.exact_dist import (
    REAL_LINE,
    Coupling,
    FiniteDist,
    distance_law,
    explicit_joint,
    make_dist,
    product_coupling,
)
from roughlab.services.index_sets import (
    FamilyUnion,
    IndexFamily,
    IndexSet,
    Intersection,
    TailSolution,
    Union,
)
from roughlab.services.terms import (
    INF,
    SCAN_LIMIT,
    IndexedConst,
    ONE,
    ProbFn,
    ValueFn,
    ZERO,
    exceeds_from,
    indexed_exceeds_from,
    threshold_solution,
)

EXCEED = "exceed"
NEAR = "near"


@dataclass(frozen=True)
class Atom:
    value: ValueFn
    prob: ProbFn


@dataclass(frozen=True)
class Pair:
    """Joint cell: the atom with this value meets target value y with this probability."""

    value: ValueFn
    y: Fraction
    prob: ProbFn


def _merge_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    merged: dict[ValueFn, ProbFn] = {}
    for atom in atoms:
        merged[atom.value] = merged.get(atom.value, ZERO) + atom.prob
    return tuple(sorted((Atom(v, p) for v, p in merged.items()), key=lambda a: a.value.sort_key()))


@dataclass(frozen=True)
class PieceModel:
    index: IndexSet | None
    atoms: tuple[Atom, ...] = ()
    binomial: Fraction | None = None
    pairs: tuple[Pair, ...] = ()

    def __post_init__(self) -> None:
        if self.binomial is not None:
            if self.atoms or self.pairs:
                raise GrammarViolation("a binomial piece carries no explicit atoms")
            if not 0 < self.binomial < 1:
                raise OutsideValidity("binomial parameter must lie in (0, 1)", p=self.binomial)
            return
        object.__setattr__(self, "atoms", _merge_atoms(self.atoms))
        total = sum((a.prob for a in self.atoms), ZERO)
        if total != ONE:
            raise MassNotOne(total, piece=self.label)
        if self.pairs:
            cells = tuple(sorted(self.pairs, key=lambda c: (c.value.sort_key(), c.y)))
            object.__setattr__(self, "pairs", cells)
            for atom in self.atoms:
                joint = sum((c.prob for c in self.pairs if c.value == atom.value), ZERO)
                if joint != atom.prob:
                    raise InvalidCoupling(
                        f"joint cells of atom {atom.value} sum to {joint}, not {atom.prob}",
                        atom=atom.value.text(),
                    )
            strays = [c for c in self.pairs if all(c.value != a.value for a in self.atoms)]
            if strays:
                raise InvalidCoupling(f"joint cell for unknown atom {strays[0].value}")

    @property
    def label(self) -> str:
        return "family" if self.index is None else self.index.text()

    @property
    def uses_j(self) -> bool:
        return any(a.value.uses_j for a in self.atoms)

    @property
    def validity_index(self) -> int:
        if self.binomial is not None:
            return 1
        probs = [a.prob for a in self.atoms] + [c.prob for c in self.pairs]
        return max((p.validity_index() for p in probs), default=1)

    def law(self, n: int, j: int | None = None) -> FiniteDist:
        if self.binomial is not None:
            p = self.binomial
            return make_dist(REAL_LINE, [(k, comb(n, k) * p**k * (1 - p) ** (n - k)) for k in range(n + 1)])
        masses = [(a.value.at(n, j), a.prob.at(n)) for a in self.atoms]
        bad = [m for _, m in masses if not 0 <= m <= 1]
        if bad:
            raise OutsideValidity(f"probability {bad[0]} at n={n} outside [0, 1]", n=n, piece=self.label)
        return make_dist(REAL_LINE, masses)

    def coupling_at(self, n: int, y: FiniteDist, j: int | None = None) -> Coupling:
        law = self.law(n, j)
        if not self.pairs:
            return product_coupling(law, y)
        return explicit_joint(law, y, [(c.value.at(n, j), c.y, c.prob.at(n)) for c in self.pairs])

    def cells(self, y: FiniteDist) -> tuple[Pair, ...]:
        """Symbolic joint cells against the target (binomial pieces have none)."""
        if self.binomial is not None:
            return ()
        if not self.pairs:
            return tuple(Pair(a.value, v, a.prob * q) for a in self.atoms for v, q in y.atoms)
        for value in {c.y for c in self.pairs} | set(y.support):
            mass = sum((c.prob for c in self.pairs if c.y == value), ZERO)
            if mass != ProbFn.constant(y.prob(value)):
                raise InvalidCoupling(f"joint cells give target mass {mass} at {value}, not {y.prob(value)}")
        return self.pairs


@dataclass(frozen=True)
class FamilyPiece:
    family: IndexFamily
    model: PieceModel


@dataclass(frozen=True)
class PiecewiseSequence:
    pieces: tuple[PieceModel, ...]
    family: FamilyPiece | None = None

    def locate(self, n: int) -> tuple[PieceModel, int | None]:
        for piece in self.pieces:
            if piece.index.contains(n):
                return piece, None
        if self.family is not None:
            j = self.family.family.index_of(n)
            if j is not None:
                return self.family.model, j
        raise CoverageError(f"index {n} lies in no piece", n=n)

    def piece_sets(self) -> list[IndexSet]:
        return [p.index for p in self.pieces]


def make_sequence(pieces: Iterable[PieceModel], family: FamilyPiece | None = None,
                  horizon: int = 10_000) -> PiecewiseSequence:
    """Build and validate: coverage up to `horizon`, family densities, early validity."""
    pieces = tuple(pieces)
    if any(p.index is None for p in pieces):
        raise CoverageError("a plain piece needs an index set")
    if any(p.uses_j for p in pieces):
        raise CoverageError("family parameter j used outside a family")
    seq = PiecewiseSequence(pieces, family)
    if family is not None:
        family.family.tail_density(0)
    check_coverage(seq, horizon)
    for piece in pieces:
        for n in piece.index.members_upto(piece.validity_index - 1):
            piece.law(n)
    if family is not None:
        for n in range(1, family.model.validity_index):
            j = family.family.index_of(n)
            if j is not None:
                family.model.law(n, j)
    return seq


def check_coverage(seq: PiecewiseSequence, horizon: int) -> None:
    for n in range(1, horizon + 1):
        hits = [p.label for p in seq.pieces if p.index.contains(n)]
        if seq.family is not None and seq.family.family.index_of(n) is not None:
            hits.append("family")
        if len(hits) != 1:
            what = "no piece" if not hits else "overlapping pieces " + ", ".join(hits)
            raise CoverageError(f"index {n} lies in {what}", n=n, pieces=hits)


def law_at(seq: PiecewiseSequence, n: int) -> FiniteDist:
    """Exact law of X_n; OutsideValidity when the probability terms leave [0, 1] at n."""
    piece, j = seq.locate(n)
    return piece.law(n, j)


# ── Pointwise quantities ────────────────────────────────────────────────────


def exceedance_at(piece: PieceModel, y: FiniteDist, r: Fraction, eps: Fraction, n: int,
                  j: int | None = None) -> Fraction:
    """P(d(X_n, Y) > r + eps), computed from the exact law at n."""
    return distance_law(piece.coupling_at(n, y, j)).tail(r + eps)


def proximity_at(piece: PieceModel, y: FiniteDist, r: Fraction, eps: Fraction, n: int,
                 j: int | None = None) -> Fraction:
    """P(d(X_n, Y) < r + eps)."""
    t = r + eps
    return distance_law(piece.coupling_at(n, y, j)).mass_where(lambda d: d < t)


# ── Limiting profile ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class LimitCell:
    limit: Fraction | float
    approach: int   # +1 from above, -1 from below, 0 eventually constant
    mass: Fraction


def _distance_limit(value: ValueFn, y: Fraction, j: int | None) -> tuple[Fraction | float, int]:
    trend = value.trend()
    lim = value.limit(j)
    if lim in (INF, -INF):
        return INF, 0
    if trend == 0:
        return abs(lim - y), 0
    if lim == y:
        return Fraction(0), 1
    if lim > y:
        return lim - y, 1 if trend < 0 else -1
    return y - lim, -1 if trend < 0 else 1


@dataclass(frozen=True)
class MassProfile:
    r: Fraction
    cells: tuple[LimitCell, ...]

    @property
    def c_plus(self) -> Fraction:
        return sum((c.mass for c in self.cells if c.limit <= self.r), Fraction(0))

    def c(self, eps: Fraction) -> Fraction:
        """lim_n P(d < r + eps)."""
        t = self.r + eps
        return sum(
            (c.mass for c in self.cells if c.limit < t or (c.limit == t and c.approach < 0)),
            Fraction(0),
        )

    def exceedance(self, eps: Fraction) -> Fraction:
        """lim_n P(d > r + eps)."""
        t = self.r + eps
        return sum(
            (c.mass for c in self.cells if c.limit > t or (c.limit == t and c.approach > 0)),
            Fraction(0),
        )

    @property
    def breakpoints(self) -> list[Fraction]:
        """The eps values where c(eps) may jump: L - r for finite limits L > r."""
        return sorted({c.limit - self.r for c in self.cells if c.limit != INF and c.limit > self.r and c.mass})

    @property
    def escaped(self) -> Fraction:
        return sum((c.mass for c in self.cells if c.limit == INF), Fraction(0))

    def to_json(self) -> dict:
        return {
            "r": str(self.r),
            "c_plus": str(self.c_plus),
            "cells": [
                {"limit": "inf" if c.limit == INF else str(c.limit), "approach": c.approach, "mass": str(c.mass)}
                for c in self.cells if c.mass
            ],
        }


def limiting_mass_profile(piece: PieceModel, y: FiniteDist, r: Fraction,
                          j: int | None = None) -> MassProfile:
    if piece.binomial is not None:
        return MassProfile(r, (LimitCell(INF, 0, Fraction(1)),))
    cells = []
    for cell in piece.cells(y):
        limit, approach = _distance_limit(cell.value, cell.y, j)
        cells.append(LimitCell(limit, approach, cell.prob.limit))
    return MassProfile(r, tuple(cells))


def family_limit_profile(piece: PieceModel, y: FiniteDist, r: Fraction) -> MassProfile:
    """Profile with j -> infinity taken after n -> infinity (indexed values at their j-limit)."""
    cells = []
    for cell in piece.cells(y):
        if isinstance(cell.value, IndexedConst):
            lim = cell.value.limit_in_j()
            limit = INF if lim in (INF, -INF) else abs(lim - cell.y)
            cells.append(LimitCell(limit, 0, cell.prob.limit))
        else:
            limit, approach = _distance_limit(cell.value, cell.y, None)
            cells.append(LimitCell(limit, approach, cell.prob.limit))
    return MassProfile(r, tuple(cells))


# ── Symbolic exceedance ─────────────────────────────────────────────────────


def _cell_predicate(value: ValueFn, y: Fraction, t: Fraction, kind: str, j: int | None,
                    cap: int) -> tuple[bool, int]:
    """Eventual truth of d > t (EXCEED) or d < t (NEAR) and the index it holds from."""
    above, n_above = exceeds_from(value, y + t, j, cap)
    below, n_below = exceeds_from(value.scaled(Fraction(-1)), -(y - t), j, cap)
    if kind == EXCEED:
        return above or below, max(n_above, n_below)
    not_high, n1 = exceeds_from(value.scaled(Fraction(-1)), -(y + t), j, cap)
    not_low, n2 = exceeds_from(value, y - t, j, cap)
    return not_high and not_low, max(n1, n2)


def _indexed_predicate(value: IndexedConst, y: Fraction, t: Fraction, kind: str) -> tuple[bool, int]:
    neg = value.scaled(Fraction(-1))
    if kind == EXCEED:
        above, j1 = indexed_exceeds_from(value, y + t)
        below, j2 = indexed_exceeds_from(neg, -(y - t))
        return above or below, max(j1, j2)
    not_high, j1 = indexed_exceeds_from(neg, -(y + t))
    not_low, j2 = indexed_exceeds_from(value, y - t)
    return not_high and not_low, max(j1, j2)


@dataclass(frozen=True)
class Exceedance:
    """P(d(X_n, Y) > t) as a ProbFn for n >= resolved_from (None for binomial pieces)."""

    fn: ProbFn | None
    resolved_from: int
    limit: Fraction


def threshold_fn(piece: PieceModel, y: FiniteDist, t: Fraction, kind: str,
                 j: int | None = None, cap: int = 2**40) -> Exceedance:
    if piece.binomial is not None:
        return Exceedance(None, 1, Fraction(1) if kind == EXCEED else Fraction(0))
    total, start = ZERO, piece.validity_index
    for cell in piece.cells(y):
        holds, n0 = _cell_predicate(cell.value, cell.y, t, kind, j, cap)
        start = max(start, n0)
        if holds:
            total = total + cell.prob
    return Exceedance(total, start, total.limit)


def exceedance_fn(piece: PieceModel, y: FiniteDist, r: Fraction, eps: Fraction,
                  j: int | None = None, cap: int = 2**40) -> Exceedance:
    if eps <= 0:
        raise OutsideValidity("exceedance needs eps > 0", eps=eps)
    return threshold_fn(piece, y, r + eps, EXCEED, j, cap)


def family_stable_index(piece: PieceModel, y: FiniteDist, t: Fraction, kind: str) -> int:
    """Least J such that every cell predicate d > t / d < t is the same for all j >= J."""
    start = 1
    for cell in piece.cells(y):
        if isinstance(cell.value, IndexedConst):
            start = max(start, _indexed_predicate(cell.value, cell.y, t, kind)[1])
    return start


def plus_stable_index(piece: PieceModel, y: FiniteDist, r: Fraction) -> int:
    """Least J such that the set of cells with limit distance <= r is the same for all j >= J."""
    return family_stable_index(piece, y, r, EXCEED)


# ── Index sets of exceedance / proximity ────────────────────────────────────


def _binomial_low_tail_index(p: Fraction, s: int, level: Fraction) -> int:
    """An index past which P(S_n <= s) <= level for S_n ~ Binomial(n, p)."""
    if s < 0:
        return 1
    q = 1 - p
    start = s + 1
    while (1 + Fraction(1, start)) ** s * q >= 1:
        start += 1

    def bound(n: int) -> Fraction:
        return (s + 1) * Fraction(n) ** s * q ** (n - s)

    hi = start
    while bound(hi) > level:
        hi *= 2
        if hi > SCAN_LIMIT:
            raise OutsideValidity("binomial crossing beyond scan limit", p=p)
    lo = max(start, hi // 2)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) <= level:
            hi = mid
        else:
            lo = mid
    return hi


def _piece_solution(piece: PieceModel, region: IndexSet, y: FiniteDist, r: Fraction, eps: Fraction,
                    delta: Fraction, kind: str, j: int | None, cap: int,
                    family: IndexFamily | None = None) -> IndexSet:
    t = r + eps

    def pointwise(n: int) -> Fraction:
        jn = family.index_of(n) if family is not None else j
        if kind == EXCEED:
            return exceedance_at(piece, y, r, eps, n, jn)
        return proximity_at(piece, y, r, eps, n, jn)

    if piece.binomial is not None:
        s = floor(max(y.support) + t)
        if kind == EXCEED:
            if delta >= 1:
                return Intersection((region, TailSolution(False, 1)))
            eventual, level = True, (1 - delta) / 2
        else:
            eventual, level = False, delta
        bound = _binomial_low_tail_index(piece.binomial, s, level)
    else:
        ex = threshold_fn(piece, y, t, kind, j, cap)
        solved = threshold_solution(ex.fn, ">", delta)
        eventual = solved.eventually_in
        bound = max(ex.resolved_from, solved.n0)

    n0 = bound
    while n0 > 1 and (not region.contains(n0 - 1) or (pointwise(n0 - 1) > delta) == eventual):
        n0 -= 1
    exceptions = frozenset(n for n in range(1, n0) if region.contains(n) and pointwise(n) > delta)
    return Intersection((region, TailSolution(eventual, n0, exceptions)))


def solution_set(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, eps: Fraction, delta: Fraction,
                 kind: str = EXCEED, cap: int = 2**40) -> IndexSet:
    """
    {n : P(d(X_n, Y) > r + eps) > delta} (EXCEED) or {n : P(d(X_n, Y) < r + eps) > delta} (NEAR)
    as an exact IndexSet. Needs delta > 0.
    """
    if delta <= 0:
        raise OutsideValidity("solution sets need delta > 0", delta=delta)
    parts: list[IndexSet] = [
        _piece_solution(piece, piece.index, y, r, eps, delta, kind, None, cap) for piece in seq.pieces
    ]
    if seq.family is not None:
        fam, model = seq.family.family, seq.family.model
        stable = family_stable_index(model, y, r + eps, kind)
        for j in range(1, stable):
            parts.append(_piece_solution(model, fam.member(j), y, r, eps, delta, kind, j, cap))
        parts.append(
            _piece_solution(model, FamilyUnion(fam, stable), y, r, eps, delta, kind, stable, cap, fam)
        )
    return parts[0] if len(parts) == 1 else Union(tuple(parts))


def pointwise_exceedance(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, eps: Fraction, n: int) -> Fraction:
    piece, j = seq.locate(n)
    return exceedance_at(piece, y, r, eps, n, j)


def symbolic_exceedance(seq: PiecewiseSequence, y: FiniteDist, r: Fraction, eps: Fraction, n: int,
                        cap: int = 2**40) -> Fraction | None:
    """The ProbFn value at n when n is past the piece's resolution index, else None."""
    piece, j = seq.locate(n)
    ex = exceedance_fn(piece, y, r, eps, j, cap)
    if ex.fn is None or n < ex.resolved_from:
        return None
    return ex.fn.at(n)

