"""
Symbolic subsets of the natural numbers {1, 2, 3, ...}.

Each constructor knows its members and its exact structure. Density and
finiteness questions are answered by reducing a set to a periodic part (a union of
residue classes) plus finitely many "thin" base sets (finite sets, powers,
polynomial images) whose density is zero and whose harmonic sums converge. Sets
built from an infinite dyadic family with a stride above one are not periodic;
they fall back to interval arithmetic on lower/upper densities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable

from roughlab.errors import NoDensityData

# Periodic reductions whose lifted residue tables grow past this are abandoned.
MAX_MODULUS = 1 << 24
MAX_RESIDUES = 1 << 20


def v2(n: int) -> int:
    """2-adic valuation of a positive integer."""
    return (n & -n).bit_length() - 1


def iroot(q: int, k: int) -> int:
    """floor(q ** (1/k)) for q >= 0, exact on integers."""
    if q < 2:
        return q
    lo, hi = 1, 1 << (q.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= q:
            lo = mid
        else:
            hi = mid - 1
    return lo


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class IndexSet:
    """Base class. Subclasses are frozen dataclasses and compare structurally."""

    def contains(self, n: int) -> bool:
        raise NotImplementedError

    def members_upto(self, limit: int) -> list[int]:
        return [n for n in range(1, limit + 1) if self.contains(n)]

    def text(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.text()

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return Union((self, other))

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return Intersection((self, other))

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return Difference(self, other)

    def __invert__(self) -> "IndexSet":
        return Complement(self)


def members_upto(a: IndexSet, limit: int) -> list[int]:
    if limit < 1:
        return []
    return a.members_upto(limit)


# ── Base constructors ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class Finite(IndexSet):
    members: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(int(n) for n in self.members))
        if any(n < 1 for n in self.members):
            raise ValueError("finite index sets hold positive integers only")

    def contains(self, n: int) -> bool:
        return n in self.members

    def members_upto(self, limit: int) -> list[int]:
        return sorted(n for n in self.members if n <= limit)

    def text(self) -> str:
        return "finite{" + ",".join(str(n) for n in sorted(self.members)) + "}"


@dataclass(frozen=True)
class Full(IndexSet):
    def contains(self, n: int) -> bool:
        return n >= 1

    def members_upto(self, limit: int) -> list[int]:
        return list(range(1, limit + 1))

    def text(self) -> str:
        return "full"


@dataclass(frozen=True)
class ArithProg(IndexSet):
    """{b + a*k : k >= 0} restricted to n >= 1."""

    stride: int
    offset: int = 0

    def __post_init__(self) -> None:
        if self.stride < 1 or self.offset < 0:
            raise ValueError("ap needs stride >= 1 and offset >= 0")

    def contains(self, n: int) -> bool:
        return n >= max(self.offset, 1) and (n - self.offset) % self.stride == 0

    def members_upto(self, limit: int) -> list[int]:
        first = self.offset
        if first < 1:
            first += self.stride * ((1 - first + self.stride - 1) // self.stride)
        return list(range(first, limit + 1, self.stride))

    def text(self) -> str:
        return f"ap({self.stride},{self.offset})"


@dataclass(frozen=True)
class Powers(IndexSet):
    """{c * b**m : m >= 1}."""

    base: int
    scale: int = 1

    def __post_init__(self) -> None:
        if self.base < 2 or self.scale < 1:
            raise ValueError("powers needs base >= 2 and scale >= 1")

    def contains(self, n: int) -> bool:
        if n % self.scale:
            return False
        q = n // self.scale
        if q < self.base:
            return False
        while q % self.base == 0:
            q //= self.base
        return q == 1

    def members_upto(self, limit: int) -> list[int]:
        out, value = [], self.scale * self.base
        while value <= limit:
            out.append(value)
            value *= self.base
        return out

    def text(self) -> str:
        return f"powers({self.base})" if self.scale == 1 else f"powers({self.base},{self.scale})"


@dataclass(frozen=True)
class PolyImage(IndexSet):
    """{c * m**k : m >= 1}."""

    scale: int
    degree: int

    def __post_init__(self) -> None:
        if self.scale < 1 or self.degree < 2:
            raise ValueError("poly needs scale >= 1 and degree >= 2")

    def contains(self, n: int) -> bool:
        if n < 1 or n % self.scale:
            return False
        q = n // self.scale
        return iroot(q, self.degree) ** self.degree == q

    def members_upto(self, limit: int) -> list[int]:
        out, m = [], 1
        while self.scale * m**self.degree <= limit:
            out.append(self.scale * m**self.degree)
            m += 1
        return out

    def text(self) -> str:
        return f"poly({self.scale},{self.degree})"


@dataclass(frozen=True)
class DyadicValuation(IndexSet):
    """{2**v * (2k + 1) : k >= 0}, the integers of 2-adic valuation v."""

    valuation: int

    def __post_init__(self) -> None:
        if self.valuation < 0:
            raise ValueError("dyadic needs v >= 0")

    def contains(self, n: int) -> bool:
        return n >= 1 and v2(n) == self.valuation

    def members_upto(self, limit: int) -> list[int]:
        first = 1 << self.valuation
        return list(range(first, limit + 1, 2 * first))

    def text(self) -> str:
        return f"dyadic({self.valuation})"


@dataclass(frozen=True)
class TailSolution(IndexSet):
    """
    Solution set of an eventually-constant predicate.

    For n >= n0 membership is `eventually_in`; below n0 the members are exactly the
    listed exceptions.
    """

    eventually_in: bool
    n0: int
    exceptions: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "exceptions", frozenset(self.exceptions))
        if self.n0 < 1 or any(n < 1 or n >= self.n0 for n in self.exceptions):
            raise ValueError("tail exceptions must lie in [1, n0)")

    def contains(self, n: int) -> bool:
        if n >= self.n0:
            return self.eventually_in
        return n in self.exceptions

    def text(self) -> str:
        side = "in" if self.eventually_in else "out"
        listed = ",".join(str(n) for n in sorted(self.exceptions))
        return f"tail({side},{self.n0},{{{listed}}})"


# ── Combinators ─────────────────────────────────────────────────────────────


def _wrap(part: IndexSet) -> str:
    if isinstance(part, (Union, Intersection, Difference)):
        return f"({part.text()})"
    return part.text()


@dataclass(frozen=True)
class Union(IndexSet):
    parts: tuple[IndexSet, ...]

    def __post_init__(self) -> None:
        flat: list[IndexSet] = []
        for p in self.parts:
            flat.extend(p.parts if isinstance(p, Union) else (p,))
        object.__setattr__(self, "parts", tuple(flat))

    def contains(self, n: int) -> bool:
        return any(p.contains(n) for p in self.parts)

    def text(self) -> str:
        return " | ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Intersection(IndexSet):
    parts: tuple[IndexSet, ...]

    def __post_init__(self) -> None:
        flat: list[IndexSet] = []
        for p in self.parts:
            flat.extend(p.parts if isinstance(p, Intersection) else (p,))
        object.__setattr__(self, "parts", tuple(flat))

    def contains(self, n: int) -> bool:
        return all(p.contains(n) for p in self.parts)

    def text(self) -> str:
        return " & ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Complement(IndexSet):
    inner: IndexSet

    def contains(self, n: int) -> bool:
        return n >= 1 and not self.inner.contains(n)

    def text(self) -> str:
        return "~" + _wrap(self.inner)


@dataclass(frozen=True)
class Difference(IndexSet):
    left: IndexSet
    right: IndexSet

    def contains(self, n: int) -> bool:
        return self.left.contains(n) and not self.right.contains(n)

    def text(self) -> str:
        return f"{_wrap(self.left)} \\ {_wrap(self.right)}"


# ── Parametric dyadic families ──────────────────────────────────────────────


@dataclass(frozen=True)
class IndexFamily:
    """
    Members j = 1, 2, ... are dyadic(step*j + shift), optionally minus a density-zero
    exclusion set. step=1, shift=-1 is the partition of N by 2-adic valuation.
    """

    step: int = 1
    shift: int = -1
    exclude: IndexSet | None = None

    def __post_init__(self) -> None:
        if self.step < 1 or self.step + self.shift < 0:
            raise ValueError("family needs step >= 1 and a nonnegative first valuation")

    def valuation(self, j: int) -> int:
        return self.step * j + self.shift

    def member(self, j: int) -> IndexSet:
        base = DyadicValuation(self.valuation(j))
        return base if self.exclude is None else Difference(base, self.exclude)

    def index_of(self, n: int) -> int | None:
        offset = v2(n) - self.shift
        if offset < self.step or offset % self.step:
            return None
        if self.exclude is not None and self.exclude.contains(n):
            return None
        return offset // self.step

    def _check_exclusion(self) -> None:
        if self.exclude is None:
            return
        d = natural_density(self.exclude)
        if not d.is_exact or d.value != 0:
            raise NoDensityData(
                "family exclusion must have density 0",
                exclude=self.exclude.text(), density=d.to_json(),
            )

    def density(self, j: int) -> Fraction:
        self._check_exclusion()
        return Fraction(1, 2 ** (self.valuation(j) + 1))

    def tail_density(self, start: int) -> Fraction:
        """Sum of member densities over j > start (closed-form geometric tail)."""
        self._check_exclusion()
        first = Fraction(1, 2 ** (self.valuation(start + 1) + 1))
        return first / (1 - Fraction(1, 2**self.step))

    def text(self) -> str:
        sign = "+" if self.shift >= 0 else "-"
        coef = "j" if self.step == 1 else f"{self.step}*j"
        head = f"dyadic({coef}{sign}{abs(self.shift)})" if self.shift else f"dyadic({coef})"
        return head if self.exclude is None else f"{head} exclude {self.exclude.text()}"


@dataclass(frozen=True)
class FamilyUnion(IndexSet):
    """Union of the family members j with start <= j < stop (stop None: unbounded)."""

    family: IndexFamily
    start: int = 1
    stop: int | None = None

    def contains(self, n: int) -> bool:
        j = self.family.index_of(n)
        return j is not None and j >= self.start and (self.stop is None or j < self.stop)

    def text(self) -> str:
        upper = "" if self.stop is None else f",{self.stop}"
        return f"members({self.family.text()},{self.start}{upper})"


# ── Densities ───────────────────────────────────────────────────────────────

EXACT = "exact"
INTERVAL = "interval"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class DensityResult:
    kind: str
    lower: Fraction | None = None
    upper: Fraction | None = None

    @classmethod
    def exact(cls, value: Fraction) -> "DensityResult":
        return cls(EXACT, value, value)

    @classmethod
    def interval(cls, lower: Fraction, upper: Fraction) -> "DensityResult":
        if lower == upper:
            return cls.exact(lower)
        return cls(INTERVAL, lower, upper)

    @classmethod
    def unknown(cls) -> "DensityResult":
        return cls(UNKNOWN)

    @property
    def is_exact(self) -> bool:
        return self.kind == EXACT

    @property
    def value(self) -> Fraction | None:
        return self.lower if self.is_exact else None

    def to_json(self) -> dict:
        if self.kind == EXACT:
            return {"kind": EXACT, "value": str(self.lower)}
        if self.kind == INTERVAL:
            return {"kind": INTERVAL, "lower": str(self.lower), "upper": str(self.upper)}
        return {"kind": UNKNOWN}


@dataclass(frozen=True)
class Shape:
    """
    A set equal, up to a subset of the union of `thin` sets, to the residue
    classes `residues` mod `modulus` (or their complement when `negated`).
    """

    modulus: int
    residues: frozenset[int]
    negated: bool = False
    thin: tuple[IndexSet, ...] = ()

    @property
    def count(self) -> int:
        return self.modulus - len(self.residues) if self.negated else len(self.residues)

    @property
    def density(self) -> Fraction:
        return Fraction(self.count, self.modulus)

    @property
    def finite_thin(self) -> bool:
        return all(isinstance(t, Finite) for t in self.thin)

    def holds(self, n: int) -> bool:
        return ((n % self.modulus) in self.residues) != self.negated

    def lifted(self, modulus: int) -> frozenset[int]:
        k = modulus // self.modulus
        return frozenset(r + self.modulus * i for r in self.residues for i in range(k))


def _thin_union(*groups: tuple[IndexSet, ...]) -> tuple[IndexSet, ...]:
    out: list[IndexSet] = []
    for group in groups:
        for t in group:
            if t not in out:
                out.append(t)
    return tuple(out)


def _meet(a: Shape, b: Shape) -> Shape | None:
    modulus = _lcm(a.modulus, b.modulus)
    if modulus > MAX_MODULUS:
        return None
    if len(a.residues) * (modulus // a.modulus) > MAX_RESIDUES:
        return None
    if len(b.residues) * (modulus // b.modulus) > MAX_RESIDUES:
        return None
    ra, rb = a.lifted(modulus), b.lifted(modulus)
    thin = _thin_union(a.thin, b.thin)
    if not a.negated and not b.negated:
        return Shape(modulus, ra & rb, False, thin)
    if not a.negated:
        return Shape(modulus, ra - rb, False, thin)
    if not b.negated:
        return Shape(modulus, rb - ra, False, thin)
    return Shape(modulus, ra | rb, True, thin)


def _flip(s: Shape) -> Shape:
    return Shape(s.modulus, s.residues, not s.negated, s.thin)


def _finite_shape(members: Iterable[int]) -> Shape:
    members = frozenset(members)
    return Shape(1, frozenset(), False, (Finite(members),) if members else ())


def shape_of(a: IndexSet) -> Shape | None:
    """Periodic-modulo-thin reduction, or None when no such form is available."""
    if isinstance(a, Finite):
        return _finite_shape(a.members)
    if isinstance(a, Full):
        return Shape(1, frozenset({0}))
    if isinstance(a, ArithProg):
        r = a.offset % a.stride
        missing = range(r if r >= 1 else a.stride, a.offset, a.stride)
        return Shape(a.stride, frozenset({r}), False, _finite_shape(missing).thin)
    if isinstance(a, (Powers, PolyImage)):
        return Shape(1, frozenset(), False, (a,))
    if isinstance(a, DyadicValuation):
        return Shape(2 ** (a.valuation + 1), frozenset({2**a.valuation}))
    if isinstance(a, TailSolution):
        if a.eventually_in:
            holes = [n for n in range(1, a.n0) if n not in a.exceptions]
            return Shape(1, frozenset({0}), False, _finite_shape(holes).thin)
        return _finite_shape(a.exceptions)
    if isinstance(a, Complement):
        inner = shape_of(a.inner)
        return None if inner is None else _flip(inner)
    if isinstance(a, Intersection):
        return _fold_meet([shape_of(p) for p in a.parts])
    if isinstance(a, Union):
        flipped = [shape_of(p) for p in a.parts]
        met = _fold_meet([None if s is None else _flip(s) for s in flipped])
        return None if met is None else _flip(met)
    if isinstance(a, Difference):
        left, right = shape_of(a.left), shape_of(a.right)
        if left is None or right is None:
            return None
        return _meet(left, _flip(right))
    if isinstance(a, FamilyUnion):
        return _family_shape(a)
    return None


def _fold_meet(shapes: list[Shape | None]) -> Shape | None:
    if any(s is None for s in shapes):
        return None
    acc = shapes[0]
    for s in shapes[1:]:
        acc = _meet(acc, s)
        if acc is None:
            return None
    return acc


def _family_shape(a: FamilyUnion) -> Shape | None:
    fam = a.family
    if a.stop is not None:
        if a.stop <= a.start:
            return _finite_shape(())
        if a.stop - a.start > 64:
            return None
        parts: list[IndexSet] = [DyadicValuation(fam.valuation(j)) for j in range(a.start, a.stop)]
        base = shape_of(Union(tuple(parts))) if len(parts) > 1 else shape_of(parts[0])
    elif fam.step == 1:
        low = fam.valuation(a.start)
        if 2**low > MAX_MODULUS:
            return None
        base = Shape(2**low, frozenset({0}))
    else:
        return None
    if base is None or fam.exclude is None:
        return base
    excluded = shape_of(fam.exclude)
    return None if excluded is None else _meet(base, _flip(excluded))


def density_bounds(a: IndexSet) -> tuple[Fraction, Fraction] | None:
    """Rigorous (lower density lower bound, upper density upper bound), if any."""
    shape = shape_of(a)
    if shape is not None:
        return shape.density, shape.density
    if isinstance(a, FamilyUnion):
        return _family_bounds(a)
    if isinstance(a, Complement):
        inner = density_bounds(a.inner)
        return None if inner is None else (1 - inner[1], 1 - inner[0])
    if isinstance(a, Union):
        bounds = [density_bounds(p) for p in a.parts]
        if any(b is None for b in bounds):
            return None
        return max(b[0] for b in bounds), min(Fraction(1), sum(b[1] for b in bounds))
    if isinstance(a, Intersection):
        bounds = [density_bounds(p) for p in a.parts]
        if any(b is None for b in bounds):
            return None
        lower = max(Fraction(0), sum(b[0] for b in bounds) - (len(bounds) - 1))
        return lower, min(b[1] for b in bounds)
    if isinstance(a, Difference):
        return density_bounds(Intersection((a.left, Complement(a.right))))
    return None


def _family_bounds(a: FamilyUnion) -> tuple[Fraction, Fraction] | None:
    fam = a.family
    try:
        total = fam.tail_density(a.start - 1)
        if a.stop is not None:
            total -= fam.tail_density(a.stop - 1)
    except NoDensityData:
        return None
    return total, total


def natural_density(a: IndexSet) -> DensityResult:
    bounds = density_bounds(a)
    if bounds is None:
        return DensityResult.unknown()
    return DensityResult.interval(*bounds)


def tail_union_upper_density(family: IndexFamily, start: int) -> DensityResult:
    """Upper density bound for the union of family members j > start."""
    return DensityResult(INTERVAL, Fraction(0), family.tail_density(start))


# ── Finiteness ──────────────────────────────────────────────────────────────


def _thin_hits_periodic(thin: IndexSet, shape: Shape) -> bool:
    """Whether a powers / poly set meets the periodic part of `shape` infinitely often."""
    m = shape.modulus
    if isinstance(thin, PolyImage):
        return any(shape.holds(thin.scale * pow(x, thin.degree, m)) for x in range(m))
    # c*b**k mod m is eventually periodic in k; walk until a state repeats.
    seen: dict[int, int] = {}
    order: list[int] = []
    state, k = thin.base % m, 1
    while state not in seen:
        seen[state] = k
        order.append(state)
        state = state * thin.base % m
        k += 1
    cycle = order[seen[state] - 1:]
    return any(shape.holds(thin.scale * s) for s in cycle)


def is_finite(a: IndexSet) -> bool | None:
    """True / False when finiteness is decided structurally, None otherwise."""
    if isinstance(a, Finite):
        return True
    if isinstance(a, (Full, ArithProg, Powers, PolyImage, DyadicValuation)):
        return False
    if isinstance(a, TailSolution):
        return not a.eventually_in
    shape = shape_of(a)
    if shape is not None:
        if shape.count > 0:
            return False
        if shape.finite_thin:
            return True
    if isinstance(a, Complement):
        return is_cofinite(a.inner)
    if isinstance(a, Union):
        answers = [is_finite(p) for p in a.parts]
        if any(x is False for x in answers):
            return False
        return True if all(answers) else None
    if isinstance(a, Intersection):
        return _intersection_finite(a.parts)
    if isinstance(a, Difference):
        return _intersection_finite((a.left, Complement(a.right)))
    if isinstance(a, FamilyUnion):
        if a.stop is not None and a.stop <= a.start:
            return True
        return False
    return None


def _intersection_finite(parts: tuple[IndexSet, ...]) -> bool | None:
    answers = [is_finite(p) for p in parts]
    if any(x is True for x in answers):
        return True
    thin = [p for p in parts if isinstance(p, (Powers, PolyImage))]
    rest = [p for p in parts if not isinstance(p, (Powers, PolyImage))]
    if len(thin) == 1:
        periodic = _fold_meet([shape_of(p) for p in rest]) if rest else Shape(1, frozenset({0}))
        if periodic is not None and periodic.finite_thin:
            return not _thin_hits_periodic(thin[0], periodic)
    if len(rest) == len(parts) - 1 and thin and all(is_cofinite(p) for p in rest):
        return False
    return None


def is_cofinite(a: IndexSet) -> bool | None:
    if isinstance(a, Complement):
        return is_finite(a.inner)
    shape = shape_of(a)
    if shape is not None:
        flipped = _flip(shape)
        if flipped.count > 0:
            return False
        if flipped.finite_thin:
            return True
    if isinstance(a, (Finite, Powers, PolyImage, DyadicValuation)):
        return False
    if isinstance(a, Intersection):
        answers = [is_cofinite(p) for p in a.parts]
        if any(x is False for x in answers):
            return False
        return True if all(answers) else None
    if isinstance(a, Union):
        return _intersection_finite(tuple(Complement(p) for p in a.parts))
    if isinstance(a, Difference):
        return is_cofinite(Intersection((a.left, Complement(a.right))))
    if isinstance(a, FamilyUnion) and a.family.step > 1:
        return False
    return None
