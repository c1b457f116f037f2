"""
Exact finite laws.

Value spaces (the real line or a finite metric table), finitely supported laws with
rational masses, couplings between two laws and the law of the distance d(X, Y).
Everything here is exact: masses and distances are `Fraction`s, never floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from roughlab.errors import (
    InvalidCoupling,
    InvalidValueSpace,
    MassNotOne,
    NegativeMass,
    PointNotInSpace,
    SpaceMismatch,
)

REAL = "real"
FINITE = "finite"


def as_rational(value: Any) -> Fraction:
    """Coerce int / Fraction / "p/q" text to a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(ch in text for ch in ".eE"):
            raise ValueError(f"not an exact rational literal: {value!r}")
        return Fraction(text)
    raise TypeError(f"not an exact rational: {value!r}")


def fmt(q: Fraction) -> str:
    """Canonical text of a rational: "p/q", or "p" when integral."""
    return str(q)


# ── Value spaces ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ValueSpace:
    kind: str
    points: tuple[str, ...] = ()
    table: tuple[tuple[Fraction, ...], ...] = ()

    @classmethod
    def real_line(cls) -> "ValueSpace":
        return cls(REAL)

    @classmethod
    def finite_points(cls, points: Iterable[str], dist: Iterable[Iterable[Any]]) -> "ValueSpace":
        labels = tuple(str(p) for p in points)
        rows = tuple(tuple(as_rational(v) for v in row) for row in dist)
        _validate_table(labels, rows)
        return cls(FINITE, labels, rows)

    def contains(self, point: Any) -> bool:
        if self.kind == REAL:
            return isinstance(point, Fraction)
        return point in self.points

    def coerce(self, point: Any) -> Any:
        if self.kind == REAL:
            try:
                return as_rational(point)
            except (TypeError, ValueError) as e:
                raise PointNotInSpace(f"{point!r} is not a rational point", point=point) from e
        label = str(point)
        if label not in self.points:
            raise PointNotInSpace(f"{label!r} is not a point of the space", point=label)
        return label

    def distance(self, x: Any, y: Any) -> Fraction:
        if self.kind == REAL:
            return abs(x - y)
        return self.table[self.points.index(x)][self.points.index(y)]

    def sort_key(self, point: Any) -> Any:
        return point if self.kind == REAL else self.points.index(point)

    def to_json(self) -> dict:
        if self.kind == REAL:
            return {"kind": REAL}
        return {
            "kind": FINITE,
            "points": list(self.points),
            "dist": [[fmt(v) for v in row] for row in self.table],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ValueSpace":
        kind = data.get("kind", REAL)
        if kind == REAL:
            return cls.real_line()
        if kind == FINITE:
            return cls.finite_points(data.get("points", []), data.get("dist", []))
        raise InvalidValueSpace(f"unknown value space kind {kind!r}", kind=kind)


def _validate_table(labels: tuple[str, ...], rows: tuple[tuple[Fraction, ...], ...]) -> None:
    size = len(labels)
    if size == 0:
        raise InvalidValueSpace("a finite space needs at least one point")
    if len(set(labels)) != size:
        raise InvalidValueSpace("duplicate point labels", points=list(labels))
    if len(rows) != size or any(len(row) != size for row in rows):
        raise InvalidValueSpace("distance table must be square", size=size)
    for a in range(size):
        if rows[a][a] != 0:
            raise InvalidValueSpace("d(x,x) must be 0", point=labels[a])
        for b in range(size):
            if rows[a][b] < 0:
                raise InvalidValueSpace("negative distance", x=labels[a], y=labels[b])
            if rows[a][b] != rows[b][a]:
                raise InvalidValueSpace("distance table is not symmetric", x=labels[a], y=labels[b])
            for c in range(size):
                if rows[a][c] > rows[a][b] + rows[b][c]:
                    raise InvalidValueSpace(
                        "triangle inequality fails",
                        x=labels[a], y=labels[b], z=labels[c],
                    )


REAL_LINE = ValueSpace.real_line()


# ── Laws ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class FiniteDist:
    """A finitely supported law. Build it with `make_dist`; atoms are canonical."""

    space: ValueSpace
    atoms: tuple[tuple[Any, Fraction], ...]

    def prob(self, value: Any) -> Fraction:
        for v, p in self.atoms:
            if v == value:
                return p
        return Fraction(0)

    @property
    def support(self) -> tuple[Any, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def is_degenerate(self) -> bool:
        return len(self.atoms) == 1

    def tail(self, eps: Fraction) -> Fraction:
        """P(D > eps) for a law on the real line."""
        return sum((p for v, p in self.atoms if v > eps), Fraction(0))

    def mass_where(self, predicate) -> Fraction:
        return sum((p for v, p in self.atoms if predicate(v)), Fraction(0))

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "atoms": [[_point_json(self.space, v), fmt(p)] for v, p in self.atoms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteDist":
        space = ValueSpace.from_json(data.get("space", {"kind": REAL}))
        atoms = [(v, as_rational(p)) for v, p in data.get("atoms", [])]
        return make_dist(space, atoms)


def _point_json(space: ValueSpace, value: Any) -> str:
    return fmt(value) if space.kind == REAL else value


def make_dist(space: ValueSpace, atoms: Iterable[tuple[Any, Any]]) -> FiniteDist:
    merged: dict[Any, Fraction] = {}
    for value, prob in atoms:
        point = space.coerce(value)
        mass = as_rational(prob)
        if mass < 0:
            raise NegativeMass(f"negative mass {mass} at {point}", point=point, mass=mass)
        merged[point] = merged.get(point, Fraction(0)) + mass
    total = sum(merged.values(), Fraction(0))
    if total != 1:
        raise MassNotOne(total)
    kept = sorted(((v, p) for v, p in merged.items() if p > 0), key=lambda a: space.sort_key(a[0]))
    return FiniteDist(space, tuple(kept))


def degenerate(value: Any, space: ValueSpace = REAL_LINE) -> FiniteDist:
    return make_dist(space, [(value, 1)])


def bernoulli(p: Any) -> FiniteDist:
    p = as_rational(p)
    return make_dist(REAL_LINE, [(0, 1 - p), (1, p)])


def uniform(values: Iterable[Any], space: ValueSpace = REAL_LINE) -> FiniteDist:
    values = list(values)
    return make_dist(space, [(v, Fraction(1, len(values))) for v in values])


# ── Couplings ───────────────────────────────────────────────────────────────

INDEPENDENT = "independent"
EXPLICIT = "joint"


@dataclass(frozen=True)
class Coupling:
    kind: str
    x: FiniteDist
    y: FiniteDist
    table: tuple[tuple[Any, Any, Fraction], ...] = field(default=())

    def transpose(self) -> "Coupling":
        cells = tuple(sorted(
            ((b, a, p) for a, b, p in self.table),
            key=lambda c: (self.y.space.sort_key(c[0]), self.x.space.sort_key(c[1])),
        ))
        return Coupling(self.kind, self.y, self.x, cells)

    def to_json(self) -> dict:
        data = {"kind": self.kind, "x": self.x.to_json(), "y": self.y.to_json()}
        if self.kind == EXPLICIT:
            space = self.x.space
            data["table"] = [
                [_point_json(space, a), _point_json(space, b), fmt(p)] for a, b, p in self.table
            ]
        return data


def product_coupling(x: FiniteDist, y: FiniteDist) -> Coupling:
    if x.space != y.space:
        raise SpaceMismatch("coupled laws live on different spaces")
    cells = tuple((a, b, p * q) for a, p in x.atoms for b, q in y.atoms)
    return Coupling(INDEPENDENT, x, y, cells)


def explicit_joint(x: FiniteDist, y: FiniteDist, table: Iterable[tuple[Any, Any, Any]]) -> Coupling:
    """A declared joint table; both marginals must match exactly."""
    if x.space != y.space:
        raise SpaceMismatch("coupled laws live on different spaces")
    space = x.space
    merged: dict[tuple[Any, Any], Fraction] = {}
    for a, b, prob in table:
        pa, pb = space.coerce(a), space.coerce(b)
        mass = as_rational(prob)
        if mass < 0:
            raise NegativeMass(f"negative joint mass {mass} at ({pa}, {pb})", x=pa, y=pb, mass=mass)
        merged[(pa, pb)] = merged.get((pa, pb), Fraction(0)) + mass
    total = sum(merged.values(), Fraction(0))
    if total != 1:
        raise MassNotOne(total, where="joint table")
    for label, marginal, pick in (("x", x, 0), ("y", y, 1)):
        sums: dict[Any, Fraction] = {}
        for key, mass in merged.items():
            sums[key[pick]] = sums.get(key[pick], Fraction(0)) + mass
        for value in set(sums) | set(marginal.support):
            if sums.get(value, Fraction(0)) != marginal.prob(value):
                raise InvalidCoupling(
                    f"{label}-marginal mismatch at {value}",
                    marginal=label, value=value,
                    declared=marginal.prob(value), joint=sums.get(value, Fraction(0)),
                )
    cells = tuple(sorted(
        ((a, b, p) for (a, b), p in merged.items() if p > 0),
        key=lambda c: (space.sort_key(c[0]), space.sort_key(c[1])),
    ))
    return Coupling(EXPLICIT, x, y, cells)


def diagonal_coupling(x: FiniteDist) -> Coupling:
    return explicit_joint(x, x, [(v, v, p) for v, p in x.atoms])


def distance_law(coupling: Coupling) -> FiniteDist:
    """Law of d(X, Y) on the real line under the given coupling."""
    if coupling.x.space != coupling.y.space:
        raise SpaceMismatch("coupled laws live on different spaces")
    space = coupling.x.space
    return make_dist(REAL_LINE, [(space.distance(a, b), p) for a, b, p in coupling.table])


def coupling_from_json(data: dict | str, x: FiniteDist, y: FiniteDist) -> Coupling:
    if data == "product" or data == INDEPENDENT or (isinstance(data, dict) and data.get("kind") == INDEPENDENT):
        return product_coupling(x, y)
    if isinstance(data, dict):
        return explicit_joint(x, y, [tuple(cell) for cell in data.get("table", [])])
    raise InvalidCoupling(f"unknown coupling {data!r}")
