"""
Closed term grammars for sequence models.

ValueFn: one term per atom value, monotone in n on n >= 1 (constants, c*n^k,
c*b^n, c/n^k, and constants depending on a family parameter j).

ProbFn: a probability as a finite linear combination
    const + sum_k c_k / n^k + sum_p d_p * p^n,      0 < p < 1,
kept in canonical form so that symbolic mass checks are plain equality.

Every crossing index below is derived from an explicit bound and then tightened by
an exact scan, so solutions are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from roughlab.errors import GrammarViolation, OutsideValidity
from roughlab.services.index_sets import TailSolution

INF = math.inf

# Exact scans below a crossing bound stop here.
SCAN_LIMIT = 1 << 22


def _sign(x: Fraction | int) -> int:
    return (x > 0) - (x < 0)


def _coef_text(c: Fraction, body: str) -> str:
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    return f"{c}*{body}"


# ── Value functions ─────────────────────────────────────────────────────────


class ValueFn:
    uses_j = False

    def at(self, n: int, j: int | None = None) -> Fraction:
        raise NotImplementedError

    def limit(self, j: int | None = None) -> Fraction | float:
        """Limit as n -> infinity (floats only for +-inf)."""
        raise NotImplementedError

    def trend(self) -> int:
        """+1 increasing, -1 decreasing, 0 constant in n on n >= 1."""
        raise NotImplementedError

    def scaled(self, k: Fraction) -> "ValueFn":
        raise NotImplementedError

    def text(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.text()

    def sort_key(self) -> tuple:
        lim = self.limit(1)
        return (lim, self.at(1, 1), self.text())


@dataclass(frozen=True)
class Const(ValueFn):
    q: Fraction

    def at(self, n: int, j: int | None = None) -> Fraction:
        return self.q

    def limit(self, j: int | None = None) -> Fraction:
        return self.q

    def trend(self) -> int:
        return 0

    def scaled(self, k: Fraction) -> ValueFn:
        return Const(self.q * k)

    def text(self) -> str:
        return str(self.q)


@dataclass(frozen=True)
class Monomial(ValueFn):
    """c * n^k."""

    c: Fraction
    k: int

    def __post_init__(self) -> None:
        if self.c == 0 or self.k < 1:
            raise GrammarViolation("monomial needs c != 0 and k >= 1", c=self.c, k=self.k)

    def at(self, n: int, j: int | None = None) -> Fraction:
        return self.c * n**self.k

    def limit(self, j: int | None = None) -> float:
        return INF if self.c > 0 else -INF

    def trend(self) -> int:
        return _sign(self.c)

    def scaled(self, k: Fraction) -> ValueFn:
        return Monomial(self.c * k, self.k) if k else Const(Fraction(0))

    def text(self) -> str:
        body = "n" if self.k == 1 else f"n^{self.k}"
        return _coef_text(self.c, body)


@dataclass(frozen=True)
class Exponential(ValueFn):
    """c * b^n with b > 1."""

    c: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        if self.c == 0 or self.b <= 1:
            raise GrammarViolation("exponential needs c != 0 and b > 1", c=self.c, b=self.b)

    def at(self, n: int, j: int | None = None) -> Fraction:
        return self.c * self.b**n

    def limit(self, j: int | None = None) -> float:
        return INF if self.c > 0 else -INF

    def trend(self) -> int:
        return _sign(self.c)

    def scaled(self, k: Fraction) -> ValueFn:
        return Exponential(self.c * k, self.b) if k else Const(Fraction(0))

    def text(self) -> str:
        base = str(self.b) if self.b.denominator == 1 else f"({self.b})"
        return _coef_text(self.c, f"{base}^n")


@dataclass(frozen=True)
class ReciprocalShift(ValueFn):
    """c / n^k."""

    c: Fraction
    k: int

    def __post_init__(self) -> None:
        if self.c == 0 or self.k < 1:
            raise GrammarViolation("reciprocal needs c != 0 and k >= 1", c=self.c, k=self.k)

    def at(self, n: int, j: int | None = None) -> Fraction:
        return self.c / n**self.k

    def limit(self, j: int | None = None) -> Fraction:
        return Fraction(0)

    def trend(self) -> int:
        return -_sign(self.c)

    def scaled(self, k: Fraction) -> ValueFn:
        return ReciprocalShift(self.c * k, self.k) if k else Const(Fraction(0))

    def text(self) -> str:
        power = "n" if self.k == 1 else f"n^{self.k}"
        num, den = self.c.numerator, self.c.denominator
        if den == 1:
            return f"{num}/{power}"
        return f"{num}/({den}*{power})"


@dataclass(frozen=True)
class IndexedConst(ValueFn):
    """(a*j + b) / (c*j + d): constant in n, depends on the family parameter j >= 1."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    uses_j = True

    def __post_init__(self) -> None:
        a, b, c, d = (Fraction(x) for x in (self.a, self.b, self.c, self.d))
        if c < 0 or (c == 0 and d <= 0) or c + d <= 0:
            raise GrammarViolation("indexed constant needs a denominator positive for j >= 1")
        scale = math.lcm(*(x.denominator for x in (a, b, c, d)))
        ints = [int(x * scale) for x in (a, b, c, d)]
        g = math.gcd(*ints) or 1
        a, b, c, d = (Fraction(x, g) for x in ints)
        for name, value in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, value)

    def value(self, j: int) -> Fraction:
        return (self.a * j + self.b) / (self.c * j + self.d)

    def at(self, n: int, j: int | None = None) -> Fraction:
        if j is None:
            raise GrammarViolation("indexed constant evaluated outside a family")
        return self.value(j)

    def limit(self, j: int | None = None) -> Fraction | float:
        if j is None:
            raise GrammarViolation("indexed constant evaluated outside a family")
        return self.value(j)

    def limit_in_j(self) -> Fraction | float:
        if self.c:
            return self.a / self.c
        if self.a:
            return INF if self.a / self.d > 0 else -INF
        return self.b / self.d

    def trend_in_j(self) -> int:
        return _sign(self.a * self.d - self.b * self.c)

    def trend(self) -> int:
        return 0

    def scaled(self, k: Fraction) -> ValueFn:
        return IndexedConst(self.a * k, self.b * k, self.c, self.d)

    def text(self) -> str:
        num = _linear_text(self.a, self.b)
        if self.c == 0 and self.d == 1:
            return num
        den = _linear_text(self.c, self.d)
        if self.a and self.b:
            num = f"({num})"
        if not (self.c == 1 and self.d == 0) and not (self.c == 0):
            den = f"({den})"
        return f"{num}/{den}"


def _linear_text(a: Fraction, b: Fraction) -> str:
    if a == 0:
        return str(b)
    head = _coef_text(a, "j")
    if b == 0:
        return head
    return f"{head}{'+' if b > 0 else '-'}{abs(b)}"


# ── Probability functions ───────────────────────────────────────────────────


@dataclass(frozen=True)
class ProbFn:
    const: Fraction = Fraction(0)
    recips: tuple[tuple[int, Fraction], ...] = ()
    geoms: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def make(cls, const: Any = 0, recips: dict[int, Fraction] | None = None,
             geoms: dict[Fraction, Fraction] | None = None) -> "ProbFn":
        r = tuple(sorted((k, Fraction(c)) for k, c in (recips or {}).items() if c))
        g = tuple(sorted(((Fraction(p), Fraction(d)) for p, d in (geoms or {}).items() if d), reverse=True))
        for k, _ in r:
            if k < 1:
                raise GrammarViolation("reciprocal power must be >= 1", k=k)
        for p, _ in g:
            if not 0 < p < 1:
                raise GrammarViolation("geometric base must lie in (0, 1)", p=p)
        return cls(Fraction(const), r, g)

    @classmethod
    def constant(cls, q: Any) -> "ProbFn":
        return cls.make(q)

    @classmethod
    def recip(cls, c: Any, k: int) -> "ProbFn":
        return cls.make(0, {k: Fraction(c)})

    @classmethod
    def geom(cls, p: Any, coef: Any = 1) -> "ProbFn":
        return cls.make(0, None, {Fraction(p): Fraction(coef)})

    # arithmetic
    def __add__(self, other: "ProbFn | Fraction | int") -> "ProbFn":
        other = _as_prob(other)
        recips = dict(self.recips)
        for k, c in other.recips:
            recips[k] = recips.get(k, Fraction(0)) + c
        geoms = dict(self.geoms)
        for p, d in other.geoms:
            geoms[p] = geoms.get(p, Fraction(0)) + d
        return ProbFn.make(self.const + other.const, recips, geoms)

    __radd__ = __add__

    def __neg__(self) -> "ProbFn":
        return self * -1

    def __sub__(self, other: "ProbFn | Fraction | int") -> "ProbFn":
        return self + (-_as_prob(other))

    def __rsub__(self, other: "Fraction | int") -> "ProbFn":
        return _as_prob(other) - self

    def __mul__(self, k: Fraction | int) -> "ProbFn":
        k = Fraction(k)
        return ProbFn.make(
            self.const * k, {kk: c * k for kk, c in self.recips}, {p: d * k for p, d in self.geoms}
        )

    __rmul__ = __mul__

    def one_minus(self) -> "ProbFn":
        return 1 - self

    # evaluation
    def at(self, n: int) -> Fraction:
        value = self.const
        for k, c in self.recips:
            value += c / n**k
        for p, d in self.geoms:
            value += d * p**n
        return value

    @property
    def limit(self) -> Fraction:
        return self.const

    @property
    def is_constant(self) -> bool:
        return not self.recips and not self.geoms

    def leading(self) -> tuple[str, Any, Fraction] | None:
        """Dominant vanishing term: smallest reciprocal power, else largest base."""
        if self.recips:
            k, c = self.recips[0]
            return ("recip", k, c)
        if self.geoms:
            p, d = self.geoms[0]
            return ("geom", p, d)
        return None

    def eventual_sign(self, delta: Fraction) -> int:
        """sign(f(n) - delta) for all large n."""
        if self.const != delta:
            return _sign(self.const - delta)
        lead = self.leading()
        return 0 if lead is None else _sign(lead[2])

    def approach(self) -> int:
        """+1 when f approaches its limit from above, -1 from below, 0 if constant."""
        return self.eventual_sign(self.const)

    # bounds
    def _geom_constant(self, m: int) -> Fraction:
        """G with |d| p^n <= |d| G / n^m for n >= 2m, summed over geometric terms."""
        total = Fraction(0)
        for p, d in self.geoms:
            h = 1 / p - 1
            total += abs(d) * math.factorial(m) * (2 / h) ** m
        return total

    def settle_bound(self, delta: Fraction) -> int:
        """An index past which sign(f(n) - delta) is the eventual sign."""
        kmax = max((k for k, _ in self.recips), default=0)
        m = kmax + 1
        if self.const != delta:
            gap = abs(self.const - delta)
            t = sum((abs(c) for _, c in self.recips), Fraction(0)) + self._geom_constant(m)
            return max(2 * m, math.floor(t / gap) + 1)
        lead = self.leading()
        if lead is None:
            return 1
        if lead[0] == "recip":
            _, k, a = lead
            s = sum((abs(c) for kk, c in self.recips if kk > k), Fraction(0)) + self._geom_constant(m)
            return max(2 * m, math.floor(s / abs(a)) + 1)
        _, p, d = lead
        s = sum((abs(dd) / (p / pp - 1) for pp, dd in self.geoms[1:]), Fraction(0))
        return math.floor(s / abs(d)) + 1

    def monotone_from(self) -> int:
        """Least N such that f is monotone on n >= N (bound, then exact scan)."""
        lead = self.leading()
        if lead is None:
            return 1
        if lead[0] == "recip":
            _, k, a = lead
            m = max((kk for kk, _ in self.recips), default=0) + 2
            s = sum((kk * abs(c) for kk, c in self.recips if kk > k), Fraction(0)) + self._geom_constant(m)
            bound = max(2 * m, math.floor(s * 2 ** (k + 1) / (abs(a) * k)) + 1)
        else:
            _, p, d = lead
            s = sum((abs(dd) / (p / pp - 1) for pp, dd in self.geoms[1:]), Fraction(0))
            bound = math.floor(s / (abs(d) * (1 - p))) + 1
        direction = -_sign(lead[2])
        if bound > SCAN_LIMIT:
            raise OutsideValidity("monotonicity index beyond scan limit", bound=bound)
        n = bound
        while n > 1 and _sign(self.at(n) - self.at(n - 1)) in (direction, 0):
            n -= 1
        return n

    def validity_index(self) -> int:
        """Least n_min with 0 <= f(n) <= 1 for every n >= n_min."""
        above = _solve(self, 1, strict=True)
        below = _solve(-self, 0, strict=True)
        if above.eventually_in or below.eventually_in:
            raise GrammarViolation(f"{self.text()} is not eventually a probability", fn=self.text())
        bad = set(above.exceptions) | set(below.exceptions)
        return max(bad) + 1 if bad else 1

    # text
    def text(self) -> str:
        parts: list[tuple[int, str]] = []
        if self.const or (not self.recips and not self.geoms):
            parts.append((_sign(self.const), str(abs(self.const))))
        for k, c in self.recips:
            parts.append((_sign(c), ReciprocalShift(abs(c), k).text()))
        for p, d in self.geoms:
            parts.append((_sign(d), _coef_text(abs(d), f"({p})^n")))
        out = ""
        for i, (sign, body) in enumerate(parts):
            if i == 0:
                out = ("-" if sign < 0 else "") + body
            else:
                out += (" - " if sign < 0 else " + ") + body
        return out

    def __str__(self) -> str:
        return self.text()


def _as_prob(x: "ProbFn | Fraction | int") -> ProbFn:
    return x if isinstance(x, ProbFn) else ProbFn.constant(x)


ZERO = ProbFn.constant(0)
ONE = ProbFn.constant(1)


# ── Threshold solving ───────────────────────────────────────────────────────


def _solve(f: ProbFn, delta: Fraction, strict: bool) -> TailSolution:
    sign = f.eventual_sign(Fraction(delta))
    eventually_in = sign > 0 or (sign == 0 and not strict)
    bound = f.settle_bound(Fraction(delta))
    if bound > SCAN_LIMIT:
        raise OutsideValidity("threshold crossing beyond scan limit", bound=bound)

    def holds(n: int) -> bool:
        diff = f.at(n) - delta
        return diff > 0 if strict else diff >= 0

    n0 = bound
    while n0 > 1 and holds(n0 - 1) == eventually_in:
        n0 -= 1
    exceptions = frozenset(n for n in range(1, n0) if holds(n))
    return TailSolution(eventually_in, n0, exceptions)


def threshold_solution(p: ProbFn, comparator: str, delta: Any) -> TailSolution:
    """{n : p(n) > delta} or {n : p(n) >= delta} as an exact tail solution."""
    if comparator not in (">", ">="):
        raise ValueError(f"unsupported comparator {comparator!r}")
    return _solve(p, Fraction(delta), strict=comparator == ">")


# ── Monotone crossings of value functions ───────────────────────────────────


def exceeds_from(fn: ValueFn, a: Fraction, j: int | None = None,
                 cap: int = 2**40) -> tuple[bool, int]:
    """
    Eventual truth value of fn(n) > a and the least index from which it holds.

    fn is monotone in n, so the predicate changes at most once.
    """
    if fn.trend() == 0:
        return fn.at(1, j) > a, 1
    lim = fn.limit(j)
    if lim > a:
        eventual = True
    elif lim < a:
        eventual = False
    else:
        eventual = fn.trend() < 0
    if (fn.at(1, j) > a) == eventual:
        return eventual, 1
    hi = 2
    while (fn.at(hi, j) > a) != eventual:
        hi *= 2
        if hi > cap:
            raise OutsideValidity("value crossing beyond search cap", fn=fn.text(), threshold=a)
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if (fn.at(mid, j) > a) == eventual:
            hi = mid
        else:
            lo = mid
    return eventual, hi


def indexed_exceeds_from(fn: IndexedConst, a: Fraction) -> tuple[bool, int]:
    """Same question in the family parameter j for an indexed constant."""
    trend = fn.trend_in_j()
    if trend == 0:
        return fn.value(1) > a, 1
    lim = fn.limit_in_j()
    if lim > a:
        eventual = True
    elif lim < a:
        eventual = False
    else:
        eventual = trend < 0
    if (fn.value(1) > a) == eventual:
        return eventual, 1
    hi = 2
    while (fn.value(hi) > a) != eventual:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if (fn.value(mid) > a) == eventual:
            hi = mid
        else:
            lo = mid
    return eventual, hi
