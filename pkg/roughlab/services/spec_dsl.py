"""
The .rcl specification language.

A document declares an ideal, a piecewise sequence, a target law with its coupling
kind, and a list of queries:

    ideal density
    sequence {
      piece ap(2,1) {
        atom -n^3 prob 1/2 - 1/(2*n^2)
        atom n^2 prob 1/2 + 1/(2*n^2)
      }
      piece powers(2) binomial 1/2
      family dyadic(j-1) {
        atom 1/j prob 1 - 1/n^2
        atom 1/(j+1) prob 1/n^2
      }
    }
    target { atom 0 prob 1 }
    coupling independent
    query cluster r 0

Literals are integers and p/q fractions only. `#` starts a comment. `print_document`
emits the canonical text, and parse(print_document(doc)) == doc.
"""

from __future__ import annotations

import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import structlog

from roughlab.config import settings
from roughlab.errors import GrammarViolation, RoughLabError, SpecSemanticError, SpecSyntaxError
from roughlab.services.exact_dist import REAL_LINE, FiniteDist, make_dist
from roughlab.services.ideals import DENSITY, EXH, FIN, SUBMEASURES, SUMMABLE, Ideal
from roughlab.services.index_sets import (
    ArithProg,
    Complement,
    Difference,
    DyadicValuation,
    FamilyUnion,
    Finite,
    Full,
    IndexFamily,
    IndexSet,
    Intersection,
    PolyImage,
    Powers,
    TailSolution,
    Union,
)
from roughlab.services.sequence_model import (
    Atom,
    FamilyPiece,
    Pair,
    PieceModel,
    PiecewiseSequence,
    make_sequence,
)
from roughlab.services.terms import (
    Const,
    Exponential,
    IndexedConst,
    Monomial,
    ProbFn,
    ReciprocalShift,
    ValueFn,
)

log = structlog.get_logger(__name__)

INDEPENDENT = "independent"
JOINT = "joint"

# Largest integer exponent accepted in `expr ^ k`.
MAX_EXPONENT = 64


# ── Document ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class MetricQuery:
    n: int


@dataclass(frozen=True)
class LimitQuery:
    r: Fraction
    eps: tuple[Fraction, ...] = ()
    delta: tuple[Fraction, ...] = ()


@dataclass(frozen=True)
class ClusterQuery:
    r: Fraction


@dataclass(frozen=True)
class KyFanQuery:
    pass


@dataclass(frozen=True)
class DiameterQuery:
    r: Fraction
    members: tuple[FiniteDist, ...]


@dataclass(frozen=True)
class Candidate:
    law: FiniteDist
    diagonal: bool = False


@dataclass(frozen=True)
class SandwichQuery:
    r: Fraction
    star: FiniteDist
    candidates: tuple[Candidate, ...]


Query = MetricQuery | LimitQuery | ClusterQuery | KyFanQuery | DiameterQuery | SandwichQuery


@dataclass(frozen=True)
class SpecDocument:
    ideal: Ideal
    sequence: PiecewiseSequence
    target: FiniteDist
    coupling: str = INDEPENDENT
    queries: tuple[Query, ...] = field(default=())


# ── Scanner ─────────────────────────────────────────────────────────────────

_TOKENS = [
    ("COMMENT", r"#[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SPACE", r"[ \t\r]+"),
    ("FLOAT", r"\d+\.\d*|\.\d+|\d+[eE][-+]?\d+"),
    ("INT", r"\d+"),
    ("NAME", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("OP", r"[{}()\[\],;|&~\\+\-*/^]"),
    ("MISMATCH", r"."),
]
_PATTERN = re.compile("|".join(f"(?P<{kind}>{rx})" for kind, rx in _TOKENS))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens, line, start = [], 1, 0
    for m in _PATTERN.finditer(text):
        kind, lexeme = m.lastgroup, m.group()
        column = m.start() - start + 1
        if kind == "NEWLINE":
            line, start = line + 1, m.end()
        elif kind in ("SPACE", "COMMENT"):
            continue
        elif kind == "FLOAT":
            raise SpecSyntaxError(f"floating-point literal {lexeme!r} not accepted; write p/q",
                                  line, column, ("integer", "fraction"))
        elif kind == "MISMATCH":
            raise SpecSyntaxError(f"unexpected character {lexeme!r}", line, column)
        else:
            tokens.append(Token(kind, lexeme, line, column))
    tokens.append(Token("END", "", line, len(text) - start + 1))
    return tokens


# ── Term algebra ────────────────────────────────────────────────────────────
# Expressions parse to small tuples, then evaluate in one of two algebras:
# sums of c*n^e and c*b^n (no j), or quotients of polynomials in j (no n).

_N = "n"
_B = "b"


def _mul_key(k1: tuple, k2: tuple) -> tuple:
    if k1[0] == _N and k2[0] == _N:
        return (_N, k1[1] + k2[1])
    if k1[0] == _B and k2[0] == _B:
        base = k1[1] * k2[1]
        return (_N, 0) if base == 1 else (_B, base)
    power, expo = (k1, k2) if k1[0] == _N else (k2, k1)
    if power[1] != 0:
        raise GrammarViolation("products of powers of n with exponentials are outside the grammar")
    return expo


def _clean(terms: dict) -> dict:
    return {k: c for k, c in terms.items() if c}


def _add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, Fraction(0)) + sign * c
    return _clean(out)


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            k = _mul_key(k1, k2)
            out[k] = out.get(k, Fraction(0)) + c1 * c2
    return _clean(out)


def _inverse(a: dict) -> dict:
    if len(a) != 1:
        raise GrammarViolation("division only by a single term")
    (kind, x), c = next(iter(a.items()))
    if kind == _N:
        return {(_N, -x): 1 / c}
    return {(_B, 1 / x): 1 / c}


def _as_constant(a: dict) -> Fraction:
    if not a:
        return Fraction(0)
    if set(a) != {(_N, 0)}:
        raise GrammarViolation("expected a constant")
    return a[(_N, 0)]


def _eval_n(node: tuple) -> dict:
    op = node[0]
    if op == "num":
        return _clean({(_N, 0): node[1]})
    if op == "var":
        if node[1] == "j":
            raise GrammarViolation("n and j cannot be mixed in one term")
        return {(_N, 1): Fraction(1)}
    if op == "neg":
        return _add({}, _eval_n(node[1]), -1)
    left = _eval_n(node[1])
    if op == "^":
        if node[2] == ("var", "n"):
            base = _as_constant(left)
            if base <= 0:
                raise GrammarViolation("exponential base must be positive")
            return {(_N, 0): Fraction(1)} if base == 1 else {(_B, base): Fraction(1)}
        k = _as_constant(_eval_n(node[2]))
        if k.denominator != 1 or abs(k) > MAX_EXPONENT:
            raise GrammarViolation("exponents are integers of modest size or n")
        out = {(_N, 0): Fraction(1)}
        for _ in range(abs(int(k))):
            out = _mul(out, left)
        return out if k >= 0 else _inverse(out)
    right = _eval_n(node[2])
    if op == "+":
        return _add(left, right)
    if op == "-":
        return _add(left, right, -1)
    if op == "*":
        return _mul(left, right)
    if not right:
        raise GrammarViolation("division by zero")
    return _mul(left, _inverse(right))


def _pmul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for k, y in enumerate(b):
            out[i + k] += x * y
    return out


def _padd(a: list[Fraction], b: list[Fraction], sign: int = 1) -> list[Fraction]:
    size = max(len(a), len(b))
    a = a + [Fraction(0)] * (size - len(a))
    b = b + [Fraction(0)] * (size - len(b))
    return [x + sign * y for x, y in zip(a, b)]


def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def _eval_j(node: tuple) -> tuple[list[Fraction], list[Fraction]]:
    op = node[0]
    if op == "num":
        return [node[1]], [Fraction(1)]
    if op == "var":
        if node[1] == "n":
            raise GrammarViolation("n and j cannot be mixed in one term")
        return [Fraction(0), Fraction(1)], [Fraction(1)]
    if op == "neg":
        num, den = _eval_j(node[1])
        return [-x for x in num], den
    n1, d1 = _eval_j(node[1])
    if op == "^":
        k = _as_constant(_eval_n(node[2]))
        if k.denominator != 1 or abs(k) > MAX_EXPONENT:
            raise GrammarViolation("exponents are integers of modest size")
        num, den = [Fraction(1)], [Fraction(1)]
        for _ in range(abs(int(k))):
            num, den = _pmul(num, n1), _pmul(den, d1)
        return (num, den) if k >= 0 else (den, num)
    n2, d2 = _eval_j(node[2])
    if op in ("+", "-"):
        sign = 1 if op == "+" else -1
        return _padd(_pmul(n1, d2), _pmul(n2, d1), sign), _pmul(d1, d2)
    if op == "*":
        return _pmul(n1, n2), _pmul(d1, d2)
    if all(x == 0 for x in n2):
        raise GrammarViolation("division by zero")
    return _pmul(n1, d2), _pmul(d1, n2)


def _uses(node: tuple, name: str) -> bool:
    if node[0] == "var":
        return node[1] == name
    return any(_uses(child, name) for child in node[1:] if isinstance(child, tuple))


def _linear(num: list[Fraction], den: list[Fraction]) -> tuple[Fraction, ...]:
    num, den = _trim(num), _trim(den)
    if len(num) > 2 or len(den) > 2:
        raise GrammarViolation("j-terms are quotients of linear expressions in j")
    a, b = (num + [Fraction(0)])[1], num[0]
    c, d = (den + [Fraction(0)])[1], den[0]
    return a, b, c, d


def value_term(node: tuple) -> ValueFn:
    if _uses(node, "j"):
        a, b, c, d = _linear(*_eval_j(node))
        if c < 0 or (c == 0 and d < 0):
            a, b, c, d = -a, -b, -c, -d
        if a * d == b * c:
            return Const(b / d if d else a / c)
        return IndexedConst(a, b, c, d)
    terms = _eval_n(node)
    if not terms:
        return Const(Fraction(0))
    if len(terms) != 1:
        raise GrammarViolation("a value is a single term (constant, c*n^k, c/n^k or c*b^n)")
    (kind, x), c = next(iter(terms.items()))
    if kind == _B:
        if x < 1:
            raise GrammarViolation("exponential values need base > 1")
        return Exponential(c, x)
    if x == 0:
        return Const(c)
    return Monomial(c, x) if x > 0 else ReciprocalShift(c, -x)


def prob_term(node: tuple) -> ProbFn:
    if _uses(node, "j"):
        raise GrammarViolation("probabilities do not depend on j")
    const, recips, geoms = Fraction(0), {}, {}
    for (kind, x), c in _eval_n(node).items():
        if kind == _B:
            if not 0 < x < 1:
                raise GrammarViolation("geometric probability terms need base in (0, 1)")
            geoms[x] = c
        elif x == 0:
            const = c
        elif x < 0:
            recips[-x] = c
        else:
            raise GrammarViolation("probabilities cannot grow like n^k")
    return ProbFn.make(const, recips, geoms)


# ── Parser ──────────────────────────────────────────────────────────────────


class Parser:
    def __init__(self, text: str, horizon: int | None = None) -> None:
        self.tokens = tokenize(text)
        self.pos = 0
        self.horizon = settings.coverage_horizon if horizon is None else horizon

    # token helpers
    @property
    def token(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, text: str) -> bool:
        return self.token.kind in ("NAME", "OP") and self.token.text == text

    def accept(self, text: str) -> bool:
        if self.peek(text):
            self.pos += 1
            return True
        return False

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> SpecSyntaxError:
        tok = self.token
        found = "end of input" if tok.kind == "END" else repr(tok.text)
        return SpecSyntaxError(f"{message}, found {found}", tok.line, tok.column, expected)

    def expect(self, text: str) -> Token:
        tok = self.token
        if not self.accept(text):
            raise self.fail(f"expected {text!r}", (text,))
        return tok

    def expect_int(self) -> int:
        tok = self.token
        if tok.kind != "INT":
            raise self.fail("expected an integer", ("integer",))
        self.pos += 1
        return int(tok.text)

    def choice(self, options: tuple[str, ...]) -> str:
        tok = self.token
        if tok.kind == "NAME" and tok.text in options:
            self.pos += 1
            return tok.text
        raise self.fail("expected one of " + ", ".join(options), options)

    @contextmanager
    def at(self, tok: Token) -> Iterator[None]:
        """Report domain errors raised while building a construct at the token's position."""
        try:
            yield
        except (SpecSyntaxError, SpecSemanticError):
            raise
        except RoughLabError as exc:
            raise SpecSemanticError(exc.message, tok.line, tok.column, cause=exc.code) from exc
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecSemanticError(str(exc), tok.line, tok.column) from exc

    # expressions
    def expr(self) -> tuple:
        node = self.term()
        while self.peek("+") or self.peek("-"):
            op = self.token.text
            self.pos += 1
            node = (op, node, self.term())
        return node

    def term(self) -> tuple:
        node = self.unary()
        while self.peek("*") or self.peek("/"):
            op = self.token.text
            self.pos += 1
            node = (op, node, self.unary())
        return node

    def unary(self) -> tuple:
        if self.accept("-"):
            return ("neg", self.unary())
        node = self.primary()
        if self.accept("^"):
            return ("^", node, self.unary())
        return node

    def primary(self) -> tuple:
        tok = self.token
        if tok.kind == "INT":
            self.pos += 1
            return ("num", Fraction(int(tok.text)))
        if tok.kind == "NAME" and tok.text in ("n", "j"):
            self.pos += 1
            return ("var", tok.text)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        raise self.fail("expected a number, n, j or '('", ("integer", "n", "j", "("))

    def rational(self) -> Fraction:
        tok = self.token
        node = self.expr()
        with self.at(tok):
            if _uses(node, "n") or _uses(node, "j"):
                raise GrammarViolation("expected a rational constant")
            return _as_constant(_eval_n(node))

    def rational_set(self) -> tuple[Fraction, ...]:
        self.expect("{")
        values = []
        if not self.peek("}"):
            values.append(self.rational())
            while self.accept(","):
                values.append(self.rational())
        self.expect("}")
        return tuple(sorted(set(values)))

    # index sets:  union < (& | \) < ~
    def index_set(self) -> IndexSet:
        parts = [self.set_term()]
        while self.accept("|"):
            parts.append(self.set_term())
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def set_term(self) -> IndexSet:
        node = self.set_factor()
        while self.peek("&") or self.peek("\\"):
            if self.accept("&"):
                node = Intersection((node, self.set_factor()))
            else:
                self.pos += 1
                node = Difference(node, self.set_factor())
        return node

    def set_factor(self) -> IndexSet:
        if self.accept("~"):
            return Complement(self.set_factor())
        if self.accept("("):
            inner = self.index_set()
            self.expect(")")
            return inner
        tok = self.token
        name = self.choice(("finite", "full", "ap", "powers", "poly", "dyadic", "tail", "members"))
        with self.at(tok):
            if name == "full":
                return Full()
            if name == "finite":
                return Finite(frozenset(self.int_set()))
            self.expect("(")
            if name == "members":
                family = self.family_head()
                self.expect(",")
                start, stop = self.expect_int(), None
                if self.accept(","):
                    stop = self.expect_int()
                self.expect(")")
                return FamilyUnion(family, start, stop)
            if name == "tail":
                side = self.choice(("in", "out"))
                self.expect(",")
                n0 = self.expect_int()
                self.expect(",")
                exceptions = self.int_set()
                self.expect(")")
                return TailSolution(side == "in", n0, frozenset(exceptions))
            args = [self.expect_int()]
            while self.accept(","):
                args.append(self.expect_int())
            self.expect(")")
            arity = {"ap": (2,), "powers": (1, 2), "poly": (2,), "dyadic": (1,)}[name]
            if len(args) not in arity:
                raise GrammarViolation(f"{name} takes {' or '.join(map(str, arity))} arguments")
            cls = {"ap": ArithProg, "powers": Powers, "poly": PolyImage, "dyadic": DyadicValuation}[name]
            return cls(*args)

    def int_set(self) -> list[int]:
        self.expect("{")
        values = []
        if not self.peek("}"):
            values.append(self.expect_int())
            while self.accept(","):
                values.append(self.expect_int())
        self.expect("}")
        return values

    def family_head(self) -> IndexFamily:
        tok = self.expect("dyadic")
        self.expect("(")
        node = self.expr()
        self.expect(")")
        exclude = self.index_set() if self.accept("exclude") else None
        with self.at(tok):
            a, b, c, d = _linear(*_eval_j(node))
            if c != 0 or d != 1 or a.denominator != 1 or b.denominator != 1:
                raise GrammarViolation("family valuation must be step*j + shift with integer step and shift")
            return IndexFamily(int(a), int(b), exclude)

    # laws
    def law_body(self) -> FiniteDist:
        tok = self.expect("{")
        atoms = []
        while self.accept("atom"):
            value = self.rational()
            self.expect("prob")
            atoms.append((value, self.rational()))
            self.accept(";")
        self.expect("}")
        with self.at(tok):
            return make_dist(REAL_LINE, atoms)

    # sequence
    def piece_body(self, index: IndexSet | None, tok: Token) -> PieceModel:
        if self.accept("binomial"):
            p = self.rational()
            with self.at(tok):
                return PieceModel(index, binomial=p)
        self.expect("{")
        atoms, pairs = [], []
        while not self.peek("}"):
            kind = self.choice(("atom", "pair"))
            value_tok = self.token
            value_node = self.expr()
            y = None
            if kind == "pair":
                self.expect("with")
                y = self.rational()
            self.expect("prob")
            prob_tok = self.token
            prob_node = self.expr()
            with self.at(value_tok):
                value = value_term(value_node)
            with self.at(prob_tok):
                prob = prob_term(prob_node)
            if kind == "atom":
                atoms.append(Atom(value, prob))
            else:
                pairs.append(Pair(value, y, prob))
            self.accept(";")
        self.expect("}")
        with self.at(tok):
            return PieceModel(index, tuple(atoms), pairs=tuple(pairs))

    def sequence(self) -> PiecewiseSequence:
        head = self.tokens[self.pos - 1]
        self.expect("{")
        pieces, family = [], None
        while not self.accept("}"):
            tok = self.token
            kind = self.choice(("piece", "family"))
            if kind == "piece":
                index = self.index_set()
                pieces.append(self.piece_body(index, tok))
            else:
                if family is not None:
                    raise SpecSemanticError("at most one family per sequence", tok.line, tok.column)
                fam = self.family_head()
                family = FamilyPiece(fam, self.piece_body(None, tok))
        with self.at(head):
            return make_sequence(pieces, family, self.horizon)

    # queries
    def query(self) -> Query:
        tok = self.token
        kind = self.choice(("metric", "limit", "cluster", "kyfan", "diameter", "sandwich"))
        if kind == "metric":
            self.expect("at")
            n = self.expect_int()
            if n < 1:
                raise SpecSemanticError("metric index must be >= 1", tok.line, tok.column)
            return MetricQuery(n)
        if kind == "kyfan":
            return KyFanQuery()
        self.expect("r")
        r = self.rational()
        if r < 0:
            raise SpecSemanticError("roughness degree must be >= 0", tok.line, tok.column)
        if kind == "cluster":
            return ClusterQuery(r)
        if kind == "limit":
            eps = self.rational_set() if self.accept("eps") else ()
            delta = self.rational_set() if self.accept("delta") else ()
            if any(e <= 0 for e in eps) or any(not 0 < d < 1 for d in delta):
                raise SpecSemanticError("eps grid needs eps > 0 and delta grid 0 < delta < 1",
                                        tok.line, tok.column)
            return LimitQuery(r, eps, delta)
        if kind == "diameter":
            self.expect("members")
            self.expect("{")
            members = []
            while self.accept("law"):
                members.append(self.law_body())
            self.expect("}")
            return DiameterQuery(r, tuple(members))
        self.expect("star")
        star = self.law_body()
        self.expect("candidates")
        self.expect("{")
        candidates = []
        while self.accept("law"):
            law_tok = self.token
            law = self.law_body()
            diagonal = self.accept("diagonal")
            if diagonal and law != star:
                raise SpecSemanticError("a diagonal candidate must have the law of the star",
                                        law_tok.line, law_tok.column)
            candidates.append(Candidate(law, diagonal))
        self.expect("}")
        return SandwichQuery(r, star, tuple(candidates))

    # document
    def document(self) -> SpecDocument:
        found: dict = {}
        queries: list[Query] = []
        keywords = ("ideal", "space", "sequence", "target", "coupling", "query")
        while self.token.kind != "END":
            tok = self.token
            kind = self.choice(keywords)
            if kind != "query" and kind in found:
                raise SpecSemanticError(f"duplicate {kind} declaration", tok.line, tok.column)
            if kind == "ideal":
                found[kind] = self.ideal()
            elif kind == "space":
                self.choice(("real",))
                found[kind] = "real"
            elif kind == "sequence":
                found[kind] = (self.sequence(), tok)
            elif kind == "target":
                found[kind] = self.law_body()
            elif kind == "coupling":
                found[kind] = self.choice((INDEPENDENT, JOINT))
            else:
                queries.append(self.query())
            self.accept(";")
        end = self.token
        for required in ("ideal", "sequence", "target"):
            if required not in found:
                raise SpecSemanticError(f"missing {required} declaration", end.line, end.column)
        seq, seq_tok = found["sequence"]
        coupling = found.get("coupling", INDEPENDENT)
        _check_couplings(seq, found["target"], coupling, seq_tok)
        return SpecDocument(found["ideal"], seq, found["target"], coupling, tuple(queries))

    def ideal(self) -> Ideal:
        tok = self.token
        kind = self.choice((FIN, DENSITY, SUMMABLE, EXH))
        if kind != EXH:
            return Ideal(kind)
        submeasure = self.choice(SUBMEASURES)
        depth, rungs, tol = settings.exh_depth, settings.exh_rungs, Fraction(1, 1000)
        while self.peek("depth") or self.peek("rungs") or self.peek("tol"):
            option = self.choice(("depth", "rungs", "tol"))
            if option == "depth":
                depth = self.expect_int()
            elif option == "rungs":
                rungs = self.expect_int()
            else:
                tol = self.rational()
        with self.at(tok):
            return Ideal.exh(submeasure, depth, rungs, tol)


def _check_couplings(seq: PiecewiseSequence, target: FiniteDist, coupling: str, tok: Token) -> None:
    models = list(seq.pieces) + ([seq.family.model] if seq.family else [])
    for model in models:
        if model.binomial is not None:
            continue
        if coupling == INDEPENDENT and model.pairs:
            raise SpecSemanticError(f"piece {model.label} declares joint cells under an independent coupling",
                                    tok.line, tok.column)
        if coupling == JOINT and not model.pairs and not target.is_degenerate:
            raise SpecSemanticError(f"piece {model.label} needs joint cells under a joint coupling",
                                    tok.line, tok.column)
        try:
            model.cells(target)
        except RoughLabError as exc:
            raise SpecSemanticError(exc.message, tok.line, tok.column, cause=exc.code) from exc


def parse(text: str, horizon: int | None = None) -> SpecDocument:
    """Parse and validate a .rcl document."""
    try:
        return Parser(text, horizon).document()
    except (SpecSyntaxError, SpecSemanticError) as exc:
        log.warning("spec_parse_failed", code=exc.code, error=exc.message)
        raise


def _fragment(text: str, rule):
    parser = Parser(text)
    value = rule(parser)
    if parser.token.kind != "END":
        raise parser.fail("unexpected trailing input", ("end of input",))
    return value


def parse_law(text: str) -> FiniteDist:
    """A law block such as `{ atom 0 prob 1/2 atom 2 prob 1/2 }`."""
    return _fragment(text, Parser.law_body)


def parse_index_set(text: str) -> IndexSet:
    return _fragment(text, Parser.index_set)


def parse_ideal(text: str) -> Ideal:
    """An ideal declaration without the leading keyword, e.g. `exh harmonic depth 32`."""
    return _fragment(text, Parser.ideal)


# ── Printer ─────────────────────────────────────────────────────────────────


def _law_text(law: FiniteDist) -> str:
    atoms = " ".join(f"atom {v} prob {p}" for v, p in law.atoms)
    return "{ " + atoms + " }"


def _piece_text(head: str, model: PieceModel) -> list[str]:
    if model.binomial is not None:
        return [f"  {head} binomial {model.binomial}"]
    lines = [f"  {head} {{"]
    lines += [f"    atom {a.value.text()} prob {a.prob.text()}" for a in model.atoms]
    lines += [f"    pair {c.value.text()} with {c.y} prob {c.prob.text()}" for c in model.pairs]
    lines.append("  }")
    return lines


def _grid_text(name: str, values: tuple[Fraction, ...]) -> str:
    return f" {name} {{{', '.join(str(v) for v in values)}}}" if values else ""


def query_text(q: Query) -> str:
    if isinstance(q, MetricQuery):
        return f"query metric at {q.n}"
    if isinstance(q, KyFanQuery):
        return "query kyfan"
    if isinstance(q, ClusterQuery):
        return f"query cluster r {q.r}"
    if isinstance(q, LimitQuery):
        return f"query limit r {q.r}" + _grid_text("eps", q.eps) + _grid_text("delta", q.delta)
    if isinstance(q, DiameterQuery):
        members = " ".join(f"law {_law_text(m)}" for m in q.members)
        return f"query diameter r {q.r} members {{ {members} }}"
    candidates = " ".join(
        f"law {_law_text(c.law)}" + (" diagonal" if c.diagonal else "") for c in q.candidates
    )
    return f"query sandwich r {q.r} star {_law_text(q.star)} candidates {{ {candidates} }}"


def print_document(doc: SpecDocument) -> str:
    lines = [f"ideal {doc.ideal.text()}", "space real", "sequence {"]
    for piece in doc.sequence.pieces:
        lines += _piece_text(f"piece {piece.index.text()}", piece)
    if doc.sequence.family is not None:
        lines += _piece_text(f"family {doc.sequence.family.family.text()}", doc.sequence.family.model)
    lines.append("}")
    lines.append(f"target {_law_text(doc.target)}")
    lines.append(f"coupling {doc.coupling}")
    lines += [query_text(q) for q in doc.queries]
    return "\n".join(lines) + "\n"
