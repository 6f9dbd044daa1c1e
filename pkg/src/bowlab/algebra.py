"""Exact arithmetic for bowlab.

Sparse multivariate Laurent polynomials with rational coefficients, linear
forms, factored rational expressions (products of linear forms with integer
exponents), root symmetrization and limits in the auxiliary variable eps.

Every value is immutable once built.  Polynomials live in a ``VarSpace`` that
fixes the variable order u's < v's < h < x's < eps.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence


class AlgebraError(Exception):
    """Base class for algebra failures."""


class UsageError(AlgebraError):
    """Operands or arguments do not fit the operation."""


class NonInvertibleSubstitution(AlgebraError):
    pass


class PoleError(AlgebraError):
    """A factor with negative exponent became identically zero."""


class LimitDoesNotExist(AlgebraError):
    """The eps -> 0 limit has a pole or the value is not a polynomial."""

    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order


def scalar(value) -> Fraction:
    """Coerce ints, Fractions and decimal strings such as '3/4' to Fraction."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


# Variable spaces


def root_name(i: int, j: int) -> str:
    return f"x{i}_{j}"


@dataclass(frozen=True)
class VarSpace:
    """Ordered variable set u1..un, v1..vm, h, x_{i,j}..., eps."""

    u_count: int = 0
    kahler_count: int = 0
    chern_roots: tuple[tuple[int, int], ...] = ()
    has_h: bool = True
    has_eps: bool = False
    names: tuple[str, ...] = field(init=False, compare=False, repr=False)
    _index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        names = [f"u{i}" for i in range(1, self.u_count + 1)]
        names += [f"v{i}" for i in range(1, self.kahler_count + 1)]
        if self.has_h:
            names.append("h")
        names += [root_name(i, j) for (i, j) in self.chern_roots]
        if self.has_eps:
            names.append("eps")
        if len(set(names)) != len(names):
            raise UsageError("duplicate variable names in VarSpace")
        object.__setattr__(self, "chern_roots", tuple(tuple(r) for r in self.chern_roots))
        object.__setattr__(self, "names", tuple(names))
        object.__setattr__(self, "_index", {n: k for k, n in enumerate(names)})

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UsageError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def with_eps(self) -> "VarSpace":
        return VarSpace(self.u_count, self.kahler_count, self.chern_roots, self.has_h, True)

    def without_eps(self) -> "VarSpace":
        return VarSpace(self.u_count, self.kahler_count, self.chern_roots, self.has_h, False)

    def without_roots(self) -> "VarSpace":
        return VarSpace(self.u_count, self.kahler_count, (), self.has_h, self.has_eps)

    def __hash__(self):
        return hash((self.u_count, self.kahler_count, self.chern_roots, self.has_h, self.has_eps))


# Raw sparse polynomial helpers.  A raw polynomial is a dict mapping exponent
# tuples to nonzero coefficients (int or Fraction).


def _padd_into(acc: dict, other: Mapping, factor=1) -> None:
    for e, c in other.items():
        v = acc.get(e, 0) + factor * c
        if v:
            acc[e] = v
        else:
            acc.pop(e, None)


def _pmul(a: Mapping, b: Mapping) -> dict:
    if len(a) < len(b):
        a, b = b, a
    out: dict = {}
    for eb, cb in b.items():
        for ea, ca in a.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                del out[e]
    return out


def _pmul_linear(a: Mapping, lin: Sequence[tuple[int, object]], const, width: int) -> dict:
    """Multiply raw polynomial ``a`` by sum(coef * var_k) + const."""
    out: dict = {}
    if const:
        for e, c in a.items():
            out[e] = c * const
    for k, coef in lin:
        for e, c in a.items():
            e2 = e[:k] + (e[k] + 1,) + e[k + 1:]
            v = out.get(e2, 0) + c * coef
            if v:
                out[e2] = v
            else:
                del out[e2]
    return out


def _normalize_coef(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


# Laurent polynomials


class LaurentPoly:
    """Sparse Laurent polynomial over a VarSpace with rational coefficients."""

    __slots__ = ("space", "terms", "_hash")

    def __init__(self, space: VarSpace, terms: Mapping | None = None):
        clean = {}
        n = len(space)
        if terms:
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != n:
                    raise UsageError("exponent vector width does not match VarSpace")
                c = scalar(c)
                if c:
                    clean[e] = clean.get(e, Fraction(0)) + c
                    if not clean[e]:
                        del clean[e]
        self.space = space
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, space: VarSpace, terms: dict) -> "LaurentPoly":
        p = cls.__new__(cls)
        p.space = space
        p.terms = {e: (c if isinstance(c, Fraction) else Fraction(c)) for e, c in terms.items() if c}
        p._hash = None
        return p

    # constructors
    @classmethod
    def zero(cls, space: VarSpace) -> "LaurentPoly":
        return cls._raw(space, {})

    @classmethod
    def const(cls, space: VarSpace, c) -> "LaurentPoly":
        return cls._raw(space, {(0,) * len(space): scalar(c)} if c else {})

    @classmethod
    def var(cls, space: VarSpace, name: str, power: int = 1) -> "LaurentPoly":
        e = [0] * len(space)
        e[space.index(name)] = power
        return cls._raw(space, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, space: VarSpace, exps: Mapping[str, int], coef=1) -> "LaurentPoly":
        e = [0] * len(space)
        for name, p in exps.items():
            e[space.index(name)] += p
        return cls._raw(space, {tuple(e): scalar(coef)})

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_polynomial(self) -> bool:
        return all(min(e, default=0) >= 0 for e in self.terms)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(self.terms.items())

    def total_degree(self) -> int | None:
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def degree_in(self, name: str) -> int | None:
        k = self.space.index(name)
        if not self.terms:
            return None
        return max(e[k] for e in self.terms)

    def coefficients(self) -> list[Fraction]:
        return [c for _, c in self.sorted_terms()]

    # arithmetic
    def _check(self, other: "LaurentPoly") -> None:
        if not isinstance(other, LaurentPoly):
            raise UsageError("operand is not a LaurentPoly")
        if other.space != self.space:
            raise UsageError("mismatched VarSpace")

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(self.space, other)
        raise UsageError(f"cannot combine LaurentPoly with {type(other).__name__}")

    def __add__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        acc = dict(self.terms)
        _padd_into(acc, other.terms)
        return LaurentPoly._raw(self.space, acc)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._raw(self.space, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        acc = dict(self.terms)
        _padd_into(acc, other.terms, -1)
        return LaurentPoly._raw(self.space, acc)

    def __rsub__(self, other) -> "LaurentPoly":
        return (-self) + other

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, (int, Fraction)):
            return LaurentPoly._raw(self.space, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        return LaurentPoly._raw(self.space, _pmul(self.terms, other.terms))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            if not self.is_monomial():
                raise UsageError("negative power of a non-monomial")
            (e, c), = self.terms.items()
            return LaurentPoly._raw(self.space, {tuple(-x * -n for x in e): Fraction(1) / c ** -n})
        result = LaurentPoly.const(self.space, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.const(self.space, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self.terms.items())))
        return self._hash

    def div_scalar(self, c) -> "LaurentPoly":
        c = scalar(c)
        if not c:
            raise ZeroDivisionError("division of polynomial by zero")
        return LaurentPoly._raw(self.space, {e: v / c for e, v in self.terms.items()})

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        """Evaluate at a point given for every variable that occurs."""
        total = Fraction(0)
        names = self.space.names
        for e, c in self.terms.items():
            t = c
            for k, p in enumerate(e):
                if p:
                    t *= scalar(values[names[k]]) ** p
            total += t
        return total

    def map_monomials(self, fn) -> "LaurentPoly":
        """Apply fn to every exponent vector (used for variable relabelings)."""
        acc: dict = {}
        for e, c in self.terms.items():
            e2 = tuple(fn(e))
            v = acc.get(e2, 0) + c
            if v:
                acc[e2] = v
            else:
                acc.pop(e2, None)
        return LaurentPoly._raw(self.space, acc)

    def monomials(self) -> Iterator[tuple[dict[str, int], Fraction]]:
        names = self.space.names
        for e, c in self.sorted_terms():
            yield {names[k]: p for k, p in enumerate(e) if p}, c

    # output
    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        return format_poly(self)

    def to_json(self) -> dict:
        terms = []
        for e, c in self.sorted_terms():
            terms.append({"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)})
        return {"vars": list(self.space.names), "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping, space: VarSpace | None = None) -> "LaurentPoly":
        names = list(data["vars"])
        if space is None:
            space = space_from_names(names)
        if list(space.names) != names:
            raise UsageError("JSON variable list does not match VarSpace")
        terms = {}
        for t in data["terms"]:
            terms[tuple(t["exp"])] = Fraction(int(t["num"]), int(t["den"]))
        return cls(space, terms)


def space_from_names(names: Sequence[str]) -> VarSpace:
    us = [n for n in names if re.fullmatch(r"u\d+", n)]
    vs = [n for n in names if re.fullmatch(r"v\d+", n)]
    roots = []
    for n in names:
        m = re.fullmatch(r"x(\d+)_(\d+)", n)
        if m:
            roots.append((int(m.group(1)), int(m.group(2))))
    space = VarSpace(len(us), len(vs), tuple(roots), "h" in names, "eps" in names)
    if list(space.names) != list(names):
        raise UsageError("variable list is not in canonical VarSpace order")
    return space


def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: LaurentPoly) -> str:
    if not p.terms:
        return "0"
    names = p.space.names
    # highest total degree first, then reverse lexicographic for readability
    items = sorted(p.terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))
    out = []
    for e, c in items:
        mon = []
        for k, x in enumerate(e):
            if x == 1:
                mon.append(names[k])
            elif x:
                mon.append(f"{names[k]}^{x}")
        body = "*".join(mon)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if body and a == 1:
            txt = body
        elif body:
            txt = f"{_fmt_coef(a)}*{body}"
        else:
            txt = _fmt_coef(a)
        out.append((sign, txt))
    head = ("-" if out[0][0] == "-" else "") + out[0][1]
    return head + "".join(f" {s} {t}" for s, t in out[1:])


# Expression parser: integers, variables, + - * ^ and parentheses.

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def parse_poly(text: str, space: VarSpace) -> LaurentPoly:
    """Parse an arithmetic expression such as '(u1-u3)*(u2-u3+2*h)'."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise UsageError(f"cannot parse expression at offset {pos}: {text!r}")
        num, name, op = m.groups()
        tokens.append(("n", int(num)) if num else ("v", name) if name else ("o", "^" if op == "**" else op))
        pos = m.end()
    tokens.append(("end", None))
    k = 0

    def peek():
        return tokens[k]

    def take():
        nonlocal k
        k += 1
        return tokens[k - 1]

    def expr():
        neg = False
        if peek() == ("o", "-"):
            take()
            neg = True
        elif peek() == ("o", "+"):
            take()
        val = term()
        if neg:
            val = -val
        while peek() in (("o", "+"), ("o", "-")):
            op = take()[1]
            rhs = term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term():
        val = power()
        while True:
            if peek() == ("o", "*"):
                take()
                val = val * power()
            elif peek() == ("o", "/"):
                take()
                rhs = power()
                if rhs.is_monomial():
                    val = val * rhs ** -1
                else:
                    raise UsageError("division by a non-monomial")
            elif peek()[0] in ("n", "v") or peek() == ("o", "("):
                val = val * power()
            else:
                return val

    def power():
        base = atom()
        if peek() == ("o", "^"):
            take()
            sign = 1
            if peek() == ("o", "-"):
                take()
                sign = -1
            if peek() == ("o", "("):
                take()
                if peek() == ("o", "-"):
                    take()
                    sign = -sign
                t = take()
                if take() != ("o", ")"):
                    raise UsageError("bad exponent")
            else:
                t = take()
            if t[0] != "n":
                raise UsageError("exponent must be an integer")
            return base ** (sign * t[1])
        return base

    def atom():
        t = take()
        if t[0] == "n":
            return LaurentPoly.const(space, t[1])
        if t[0] == "v":
            return LaurentPoly.var(space, t[1])
        if t == ("o", "("):
            val = expr()
            if take() != ("o", ")"):
                raise UsageError("unbalanced parentheses")
            return val
        raise UsageError(f"unexpected token {t[1]!r}")

    result = expr()
    if peek()[0] != "end":
        raise UsageError("trailing input in expression")
    return result


# Linear forms


class LinearForm:
    """sum(coef_k * var_k) + const with rational coefficients."""

    __slots__ = ("space", "coefs", "const", "_key")

    def __init__(self, space: VarSpace, coefs: Mapping[int, object] | Sequence, const=0):
        if isinstance(coefs, Mapping):
            vec = [Fraction(0)] * len(space)
            for k, c in coefs.items():
                vec[k if isinstance(k, int) else space.index(k)] += scalar(c)
        else:
            vec = [scalar(c) for c in coefs]
            if len(vec) != len(space):
                raise UsageError("coefficient vector width does not match VarSpace")
        self.space = space
        self.coefs = tuple(vec)
        self.const = scalar(const)
        self._key = None

    @classmethod
    def parse(cls, space: VarSpace, text: str) -> "LinearForm":
        return cls.from_poly(parse_poly(text, space))

    @classmethod
    def from_poly(cls, p: LaurentPoly) -> "LinearForm":
        n = len(p.space)
        vec = [Fraction(0)] * n
        const = Fraction(0)
        for e, c in p.terms.items():
            s = sum(e)
            if s == 0 and all(x == 0 for x in e):
                const += c
            elif s == 1 and all(x in (0, 1) for x in e):
                vec[e.index(1)] += c
            else:
                raise UsageError("polynomial is not linear")
        return cls(p.space, vec, const)

    def is_zero(self) -> bool:
        return not self.const and not any(self.coefs)

    def is_constant(self) -> bool:
        return not any(self.coefs)

    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.coefs, self.const)
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearForm) and self.space == other.space and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_poly(self) -> LaurentPoly:
        n = len(self.space)
        terms = {}
        for k, c in enumerate(self.coefs):
            if c:
                e = [0] * n
                e[k] = 1
                terms[tuple(e)] = c
        if self.const:
            terms[(0,) * n] = self.const
        return LaurentPoly._raw(self.space, terms)

    def scale(self, c) -> "LinearForm":
        c = scalar(c)
        return LinearForm(self.space, [x * c for x in self.coefs], self.const * c)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self.space, [a + b for a, b in zip(self.coefs, other.coefs)], self.const + other.const)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self.space, [a - b for a, b in zip(self.coefs, other.coefs)], self.const - other.const)

    def __neg__(self) -> "LinearForm":
        return self.scale(-1)

    def leading(self) -> Fraction:
        """First nonzero coefficient in variable order, constant last."""
        for c in self.coefs:
            if c:
                return c
        return self.const

    def normalized(self) -> tuple[Fraction, "LinearForm"]:
        """Return (lead, form/lead) so that the form's leading coefficient is 1."""
        lead = self.leading()
        if not lead:
            raise UsageError("zero linear form")
        return lead, self.scale(1 / lead)

    def coefficient(self, name: str) -> Fraction:
        return self.coefs[self.space.index(name)]

    def substitute(self, assignment: Mapping[str, "LinearForm | LaurentPoly"]) -> "LinearForm":
        vec = list(self.coefs)
        const = self.const
        extra = [Fraction(0)] * len(self.space)
        for name, value in assignment.items():
            k = self.space.index(name)
            c = vec[k]
            if not c:
                continue
            vec[k] = Fraction(0)
            if not isinstance(value, LinearForm):
                value = LinearForm.from_poly(value)
            for j, vc in enumerate(value.coefs):
                extra[j] += c * vc
            const += c * value.const
        return LinearForm(self.space, [a + b for a, b in zip(vec, extra)], const)

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        total = self.const
        for k, c in enumerate(self.coefs):
            if c:
                total += c * scalar(values[self.space.names[k]])
        return total

    def __str__(self) -> str:
        return format_poly(self.to_poly())

    def __repr__(self) -> str:
        return f"LinearForm({self})"

    def to_json(self) -> dict:
        return {"vars": list(self.space.names), "coefs": [str(c) for c in self.coefs], "const": str(self.const)}


# Factored rational expressions


class FactoredRational:
    """scalar * prod(form_k ** exp_k) with canonical, merged factors."""

    __slots__ = ("space", "scalar", "factors")

    def __init__(self, space: VarSpace, coef=1, factors: Iterable[tuple[LinearForm, int]] = ()):
        coef = scalar(coef)
        merged: dict[tuple, list] = {}
        for form, e in factors:
            if form.space != space:
                raise UsageError("factor lives in a different VarSpace")
            if e == 0:
                continue
            if form.is_zero():
                if e > 0:
                    coef = Fraction(0)
                    continue
                raise PoleError("zero factor with negative exponent")
            lead, nf = form.normalized()
            coef *= lead ** e
            slot = merged.setdefault(nf.key(), [nf, 0])
            slot[1] += e
        items = []
        if coef:
            for nf, e in merged.values():
                if e == 0:
                    continue
                if nf.is_constant():
                    coef *= nf.const ** e
                    continue
                items.append((nf, e))
            items.sort(key=lambda t: (t[0].key(), t[1]))
        self.space = space
        self.scalar = coef
        self.factors = tuple(items) if coef else ()

    def is_zero(self) -> bool:
        return not self.scalar

    def __mul__(self, other: "FactoredRational") -> "FactoredRational":
        if isinstance(other, (int, Fraction)):
            return FactoredRational(self.space, self.scalar * other, self.factors)
        return FactoredRational(self.space, self.scalar * other.scalar, self.factors + other.factors)

    __rmul__ = __mul__

    def inverse(self) -> "FactoredRational":
        if not self.scalar:
            raise ZeroDivisionError("inverse of zero")
        return FactoredRational(self.space, 1 / self.scalar, [(f, -e) for f, e in self.factors])

    def __eq__(self, other) -> bool:
        return (isinstance(other, FactoredRational) and self.space == other.space
                and self.scalar == other.scalar and self.factors == other.factors)

    def __hash__(self):
        return hash((self.scalar, self.factors))

    def numerator_factors(self) -> list[tuple[LinearForm, int]]:
        return [(f, e) for f, e in self.factors if e > 0]

    def denominator_factors(self) -> list[tuple[LinearForm, int]]:
        return [(f, -e) for f, e in self.factors if e < 0]

    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    def expand(self) -> LaurentPoly:
        """Expand a factored polynomial (all exponents non-negative)."""
        if any(e < 0 for _, e in self.factors):
            raise UsageError("cannot expand a factored expression with denominators")
        n = len(self.space)
        acc = {(0,) * n: self.scalar} if self.scalar else {}
        for form, e in self.factors:
            lin = [(k, c) for k, c in enumerate(form.coefs) if c]
            for _ in range(e):
                acc = _pmul_linear(acc, lin, form.const, n)
        return LaurentPoly._raw(self.space, acc)

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        total = self.scalar
        for form, e in self.factors:
            v = form.evaluate(values)
            if not v and e < 0:
                raise ZeroDivisionError("evaluation hits a pole")
            total *= v ** e
        return total

    def substitute(self, assignment) -> "FactoredRational":
        return substitute(self, assignment)

    def __str__(self) -> str:
        if not self.scalar:
            return "0"
        num = [f"({f})" + (f"^{e}" if e > 1 else "") for f, e in self.factors if e > 0]
        den = [f"({f})" + (f"^{-e}" if e < -1 else "") for f, e in self.factors if e < 0]
        s = self.scalar
        head = "" if s == 1 and num else "-" if s == -1 and num else _fmt_coef(s)
        body = head + ("*" if head and head != "-" and num else "") + "*".join(num)
        if den:
            body = (body or "1") + " / (" + "*".join(den) + ")"
        return body

    def __repr__(self) -> str:
        return f"FactoredRational({self})"


def factored(space: VarSpace, forms: Iterable[str | LinearForm], coef=1, exps: Iterable[int] | None = None) -> FactoredRational:
    forms = [LinearForm.parse(space, f) if isinstance(f, str) else f for f in forms]
    exps = list(exps) if exps is not None else [1] * len(forms)
    return FactoredRational(space, coef, zip(forms, exps))


# substitute


def substitute(p, assignment: Mapping[str, object]):
    """Substitute variables by LaurentPolys (or LinearForms for factored input).

    All replacements happen simultaneously, so u1 -> u1*h is allowed.
    """
    if isinstance(p, FactoredRational):
        new = []
        for form, e in p.factors:
            nf = form.substitute(assignment)
            if nf.is_zero():
                if e > 0:
                    return FactoredRational(p.space, 0)
                raise PoleError(f"factor ({form}) vanishes under substitution")
            new.append((nf, e))
        return FactoredRational(p.space, p.scalar, new)
    if isinstance(p, LinearForm):
        return p.substitute(assignment)
    if not isinstance(p, LaurentPoly):
        raise UsageError("substitute expects a LaurentPoly, LinearForm or FactoredRational")
    space = p.space
    values = {}
    for name, val in assignment.items():
        k = space.index(name)
        if isinstance(val, LinearForm):
            val = val.to_poly()
        elif isinstance(val, (int, Fraction)):
            val = LaurentPoly.const(space, val)
        if val.space != space:
            raise UsageError("substituted value lives in another VarSpace")
        if val == LaurentPoly.var(space, name):
            continue
        values[k] = val
    if not values:
        return p
    idx = sorted(values)
    cache: dict = {}

    def power_of(k, n):
        key = (k, n)
        if key not in cache:
            v = values[k]
            if n < 0 and not v.is_monomial():
                raise NonInvertibleSubstitution(
                    f"non-invertible substitution for {space.names[k]} with exponent {n}")
            cache[key] = v ** n
        return cache[key]

    acc: dict = {}
    for e, c in p.terms.items():
        base = list(e)
        for k in idx:
            base[k] = 0
        term = {tuple(base): c}
        for k in idx:
            if e[k]:
                term = _pmul(term, power_of(k, e[k]).terms)
        _padd_into(acc, term)
    return LaurentPoly._raw(space, acc)


# divisibility


def divides_linear(p: LaurentPoly, f: LinearForm | LaurentPoly) -> bool:
    """True iff p = f*q for a polynomial q."""
    if isinstance(f, LaurentPoly):
        f = LinearForm.from_poly(f)
    if f.is_zero():
        raise UsageError("division by the zero form")
    if not p.is_polynomial():
        raise UsageError("divides_linear expects a polynomial")
    if p.is_zero() or f.is_constant():
        return True
    _, rem = divmod_linear(p, f)
    return rem.is_zero()


def divmod_linear(p: LaurentPoly, f: LinearForm) -> tuple[LaurentPoly, LaurentPoly]:
    """Divide by f with respect to its last occurring variable."""
    if f.space != p.space:
        raise UsageError("mismatched VarSpace")
    ks = [k for k, c in enumerate(f.coefs) if c]
    if not ks:
        raise UsageError("division by a constant form is not a linear division")
    y = ks[-1]
    q, r = _divmod_raw(dict(p.terms), f, y, len(p.space))
    return LaurentPoly._raw(p.space, q), LaurentPoly._raw(p.space, r)


def _divmod_raw(rem: dict, f: LinearForm, y: int, width: int) -> tuple[dict, dict]:
    lead = f.coefs[y]
    others = [(k, c) for k, c in enumerate(f.coefs) if c and k != y]
    const = f.const
    quot: dict = {}
    while True:
        top = None
        for e in rem:
            if e[y] > 0 and (top is None or e[y] > top[y] or (e[y] == top[y] and e > top)):
                top = e
        if top is None:
            return quot, rem
        c = rem[top] / lead if not isinstance(lead, int) or rem[top] % lead else rem[top] // lead
        qe = top[:y] + (top[y] - 1,) + top[y + 1:]
        quot[qe] = quot.get(qe, 0) + c
        # subtract c * qe * f
        del rem[top]
        if const:
            v = rem.get(qe, 0) - c * const
            if v:
                rem[qe] = v
            else:
                rem.pop(qe, None)
        for k, ck in others:
            e2 = qe[:k] + (qe[k] + 1,) + qe[k + 1:]
            v = rem.get(e2, 0) - c * ck
            if v:
                rem[e2] = v
            else:
                rem.pop(e2, None)


# symmetrization


def _check_blocks(expr: FactoredRational, blocks: Sequence[Sequence[str]]) -> None:
    seen = set()
    for b in blocks:
        for name in b:
            if name in seen:
                raise UsageError(f"root {name} appears in two blocks")
            if name not in expr.space:
                raise UsageError(f"unknown root symbol {name}")
            seen.add(name)


def block_permutations(blocks: Sequence[Sequence[str]]) -> Iterator[dict[str, str]]:
    """All maps permuting the names inside each block, identity first."""
    per_block = [list(itertools.permutations(b)) for b in blocks]
    for choice in itertools.product(*per_block):
        mapping = {}
        for b, perm in zip(blocks, choice):
            for src, dst in zip(b, perm):
                if src != dst:
                    mapping[src] = dst
        yield mapping


def symmetrize(expr: FactoredRational, blocks: Sequence[Sequence[str]]) -> list[FactoredRational]:
    """Return prod(len(block)!) summands, expr with roots permuted per block."""
    _check_blocks(expr, blocks)
    space = expr.space
    out = []
    for mapping in block_permutations(blocks):
        if not mapping:
            out.append(expr)
            continue
        assignment = {src: LinearForm(space, {space.index(dst): 1}) for src, dst in mapping.items()}
        out.append(_simultaneous_rename(expr, assignment))
    return out


def _simultaneous_rename(expr: FactoredRational, assignment: Mapping[str, LinearForm]) -> FactoredRational:
    space = expr.space
    perm = list(range(len(space)))
    for src, dst in assignment.items():
        (k,) = [j for j, c in enumerate(dst.coefs) if c]
        perm[space.index(src)] = k
    new = []
    for form, e in expr.factors:
        vec = [Fraction(0)] * len(space)
        for j, c in enumerate(form.coefs):
            if c:
                vec[perm[j]] += c
        new.append((LinearForm(space, vec, form.const), e))
    return FactoredRational(space, expr.scalar, new)


# eps -> 0 limits


class LimitStats:
    """Instrumentation for limit_at_zero, reset per call of ``reset``."""

    def __init__(self):
        self.reset()

    def reset(self):
        self.calls = 0
        self.summands = 0
        self.vanishing = 0
        self.regular = 0
        self.singular = 0
        self.max_pole_order = 0
        self.cancelled_orders = 0
        self.indeterminate = 0

    def snapshot(self) -> dict:
        return dict(calls=self.calls, summands=self.summands, vanishing=self.vanishing,
                    regular=self.regular, singular=self.singular,
                    max_pole_order=self.max_pole_order, cancelled_orders=self.cancelled_orders,
                    indeterminate=self.indeterminate)


LIMIT_STATS = LimitStats()


def _binom(alpha: int, j: int) -> int:
    """Generalized binomial coefficient alpha choose j for integer alpha."""
    num = 1
    for t in range(j):
        num *= alpha - t
    return num // math.factorial(j)


@dataclass
class _Contribution:
    coef: object
    poly: dict
    exps: dict  # form key -> exponent (may be negative)


class _FormTable:
    """Interns linear forms in the eps-free variables."""

    def __init__(self):
        self.forms: dict[tuple, tuple[list, object]] = {}

    def intern(self, lin: tuple, const) -> tuple:
        key = (lin, const)
        if key not in self.forms:
            self.forms[key] = (list(lin), const)
        return key


def _series_summand(c0, factors, width: int, table: _FormTable):
    """Laurent expansion data for one summand.

    factors: list of (lin, const, b, alpha), lin a tuple of (var, coef) pairs in
    the eps-free variables, b the eps coefficient.  Returns (order p, list of
    (order, _Contribution)) for orders p..0, or None if p > 0.
    """
    p = 0
    coef = c0
    regular = []
    for lin, const, b, alpha in factors:
        if not lin and not const:
            if not b:
                if alpha > 0:
                    return None
                raise LimitDoesNotExist("factor vanishes identically under substitution")
            p += alpha
            if alpha >= 0:
                coef *= b ** alpha
            else:
                coef = Fraction(coef) / Fraction(b) ** (-alpha)
        else:
            regular.append((table.intern(lin, const), b, alpha))
    if p > 0:
        return p, []
    m = -p
    # group regular factors by form
    grouped: dict[tuple, list[tuple[object, int]]] = {}
    for key, b, alpha in regular:
        grouped.setdefault(key, []).append((b, alpha))
    exps = {key: sum(a for _, a in lst) for key, lst in grouped.items()}
    one = {(0,) * width: 1}
    if m == 0:
        return p, [(0, _Contribution(coef, one, exps))]
    # scaled series: prod_k (1 + b_k eps / a_k)^alpha_k, coefficient of eps^j
    # carries denominator prod_a a^{j}; we track it with polynomial numerators.
    keys = sorted(grouped)
    # D/a for each form, D = prod of distinct forms
    forms = table.forms
    cofactor: dict[tuple, dict] = {}
    for key in keys:
        acc = dict(one)
        for other in keys:
            if other != key:
                lin, const = forms[other]
                acc = _pmul_linear(acc, lin, const, width)
        cofactor[key] = acc
    series = [dict(one)] + [dict() for _ in range(m)]  # numerators of eps^j, over D^j
    for key in keys:
        cof = cofactor[key]
        cof_pows = [one]
        for _ in range(m):
            cof_pows.append(_pmul(cof_pows[-1], cof))
        for b, alpha in grouped[key]:
            fac = [{e: c * _binom(alpha, j) * b ** j for e, c in cof_pows[j].items()} if _binom(alpha, j) and b
                   else ({} if j else one) for j in range(m + 1)]
            fac[0] = one
            new = [dict() for _ in range(m + 1)]
            # series[i] over D^i; fac[j] over D^j -> product over D^{i+j}
            for i in range(m + 1):
                if not series[i]:
                    continue
                for j in range(m + 1 - i):
                    if not fac[j]:
                        continue
                    _padd_into(new[i + j], _pmul(series[i], fac[j]))
            series = new
    out = []
    for j in range(m + 1):
        if not series[j]:
            continue
        ex = dict(exps)
        for key in keys:
            ex[key] = ex.get(key, 0) - j
        out.append((p + j, _Contribution(coef, series[j], ex)))
    return p, out


def _combine(contribs: list[_Contribution], table: _FormTable, width: int) -> tuple[dict, dict]:
    """Sum contributions over a common denominator: returns (numerator, denominator exps)."""
    denom: dict[tuple, int] = {}
    for ct in contribs:
        for key, e in ct.exps.items():
            if e < 0 and -e > denom.get(key, 0):
                denom[key] = -e
    total: dict = {}
    forms = table.forms
    cache: dict[tuple, dict] = {}

    def form_power(key, n):
        ck = (key, n)
        if ck not in cache:
            if n == 0:
                cache[ck] = {(0,) * width: 1}
            else:
                lin, const = forms[key]
                cache[ck] = _pmul_linear(form_power(key, n - 1), lin, const, width)
        return cache[ck]

    for ct in contribs:
        poly = {e: c * ct.coef for e, c in ct.poly.items()}
        keys = set(ct.exps) | set(denom)
        for key in sorted(keys):
            n = ct.exps.get(key, 0) + denom.get(key, 0)
            if n:
                poly = _pmul(poly, form_power(key, n))
        _padd_into(total, poly)
    return total, denom


def limit_at_zero(summands: Sequence[FactoredRational], eps: str = "eps") -> LaurentPoly:
    """Exact value at eps = 0 of a sum of factored rational functions.

    Every summand is expanded as a Laurent series in eps whose coefficients are
    rational functions in the remaining variables; the negative-order parts
    must cancel across summands and the order-0 part must be a polynomial.
    """
    LIMIT_STATS.calls += 1
    if not summands:
        raise UsageError("empty sum")
    space = summands[0].space
    k_eps = space.index(eps)
    target = VarSpace(space.u_count, space.kahler_count, space.chern_roots, space.has_h, False)
    keep = [k for k in range(len(space)) if k != k_eps]
    width = len(keep)
    remap = {k: i for i, k in enumerate(keep)}
    packed = []
    for s in summands:
        if s.space != space:
            raise UsageError("mismatched VarSpace in sum")
        facs = []
        for form, e in s.factors:
            lin = tuple((remap[k], c) for k, c in enumerate(form.coefs) if c and k != k_eps)
            facs.append((lin, form.const, form.coefs[k_eps], e))
        packed.append((s.scalar, facs))
    value = limit_packed(packed, width)
    return LaurentPoly._raw(target, value)


def limit_packed(packed, width: int) -> dict:
    """Core of limit_at_zero on packed summands.

    packed: iterable of (scalar, [(lin, const, b, alpha), ...]) where lin is a
    tuple of (variable index, coefficient) over ``width`` eps-free variables.
    Returns a raw polynomial dict.
    """
    table = _FormTable()
    by_order: dict[int, list[_Contribution]] = {}
    for c0, facs in packed:
        LIMIT_STATS.summands += 1
        if any(a < 0 and not lin and not const for lin, const, _, a in facs):
            # a denominator factor vanishes at eps = 0: 0/0 or a genuine pole
            LIMIT_STATS.indeterminate += 1
        if not c0:
            LIMIT_STATS.vanishing += 1
            continue
        res = _series_summand(c0, facs, width, table)
        if res is None or res[0] > 0:
            LIMIT_STATS.vanishing += 1
            continue
        p, parts = res
        if p < 0:
            LIMIT_STATS.singular += 1
            LIMIT_STATS.max_pole_order = max(LIMIT_STATS.max_pole_order, -p)
        else:
            LIMIT_STATS.regular += 1
        for order, ct in parts:
            by_order.setdefault(order, []).append(ct)
    for order in sorted(o for o in by_order if o < 0):
        num, _ = _combine(by_order[order], table, width)
        if num:
            raise LimitDoesNotExist(f"coefficient of eps^{order} does not cancel", order)
        LIMIT_STATS.cancelled_orders += 1
    if 0 not in by_order:
        return {}
    num, denom = _combine(by_order[0], table, width)
    for key in sorted(denom):
        lin, const = table.forms[key]
        for _ in range(denom[key]):
            if not num:
                break
            if not lin:
                num = {e: Fraction(c) / const for e, c in num.items()}
                continue
            form = LinearForm(VarSpace(width, 0, (), False, False), [0] * width, const)
            coefs = [0] * width
            for k, c in lin:
                coefs[k] = c
            form = LinearForm(VarSpace(width, 0, (), False, False), coefs, const)
            y = max(k for k, _ in lin)
            q, r = _divmod_raw(num, form, y, width)
            if r:
                raise LimitDoesNotExist("eps^0 coefficient is not a polynomial", 0)
            num = q
    return {e: _normalize_coef(c) for e, c in num.items() if c}
