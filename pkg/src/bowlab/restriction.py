"""Fixed-point restrictions: weight monomials, tangent weights, chamber split."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .algebra import LaurentPoly, LinearForm, VarSpace
from .diagram import D5, BraneDiagram, as_diagram, diagram_from_margins, dimension, hw_transition, tu_tv_transition
from .fixedpoints import (
    BCT,
    IntegrityError,
    TieDiagram,
    bct_to_tie,
    build_butterfly,
    map_hw,
    map_tu,
    tie_to_bct,
)


class ChamberError(ValueError):
    """A tangent weight has zero sigma-weight."""


@dataclass(frozen=True, order=True)
class WeightMonomial:
    """u_i * h^s in K-theory, u_i + s*h in cohomology."""

    u: int
    h: int

    def to_json(self) -> dict:
        return {"u": self.u, "h": self.h}

    @classmethod
    def from_json(cls, data) -> "WeightMonomial":
        return cls(int(data["u"]), int(data["h"]))

    def linear_form(self, space: VarSpace) -> LinearForm:
        return LinearForm(space, {f"u{self.u}": 1, "h": self.h})

    def __str__(self) -> str:
        if self.h == 0:
            return f"u{self.u}"
        return f"u{self.u}*h^{self.h}" if self.h != 1 else f"u{self.u}*h"


@dataclass(frozen=True)
class Restriction:
    """Loc_f: for every d3 slot, the sorted multiset of root monomials."""

    fixed_point: BCT
    bundles: tuple[tuple[WeightMonomial, ...], ...]

    def to_json(self) -> dict:
        return {
            "fixed_point": self.fixed_point.to_json(),
            "bundles": [[w.to_json() for w in b] for b in self.bundles[1:-1]],
        }

    @classmethod
    def from_json(cls, data) -> "Restriction":
        inner = tuple(tuple(WeightMonomial.from_json(w) for w in b) for b in data["bundles"])
        return cls(BCT.from_json(data["fixed_point"]), ((),) + inner + ((),))


def _as_tie(f, D: BraneDiagram | None = None) -> TieDiagram:
    if isinstance(f, TieDiagram):
        return f
    return bct_to_tie(f, D)


def loc_K(f: TieDiagram | BCT, D: BraneDiagram | None = None) -> Restriction:
    td = _as_tie(f, D)
    slots: list[list[WeightMonomial]] = [[] for _ in td.diagram.d3]
    for b in build_butterfly(td):
        for k, s in b.dots():
            slots[k].append(WeightMonomial(b.d5, s))
    bundles = tuple(tuple(sorted(x)) for x in slots)
    if tuple(len(x) for x in bundles) != td.diagram.d3:
        raise IntegrityError("restriction sizes do not match the multiplicities")
    return Restriction(tie_to_bct(td), bundles)


def uh_space(D: BraneDiagram) -> VarSpace:
    return VarSpace(as_diagram(D).n, 0, (), True)


def loc_H(f: TieDiagram | BCT, D: BraneDiagram | None = None) -> list[list[LinearForm]]:
    """Cohomological restriction: u_i + s*h for each root monomial."""
    loc = loc_K(f, D)
    space = uh_space(loc_diagram(loc))
    return [[w.linear_form(space) for w in b] for b in loc.bundles]


def loc_diagram(loc: Restriction) -> BraneDiagram:
    return diagram_from_margins(loc.fixed_point.margins)


# tangent bundle


@dataclass(frozen=True, order=True)
class Slot:
    """A tautological bundle ('X', d3 index) or a framing line ('C', D5 index)."""

    kind: str
    index: int

    def __str__(self) -> str:
        return f"xi{self.index}" if self.kind == "X" else f"C{self.index}"


@dataclass(frozen=True, order=True)
class TangentTerm:
    """coeff * h^hpow * Hom(source, target)."""

    source: Slot
    target: Slot
    hpow: int
    coeff: int


@dataclass(frozen=True)
class TangentExpr:
    diagram: BraneDiagram
    terms: tuple[TangentTerm, ...]

    def rank(self) -> int:
        def r(s: Slot) -> int:
            return 1 if s.kind == "C" else self.diagram.d3[s.index]

        return sum(t.coeff * r(t.source) * r(t.target) for t in self.terms)

    def __str__(self) -> str:
        parts = []
        for t in self.terms:
            h = "" if t.hpow == 0 else ("h*" if t.hpow == 1 else f"h^{t.hpow}*")
            parts.append(f"{t.coeff:+d}*{h}Hom({t.source},{t.target})")
        return " ".join(parts)


def tangent_expression(D: BraneDiagram | str) -> TangentExpr:
    D = as_diagram(D)
    acc: Counter = Counter()

    def add(src: Slot, tgt: Slot, hpow: int, c: int) -> None:
        for s in (src, tgt):
            if s.kind == "X" and D.d3[s.index] == 0:
                return
        acc[(src, tgt, hpow)] += c

    u = 0
    for k, b in enumerate(D.branes):
        minus, plus = Slot("X", k), Slot("X", k + 1)
        if b == D5:
            u += 1
            cu = Slot("C", u)
            add(plus, minus, 0, 1)
            add(plus, cu, 1, 1)
            add(cu, minus, 0, 1)
            add(minus, minus, 1, 1)
            add(plus, plus, 1, 1)
            add(plus, minus, 1, -1)
        else:
            add(plus, minus, 1, 1)
            add(minus, plus, 0, 1)
    for k in range(len(D.d3)):
        x = Slot("X", k)
        add(x, x, 0, -1)
        add(x, x, 1, -1)
    terms = tuple(sorted(TangentTerm(s, t, hp, c) for (s, t, hp), c in acc.items() if c))
    return TangentExpr(D, terms)


def _slot_weights(loc: Restriction, slot: Slot) -> tuple[WeightMonomial, ...]:
    if slot.kind == "C":
        return (WeightMonomial(slot.index, 0),)
    return loc.bundles[slot.index]


def tangent_weights(D: BraneDiagram, f) -> Counter:
    """Signed multiset {(a, b, k): mult} of weights u_a/u_b*h^k (a = b means pure h)."""
    D = as_diagram(D)
    loc = loc_K(f, D)
    out: Counter = Counter()
    for t in tangent_expression(D).terms:
        for x in _slot_weights(loc, t.source):
            for y in _slot_weights(loc, t.target):
                # y / x * h^hpow
                if x.u == y.u:
                    key = (0, 0, y.h - x.h + t.hpow)
                else:
                    key = (y.u, x.u, y.h - x.h + t.hpow)
                out[key] += t.coeff
    return Counter({k: v for k, v in out.items() if v})


def weights_to_poly(weights: Counter, space: VarSpace) -> LaurentPoly:
    terms = {}
    n = space.u_count
    for (a, b, k), c in weights.items():
        e = [0] * (n + 1)
        if a:
            e[a - 1] += 1
            e[b - 1] -= 1
        e[n] = k
        terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return LaurentPoly(space, terms)


def tangent_at(D: BraneDiagram | str, f) -> LaurentPoly:
    """Tangent character at f; raises IntegrityError if it is not a genuine character."""
    D = as_diagram(D)
    w = tangent_weights(D, f)
    if any(c < 0 for c in w.values()) or sum(w.values()) != dimension(D):
        raise IntegrityError("tangent reality check failed")
    return weights_to_poly(w, uh_space(D))


def poly_to_weights(p: LaurentPoly) -> Counter:
    n = p.space.u_count
    out: Counter = Counter()
    for e, c in p.terms.items():
        if c.denominator != 1:
            raise IntegrityError("non-integral tangent multiplicity")
        ups = [i + 1 for i in range(n) if e[i] == 1]
        downs = [i + 1 for i in range(n) if e[i] == -1]
        if sum(abs(x) for x in e[:n]) == 0:
            out[(0, 0, e[n])] += int(c)
        elif len(ups) == 1 and len(downs) == 1 and sum(abs(x) for x in e[:n]) == 2:
            out[(ups[0], downs[0], e[n])] += int(c)
        else:
            raise IntegrityError("monomial is not a tangent weight")
    return out


def chamber_split(weights: LaurentPoly | Counter, space: VarSpace | None = None) -> tuple[list[LinearForm], list[LinearForm]]:
    """Split into (N+, N-) by the sign of the sigma-weight a - b of u_a/u_b*h^k."""
    if isinstance(weights, LaurentPoly):
        space = space or weights.space
        weights = poly_to_weights(weights)
    if space is None:
        n = max([a for a, _, _ in weights] + [b for _, b, _ in weights] + [0])
        space = VarSpace(n, 0, (), True)
    plus: list[LinearForm] = []
    minus: list[LinearForm] = []
    for (a, b, k), mult in sorted(weights.items()):
        if a == b:
            raise ChamberError(f"zero chamber weight h^{k}")
        form = LinearForm(space, {f"u{a}": 1, f"u{b}": -1, "h": k})
        (plus if a > b else minus).extend([form] * mult)
    return plus, minus


def symplectic_pairing_ok(weights: Counter) -> bool:
    """The weight multiset is closed under w -> h/w."""
    dual = Counter({(b, a, 1 - k) if a else (0, 0, 1 - k): c for (a, b, k), c in weights.items()})
    return dual == weights


# transition checks


def _multiset_sub(a: Counter, b: Counter) -> Counter | None:
    out = Counter(a)
    out.subtract(b)
    if any(v < 0 for v in out.values()):
        return None
    return Counter({k: v for k, v in out.items() if v})


def _twist(ws: Iterable[WeightMonomial], u: int, shift: int) -> Counter:
    return Counter(WeightMonomial(w.u, w.h + shift) if w.u == u else w for w in ws)


def hw_ktheory_check(D: BraneDiagram | str, pos: int, f, diagnostics: list | None = None) -> bool:
    """Exact-sequence identity across the Hanany-Witten move at pos.

    Let U be the D5 brane of the pair and rho: u_U -> u_U*h^e with e = -1 if U
    moves right and e = +1 if it moves left.  Then every bundle away from the
    pair satisfies Loc~ = rho(Loc), and the new middle bundle is
    rho(xi1 + xi3 - xi2) + C~, where C~ = u_U when U ends up right of the
    NS5 brane and u_U*h when it ends up left.
    """
    D = as_diagram(D)
    t = f if isinstance(f, BCT) else _as_bct(f)
    D2 = hw_transition(D, pos)
    t2 = map_hw(t, D, pos)
    old = loc_K(t, D).bundles
    new = loc_K(t2, D2).bundles
    u = sum(1 for b in D.branes[: pos + 2] if b == D5)
    moves_right = D.branes[pos] == D5
    e = -1 if moves_right else 1
    framing = WeightMonomial(u, 0 if moves_right else 1)
    mid = pos + 1
    for k in range(len(D.d3)):
        if k == mid:
            gained = _twist(old[k - 1], u, e) + _twist(old[k + 1], u, e)
            gained[framing] += 1
            expected = _multiset_sub(gained, _twist(old[k], u, e))
            if expected is None:
                _note(diagnostics, "multiset subtraction undefined", k)
                return False
            if expected != Counter(new[k]):
                _note(diagnostics, "middle bundle mismatch", k)
                return False
        elif _twist(old[k], u, e) != Counter(new[k]):
            _note(diagnostics, "bundle mismatch", k)
            return False
    return True


def _note(diagnostics, message, k):
    if diagnostics is not None:
        diagnostics.append((message, k))


def _as_bct(f) -> BCT:
    return tie_to_bct(f)


def _swap_u(ws: Iterable[WeightMonomial], a: int, b: int) -> Counter:
    def s(w):
        if w.u == a:
            return WeightMonomial(b, w.h)
        if w.u == b:
            return WeightMonomial(a, w.h)
        return w

    return Counter(s(w) for w in ws)


def tu_ktheory_check(D: BraneDiagram | str, pos: int, f, diagnostics: list | None = None) -> bool:
    """s(Loc_f xi_2) = Loc_f~(xi_1 + xi_3 - xi~_2), s swapping u_k and u_{k+1}; other bundles match under s."""
    D = as_diagram(D)
    t = f if isinstance(f, BCT) else _as_bct(f)
    D2 = tu_tv_transition(D, pos)
    t2 = map_tu(t, D, pos)
    old = loc_K(t, D).bundles
    new = loc_K(t2, D2).bundles
    k = sum(1 for b in D.branes[:pos] if b == D5) + 1
    mid = pos + 1
    for x in range(len(D.d3)):
        lhs = _swap_u(old[x], k, k + 1)
        if x == mid:
            rhs = _multiset_sub(Counter(new[x - 1]) + Counter(new[x + 1]), Counter(new[x]))
            if rhs is None:
                _note(diagnostics, "multiset subtraction undefined", x)
                return False
            if rhs != lhs:
                _note(diagnostics, "middle bundle mismatch", x)
                return False
        elif lhs != Counter(new[x]):
            _note(diagnostics, "bundle mismatch", x)
            return False
    return True
