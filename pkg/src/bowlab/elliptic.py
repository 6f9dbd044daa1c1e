"""Formal checks of the elliptic mirror identity on tables of theta products.

Theta is opaque here.  The only relation used is oddness,
theta(1/x) = -theta(x), which is enough to bring every product to a
canonical form and compare tables after the mirror variable swap.

Arguments are K-theoretic monomials in u_i (equivariant), v_j (Kahler)
and h, plus primed copies u'_i, v'_j for the mirror side.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .algebra import UsageError
from .diagram import DiagramError

_GROUPS = {"u": 0, "v": 1, "u'": 2, "v'": 3, "h": 4}
_VAR_RE = re.compile(r"(u'|v'|u|v)(\d+)|h")


class ThetaError(DiagramError):
    pass


def _var_key(name: str) -> tuple[int, int]:
    m = _VAR_RE.fullmatch(name)
    if not m:
        raise UsageError(f"unknown theta variable {name!r}")
    if name == "h":
        return (_GROUPS["h"], 0)
    return (_GROUPS[m.group(1)], int(m.group(2)))


Monomial = tuple  # tuple of (variable, exponent), sorted by _var_key, exponents nonzero


def monomial(exps: Mapping[str, int]) -> Monomial:
    items = [(k, int(e)) for k, e in exps.items() if int(e) != 0]
    for k, _ in items:
        _var_key(k)
    return tuple(sorted(items, key=lambda t: _var_key(t[0])))


def _invert(m: Monomial) -> Monomial:
    return tuple((k, -e) for k, e in m)


_TOKEN = re.compile(r"\s*((?:u'|v'|u|v)\d+|h)(?:\^\(?(-?\d+)\)?)?\s*")


def _parse_product(text: str) -> dict[str, int]:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    if text.strip() == "1":
        return {}
    out: dict[str, int] = {}
    for part in text.split("*"):
        m = _TOKEN.fullmatch(part)
        if not m:
            raise UsageError(f"cannot parse monomial factor {part!r}")
        out[m.group(1)] = out.get(m.group(1), 0) + int(m.group(2) or 1)
    return out


def parse_monomial(text: str) -> Monomial:
    """Parse 'u2*v2*h^3/(u1*v1)' style text."""
    num, _, den = text.partition("/")
    exps = _parse_product(num)
    if den:
        for k, e in _parse_product(den).items():
            exps[k] = exps.get(k, 0) - e
    return monomial(exps)


def format_monomial(m: Monomial) -> str:
    def prod(items):
        parts = [k if e == 1 else f"{k}^{e}" for k, e in items]
        return "*".join(parts)

    num = [(k, e) for k, e in m if e > 0]
    den = [(k, -e) for k, e in m if e < 0]
    top = prod(num) if num else "1"
    if not den:
        return top
    bottom = prod(den)
    if len(den) > 1:
        bottom = f"({bottom})"
    return f"{top}/{bottom}"


@dataclass(frozen=True)
class ThetaProduct:
    """sign * prod theta(m) over the factor monomials."""

    sign: int
    factors: tuple = field(default=())

    def __mul__(self, other: "ThetaProduct") -> "ThetaProduct":
        return ThetaProduct(self.sign * other.sign, self.factors + other.factors)

    def __neg__(self) -> "ThetaProduct":
        return ThetaProduct(-self.sign, self.factors)

    def __str__(self) -> str:
        body = "".join(f"θ({format_monomial(m)})" for m in self.factors) or "1"
        return ("-" if self.sign < 0 else "") + body

    def to_json(self) -> dict:
        return {"sign": self.sign, "thetas": [dict(m) for m in self.factors]}

    @classmethod
    def from_json(cls, data: Mapping) -> "ThetaProduct":
        sign = int(data["sign"])
        if sign not in (1, -1):
            raise UsageError("theta product sign must be 1 or -1")
        return cls(sign, tuple(monomial(t) for t in data["thetas"]))

    @classmethod
    def parse(cls, args: Iterable[str], sign: int = 1) -> "ThetaProduct":
        return cls(sign, tuple(parse_monomial(a) for a in args))


def theta_canonicalize(t: ThetaProduct) -> ThetaProduct:
    sign = t.sign
    out = []
    for m in t.factors:
        if not m:
            raise ThetaError("degenerate theta")
        if m[0][1] < 0:
            m = _invert(m)
            sign = -sign
        out.append(m)
    out.sort(key=lambda m: [(_var_key(k), e) for k, e in m])
    return ThetaProduct(sign, tuple(out))


def _swap_var(name: str) -> tuple[str, int]:
    if name == "h":
        return "h", -1
    g, i = _VAR_RE.fullmatch(name).group(1, 2)
    return {"u": "v'", "v": "u'", "u'": "v", "v'": "u"}[g] + i, 1


def mirror_swap(t: ThetaProduct | None) -> ThetaProduct | None:
    """Exchange u_i<->v'_i, v_j<->u'_j and h<->1/h, then canonicalize.

    The map is its own inverse.  None stands for a zero entry.
    """
    if t is None:
        return None
    factors = []
    for m in t.factors:
        exps: dict[str, int] = {}
        for k, e in m:
            k2, s = _swap_var(k)
            exps[k2] = exps.get(k2, 0) + s * e
        factors.append(monomial(exps))
    return theta_canonicalize(ThetaProduct(t.sign, tuple(factors)))


@dataclass
class EllipticTable:
    diagram: str
    labels: list[str]
    entries: list[list[ThetaProduct | None]]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise UsageError("elliptic table must be square and match its labels")

    def to_json(self) -> dict:
        return {
            "diagram": self.diagram,
            "labels": list(self.labels),
            "entries": [[0 if e is None else e.to_json() for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "EllipticTable":
        rows = [
            [None if e == 0 else ThetaProduct.from_json(e) for e in row]
            for row in data["entries"]
        ]
        return cls(data["diagram"], list(data["labels"]), rows)

    @classmethod
    def load(cls, path: str) -> "EllipticTable":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def load_fixture(name: str) -> dict:
    """Raw JSON of a shipped fixture (ae, be, ah, bh, gkm1, ...)."""
    ref = resources.files("bowlab") / "data" / f"{name}.json"
    return json.loads(ref.read_text())


def elliptic_fixture(name: str) -> EllipticTable:
    return EllipticTable.from_json(load_fixture(name))


@dataclass
class IdentityReport:
    checked: int
    mismatches: list[dict]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "mismatches": self.mismatches}

    def __str__(self) -> str:
        lines = [f"3d identity: {'pass' if self.ok else 'FAIL'} ({self.checked} entries)"]
        for mm in self.mismatches:
            lines.append(f"  ({mm['k']},{mm['l']}): {mm['lhs']} != {mm['rhs']}")
        return "\n".join(lines)


def _same(a: ThetaProduct | None, b: ThetaProduct | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return theta_canonicalize(a) == theta_canonicalize(b)


def check_3d_identity(S: EllipticTable, Sp: EllipticTable) -> IdentityReport:
    """swap(S[k][l]) == (-1)^(k+l+1) Sp[l][k] for all k, l (1-based)."""
    n = len(S.labels)
    if len(Sp.labels) != n:
        raise UsageError("tables differ in size")
    bad = []
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            lhs = mirror_swap(S.entries[k - 1][l - 1])
            rhs = Sp.entries[l - 1][k - 1]
            if rhs is not None and (k + l + 1) % 2:
                rhs = -rhs
            if not _same(lhs, rhs):
                bad.append({"k": k, "l": l, "lhs": str(lhs or 0), "rhs": str(rhs or 0)})
    return IdentityReport(n * n, bad)


def table_from_args(diagram: str, labels: Sequence[str], rows: Sequence[Sequence]) -> EllipticTable:
    """Build a table from rows of theta-argument lists (0 for a zero entry)."""
    entries = [[None if e == 0 else ThetaProduct.parse(e) for e in row] for row in rows]
    return EllipticTable(diagram, list(labels), entries)
