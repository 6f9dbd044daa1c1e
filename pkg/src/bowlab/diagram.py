"""Brane diagrams: DSL, charges, margins, dimension and transitions."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra import UsageError

log = logging.getLogger(__name__)

NS5 = "NS5"
D5 = "D5"
_SYMBOL = {NS5: "/", D5: "\\"}
_TOKEN = {"/": NS5, "\\": D5, "|": D5}


class DiagramError(Exception):
    """Domain error raised by diagram operations."""


class ParseError(DiagramError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class TransitionError(DiagramError):
    pass


@dataclass(frozen=True)
class BraneDiagram:
    branes: tuple[str, ...]
    d3: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "branes", tuple(self.branes))
        object.__setattr__(self, "d3", tuple(int(x) for x in self.d3))
        if any(b not in (NS5, D5) for b in self.branes):
            raise DiagramError("brane types must be 'NS5' or 'D5'")
        if len(self.d3) != len(self.branes) + 1:
            raise DiagramError("d3 must have one more entry than branes")
        if self.d3 and (self.d3[0] != 0 or self.d3[-1] != 0):
            raise DiagramError("outer D3 multiplicities must be 0")
        if any(x < 0 for x in self.d3):
            raise DiagramError("negative D3 multiplicity")

    # indexing helpers
    @property
    def m(self) -> int:
        return sum(1 for b in self.branes if b == NS5)

    @property
    def n(self) -> int:
        return sum(1 for b in self.branes if b == D5)

    def ns5_positions(self) -> list[int]:
        return [k for k, b in enumerate(self.branes) if b == NS5]

    def d5_positions(self) -> list[int]:
        return [k for k, b in enumerate(self.branes) if b == D5]

    def segments(self) -> list[int]:
        """Indices 1..len(branes)-1 of the inner D3 segments (d3[k] sits left of brane k)."""
        return list(range(1, len(self.branes)))

    def __str__(self) -> str:
        return print_diagram(self)

    def to_json(self) -> dict:
        return {"branes": list(self.branes), "d3": list(self.d3)}

    @classmethod
    def from_json(cls, data) -> "BraneDiagram":
        return cls(tuple(data["branes"]), tuple(data["d3"]))


@dataclass(frozen=True)
class MarginData:
    m: int
    n: int
    r: tuple[int, ...]
    c: tuple[int, ...]
    path: tuple[int, ...]

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "r": list(self.r), "c": list(self.c), "path": list(self.path)}

    @classmethod
    def from_json(cls, data) -> "MarginData":
        return cls(int(data["m"]), int(data["n"]), tuple(data["r"]), tuple(data["c"]), tuple(data["path"]))


@dataclass(frozen=True)
class QuiverSpec:
    v: tuple[int, ...]
    w: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        if len(self.v) != len(self.w):
            raise DiagramError("v and w must have the same length")
        if any(x < 0 for x in self.v + self.w):
            raise DiagramError("quiver data must be non-negative")

    def to_json(self) -> dict:
        return {"v": list(self.v), "w": list(self.w)}


# DSL


def parse_diagram(text: str) -> BraneDiagram:
    """Parse codes like '/2\\2/2\\4/3/3/4\\3/2\\2\\'.  '|' is accepted for '\\'."""
    if not isinstance(text, str):
        raise ParseError("diagram code must be a string", 0)
    data = text.encode("utf-8")
    pos = 0
    while pos < len(data) and data[pos:pos + 1].isspace():
        pos += 1
    stop = len(data)
    while stop > pos and data[stop - 1:stop].isspace():
        stop -= 1
    if pos == stop:
        raise ParseError("empty diagram code", pos)
    branes: list[str] = []
    d3 = [0]
    want_brane = True
    while pos < stop:
        ch = chr(data[pos])
        if want_brane:
            if ch not in _TOKEN:
                if ch.isdigit() and branes:
                    raise ParseError("unexpected digit", pos)
                if ch == "-":
                    raise ParseError("negative multiplicity", pos)
                raise ParseError(f"expected a brane token, got {ch!r}", pos)
            branes.append(_TOKEN[ch])
            pos += 1
            want_brane = False
        else:
            if ch in _TOKEN:
                raise ParseError("missing multiplicity between brane tokens", pos)
            if ch == "-":
                raise ParseError("negative multiplicity", pos)
            if not ch.isdigit():
                raise ParseError(f"unexpected character {ch!r}", pos)
            end = pos
            while end < stop and chr(data[end]).isdigit():
                end += 1
            d3.append(int(data[pos:end]))
            pos = end
            want_brane = True
    if want_brane:
        raise ParseError("diagram code must end with a brane token", stop)
    d3.append(0)
    return BraneDiagram(tuple(branes), tuple(d3))


def print_diagram(D: BraneDiagram) -> str:
    out = []
    for k, b in enumerate(D.branes):
        if k:
            out.append(str(D.d3[k]))
        out.append(_SYMBOL[b])
    return "".join(out)


def as_diagram(x) -> BraneDiagram:
    if isinstance(x, BraneDiagram):
        return x
    if isinstance(x, str):
        return parse_diagram(x)
    if isinstance(x, dict):
        return BraneDiagram.from_json(x)
    raise DiagramError(f"cannot interpret {type(x).__name__} as a brane diagram")


# charges and margins


def charges_and_margins(D: BraneDiagram) -> MarginData:
    D = as_diagram(D)
    r, c, path = [], [], []
    d5_left = 0
    ns5_total = D.m
    ns5_seen = 0
    for k, b in enumerate(D.branes):
        left, right = D.d3[k], D.d3[k + 1]
        if b == NS5:
            r.append(right - left + d5_left)
            path.append(d5_left)
            ns5_seen += 1
        else:
            c.append(left - right + (ns5_total - ns5_seen))
            d5_left += 1
    return MarginData(D.m, D.n, tuple(r), tuple(c), tuple(path))


def diagram_from_margins(md: MarginData) -> BraneDiagram:
    """Rebuild the diagram from (r, c, path)."""
    if len(md.r) != md.m or len(md.c) != md.n or len(md.path) != md.m:
        raise DiagramError("margin data has inconsistent lengths")
    if any(b > a for a, b in zip(md.path[1:], md.path)) or any(p < 0 or p > md.n for p in md.path):
        raise DiagramError("separating line is not monotone")
    branes: list[str] = []
    placed_d5 = 0
    for i in range(md.m):
        while placed_d5 < md.path[i]:
            branes.append(D5)
            placed_d5 += 1
        branes.append(NS5)
    branes += [D5] * (md.n - placed_d5)
    d3 = [0]
    d5_left = 0
    ns5_seen = 0
    ri = ci = 0
    for b in branes:
        cur = d3[-1]
        if b == NS5:
            d3.append(cur + md.r[ri] - d5_left)
            ri += 1
            ns5_seen += 1
        else:
            d3.append(cur - (md.c[ci] - (md.m - ns5_seen)))
            ci += 1
            d5_left += 1
    if d3[-1] != 0:
        raise DiagramError("margins do not close up: sum(r) != sum(c)")
    if any(x < 0 for x in d3):
        raise DiagramError("margins produce a negative multiplicity")
    return BraneDiagram(tuple(branes), tuple(d3))


def conjugate(part: Sequence[int]) -> list[int]:
    part = [p for p in part if p > 0]
    if not part:
        return []
    return [sum(1 for p in part if p > k) for k in range(max(part))]


def gale_ryser(r: Sequence[int], c: Sequence[int]) -> bool:
    """0/1 matrix with row sums r and column sums c exists."""
    if any(x < 0 for x in list(r) + list(c)):
        raise UsageError("negative margins")
    if sum(r) != sum(c):
        return False
    if any(x > len(c) for x in r) or any(x > len(r) for x in c):
        return False
    cs = sorted(c, reverse=True)
    rstar = conjugate(r)
    width = max(len(cs), len(rstar))
    cs += [0] * (width - len(cs))
    rstar += [0] * (width - len(rstar))
    a = b = 0
    for x, y in zip(cs, rstar):
        a += x
        b += y
        if a > b:
            return False
    return True


def validate_margins(md: MarginData | BraneDiagram) -> bool:
    if isinstance(md, (BraneDiagram, str)):
        md = charges_and_margins(as_diagram(md))
    if any(x < 0 for x in md.r + md.c):
        raise UsageError("negative margins")
    return gale_ryser(md.r, md.c)


def is_valid(D: BraneDiagram) -> bool:
    md = charges_and_margins(D)
    if any(x < 0 for x in md.r + md.c):
        return False
    return gale_ryser(md.r, md.c)


# dimension


def dimension(D: BraneDiagram) -> int:
    D = as_diagram(D)
    total = 0
    for k, b in enumerate(D.branes):
        left, right = D.d3[k], D.d3[k + 1]
        if b == D5:
            total += (left + 1) * left + (right + 1) * right
        else:
            total += 2 * left * right
    total -= 2 * sum(x * x for x in D.d3)
    return total


# transitions


def mirror_dual(D: BraneDiagram) -> BraneDiagram:
    D = as_diagram(D)
    return BraneDiagram(tuple(D5 if b == NS5 else NS5 for b in D.branes), D.d3)


def _check_pos(D: BraneDiagram, pos: int) -> None:
    if not isinstance(pos, int) or pos < 0 or pos + 1 >= len(D.branes):
        raise TransitionError(f"position {pos} does not address an adjacent brane pair")


def hw_transition(D: BraneDiagram, pos: int) -> BraneDiagram:
    """Hanany-Witten move swapping branes pos and pos+1 (0-based)."""
    D = as_diagram(D)
    _check_pos(D, pos)
    a, b = D.branes[pos], D.branes[pos + 1]
    if a == b:
        raise TransitionError("same-type pair: use tu_tv_transition for (TU)/(TV) moves")
    d1, d2, d3 = D.d3[pos], D.d3[pos + 1], D.d3[pos + 2]
    new = d1 + d3 + 1 - d2
    if new < 0:
        raise TransitionError("Hanany-Witten move gives a negative multiplicity (invalid diagram)")
    branes = list(D.branes)
    branes[pos], branes[pos + 1] = b, a
    mult = list(D.d3)
    mult[pos + 1] = new
    return BraneDiagram(tuple(branes), tuple(mult))


def tu_tv_transition(D: BraneDiagram, pos: int) -> BraneDiagram:
    """Swap two adjacent branes of the same type; middle becomes d1 + d3 - d2."""
    D = as_diagram(D)
    _check_pos(D, pos)
    a, b = D.branes[pos], D.branes[pos + 1]
    if a != b:
        raise TransitionError("opposite-type pair: use hw_transition")
    d1, d2, d3 = D.d3[pos], D.d3[pos + 1], D.d3[pos + 2]
    new = d1 + d3 - d2
    if new < 0:
        log.warning("rejected same-type transition at %d on %s", pos, print_diagram(D))
        raise TransitionError("invalid same-type transition: negative multiplicity")
    mult = list(D.d3)
    mult[pos + 1] = new
    return BraneDiagram(D.branes, tuple(mult))


def separated_form(D: BraneDiagram) -> tuple[BraneDiagram, list[int]]:
    """HW-equivalent diagram with all NS5 left of all D5, plus the move positions."""
    D = as_diagram(D)
    moves = []
    while True:
        pos = next((k for k in range(len(D.branes) - 1)
                    if D.branes[k] == D5 and D.branes[k + 1] == NS5), None)
        if pos is None:
            return D, moves
        D = hw_transition(D, pos)
        moves.append(pos)


def hw_move_to(D: BraneDiagram, order: Sequence[str]) -> tuple[BraneDiagram, list[int]]:
    """HW moves (bubble order) reaching the given brane type sequence."""
    D = as_diagram(D)
    order = tuple(order)
    if sorted(order) != sorted(D.branes):
        raise TransitionError("target order has different brane counts")
    moves = []
    while D.branes != order:
        pos = next(k for k in range(len(order)) if D.branes[k] != order[k])
        # bring the needed type to pos by bubbling from the right
        j = next(k for k in range(pos + 1, len(order)) if D.branes[k] == order[pos])
        for k in range(j - 1, pos - 1, -1):
            D = hw_transition(D, k)
            moves.append(k)
    return D, moves


def classify(D: BraneDiagram) -> dict[str, bool]:
    D = as_diagram(D)
    md = charges_and_margins(D)
    cobal = all(D.d3[k] == D.d3[k + 1] for k, b in enumerate(D.branes) if b == D5)
    bal = all(D.d3[k] == D.d3[k + 1] for k, b in enumerate(D.branes) if b == NS5)
    return {
        "balanced": bal,
        "cobalanced": cobal,
        "hw_cobalanced": all(x >= y for x, y in zip(md.c, md.c[1:])),
        "hw_balanced": all(x <= y for x, y in zip(md.r, md.r[1:])),
    }


# quivers


def quiver_to_diagram(Q: QuiverSpec) -> BraneDiagram:
    branes = [NS5]
    d3 = [0]
    for vi, wi in zip(Q.v, Q.w):
        for _ in range(wi):
            d3.append(vi)
            branes.append(D5)
        d3.append(vi)
        branes.append(NS5)
    d3.append(0)
    return BraneDiagram(tuple(branes), tuple(d3))


def quiver_margins(Q: QuiverSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n = len(Q.v)
    v = (0,) + Q.v + (0,)
    r = []
    wsum = 0
    for i in range(1, n + 2):
        r.append(v[i] - v[i - 1] + wsum)
        if i <= n:
            wsum += Q.w[i - 1]
    c = []
    for i, wi in enumerate(Q.w, start=1):
        c += [n + 1 - i] * wi
    return tuple(r), tuple(c)


def check_quiver_duality(Q: QuiverSpec, Qd: QuiverSpec) -> bool:
    a = len(Q.v) + 1
    b = len(Qd.v) + 1
    if sum(Q.w) != b or sum(Qd.w) != a:
        raise DiagramError("framing totals do not match the node counts of the partner quiver")
    r, c = quiver_margins(Q)
    rd, cd = quiver_margins(Qd)
    if len(r) != len(cd) or len(c) != len(rd):
        raise DiagramError("margin length mismatch")
    return all(x + y == b for x, y in zip(r, cd)) and all(x + y == a for x, y in zip(c, rd))


def flag_quiver(lam: Sequence[int]) -> QuiverSpec:
    """Quiver of T*F_{l1, l1+l2, ..., l1+...+lN}."""
    lam = list(lam)
    N = len(lam)
    if N < 1:
        raise DiagramError("empty flag data")
    v = [sum(lam[: i + 1]) for i in range(N - 1)]
    w = [0] * (N - 1)
    if N == 1:
        return QuiverSpec((), ())
    w[-1] = sum(lam)
    return QuiverSpec(tuple(v), tuple(w))


def dual_flag_quiver(lam: Sequence[int]) -> QuiverSpec:
    lam = [int(x) for x in lam]
    if any(x < 0 for x in lam) or any(b < a for a, b in zip(lam, lam[1:])):
        raise DiagramError("lambda must be weakly increasing and non-negative")
    N = len(lam)
    prev = 0
    mu: list[int] = []
    for j, lj in enumerate(lam, start=1):
        mu += [N - j] * (lj - prev)
        prev = lj
    k = sum(mu)
    mu += [-1] * (k - 1)
    length = lam[-1] + k - 1
    mu = mu[:length]
    v, acc = [], 0
    for x in mu:
        acc += x
        v.append(acc)
    w = [0] * length
    for lj in lam:
        if 1 <= lj <= length:
            w[lj - 1] += 1
    return QuiverSpec(tuple(v), tuple(w))


def random_diagram(rng, max_branes: int = 8, max_mult: int = 4, valid: bool = True, tries: int = 200) -> BraneDiagram:
    """Random diagram from margins (valid ones come from a random 0/1 table)."""
    for _ in range(tries):
        total = rng.randint(1, max_branes)
        m = rng.randint(0, total)
        n = total - m
        if valid:
            table = [[rng.randint(0, 1) for _ in range(n)] for _ in range(m)]
            r = tuple(sum(row) for row in table)
            c = tuple(sum(table[i][j] for i in range(m)) for j in range(n))
            path = tuple(sorted(rng.randint(0, n) for _ in range(m)))
            try:
                D = diagram_from_margins(MarginData(m, n, r, c, path))
            except DiagramError:
                continue
            if max(D.d3) <= max_mult:
                return D
        else:
            branes = tuple(rng.choice((NS5, D5)) for _ in range(total))
            d3 = (0,) + tuple(rng.randint(0, max_mult) for _ in range(total - 1)) + (0,)
            return BraneDiagram(branes, d3)
    return parse_diagram("/1\\1\\1/")


def all_valid_diagrams(max_branes: int, max_mult: int) -> Iterable[BraneDiagram]:
    """Every valid diagram with at most max_branes branes and multiplicities <= max_mult."""
    import itertools

    for total in range(1, max_branes + 1):
        for branes in itertools.product((NS5, D5), repeat=total):
            for inner in itertools.product(range(max_mult + 1), repeat=total - 1):
                D = BraneDiagram(branes, (0,) + inner + (0,))
                if is_valid(D):
                    yield D
