"""Torus fixed points: binary contingency tables, tie diagrams, butterflies."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from . import _kernels
from .diagram import (
    D5,
    NS5,
    BraneDiagram,
    DiagramError,
    MarginData,
    QuiverSpec,
    as_diagram,
    charges_and_margins,
    diagram_from_margins,
    gale_ryser,
    hw_transition,
    mirror_dual,
    quiver_margins,
    tu_tv_transition,
)


class IntegrityError(DiagramError):
    """A fixed-point code does not match its diagram."""


@dataclass(frozen=True)
class BCT:
    rows: tuple[tuple[int, ...], ...]
    margins: MarginData

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        md = self.margins
        if len(rows) != md.m or any(len(row) != md.n for row in rows):
            raise IntegrityError("table shape does not match margins")
        if any(x not in (0, 1) for row in rows for x in row):
            raise IntegrityError("table entries must be 0 or 1")
        if tuple(sum(row) for row in rows) != md.r:
            raise IntegrityError("row sums do not match r")
        if tuple(sum(rows[i][j] for i in range(md.m)) for j in range(md.n)) != md.c:
            raise IntegrityError("column sums do not match c")

    def key(self) -> tuple[int, ...]:
        return tuple(x for row in self.rows for x in row)

    def to_json(self) -> dict:
        md = self.margins
        return {"r": list(md.r), "c": list(md.c), "path": list(md.path), "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_json(cls, data) -> "BCT":
        r, c, path = tuple(data["r"]), tuple(data["c"]), tuple(data["path"])
        return cls(tuple(tuple(x) for x in data["rows"]), MarginData(len(r), len(c), r, c, path))

    def __str__(self) -> str:
        return "\n".join("".join(str(x) for x in row) for row in self.rows)


@dataclass(frozen=True)
class TieDiagram:
    """Ties as (NS5 index, D5 index) pairs, both 1-based."""

    ties: frozenset
    diagram: BraneDiagram

    def __post_init__(self):
        object.__setattr__(self, "ties", frozenset((int(i), int(j)) for i, j in self.ties))

    def sorted_ties(self) -> list[tuple[int, int]]:
        return sorted(self.ties)

    def to_json(self) -> dict:
        return {"ties": [list(t) for t in self.sorted_ties()]}

    @classmethod
    def from_json(cls, data, D: BraneDiagram) -> "TieDiagram":
        return cls(frozenset(tuple(t) for t in data["ties"]), as_diagram(D))


# enumeration


def _threads(threads: int | None) -> int:
    import os

    if threads is None:
        threads = int(os.environ.get("BOWLAB_THREADS", "1") or 1)
    return max(1, int(threads))


def enumerate_fixed_points(md: MarginData | BraneDiagram | str, threads: int | None = None) -> list[BCT]:
    """All BCTs with the margins, in lexicographic row-major order."""
    if not isinstance(md, MarginData):
        md = charges_and_margins(as_diagram(md))
    if any(x < 0 for x in md.r + md.c) or not gale_ryser(md.r, md.c):
        return []
    nthreads = _threads(threads)
    if nthreads == 1 or md.m < 2:
        arrays = _kernels.bct_enumerate(md.r, md.c)
        return [BCT(tuple(map(tuple, a.tolist())), md) for a in arrays]
    # split over first-row choices, each processed independently
    tasks = []
    for cols in itertools.combinations(range(md.n), md.r[0]):
        fr = [int(j in cols) for j in range(md.n)]
        rest_c = tuple(cj - x for cj, x in zip(md.c, fr))
        if any(x < 0 for x in rest_c):
            continue
        tasks.append((tuple(fr), rest_c))

    def work(task):
        fr, rest_c = task
        if not gale_ryser(md.r[1:], rest_c):
            return []
        return [(fr,) + tuple(map(tuple, a.tolist())) for a in _kernels.bct_enumerate(md.r[1:], rest_c)]

    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        parts = list(pool.map(work, tasks))
    rows = sorted(t for part in parts for t in part)
    return [BCT(t, md) for t in rows]


@lru_cache(maxsize=None)
def _count(r: tuple[int, ...], c_sorted: tuple[int, ...]) -> int:
    if not r:
        return 1 if all(x == 0 for x in c_sorted) else 0
    if not gale_ryser(r, c_sorted):
        return 0
    first, rest = r[0], r[1:]
    # choose how many ones go into each group of equal residual column sums
    groups = Counter(c_sorted)
    keys = sorted(groups)
    total = 0

    def rec(idx, left, chosen):
        nonlocal total
        if idx == len(keys):
            if left:
                return
            new = []
            weight = 1
            for key, take in zip(keys, chosen):
                g = groups[key]
                weight *= math.comb(g, take)
                new += [key - 1] * take + [key] * (g - take)
            if any(x < 0 for x in new):
                return
            total += weight * _count(rest, tuple(sorted(new, reverse=True)))
            return
        key = keys[idx]
        hi = min(groups[key], left) if key > 0 else 0
        for take in range(hi + 1):
            rec(idx + 1, left - take, chosen + [take])

    rec(0, first, [])
    return total


def count_fixed_points(md: MarginData | BraneDiagram | str) -> int:
    """Number of BCTs, without materializing them."""
    if not isinstance(md, MarginData):
        md = charges_and_margins(as_diagram(md))
    if any(x < 0 for x in md.r + md.c):
        return 0
    return _count(tuple(md.r), tuple(sorted(md.c, reverse=True)))


def count_bct(r: Sequence[int], c: Sequence[int]) -> int:
    return _count(tuple(r), tuple(sorted(c, reverse=True)))


# bijections


def _left_of(md: MarginData, i: int, j: int) -> bool:
    """NS5 row i is left of D5 column j (0-based)."""
    return j >= md.path[i]


def bct_to_tie(t: BCT, D: BraneDiagram | None = None) -> TieDiagram:
    md = t.margins
    if D is None:
        D = diagram_from_margins(md)
    D = as_diagram(D)
    if charges_and_margins(D) != md:
        raise IntegrityError("table margins do not match the diagram")
    ties = set()
    for i in range(md.m):
        for j in range(md.n):
            val = t.rows[i][j]
            if (val == 1) == _left_of(md, i, j):
                ties.add((i + 1, j + 1))
    return TieDiagram(frozenset(ties), D)


def coverage(td: TieDiagram, d5: int | None = None) -> list[int]:
    """Coverage of each d3 slot by the ties (optionally only those at one D5)."""
    D = td.diagram
    ns5 = D.ns5_positions()
    d5s = D.d5_positions()
    cov = [0] * len(D.d3)
    for i, j in td.ties:
        if d5 is not None and j != d5:
            continue
        p, q = ns5[i - 1], d5s[j - 1]
        lo, hi = min(p, q), max(p, q)
        for k in range(lo + 1, hi + 1):
            cov[k] += 1
    return cov


def check_tie_diagram(td: TieDiagram) -> None:
    D = td.diagram
    for i, j in td.ties:
        if not (1 <= i <= D.m and 1 <= j <= D.n):
            raise IntegrityError(f"tie ({i},{j}) refers to a missing brane")
    if tuple(coverage(td)) != D.d3:
        raise IntegrityError("ties do not cover the D3 branes with their multiplicities")


def tie_to_bct(td: TieDiagram) -> BCT:
    check_tie_diagram(td)
    D = td.diagram
    md = charges_and_margins(D)
    rows = []
    for i in range(md.m):
        row = []
        for j in range(md.n):
            tied = (i + 1, j + 1) in td.ties
            row.append(int(tied) if _left_of(md, i, j) else int(not tied))
        rows.append(tuple(row))
    try:
        return BCT(tuple(rows), md)
    except IntegrityError as exc:
        raise IntegrityError(f"tie diagram is not consistent with the margins: {exc}") from None


def ties_from_labels(D: BraneDiagram, pairs: Iterable[str]) -> TieDiagram:
    """Build ties from labels such as 'U1V3' or 'V1U2'."""
    import re

    ties = set()
    for p in pairs:
        m = re.fullmatch(r"([UV])(\d+)([UV])(\d+)", p.strip())
        if not m or m.group(1) == m.group(3):
            raise IntegrityError(f"bad tie label {p!r}")
        a, b = (m.group(1), int(m.group(2))), (m.group(3), int(m.group(4)))
        v = a[1] if a[0] == "V" else b[1]
        u = a[1] if a[0] == "U" else b[1]
        ties.add((v, u))
    return TieDiagram(frozenset(ties), as_diagram(D))


def multiplicities_from_bct(t: BCT) -> tuple[int, ...]:
    """d3 from #{1s NE of P} + #{0s SW of P} along the separating line."""
    md = t.margins
    D = diagram_from_margins(md)
    out = [0]
    # walk along the brane sequence; the lattice point after k branes
    i_done = 0  # NS5 rows passed
    j_done = 0  # D5 columns passed
    for b in D.branes:
        if b == NS5:
            i_done += 1
        else:
            j_done += 1
        # P = (rows < i_done are "north", columns < j_done are "west")
        ne = sum(t.rows[i][j] for i in range(i_done) for j in range(j_done, md.n))
        sw = sum(1 - t.rows[i][j] for i in range(i_done, md.m) for j in range(j_done))
        out.append(ne + sw)
    return tuple(out)


def fixed_point_ties(D: BraneDiagram | str) -> list[TieDiagram]:
    D = as_diagram(D)
    return [bct_to_tie(t, D) for t in enumerate_fixed_points(charges_and_margins(D))]


# butterflies


@dataclass
class Butterfly:
    d5: int
    position: int  # brane index of the D5
    columns: dict  # d3 slot -> (bottom, top) absolute heights, top - bottom + 1 = column size
    arrows: list = field(default_factory=list)  # (kind, (slot, height), (slot, height))
    a_dot: tuple | None = None
    b_dot: tuple | None = None

    def heights(self) -> dict:
        return {k: top - bot + 1 for k, (bot, top) in self.columns.items()}

    def dots(self) -> list[tuple[int, int]]:
        return [(k, h) for k, (bot, top) in sorted(self.columns.items()) for h in range(bot, top + 1)]

    def to_json(self) -> dict:
        return {
            "d5": self.d5,
            "columns": {str(k): list(v) for k, v in sorted(self.columns.items())},
            "arrows": [[kind, list(a), list(b)] for kind, a, b in self.arrows],
            "a_dot": list(self.a_dot) if self.a_dot else None,
            "b_dot": list(self.b_dot) if self.b_dot else None,
        }


def _butterfly_columns(D: BraneDiagram, q: int, cov: list[int]) -> dict:
    """Absolute (bottom, top) heights per slot, base level 0."""
    cols: dict[int, tuple[int, int]] = {}
    left, right = q, q + 1  # slots U-, U+
    if cov[left]:
        cols[left] = (1 - cov[left], 0)
        k = left
        while k - 1 >= 1 and cov[k - 1]:
            bot, top = cols[k]
            h = cov[k - 1]
            if D.branes[k - 1] == D5:
                cols[k - 1] = (bot, bot + h - 1)
            else:
                t2 = top - 1
                cols[k - 1] = (t2 - h + 1, t2)
            k -= 1
        right_bottom = cols[left][0]
    else:
        right_bottom = 1
    if right < len(cov) and cov[right]:
        cols[right] = (right_bottom, right_bottom + cov[right] - 1)
        k = right
        while k + 1 < len(cov) and cov[k + 1]:
            bot, top = cols[k]
            h = cov[k + 1]
            if D.branes[k] == D5:
                cols[k + 1] = (bot, bot + h - 1)
            else:
                cols[k + 1] = (top - h + 1, top)
            k += 1
    return cols


def build_butterfly(td: TieDiagram) -> list[Butterfly]:
    D = td.diagram
    d5s = D.d5_positions()
    out = []
    for j, q in enumerate(d5s, start=1):
        cov = coverage(td, j)
        if not any(cov):
            continue
        cols = _butterfly_columns(D, q, cov)
        arrows = []
        for k in sorted(cols):
            if k + 1 in cols:
                brane = D.branes[k]  # brane between slot k and k+1
                bl, tl = cols[k]
                br, tr = cols[k + 1]
                for hgt in range(br, tr + 1):
                    if brane == D5 and bl <= hgt <= tl:
                        arrows.append(("A", (k + 1, hgt), (k, hgt)))
                    if brane == NS5 and bl <= hgt - 1 <= tl:
                        arrows.append(("C", (k + 1, hgt), (k, hgt - 1)))
                if brane == NS5:
                    for hgt in range(bl, tl + 1):
                        if br <= hgt <= tr:
                            arrows.append(("D", (k, hgt), (k + 1, hgt)))
            near_d5 = D.branes[k - 1] == D5 or (k < len(D.branes) and D.branes[k] == D5)
            if near_d5:
                bot, top = cols[k]
                for hgt in range(top, bot, -1):
                    arrows.append(("B", (k, hgt), (k, hgt - 1)))
        a_dot = (q, cols[q][1]) if q in cols else None
        b_dot = None
        level = cols[q][1] + 1 if q in cols else 1
        if q + 1 in cols and cols[q + 1][0] <= level <= cols[q + 1][1]:
            b_dot = (q + 1, level)
        out.append(Butterfly(j, q, cols, arrows, a_dot, b_dot))
    return out


def normalization_factor(td: TieDiagram) -> int:
    """N_f: product over D5 branes of the factorials of their tie coverages."""
    total = 1
    for j in range(1, td.diagram.n + 1):
        for x in coverage(td, j):
            total *= math.factorial(x)
    return total


# transport along transitions


def bct_in_diagram(t: BCT, D: BraneDiagram) -> BCT:
    return BCT(t.rows, charges_and_margins(D))


def map_hw(t: BCT, D: BraneDiagram, pos: int) -> BCT:
    """Same matrix, read against the moved separating line."""
    D2 = hw_transition(as_diagram(D), pos)
    return BCT(t.rows, charges_and_margins(D2))


def _mirror_margins(md: MarginData) -> MarginData:
    D = diagram_from_margins(md)
    return charges_and_margins(mirror_dual(D))


def map_mirror(t: BCT) -> BCT:
    md = t.margins
    rows = tuple(tuple(1 - t.rows[i][j] for i in range(md.m)) for j in range(md.n))
    return BCT(rows, _mirror_margins(md))


def _brane_kind_index(D: BraneDiagram, pos: int) -> int:
    """0-based index of the brane at pos among branes of its type."""
    return sum(1 for b in D.branes[:pos] if b == D.branes[pos])


def map_tu(t: BCT, D: BraneDiagram, pos: int) -> BCT:
    D = as_diagram(D)
    if D.branes[pos] != D5 or D.branes[pos + 1] != D5:
        raise DiagramError("(TU) needs two adjacent D5 branes")
    j = _brane_kind_index(D, pos)
    rows = tuple(tuple(row[:j] + (row[j + 1], row[j]) + row[j + 2:]) for row in t.rows)
    return BCT(rows, charges_and_margins(tu_tv_transition(D, pos)))


def map_tv(t: BCT, D: BraneDiagram, pos: int) -> BCT:
    D = as_diagram(D)
    if D.branes[pos] != NS5 or D.branes[pos + 1] != NS5:
        raise DiagramError("(TV) needs two adjacent NS5 branes")
    i = _brane_kind_index(D, pos)
    rows = list(t.rows)
    rows[i], rows[i + 1] = rows[i + 1], rows[i]
    return BCT(tuple(rows), charges_and_margins(tu_tv_transition(D, pos)))


# quiver counts


def chi_quiver(Q: QuiverSpec) -> int:
    r, c = quiver_margins(Q)
    if any(x < 0 for x in r):
        return 0
    return count_bct(r, c)


def _partitions_in_strip(lo: int, hi: int):
    """Partitions all of whose contents b - a lie in [lo, hi] (lo <= 0 <= hi)."""
    max_rows = 1 - lo
    max_cols = hi + 1
    res = []

    def rec(prefix, cap):
        res.append(tuple(prefix))
        if len(prefix) == max_rows:
            return
        for part in range(1, cap + 1):
            rec(prefix + [part], part)

    rec([], max_cols)
    return res


def partition_node_counts(lam: Sequence[int], node: int, n: int) -> tuple[int, ...] | None:
    """Box counts per node for a partition framed at `node` (1-based); None if out of range."""
    counts = [0] * n
    for a, length in enumerate(lam, start=1):
        for b in range(1, length + 1):
            k = node + b - a
            if not 1 <= k <= n:
                return None
            counts[k - 1] += 1
    return tuple(counts)


def count_partition_codes(Q: QuiverSpec) -> int:
    n = len(Q.v)
    target = tuple(Q.v)
    # distribution of node-count vectors for a single partition framed at each node
    ways: Counter = Counter({(0,) * n: 1})
    for node, wi in enumerate(Q.w, start=1):
        single: Counter = Counter()
        for lam in _partitions_in_strip(1 - node, n - node):
            vec = partition_node_counts(lam, node, n)
            if vec is not None and all(x <= y for x, y in zip(vec, target)):
                single[vec] += 1
        for _ in range(wi):
            nxt: Counter = Counter()
            for acc, cnt in ways.items():
                for vec, c2 in single.items():
                    s = tuple(x + y for x, y in zip(acc, vec))
                    if all(x <= y for x, y in zip(s, target)):
                        nxt[s] += cnt * c2
            ways = nxt
    return ways.get(target, 0)
