"""Candidate cohomological stable envelopes and axiom checks.

For a fixed point f the candidate class is

    W_f = Sym(W~_f) / N_f,   W~_f = prod over f-small tangent terms of (x - y + k*h)^alpha,

and its restriction to f' is the eps -> 0 limit of W_f evaluated at
x = Loc_H(f') + eps*tau.  The direction tau gives the p-th Chern root (in the
global order x1_1, x2_1, x2_2, ...) the (p + seed)-th prime.
"""
from __future__ import annotations

import itertools
import json
import os
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .algebra import (
    LIMIT_STATS,
    FactoredRational,
    LaurentPoly,
    LimitDoesNotExist,
    LinearForm,
    UsageError,
    VarSpace,
    divmod_linear,
    limit_at_zero,
    limit_packed,
    root_name,
    symmetrize,
)
from .diagram import BraneDiagram, as_diagram, dimension
from .fixedpoints import BCT, TieDiagram, enumerate_fixed_points, normalization_factor, bct_to_tie
from .restriction import (
    Slot,
    WeightMonomial,
    chamber_split,
    loc_K,
    tangent_expression,
    tangent_weights,
    uh_space,
)


class ConjectureFailure(Exception):
    """The limit defining Stab(f)|_{f'} does not exist."""

    def __init__(self, D, f, fp, cause):
        super().__init__(f"limit does not exist for f={f}, f'={fp}: {cause}")
        self.diagram = D
        self.f = f
        self.fp = fp
        self.cause = cause

    def report(self) -> dict:
        return {"error": "limit does not exist", "diagram": str(self.diagram), "f": self.f, "f_prime": self.fp,
                "detail": str(self.cause)}


class GraphError(ValueError):
    pass


# primes for the eps direction


def primes(count: int) -> list[int]:
    out: list[int] = []
    k = 2
    while len(out) < count:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 1
    return out


def tau_direction(num_roots: int, seed: int = 0) -> list[int]:
    return primes(num_roots + seed)[seed:]


# root bookkeeping


def chern_roots(D: BraneDiagram) -> list[tuple[int, int]]:
    return [(i, j) for i, d in enumerate(D.d3) for j in range(1, d + 1)]


def root_space(D: BraneDiagram, eps: bool = True) -> VarSpace:
    return VarSpace(D.n, 0, tuple(chern_roots(D)), True, eps)


@dataclass(frozen=True)
class SmallTerm:
    """coeff * x/y * h^hpow with x, y root names ('x2_1') or framing names ('u3')."""

    num: str
    den: str
    hpow: int
    coeff: int


def _fixed(D: BraneDiagram, f) -> BCT:
    if isinstance(f, BCT):
        return f
    if isinstance(f, TieDiagram):
        from .fixedpoints import tie_to_bct

        return tie_to_bct(f)
    if isinstance(f, int):
        return enumerate_fixed_points(D)[f]
    raise UsageError("fixed point must be a BCT, TieDiagram or index")


def _symbols(D: BraneDiagram, loc, slot: Slot) -> list[tuple[str, WeightMonomial]]:
    if slot.kind == "C":
        return [(f"u{slot.index}", WeightMonomial(slot.index, 0))]
    return [(root_name(slot.index, j + 1), w) for j, w in enumerate(loc.bundles[slot.index])]


def expanded_terms(D: BraneDiagram) -> Counter:
    """Tangent expression over Grothendieck roots: {(num, den, hpow): coeff}."""
    D = as_diagram(D)
    out: Counter = Counter()
    for t in tangent_expression(D).terms:
        srcs = [f"u{t.source.index}"] if t.source.kind == "C" else [root_name(t.source.index, j) for j in range(1, D.d3[t.source.index] + 1)]
        tgts = [f"u{t.target.index}"] if t.target.kind == "C" else [root_name(t.target.index, j) for j in range(1, D.d3[t.target.index] + 1)]
        for y in srcs:
            for x in tgts:
                out[(x, y, t.hpow)] += t.coeff
    return Counter({k: v for k, v in out.items() if v})


def f_small_terms(D: BraneDiagram | str, f) -> list[SmallTerm]:
    D = as_diagram(D)
    t = _fixed(D, f)
    loc = loc_K(t, D)
    label = {}
    for i, b in enumerate(loc.bundles):
        for j, w in enumerate(b, start=1):
            label[root_name(i, j)] = w.u
    for j in range(1, D.n + 1):
        label[f"u{j}"] = j
    out = []
    for (x, y, k), c in sorted(expanded_terms(D).items()):
        if label[x] < label[y]:
            out.append(SmallTerm(x, y, k, c))
    return out


def w_tilde(D: BraneDiagram | str, f, space: VarSpace | None = None) -> FactoredRational:
    D = as_diagram(D)
    space = space or root_space(D)
    factors = []
    for term in f_small_terms(D, f):
        form = LinearForm(space, {term.num: 1, term.den: -1, "h": term.hpow})
        factors.append((form, term.coeff))
    return FactoredRational(space, 1, factors)


def root_blocks(D: BraneDiagram) -> list[list[str]]:
    return [[root_name(i, j) for j in range(1, d + 1)] for i, d in enumerate(D.d3) if d]


def w_f(D: BraneDiagram | str, f, space: VarSpace | None = None) -> list[FactoredRational]:
    """The Sym(W~_f)/N_f summands (full symmetric group, no shortcuts)."""
    D = as_diagram(D)
    t = _fixed(D, f)
    nf = normalization_factor(bct_to_tie(t, D))
    base = w_tilde(D, t, space)
    return [s * Fraction(1, nf) for s in symmetrize(base, root_blocks(D))]


# restriction via limits


def _project(raw: dict, width: int, space: VarSpace) -> LaurentPoly:
    out = {}
    for e, c in raw.items():
        if any(e[width:]):
            raise UsageError("limit still depends on Chern roots")
        out[e[:width]] = c
    return LaurentPoly._raw(space, out)


def restrict_w_direct(D: BraneDiagram | str, f, fp, seed: int = 0) -> LaurentPoly:
    """Reference path: substitute into every Sym summand and take the limit."""
    D = as_diagram(D)
    space = root_space(D)
    summands = w_f(D, f, space)
    locp = loc_K(_fixed(D, fp), D)
    tau = tau_direction(len(space.chern_roots), seed)
    assignment = {}
    for p, (i, j) in enumerate(space.chern_roots):
        w = locp.bundles[i][j - 1]
        assignment[root_name(i, j)] = LinearForm(space, {f"u{w.u}": 1, "h": w.h, "eps": tau[p]})
    subs = [s.substitute(assignment) for s in summands]
    value = limit_at_zero(subs)
    return _project(value.terms, D.n + 1, uh_space(D))


def _distinct_arrangements(labels: Sequence[int]) -> Iterable[tuple[int, ...]]:
    counts = Counter(labels)
    keys = sorted(counts)
    n = len(labels)
    cur: list[int] = []

    def rec():
        if len(cur) == n:
            yield tuple(cur)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                cur.append(k)
                yield from rec()
                cur.pop()
                counts[k] += 1

    yield from rec()


def _coset_maps(blocks_labels: list[tuple[int, list[int]]]) -> Iterable[list[int]]:
    """Coset representatives of Sym modulo label-preserving permutations.

    blocks_labels: (offset, labels) per bundle, labels indexed by local root.
    Yields the permutation as a list mapping global root -> global position.
    """
    per_block = []
    for offset, labels in blocks_labels:
        maps = []
        for arr in _distinct_arrangements(labels):
            slots: dict[int, list[int]] = defaultdict(list)
            for q, lab in enumerate(arr):
                slots[lab].append(q)
            pos = {lab: iter(qs) for lab, qs in slots.items()}
            maps.append([offset + next(pos[lab]) for lab in labels])
        per_block.append(maps)
    for choice in itertools.product(*per_block):
        yield [g for part in choice for g in part]


class _Packed:
    """f-small terms of one fixed point in index form."""

    def __init__(self, D: BraneDiagram, t: BCT):
        loc = loc_K(t, D)
        roots = chern_roots(D)
        self.index = {root_name(i, j): p for p, (i, j) in enumerate(roots)}
        self.n = D.n
        self.roots = roots
        terms = f_small_terms(D, t)
        self.x = np.array([self.index.get(s.num, -s_u(s.num)) for s in terms], dtype=np.int64)
        self.y = np.array([self.index.get(s.den, -s_u(s.den)) for s in terms], dtype=np.int64)
        self.k = np.array([s.hpow for s in terms], dtype=np.int64)
        self.alpha = np.array([s.coeff for s in terms], dtype=np.int64)
        blocks = []
        offset = 0
        for i, d in enumerate(D.d3):
            if d:
                blocks.append((offset, [w.u for w in loc.bundles[i]]))
                offset += d
        self.blocks = blocks


def s_u(name: str) -> int:
    """Framing symbol 'u3' -> 3 (encoded as -3 in index arrays)."""
    return int(name[1:])


def restrict_w(D: BraneDiagram | str, f, fp, seed: int = 0, _cache: dict | None = None) -> LaurentPoly:
    """Stab(f)|_{f'} as the eps -> 0 limit, summing one term per coset of the label stabilizer."""
    D = as_diagram(D)
    t = _fixed(D, f)
    tp = _fixed(D, fp)
    packed_f = _Packed(D, t)
    locp = loc_K(tp, D)
    values = [locp.bundles[i][j - 1] for (i, j) in packed_f.roots]
    tau = tau_direction(len(values), seed)
    vu = np.array([w.u for w in values] + [0], dtype=np.int64)
    vh = np.array([w.h for w in values] + [0], dtype=np.int64)
    vt = np.array(tau + [0], dtype=np.int64)
    n = D.n
    width = n + 1
    T = len(packed_f.alpha)
    maps = list(_coset_maps(packed_f.blocks))
    if not maps:
        maps = [[]]
    R = len(maps)
    perm = np.array(maps, dtype=np.int64).reshape(R, -1)
    xs, ys = packed_f.x, packed_f.y

    def resolve(idx):
        # per rep: (u, h, tau) of each symbol; framing symbols are u_j with h = 0, tau = 0
        u = np.empty((R, T), dtype=np.int64)
        hh = np.empty((R, T), dtype=np.int64)
        tt = np.empty((R, T), dtype=np.int64)
        for c, g in enumerate(idx):
            if g >= 0:
                pos = perm[:, g]
                u[:, c] = vu[pos]
                hh[:, c] = vh[pos]
                tt[:, c] = vt[pos]
            else:
                u[:, c] = -g
                hh[:, c] = 0
                tt[:, c] = 0
        return u, hh, tt

    xu, xh, xt = resolve(xs)
    yu, yh, yt = resolve(ys)
    hc = xh - yh + packed_f.k[None, :]
    zero = (xu == yu) & (hc == 0)
    offsets = np.arange(R + 1, dtype=np.int64) * T
    orders = _kernels.eps_orders(zero.ravel(), np.tile(packed_f.alpha, R), offsets)
    has_pole = (zero & (packed_f.alpha[None, :] < 0)).any(axis=1) if T else np.zeros(R, dtype=bool)
    packed = []
    for r in range(R):
        if orders[r] > 0 and not has_pole[r]:
            # termwise zero; summands with a vanishing denominator always go through the limit
            LIMIT_STATS.summands += 1
            LIMIT_STATS.vanishing += 1
            continue
        facs = []
        for c in range(T):
            a = int(packed_f.alpha[c])
            b = int(xt[r, c] - yt[r, c])
            if zero[r, c]:
                facs.append(((), 0, b, a))
                continue
            lin = {}
            ux, uy = int(xu[r, c]), int(yu[r, c])
            if ux != uy:
                lin[ux - 1] = 1
                lin[uy - 1] = -1
            if hc[r, c]:
                lin[n] = int(hc[r, c])
            facs.append((tuple(sorted(lin.items())), 0, b, a))
        packed.append((1, facs))
    LIMIT_STATS.calls += 1
    raw = limit_packed(packed, width) if packed else {}
    return LaurentPoly._raw(uh_space(D), raw)


# tables


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("BOWLAB_THREADS", "1") or 1)
    return max(1, int(threads))


@dataclass
class EnvelopeTable:
    diagram: BraneDiagram
    fixed_points: list[BCT]
    entries: list[list[LaurentPoly]]

    def to_json(self) -> dict:
        return {
            "diagram": str(self.diagram),
            "fixed_points": [t.to_json() for t in self.fixed_points],
            "entries": [[e.to_json() for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data) -> "EnvelopeTable":
        from .diagram import parse_diagram

        D = parse_diagram(data["diagram"])
        space = uh_space(D)
        fps = [BCT.from_json(x) for x in data["fixed_points"]]
        entries = [[LaurentPoly.from_json(e, space) for e in row] for row in data["entries"]]
        return cls(D, fps, entries)

    def __str__(self) -> str:
        from .algebra import format_poly

        return "\n".join(" | ".join(format_poly(e) for e in row) for row in self.entries)


def envelope_table(D: BraneDiagram | str, threads: int | None = None, seed: int = 0) -> EnvelopeTable:
    D = as_diagram(D)
    fps = enumerate_fixed_points(D)
    N = len(fps)
    pairs = [(a, b) for a in range(N) for b in range(N)]

    def work(pair):
        a, b = pair
        try:
            return restrict_w(D, fps[a], fps[b], seed)
        except LimitDoesNotExist as exc:
            raise ConjectureFailure(D, a, b, exc) from None

    nthreads = _threads(threads)
    if nthreads == 1:
        values = [work(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            values = list(pool.map(work, pairs))
    entries = [values[a * N:(a + 1) * N] for a in range(N)]
    return EnvelopeTable(D, fps, entries)


# axioms


@dataclass
class AxiomReport:
    name: str
    failures: list = field(default_factory=list)
    checked: int = 0
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"axiom": self.name, "ok": self.ok, "checked": self.checked, "failures": self.failures,
                "note": self.note}


def euler_class(forms: Iterable[LinearForm], space: VarSpace) -> LaurentPoly:
    acc = LaurentPoly.const(space, 1)
    for f in forms:
        acc = acc * f.to_poly()
    return acc


def repelling_euler(D: BraneDiagram, f) -> LaurentPoly:
    space = uh_space(D)
    _, minus = chamber_split(tangent_weights(D, f), space)
    return euler_class(minus, space)


def check_normalization(D: BraneDiagram | str, table: EnvelopeTable) -> AxiomReport:
    D = as_diagram(D)
    rep = AxiomReport("normalization")
    for a, t in enumerate(table.fixed_points):
        rep.checked += 1
        if table.entries[a][a] != repelling_euler(D, t):
            rep.failures.append({"f": a})
    return rep


def check_boundary(D: BraneDiagram | str, table: EnvelopeTable) -> AxiomReport:
    from .algebra import divides_linear

    D = as_diagram(D)
    space = uh_space(D)
    h = LinearForm(space, {"h": 1})
    rep = AxiomReport("boundary")
    for a, row in enumerate(table.entries):
        for b, e in enumerate(row):
            if a != b:
                rep.checked += 1
                if not divides_linear(e, h):
                    rep.failures.append({"f": a, "f_prime": b})
    return rep


def check_homogeneity(D: BraneDiagram | str, table: EnvelopeTable) -> AxiomReport:
    D = as_diagram(D)
    deg = dimension(D) // 2
    rep = AxiomReport("homogeneity")
    for a, row in enumerate(table.entries):
        for b, e in enumerate(row):
            if not e.is_zero():
                rep.checked += 1
                if not e.is_homogeneous() or e.total_degree() != deg:
                    rep.failures.append({"f": a, "f_prime": b})
    return rep


# curve graphs


@dataclass(frozen=True, order=True)
class Weight:
    """u_num/u_den * h^h; num = den = 0 stands for pure h^h."""

    num: int
    den: int
    h: int

    def sigma(self) -> int:
        return self.num - self.den

    def to_json(self) -> dict:
        return {"num": self.num, "den": self.den, "h": self.h}

    @classmethod
    def from_json(cls, d) -> "Weight":
        return cls(int(d["num"]), int(d["den"]), int(d["h"]))

    def form(self, space: VarSpace) -> LinearForm:
        coefs = {"h": self.h}
        if self.num:
            coefs[f"u{self.num}"] = 1
            coefs[f"u{self.den}"] = -1
        return LinearForm(space, coefs)

    def key(self) -> tuple[int, int, int]:
        return (self.num, self.den, self.h)


@dataclass
class CurveGraph:
    """Invariant curves: edges with endpoint weights, plus non-edge tangent weights per vertex.

    Edge weights plus half_edges[v] give the full tangent multiset at v.
    families[v] annotates weights (already listed) whose weight space carries
    a family of invariant curves; it plays no role in orders or slopes.
    """

    vertices: list[str]
    edges: list[tuple[str, str, Weight, Weight]]
    half_edges: dict[str, list[Weight]] = field(default_factory=dict)
    families: dict[str, list[Weight]] = field(default_factory=dict)
    diagram: str | None = None
    fixed_points: dict[str, list] = field(default_factory=dict)  # vertex -> ties [[i, j], ...]

    def tangent_weights(self, v: str) -> Counter:
        out: Counter = Counter()
        for a, b, wa, wb in self.edges:
            if a == v:
                out[wa.key()] += 1
            if b == v:
                out[wb.key()] += 1
        for w in self.half_edges.get(v, []):
            out[w.key()] += 1
        return out

    def to_json(self) -> dict:
        data = {
            "vertices": list(self.vertices),
            "edges": [{"a": a, "b": b, "wa": wa.to_json(), "wb": wb.to_json()} for a, b, wa, wb in self.edges],
            "half_edges": {v: [w.to_json() for w in ws] for v, ws in self.half_edges.items()},
            "families": {v: [w.to_json() for w in ws] for v, ws in self.families.items()},
        }
        if self.diagram is not None:
            data["diagram"] = self.diagram
        if self.fixed_points:
            data["fixed_points"] = {v: {"ties": ties} for v, ties in self.fixed_points.items()}
        return data

    @classmethod
    def from_json(cls, data) -> "CurveGraph":
        wl = lambda ws: [Weight.from_json(w) for w in ws]
        edges = [(str(e["a"]), str(e["b"]), Weight.from_json(e["wa"]), Weight.from_json(e["wb"])) for e in data["edges"]]
        fps = {str(v): d["ties"] for v, d in data.get("fixed_points", {}).items()}
        return cls([str(v) for v in data["vertices"]], edges,
                   {str(v): wl(ws) for v, ws in data.get("half_edges", {}).items()},
                   {str(v): wl(ws) for v, ws in data.get("families", {}).items()},
                   data.get("diagram"), fps)

    @classmethod
    def load(cls, path) -> "CurveGraph":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def check_invariants(self) -> None:
        vs = set(self.vertices)
        for a, b, wa, wb in self.edges:
            if a not in vs or b not in vs:
                raise GraphError(f"edge {a}-{b} has an unknown endpoint")
            if wa.sigma() * wb.sigma() >= 0:
                raise GraphError(f"edge {a}-{b}: endpoint weights do not have opposite sigma-weights")

    def vertex_bcts(self, D: BraneDiagram) -> dict[str, BCT]:
        from .fixedpoints import tie_to_bct

        return {v: tie_to_bct(TieDiagram(frozenset(tuple(t) for t in ties), D)) for v, ties in self.fixed_points.items()}


@dataclass
class FixedOrder:
    vertices: list[str]
    below: dict[str, frozenset]  # v -> {w : w <= v}

    def leq(self, a: str, b: str) -> bool:
        return a in self.below[b]

    def lt(self, a: str, b: str) -> bool:
        return a != b and self.leq(a, b)

    def slope(self, f: str) -> frozenset:
        return self.below[f]


def order_and_slope(g: CurveGraph) -> FixedOrder:
    """Partial order generated by oriented edges: the positive-sigma endpoint is the larger one."""
    g.check_invariants()
    up: dict[str, set] = {v: set() for v in g.vertices}  # v -> vertices directly above
    for a, b, wa, wb in g.edges:
        hi, lo = (a, b) if wa.sigma() > 0 else (b, a)
        up[lo].add(hi)
    below: dict[str, set] = {v: {v} for v in g.vertices}
    # transitive closure with cycle detection (Kahn order)
    indeg = Counter()
    for v in g.vertices:
        for w in up[v]:
            indeg[w] += 1
    ready = sorted(v for v in g.vertices if not indeg[v])
    seen = 0
    while ready:
        v = ready.pop(0)
        seen += 1
        for w in sorted(up[v]):
            below[w] |= below[v]
            indeg[w] -= 1
            if not indeg[w]:
                ready.append(w)
        ready.sort()
    if seen != len(g.vertices):
        raise GraphError("graph not gradable")
    return FixedOrder(list(g.vertices), {v: frozenset(s) for v, s in below.items()})


def slope_normal(g: CurveGraph, f: str, fp: str, space: VarSpace | None = None,
                 order: FixedOrder | None = None) -> list[LinearForm]:
    """Weights of N_{f'}(Slope(f)): repelling weights at f' not tangent to edges into the slope."""
    order = order or order_and_slope(g)
    if not order.lt(fp, f):
        raise UsageError("slope_normal needs f' < f")
    weights = g.tangent_weights(fp)
    for key in list(weights):
        if Weight(*key).sigma() == 0:
            raise GraphError("pure-h weight in a curve graph")
    minus = Counter({k: c for k, c in weights.items() if Weight(*k).sigma() < 0})
    for a, b, wa, wb in g.edges:
        for here, there, w in ((a, b, wa), (b, a, wb)):
            if here == fp and order.lt(fp, there) and order.leq(there, f):
                if minus[w.key()] > 0:
                    minus[w.key()] -= 1
    if space is None:
        n = max([max(k[0], k[1]) for k in weights] + [1])
        space = VarSpace(n, 0, (), True)
    out = []
    for key in sorted(minus):
        out += [Weight(*key).form(space)] * minus[key]
    return out


def _divisible_by_product(p: LaurentPoly, forms: list[LinearForm]) -> bool:
    from .algebra import divides_linear

    for f in forms:
        if p.is_zero():
            return True
        if not divides_linear(p, f):
            return False
        p, _ = divmod_linear(p, f)
    return True


def check_support(D: BraneDiagram | str, table: EnvelopeTable, g: CurveGraph | None) -> AxiomReport:
    D = as_diagram(D)
    rep = AxiomReport("support")
    if g is None:
        rep.note = "support axioms: not checked"
        return rep
    order = order_and_slope(g)
    bcts = g.vertex_bcts(D)
    index = {t.key(): k for k, t in enumerate(table.fixed_points)}
    pos = {}
    for v, t in bcts.items():
        if t.key() not in index:
            raise GraphError(f"vertex {v} is not a fixed point of the table")
        pos[v] = index[t.key()]
    space = uh_space(D)
    for f in g.vertices:
        for fp in g.vertices:
            e = table.entries[pos[f]][pos[fp]]
            if f == fp:
                continue
            rep.checked += 1
            if not order.leq(fp, f):
                if not e.is_zero():
                    rep.failures.append({"axiom": "support-1", "f": f, "f_prime": fp})
                continue
            normal = slope_normal(g, f, fp, space, order)
            if not _divisible_by_product(e, normal):
                rep.failures.append({"axiom": "support-2", "f": f, "f_prime": fp})
    return rep


def candidate_curve_edges(D: BraneDiagram | str) -> list[tuple[int, int]]:
    """Pairs of fixed points (lex indices) related by one 2x2 swap [[1,0],[0,1]] <-> [[0,1],[1,0]]."""
    D = as_diagram(D)
    fps = enumerate_fixed_points(D)
    index = {t.key(): k for k, t in enumerate(fps)}
    out = set()
    for k, t in enumerate(fps):
        rows = [list(r) for r in t.rows]
        m, n = len(rows), len(rows[0]) if rows else 0
        for i, i2 in itertools.combinations(range(m), 2):
            for j, j2 in itertools.combinations(range(n), 2):
                a, b, c, d = rows[i][j], rows[i][j2], rows[i2][j], rows[i2][j2]
                if (a, b, c, d) in ((1, 0, 0, 1), (0, 1, 1, 0)):
                    new = [r[:] for r in rows]
                    new[i][j], new[i][j2], new[i2][j], new[i2][j2] = b, a, d, c
                    other = index[tuple(x for r in new for x in r)]
                    out.add((min(k, other), max(k, other)))
    return sorted(out)
