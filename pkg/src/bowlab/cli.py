"""Command line interface: `bowlab <subcommand> ...` or `python3 -m bowlab`.

Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error,
3 the conjectured envelope formula or an axiom check failed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import diagram as dg
from . import elliptic, emit, envelope, fixedpoints as fp, restriction as rs
from .algebra import AlgebraError, UsageError, format_poly

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_CONJECTURE = 0, 1, 2, 3


class _Usage(Exception):
    pass


class _Falsified(Exception):
    def __init__(self, report: dict):
        super().__init__(report.get("error", "check failed"))
        self.report = report


# input helpers


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _diagram(text: str | None) -> dg.BraneDiagram:
    if text is None:
        raise _Usage("a diagram is required")
    if text.endswith(".json") and os.path.exists(text):
        data = _load_json(text)
        if isinstance(data, dict) and isinstance(data.get("diagram"), str):
            return dg.parse_diagram(data["diagram"])
        return dg.as_diagram(data)
    return dg.parse_diagram(text)


def _int_list(text: str) -> tuple[int, ...]:
    text = text.strip().strip("()[]")
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise _Usage(f"expected comma-separated integers, got {text!r}") from None


def _fixed_points(D: dg.BraneDiagram, sel: str | None) -> list[tuple[int, fp.BCT]]:
    """Selected fixed points as (1-based lex index or 0, BCT)."""
    fps = fp.enumerate_fixed_points(D)
    if sel is None:
        return list(enumerate(fps, start=1))
    if sel.isdigit():
        k = int(sel)
        if not 1 <= k <= len(fps):
            raise _Usage(f"fixed point index {k} out of range 1..{len(fps)}")
        return [(k, fps[k - 1])]
    data = _load_json(sel)
    if "ties" in data:
        t = fp.tie_to_bct(fp.TieDiagram.from_json(data, D))
    else:
        t = fp.BCT(tuple(tuple(r) for r in data["rows"]), dg.charges_and_margins(D))
    index = {x.key(): k for k, x in enumerate(fps, start=1)}
    return [(index.get(t.key(), 0), t)]


def _graph(spec: str | None) -> envelope.CurveGraph | None:
    if spec is None:
        return None
    if os.path.exists(spec):
        return envelope.CurveGraph.load(spec)
    try:
        return envelope.CurveGraph.from_json(elliptic.load_fixture(spec))
    except FileNotFoundError:
        raise _Usage(f"no graph file or fixture named {spec!r}") from None


def _elliptic_table(spec: str) -> elliptic.EllipticTable:
    if os.path.exists(spec):
        return elliptic.EllipticTable.load(spec)
    try:
        return elliptic.elliptic_fixture(spec)
    except FileNotFoundError:
        raise _Usage(f"no table file or fixture named {spec!r}") from None


# output helpers


def _out(args, data, text: str | None = None) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=1))
    elif args.format == "text":
        print(text if text is not None else json.dumps(data, indent=1))
    else:
        raise _Usage(f"--format {args.format} is not available for this subcommand")


def _margins_text(md: dg.MarginData) -> str:
    return f"r=({','.join(map(str, md.r))}), c=({','.join(map(str, md.c))})"


# subcommands


def cmd_info(args):
    D = _diagram(args.diagram)
    md = dg.charges_and_margins(D)
    valid = dg.is_valid(D)
    count = fp.count_fixed_points(D) if valid else 0
    data = {"diagram": str(D), "m": md.m, "n": md.n, "r": list(md.r), "c": list(md.c),
            "dim": dg.dimension(D), "fixed_points": count, "valid": valid}
    text = "\n".join([f"diagram: {D}", f"m={md.m}, n={md.n}", _margins_text(md),
                      f"dim={data['dim']}", f"fixed points={count}"])
    _out(args, data, text)


def cmd_validate(args):
    D = _diagram(args.diagram)
    md = dg.charges_and_margins(D)
    ok = dg.is_valid(D)
    data = {"diagram": str(D), "valid": ok, "gale_ryser": dg.gale_ryser(md.r, md.c), **dg.classify(D)}
    _out(args, data, "\n".join(f"{k}: {v}" for k, v in data.items()))
    if not ok:
        raise dg.DiagramError("diagram has no fixed points (margins fail Gale-Ryser)")


def cmd_fixedpoints(args):
    D = _diagram(args.diagram)
    if args.count:
        n = fp.count_fixed_points(D)
        _out(args, {"count": n}, str(n))
        return
    fps = fp.enumerate_fixed_points(D, args.threads)
    _out(args, [t.to_json() for t in fps], "\n\n".join(f"[{k}]\n{t}" for k, t in enumerate(fps, start=1)))


def cmd_tie(args):
    D = _diagram(args.diagram)
    sel = _fixed_points(D, args.fixed_point)
    ties = [(k, fp.bct_to_tie(t, D)) for k, t in sel]
    if args.format in emit.FORMATS:
        if len(ties) != 1:
            raise _Usage("rendering needs a single --fixed-point")
        sys.stdout.write(emit.emit_diagram("tie", ties[0][1], args.format))
        return
    lab = lambda td: " ".join(f"({i},{j})" for i, j in td.sorted_ties()) or "(none)"
    _out(args, [{"index": k, **td.to_json()} for k, td in ties],
         "\n".join(f"[{k}] {lab(td)}" for k, td in ties))


def cmd_butterfly(args):
    D = _diagram(args.diagram)
    sel = _fixed_points(D, args.fixed_point)
    bfs = [(k, fp.build_butterfly(fp.bct_to_tie(t, D))) for k, t in sel]
    if args.format in emit.FORMATS:
        if len(bfs) != 1:
            raise _Usage("rendering needs a single --fixed-point")
        sys.stdout.write(emit.emit_diagram("butterfly", bfs[0][1], args.format))
        return
    lines = []
    for k, bl in bfs:
        lines.append(f"[{k}]")
        for b in bl:
            cols = " ".join(f"{s}:{lo}..{hi}" for s, (lo, hi) in sorted(b.columns.items()))
            lines.append(f"  U{b.d5}: {cols}")
    _out(args, [{"index": k, "butterflies": [b.to_json() for b in bl]} for k, bl in bfs], "\n".join(lines))


def cmd_restrict(args):
    D = _diagram(args.diagram)
    res = [(k, rs.loc_K(t, D)) for k, t in _fixed_points(D, args.fixed_point)]
    lines = []
    for k, r in res:
        cells = []
        for X in D.segments():
            ws = r.bundles[X]
            cells.append("{" + ", ".join(str(w) for w in ws) + "}")
        lines.append(f"[{k}] " + " ".join(cells))
    _out(args, [{"index": k, **r.to_json()} for k, r in res], "\n".join(lines))


def cmd_tangent(args):
    D = _diagram(args.diagram)
    if args.fixed_point is None:
        expr = rs.tangent_expression(D)
        _out(args, {"diagram": str(D), "expression": str(expr), "rank": expr.rank()}, str(expr))
        return
    rows = []
    for k, t in _fixed_points(D, args.fixed_point):
        p = rs.tangent_at(D, t)
        w = rs.tangent_weights(D, t)
        rows.append({"index": k, "tangent": format_poly(p), "symplectic": rs.symplectic_pairing_ok(w)})
    _out(args, rows, "\n".join(f"[{r['index']}] {r['tangent']}" for r in rows))


def cmd_mirror(args):
    D = _diagram(args.diagram)
    M = dg.mirror_dual(D)
    data = {"diagram": str(M)}
    text = str(M)
    if args.fixed_point is not None:
        images = [(k, fp.map_mirror(t)) for k, t in _fixed_points(D, args.fixed_point)]
        data["fixed_points"] = [{"index": k, **t.to_json()} for k, t in images]
        text += "\n" + "\n\n".join(f"[{k}] ->\n{t}" for k, t in images)
    _out(args, data, text)


def _transition(args, move, fmap, check):
    D = _diagram(args.diagram)
    if args.pos is None:
        raise _Usage("--pos is required")
    E = move(D, args.pos)
    data = {"diagram": str(E)}
    text = str(E)
    if args.fixed_point is not None:
        images = [(k, fmap(t, D, args.pos)) for k, t in _fixed_points(D, args.fixed_point)]
        data["fixed_points"] = [{"index": k, **t.to_json()} for k, t in images]
        text += "\n" + "\n\n".join(f"[{k}] ->\n{t}" for k, t in images)
    if check is not None and args.check:
        bad = []
        for k, t in _fixed_points(D, args.fixed_point):
            notes: list = []
            if not check(D, args.pos, t, notes):
                bad.append({"index": k, "diagnostics": [str(n) for n in notes]})
        data["ktheory_check"] = {"ok": not bad, "failures": bad}
        text += f"\nK-theory check: {'pass' if not bad else 'FAIL'}"
        if bad:
            _out(args, data, text)
            raise _Falsified({"error": "K-theory identity failed", "failures": bad})
    _out(args, data, text)


def cmd_hw(args):
    _transition(args, dg.hw_transition, fp.map_hw, rs.hw_ktheory_check)


def cmd_tu(args):
    _transition(args, dg.tu_tv_transition, fp.map_tu, rs.tu_ktheory_check)


def cmd_tv(args):
    _transition(args, dg.tu_tv_transition, fp.map_tv, None)


def cmd_separated(args):
    D = _diagram(args.diagram)
    S, moves = dg.separated_form(D)
    _out(args, {"diagram": str(S), "moves": moves}, f"{S}\nmoves: {' '.join(map(str, moves)) or '(none)'}")


def _quiver(args) -> dg.QuiverSpec:
    if args.v is None or args.w is None:
        raise _Usage("quiver data needs both v and w")
    return dg.QuiverSpec(_int_list(args.v), _int_list(args.w))


def cmd_quiver(args):
    Q = _quiver(args)
    D = dg.quiver_to_diagram(Q)
    r, c = dg.quiver_margins(Q)
    data = {"diagram": str(D), "r": list(r), "c": list(c), "dim": dg.dimension(D)}
    _out(args, data, f"{D}\nr=({','.join(map(str, r))}), c=({','.join(map(str, c))})\ndim={data['dim']}")


def cmd_chi(args):
    Q = _quiver(args)
    chi = fp.chi_quiver(Q)
    data = {"chi": chi}
    if not args.count:
        data["partition_codes"] = fp.count_partition_codes(Q)
        D = dg.quiver_to_diagram(Q)
        data["bct"] = fp.count_fixed_points(D) if dg.is_valid(D) else 0
    _out(args, data, "\n".join(f"{k}: {v}" for k, v in data.items()))


def cmd_envelope(args):
    D = _diagram(args.diagram)
    try:
        table = envelope.envelope_table(D, args.threads, args.seed_direction)
    except envelope.ConjectureFailure as exc:
        raise _Falsified(exc.report()) from None
    _out(args, table.to_json(), str(table))


def cmd_axioms(args):
    D = _diagram(args.diagram)
    try:
        table = envelope.envelope_table(D, args.threads, args.seed_direction)
    except envelope.ConjectureFailure as exc:
        raise _Falsified(exc.report()) from None
    g = _graph(args.graph)
    reports = [envelope.check_normalization(D, table), envelope.check_boundary(D, table),
               envelope.check_homogeneity(D, table), envelope.check_support(D, table, g)]
    data = [r.to_json() for r in reports]
    lines = []
    for r in reports:
        status = "pass" if r.ok else "FAIL"
        lines.append(r.note if r.note else f"{r.name}: {status} ({r.checked} checked)")
    _out(args, data, "\n".join(lines))
    if not all(r.ok for r in reports):
        raise _Falsified({"error": "axiom check failed", "reports": data})


def cmd_curves(args):
    g = _graph(args.graph)
    if g is None:
        D = _diagram(args.diagram)
        pairs = envelope.candidate_curve_edges(D)
        _out(args, {"diagram": str(D), "candidate_edges": [list(p) for p in pairs]},
             "\n".join(f"{a + 1} -- {b + 1}" for a, b in pairs))
        return
    if args.format in emit.FORMATS:
        sys.stdout.write(emit.emit_diagram("gkm", g, args.format))
        return
    order = envelope.order_and_slope(g)
    slopes = {v: sorted(order.slope(v), key=g.vertices.index) for v in g.vertices}
    _out(args, {"vertices": g.vertices, "slopes": slopes},
         "\n".join(f"Slope({v}) = {{{', '.join(s)}}}" for v, s in slopes.items()))


def cmd_elliptic_check(args):
    S = _elliptic_table(args.left or "ae")
    Sp = _elliptic_table(args.right or "be")
    rep = elliptic.check_3d_identity(S, Sp)
    _out(args, rep.to_json(), str(rep))
    if not rep.ok:
        raise _Falsified({"error": "3d identity failed", **rep.to_json()})


def cmd_emit(args):
    if args.format not in emit.FORMATS:
        raise _Usage("emit needs --format tikz or svg")
    if args.kind == "gkm":
        g = _graph(args.graph or args.diagram)
        if g is None:
            raise _Usage("gkm needs --graph")
        sys.stdout.write(emit.emit_diagram("gkm", g, args.format))
        return
    D = _diagram(args.diagram)
    sel = _fixed_points(D, args.fixed_point or "1")
    if len(sel) != 1:
        raise _Usage("emit needs a single --fixed-point")
    td = fp.bct_to_tie(sel[0][1], D)
    data = td if args.kind == "tie" else fp.build_butterfly(td)
    sys.stdout.write(emit.emit_diagram(args.kind, data, args.format))


# parser

_COMMANDS = {
    "info": (cmd_info, "margins, dimension and fixed-point count"),
    "validate": (cmd_validate, "Gale-Ryser validity and balance classification"),
    "fixedpoints": (cmd_fixedpoints, "enumerate or count fixed points (BCTs)"),
    "tie": (cmd_tie, "tie diagrams of fixed points"),
    "butterfly": (cmd_butterfly, "butterfly diagrams of fixed points"),
    "restrict": (cmd_restrict, "restrictions of tautological bundles"),
    "tangent": (cmd_tangent, "tangent bundle expression or its restrictions"),
    "mirror": (cmd_mirror, "3d mirror dual diagram"),
    "hw": (cmd_hw, "Hanany-Witten transition at --pos"),
    "tu": (cmd_tu, "transition of two adjacent D5 branes at --pos"),
    "tv": (cmd_tv, "transition of two adjacent NS5 branes at --pos"),
    "separated": (cmd_separated, "separated (all NS5 left) form"),
    "quiver": (cmd_quiver, "brane diagram of an A-type quiver"),
    "chi": (cmd_chi, "fixed-point counts of an A-type quiver variety"),
    "envelope": (cmd_envelope, "table of conjectured stable envelopes"),
    "axioms": (cmd_axioms, "check stable envelope axioms"),
    "curves": (cmd_curves, "invariant curves: candidates or fixture orders"),
    "elliptic-check": (cmd_elliptic_check, "3d mirror identity on elliptic tables"),
    "emit": (cmd_emit, "render tie, butterfly or gkm pictures"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "tikz", "svg"), default="text")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default BOWLAB_THREADS)")
    common.add_argument("--seed-direction", type=int, default=0, help="index of the eps direction prime sequence")
    common.add_argument("--graph", help="curve graph JSON file or shipped fixture name")
    common.add_argument("--fixed-point", help="1-based lex index, or a JSON file with a BCT or ties")
    common.add_argument("--count", action="store_true", help="only count")

    p = _Parser(prog="bowlab", description="Combinatorics and characteristic classes of bow varieties.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, helptext) in _COMMANDS.items():
        s = sub.add_parser(name, help=helptext, parents=[common])
        if name in ("quiver", "chi"):
            s.add_argument("v", nargs="?", help="dimension vector, e.g. 1,2,1")
            s.add_argument("w", nargs="?", help="framing vector, e.g. 0,3,0")
        elif name == "elliptic-check":
            s.add_argument("left", nargs="?", help="table S (file or fixture, default ae)")
            s.add_argument("right", nargs="?", help="table S' (file or fixture, default be)")
        elif name == "emit":
            s.add_argument("kind", help="tie, butterfly or gkm")
            s.add_argument("diagram", nargs="?")
        else:
            s.add_argument("diagram", nargs="?", help="diagram code such as '/1\\1\\1/' ('|' works for '\\')")
        if name in ("hw", "tu", "tv"):
            s.add_argument("--pos", type=int, help="0-based index of the left brane of the pair")
            s.add_argument("--check", action="store_true", help="verify the K-theory identity at fixed points")
    return p


def _error(kind: str, exc: BaseException, code: int) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _Usage("a subcommand is required")
        _COMMANDS[args.command][0](args)
    except _Usage as exc:
        return _error("usage", exc, EXIT_USAGE)
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE)
    except _Falsified as exc:
        print(json.dumps(exc.report), file=sys.stderr)
        return EXIT_CONJECTURE
    except (dg.DiagramError, AlgebraError, envelope.GraphError, rs.ChamberError) as exc:
        return _error(type(exc).__name__, exc, EXIT_DOMAIN)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _error("input", exc, EXIT_DOMAIN)
    return EXIT_OK


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:  # output piped into head and friends
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)
