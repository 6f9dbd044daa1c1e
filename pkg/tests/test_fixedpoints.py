import itertools
import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from bowlab.diagram import (
    D5,
    NS5,
    DiagramError,
    MarginData,
    QuiverSpec,
    as_diagram,
    charges_and_margins,
    hw_transition,
    mirror_dual,
    quiver_margins,
    tu_tv_transition,
)
from bowlab.fixedpoints import (
    BCT,
    IntegrityError,
    TieDiagram,
    bct_to_tie,
    build_butterfly,
    check_tie_diagram,
    chi_quiver,
    count_bct,
    count_fixed_points,
    count_partition_codes,
    coverage,
    enumerate_fixed_points,
    fixed_point_ties,
    map_hw,
    map_mirror,
    map_tu,
    map_tv,
    multiplicities_from_bct,
    normalization_factor,
    tie_to_bct,
    ties_from_labels,
)

from conftest import RUNNING, fuzz_corpus

GR24 = "\\1\\2/2\\2\\2/"
RUNNING_FP_TIES = "U1V3 U2V3 U2V4 U2V6 U3V6 V1U1 V1U2 V3U3 V4U3 V5U5 V6U5".split()
RUNNING_FP_ROWS = ((1, 1, 0, 0, 0), (1, 0, 0, 0, 0), (0, 0, 1, 0, 0),
              (1, 0, 1, 0, 0), (1, 1, 0, 0, 1), (1, 0, 0, 0, 1))

diagrams = st.sampled_from(fuzz_corpus())


def margins(r, c):
    # path only matters for tie conversion, not for enumeration
    return MarginData(len(r), len(c), tuple(r), tuple(c), (0,) * len(r))


def brute_margin_counts(m, n):
    tally = Counter()
    for bits in itertools.product((0, 1), repeat=m * n):
        rows = [bits[i * n:(i + 1) * n] for i in range(m)]
        r = tuple(sum(row) for row in rows)
        c = tuple(sum(rows[i][j] for i in range(m)) for j in range(n))
        tally[r, c] += 1
    return tally


# enumeration


def test_running_example_has_123_tables():
    md = charges_and_margins(as_diagram(RUNNING))
    assert (md.r, md.c) == ((2, 1, 1, 2, 3, 2), (5, 2, 2, 0, 2))
    assert len(enumerate_fixed_points(md)) == 123
    assert count_fixed_points(md) == 123


def test_gr24_diagram_has_six():
    assert count_fixed_points(GR24) == 6
    assert len(enumerate_fixed_points(GR24)) == 6


def test_twos_margins_six():
    assert len(enumerate_fixed_points(margins((2, 2, 2), (2, 2, 2)))) == 6


def test_infeasible_margins_give_empty_list():
    assert enumerate_fixed_points(margins((3, 0), (1, 1))) == []
    assert count_bct((3, 0), (1, 1)) == 0


def test_lex_order_and_thread_independence():
    md = charges_and_margins(as_diagram(RUNNING))
    one = enumerate_fixed_points(md, threads=1)
    keys = [t.key() for t in one]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    assert [t.key() for t in enumerate_fixed_points(md, threads=4)] == keys


@pytest.mark.parametrize("m,n", [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4)])
def test_count_matches_brute_force(m, n):
    for (r, c), expected in brute_margin_counts(m, n).items():
        assert count_bct(r, c) == expected, (r, c)
        if m * n <= 9:
            assert len(enumerate_fixed_points(margins(r, c))) == expected


def test_corpus_enumeration_matches_count():
    for D in fuzz_corpus()[::7]:
        assert len(enumerate_fixed_points(D)) == count_fixed_points(D) > 0, D


# BCT <-> tie diagram


def test_running_fixed_point_table_and_ties():
    D = as_diagram(RUNNING)
    td = ties_from_labels(D, RUNNING_FP_TIES)
    assert len(td.ties) == 11
    t = tie_to_bct(td)
    assert t.rows == RUNNING_FP_ROWS
    assert bct_to_tie(t, D) == td


def test_gr24_example_tables():
    D = as_diagram(GR24)
    left = TieDiagram(frozenset({(2, 1), (2, 2)}), D)
    right = TieDiagram(frozenset({(1, 1), (2, 2), (1, 4), (2, 4)}), D)
    assert tie_to_bct(left).rows == ((1, 1, 0, 0), (0, 0, 1, 1))
    assert tie_to_bct(right).rows == ((0, 1, 0, 1), (1, 0, 1, 0))


def test_full_table_of_separated_diagram_ties_everything():
    D = as_diagram("/2/4\\2\\")
    md = charges_and_margins(D)
    t = BCT(((1, 1), (1, 1)), md)
    assert bct_to_tie(t, D).ties == {(1, 1), (1, 2), (2, 1), (2, 2)}


def test_covering_violation_is_integrity_error():
    D = as_diagram(GR24)
    with pytest.raises(IntegrityError):
        tie_to_bct(TieDiagram(frozenset({(2, 1)}), D))
    with pytest.raises(IntegrityError):
        check_tie_diagram(TieDiagram(frozenset({(3, 1)}), D))


def test_bad_tie_labels():
    D = as_diagram(GR24)
    for bad in ("U1U2", "X1V2", "V1"):
        with pytest.raises(IntegrityError):
            ties_from_labels(D, [bad])


def test_bct_integrity_checks():
    md = margins((1, 1), (1, 1))
    with pytest.raises(IntegrityError):
        BCT(((1, 1), (0, 0)), md)
    with pytest.raises(IntegrityError):
        BCT(((2, 0), (0, 0)), md)
    with pytest.raises(IntegrityError):
        BCT(((1, 0),), md)


def test_bct_json_round_trip():
    t = enumerate_fixed_points(RUNNING)[17]
    assert BCT.from_json(t.to_json()) == t
    td = bct_to_tie(t, as_diagram(RUNNING))
    assert TieDiagram.from_json(td.to_json(), td.diagram) == td


def test_round_trips_over_corpus():
    for D in fuzz_corpus():
        for t in enumerate_fixed_points(D):
            td = bct_to_tie(t, D)
            assert tie_to_bct(td) == t
            assert tuple(coverage(td)) == D.d3


def test_multiplicity_rule_over_corpus():
    for D in fuzz_corpus():
        for t in enumerate_fixed_points(D):
            assert multiplicities_from_bct(t) == D.d3, D


# butterflies

# the U4 butterfly picture: only the ties at U4 are drawn
WIDE = "/0/0/0\\0/0\\0\\0/0/0/0\\0/0/0\\0/0/0\\0/0/0\\0/0/0/"
WIDE_TIES = [(i, 4) for i in (1, 2, 4, 5, 8, 9, 11, 12, 14, 15)]
WIDE_HEIGHTS = [1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 6, 5, 4, 4, 4, 3, 3, 2, 2, 2, 1]


def test_wide_butterfly_heights():
    D = as_diagram(WIDE)
    td = TieDiagram(frozenset(WIDE_TIES), D)
    (b,) = build_butterfly(td)
    assert b.d5 == 4 and D.branes[b.position] == D5
    heights = b.heights()
    assert [heights[k] for k in sorted(heights)] == WIDE_HEIGHTS
    assert sorted(heights) == list(range(1, 22))
    q = b.position
    # bottom aligned across U, a-dot on top of U-, b-dot one above it under U+
    assert b.columns[q][0] == b.columns[q + 1][0]
    assert b.a_dot == (q, 0)
    assert b.b_dot == (q + 1, 1)
    # bottom aligned across a D5 on the left, top shifted across NS5 on the left
    assert b.columns[q - 4][0] == b.columns[q - 5][0]
    assert b.columns[q - 1][1] == b.columns[q][1] - 1


def test_wide_butterfly_arrow_counts():
    D = as_diagram(WIDE)
    (b,) = build_butterfly(TieDiagram(frozenset(WIDE_TIES), D))
    kinds = Counter(kind for kind, _, _ in b.arrows)
    # arrows drawn in the picture: blue, black, magenta, red
    assert kinds == {"A": 21, "B": 28, "C": 35, "D": 34}


def test_small_butterfly_three_single_columns():
    D = as_diagram("/1\\1\\1/")
    found = []
    for td in fixed_point_ties(D):
        bs = build_butterfly(td)
        if len(bs) == 1:
            found.append(bs[0])
    assert found
    for b in found:
        assert b.heights() == {1: 1, 2: 1, 3: 1}
        assert len({bot for bot, _ in b.columns.values()}) == 1


def test_empty_d5_has_no_butterfly():
    D = as_diagram(RUNNING)
    td = ties_from_labels(D, RUNNING_FP_TIES)
    assert [b.d5 for b in build_butterfly(td)] == [1, 2, 3, 5]


def test_butterfly_totals_over_corpus():
    for D in fuzz_corpus()[::3]:
        for td in fixed_point_ties(D):
            total = [0] * len(D.d3)
            for b in build_butterfly(td):
                for k, h in b.heights().items():
                    total[k] += h
                assert len(b.dots()) == sum(b.heights().values())
            assert tuple(total) == D.d3


def test_normalization_factor_running_fixed_point():
    D = as_diagram(RUNNING)
    td = ties_from_labels(D, RUNNING_FP_TIES)
    assert coverage(td, 1)[1:11] == [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
    assert coverage(td, 2)[1:11] == [1, 1, 1, 3, 2, 1, 1, 1, 0, 0]
    per_d5 = [math.prod(math.factorial(x) for x in coverage(td, j)) for j in range(1, 6)]
    assert per_d5[:2] == [1, 12]
    assert normalization_factor(td) == math.prod(per_d5)


# transport along transitions


def _hw_positions(D):
    return [p for p in range(len(D.branes) - 1) if D.branes[p] != D.branes[p + 1]]


def _pair_indices(D, pos):
    a = D.branes[pos]
    kind_index = lambda p: sum(1 for x in D.branes[:p + 1] if x == D.branes[p])
    if a == NS5:
        return kind_index(pos), kind_index(pos + 1)
    return kind_index(pos + 1), kind_index(pos)


def test_hw_running_example_same_matrix():
    D = as_diagram(RUNNING)
    # the V5 / U3 neighbours
    pos = next(p for p in _hw_positions(D) if _pair_indices(D, p) == (5, 3))
    D2 = hw_transition(D, pos)
    for t in enumerate_fixed_points(D):
        t2 = map_hw(t, D, pos)
        assert t2.rows == t.rows and t2.margins == charges_and_margins(D2)
        assert map_hw(t2, D2, pos) == t


@given(diagrams, st.data())
def test_hw_tie_surgery(D, data):
    positions = _hw_positions(D)
    if not positions:
        return
    pos = data.draw(st.sampled_from(positions))
    i, j = _pair_indices(D, pos)
    D2 = hw_transition(D, pos)
    ts = enumerate_fixed_points(D)
    t = data.draw(st.sampled_from(ts))
    before = bct_to_tie(t, D).ties
    after = bct_to_tie(map_hw(t, D, pos), D2).ties
    assert after == before ^ {(i, j)}
    assert abs(len(after) - len(before)) == 1
    assert count_fixed_points(D2) == len(ts)


def test_mirror_all_ones():
    D = as_diagram("/2/4\\2\\")
    t = BCT(((1, 1), (1, 1)), charges_and_margins(D))
    mt = map_mirror(t)
    assert mt.rows == ((0, 0), (0, 0))


@given(diagrams, st.data())
def test_mirror_involution_and_margins(D, data):
    t = data.draw(st.sampled_from(enumerate_fixed_points(D)))
    mt = map_mirror(t)
    md, mmd = t.margins, mt.margins
    assert mmd == charges_and_margins(mirror_dual(D))
    assert mmd.r == tuple(md.m - x for x in md.c)
    assert mmd.c == tuple(md.n - x for x in md.r)
    assert map_mirror(mt) == t
    assert count_fixed_points(mirror_dual(D)) == count_fixed_points(D)
    # reflecting across the D3 line swaps the roles of the two brane types
    ties = bct_to_tie(t, D).ties
    mties = bct_to_tie(mt, mirror_dual(D)).ties
    assert mties == {(j, i) for i, j in ties}


def _same_kind_positions(D, kind):
    return [p for p in range(len(D.branes) - 1) if D.branes[p] == D.branes[p + 1] == kind]


@given(diagrams, st.data())
def test_tu_tv_swaps_and_involution(D, data):
    options = [(p, D5) for p in _same_kind_positions(D, D5)] + [(p, NS5) for p in _same_kind_positions(D, NS5)]
    if not options:
        return
    pos, kind = data.draw(st.sampled_from(options))
    fn = map_tu if kind == D5 else map_tv
    D2 = tu_tv_transition(D, pos)
    md, md2 = charges_and_margins(D), charges_and_margins(D2)
    k = sum(1 for b in D.branes[:pos] if b == kind)
    if kind == D5:
        assert md2.r == md.r
        assert md2.c[k:k + 2] == md.c[k:k + 2][::-1]
    else:
        assert md2.c == md.c
        assert md2.r[k:k + 2] == md.r[k:k + 2][::-1]
    ts = enumerate_fixed_points(D)
    t = data.draw(st.sampled_from(ts))
    t2 = fn(t, D, pos)
    assert t2.margins == md2
    assert fn(t2, D2, pos) == t
    assert count_fixed_points(D2) == len(ts)


def test_tu_equal_columns_unchanged():
    D = as_diagram("/1\\1\\1\\1/")
    assert D.branes[1] == D.branes[2] == D5
    ts = enumerate_fixed_points(D)
    hits = 0
    for t in ts:
        if all(row[0] == row[1] for row in t.rows):
            assert map_tu(t, D, 1).rows == t.rows
            hits += 1
        else:
            assert map_tu(t, D, 1).rows != t.rows
    assert hits == 1 and len(ts) == 3


def test_tu_tv_wrong_brane_types():
    D = as_diagram(GR24)
    t = enumerate_fixed_points(D)[0]
    with pytest.raises(DiagramError):
        map_tu(t, D, 1)
    with pytest.raises(DiagramError):
        map_tv(t, D, 0)


# quiver counts


def test_chi_examples():
    assert chi_quiver(QuiverSpec((2,), (5,))) == 10
    assert chi_quiver(QuiverSpec((1, 2), (0, 3))) == 6
    assert chi_quiver(QuiverSpec((2, 6), (0, 10))) == 3150


def test_chi_matches_enumeration():
    Q = QuiverSpec((1, 2), (0, 3))
    r, c = quiver_margins(Q)
    assert len(enumerate_fixed_points(margins(r, c))) == 6


def test_twos_family():
    # n!^2 [x^n] e^{-x/2}/sqrt(1-x): 0, 1, 6
    assert [count_bct((2,) * n, (2,) * n) for n in (1, 2, 3)] == [0, 1, 6]


def test_partition_code_examples():
    assert count_partition_codes(QuiverSpec((2,), (1,))) == chi_quiver(QuiverSpec((2,), (1,))) == 0
    assert count_partition_codes(QuiverSpec((1,), (2,))) == 2
    assert count_partition_codes(QuiverSpec((2, 1), (0, 0))) == 0
    assert count_partition_codes(QuiverSpec((0, 0), (1, 2))) == 1
    assert count_partition_codes(QuiverSpec((2,), (5,))) == 10


def test_partition_codes_equal_chi():
    checked = 0
    for k in (1, 2, 3):
        for v in itertools.product(range(4), repeat=k):
            for w in itertools.product(range(3), repeat=k):
                Q = QuiverSpec(v, w)
                assert count_partition_codes(Q) == chi_quiver(Q), Q
                checked += 1
    assert checked == 1884
