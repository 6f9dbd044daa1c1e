import random

import pytest
from hypothesis import given, strategies as st

from bowlab.diagram import (
    D5,
    NS5,
    BraneDiagram,
    DiagramError,
    MarginData,
    ParseError,
    QuiverSpec,
    TransitionError,
    charges_and_margins,
    check_quiver_duality,
    classify,
    diagram_from_margins,
    dimension,
    dual_flag_quiver,
    flag_quiver,
    gale_ryser,
    hw_move_to,
    hw_transition,
    is_valid,
    mirror_dual,
    parse_diagram,
    print_diagram,
    quiver_margins,
    quiver_to_diagram,
    random_diagram,
    separated_form,
    tu_tv_transition,
    validate_margins,
)
from bowlab.fixedpoints import count_fixed_points

from conftest import RUNNING


# parsing


def test_parse_running_example():
    D = parse_diagram(RUNNING)
    assert (D.m, D.n) == (6, 5)
    assert D.d3 == (0, 2, 2, 2, 4, 3, 3, 4, 3, 2, 2, 0)


def test_parse_small_example():
    D = parse_diagram("/1\\1\\1/")
    assert (D.m, D.n, D.d3) == (2, 2, (0, 1, 1, 1, 0))


def test_parse_single_brane():
    D = parse_diagram("/")
    assert D.branes == (NS5,) and D.d3 == (0, 0)


def test_pipe_alias():
    assert parse_diagram("/1|1|1/") == parse_diagram("/1\\1\\1/")


@pytest.mark.parametrize("bad, offset", [("", 0), ("//", 1), ("/1x\\", 2), ("/-1\\", 1), ("/1", 2), ("1/", 0)])
def test_parse_errors_carry_offsets(bad, offset):
    with pytest.raises(ParseError) as err:
        parse_diagram(bad)
    assert err.value.offset == offset


def test_json_round_trip():
    D = parse_diagram(RUNNING)
    assert BraneDiagram.from_json(D.to_json()) == D
    assert D.to_json()["branes"][:2] == ["NS5", "D5"]


@given(st.lists(st.sampled_from("/\\"), min_size=1, max_size=9), st.data())
def test_print_parse_round_trip(tokens, data):
    mults = [data.draw(st.integers(0, 12)) for _ in tokens[1:]]
    text = tokens[0] + "".join(f"{m}{t}" for m, t in zip(mults, tokens[1:]))
    assert print_diagram(parse_diagram(text)) == text


# charges and margins


def test_running_example_margins():
    md = charges_and_margins(parse_diagram(RUNNING))
    assert md.r == (2, 1, 1, 2, 3, 2)
    assert md.c == (5, 2, 2, 0, 2)


def test_small_margins():
    md = charges_and_margins(parse_diagram("/1\\1\\1/"))
    assert (md.r, md.c) == ((1, 1), (1, 1))


def test_grassmannian_code_margins():
    md = charges_and_margins(parse_diagram("\\1\\2/2\\2\\2/"))
    assert (md.r, md.c) == ((2, 2), (1, 1, 1, 1))


def test_margin_json_round_trip():
    md = charges_and_margins(parse_diagram(RUNNING))
    assert MarginData.from_json(md.to_json()) == md


@pytest.mark.parametrize("r, c, ok", [
    ((2, 1, 1, 2, 3, 2), (5, 2, 2, 0, 2), True),
    ((3,), (1, 1), False),
    ((2, 2), (2, 2), True),
    ((0, 0), (0,), True),
    ((3, 0), (1, 1, 1), True),
    ((3,), (3,), False),
])
def test_gale_ryser(r, c, ok):
    assert gale_ryser(r, c) is ok


def test_gale_ryser_rejects_negative():
    from bowlab.algebra import UsageError

    with pytest.raises(UsageError):
        gale_ryser((-1, 2), (1,))


@given(st.lists(st.integers(0, 3), max_size=4), st.lists(st.integers(0, 3), max_size=4))
def test_gale_ryser_matches_brute_force(r, c):
    import itertools

    m, n = len(r), len(c)
    exists = any(
        all(sum(bits[i * n:(i + 1) * n]) == r[i] for i in range(m))
        and all(sum(bits[i * n + j] for i in range(m)) == c[j] for j in range(n))
        for bits in itertools.product((0, 1), repeat=m * n)
    )
    assert gale_ryser(r, c) is exists


def test_reconstruction_from_margins(corpus):
    for D in corpus[::7]:
        assert diagram_from_margins(charges_and_margins(D)) == D


def test_sum_r_equals_sum_c():
    rng = random.Random(3)
    for _ in range(300):
        md = charges_and_margins(random_diagram(rng, 10, 6, valid=False))
        assert sum(md.r) == sum(md.c)


# dimension


@pytest.mark.parametrize("code, dim", [("/1\\1\\1/", 2), (RUNNING, 16), ("\\1/2/2\\2\\1/", 6), ("\\1/2/2\\2\\2/", 4)])
def test_dimension(code, dim):
    assert dimension(parse_diagram(code)) == dim


def test_dimension_even_nonnegative_and_hw_invariant():
    rng = random.Random(11)
    for _ in range(1000):
        D = random_diagram(rng, 8, 4)
        assert is_valid(D)
        d = dimension(D)
        assert d >= 0 and d % 2 == 0
        S, _ = separated_form(D)
        assert dimension(S) == d


# mirror


def test_mirror_of_running_example():
    md = charges_and_margins(mirror_dual(parse_diagram(RUNNING)))
    assert md.r == (1, 4, 4, 6, 4)
    assert md.c == (3, 4, 4, 3, 2, 3)


def test_mirror_symbol_swap_and_involution():
    D = parse_diagram("/1\\1\\1/")
    assert print_diagram(mirror_dual(D)) == "\\1/1/1\\"
    assert mirror_dual(mirror_dual(D)) == D


def test_mirror_margin_law():
    rng = random.Random(5)
    for _ in range(1000):
        D = random_diagram(rng, 10, 6, valid=False)
        md, mm = charges_and_margins(D), charges_and_margins(mirror_dual(D))
        assert mm.c == tuple(md.n - x for x in md.r)
        assert mm.r == tuple(md.m - x for x in md.c)


# Hanany-Witten and same-type moves


def test_hw_running_example_middle():
    D = parse_diagram(RUNNING)
    pos = 6  # V5 then U3
    assert (D.branes[pos], D.branes[pos + 1]) == (NS5, D5)
    E = hw_transition(D, pos)
    assert E.d3[pos + 1] == 3 + 3 + 1 - 4
    assert charges_and_margins(E).r == charges_and_margins(D).r
    assert hw_transition(E, pos) == D


def test_hw_chain_move():
    assert print_diagram(hw_transition(parse_diagram("\\2/2/2/2/2/2\\"), 0)) == "/1\\2/2/2/2/2\\"


def test_hw_same_type_rejected():
    with pytest.raises(TransitionError, match="tu_tv_transition"):
        hw_transition(parse_diagram("/1\\1\\1/"), 1)


def test_hw_invariants_on_corpus(corpus):
    for D in corpus[::5]:
        md = charges_and_margins(D)
        n_fp = count_fixed_points(D)
        for pos in range(len(D.branes) - 1):
            if D.branes[pos] == D.branes[pos + 1]:
                continue
            E = hw_transition(D, pos)
            me = charges_and_margins(E)
            assert (me.r, me.c) == (md.r, md.c)
            assert sum(abs(a - b) for a, b in zip(me.path, md.path)) == 1
            assert count_fixed_points(E) == n_fp
            assert dimension(E) == dimension(D)


def test_tu_symmetric_case():
    D = parse_diagram("/2\\2\\2/")
    assert tu_tv_transition(D, 1) == D


def test_tv_involution_and_margins():
    D = parse_diagram("/1/3\\2\\1/")
    E = tu_tv_transition(D, 0)
    assert tu_tv_transition(E, 0) == D
    md, me = charges_and_margins(D), charges_and_margins(E)
    assert me.r == (md.r[1], md.r[0]) + md.r[2:]
    assert dimension(E) == dimension(D)


def test_tu_negative_result_rejected():
    with pytest.raises(TransitionError, match="invalid same-type transition"):
        tu_tv_transition(parse_diagram("/1\\3\\1/"), 1)


def test_tu_sorting_reaches_hw_cobalanced():
    D = parse_diagram("/1/3\\3\\2\\")
    assert not classify(D)["hw_cobalanced"]
    for _ in range(10):
        c = charges_and_margins(D).c
        j = next((j for j in range(len(c) - 1) if c[j] < c[j + 1]), None)
        if j is None:
            break
        D = tu_tv_transition(D, D.d5_positions()[j])
    assert classify(D)["hw_cobalanced"]
    assert sorted(charges_and_margins(D).c) == [0, 1, 2]


# separated form and classification


def test_separated_grassmannian():
    D = parse_diagram("/2\\2\\2\\2\\2\\2/")
    S, moves = separated_form(D)
    k = S.branes.index(D5)
    assert set(S.branes[:k]) == {NS5} and set(S.branes[k:]) == {D5}
    assert charges_and_margins(S).r == charges_and_margins(D).r
    assert moves


def test_separated_fixed_point():
    S = parse_diagram("/1/1\\")
    assert separated_form(S) == (S, [])


def test_separated_preserves_count():
    D = parse_diagram("\\1/1/1\\")
    S, _ = separated_form(D)
    # two fixed points, as for its mirror /1\\1\\1/
    assert count_fixed_points(S) == count_fixed_points(D) == 2


def test_hw_move_to_target():
    D = parse_diagram(RUNNING)
    target = tuple(sorted(D.branes, key=lambda b: b != D5))
    E, moves = hw_move_to(D, target)
    assert E.branes == target and charges_and_margins(E).c == charges_and_margins(D).c


def test_classify_examples():
    assert classify(parse_diagram("/2\\2\\2\\2\\2\\2/"))["cobalanced"]
    flags = classify(parse_diagram("/1/3/4\\3\\1\\"))
    assert not flags["hw_cobalanced"] and not flags["hw_balanced"]


def test_mirror_of_balanced_is_cobalanced():
    D = quiver_to_diagram(QuiverSpec((1, 2, 1), (0, 2, 0)))
    M = mirror_dual(D)
    assert classify(D)["cobalanced"] and classify(M)["balanced"]


# quivers


@pytest.mark.parametrize("v, w, code", [
    ((2,), (5,), "/2\\2\\2\\2\\2\\2/"),
    ((1, 2, 4), (0, 0, 6), "/1/2/4\\4\\4\\4\\4\\4\\4/"),
    ((3, 2, 5), (0, 4, 2), "/3/2\\2\\2\\2\\2/5\\5\\5/"),
])
def test_quiver_to_diagram(v, w, code):
    D = quiver_to_diagram(QuiverSpec(v, w))
    assert print_diagram(D) == code and classify(D)["cobalanced"]


def test_quiver_margins_examples():
    assert quiver_margins(QuiverSpec((2, 6), (0, 10))) == ((2, 4, 4), (1,) * 10)
    Qd = QuiverSpec((2, 4, 5, 6, 5, 4, 3, 2, 1), (0, 1, 0, 2, 0, 0, 0, 0, 0))
    assert quiver_margins(Qd) == ((2,) * 10, (8, 6, 6))
    assert quiver_margins(QuiverSpec((3,), (7,))) == ((3, 4), (1,) * 7)


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=5))
def test_quiver_margins_match_diagram(nodes):
    Q = QuiverSpec(tuple(v for v, _ in nodes), tuple(w for _, w in nodes))
    md = charges_and_margins(quiver_to_diagram(Q))
    assert quiver_margins(Q) == (md.r, md.c)


DUAL_PAIRS = [
    (QuiverSpec((2, 6), (0, 10)), QuiverSpec((2, 4, 5, 6, 5, 4, 3, 2, 1), (0, 1, 0, 2, 0, 0, 0, 0, 0))),
    (QuiverSpec((2,), (5,)), QuiverSpec((1, 2, 2, 1), (0, 1, 1, 0))),
    (QuiverSpec((1, 2), (0, 3)), QuiverSpec((2, 1), (3, 0))),
]


@pytest.mark.parametrize("Q, Qd", DUAL_PAIRS)
def test_named_dual_pairs(Q, Qd):
    assert check_quiver_duality(Q, Qd)


def test_duality_framing_mismatch():
    with pytest.raises(DiagramError):
        check_quiver_duality(QuiverSpec((2,), (5,)), QuiverSpec((1,), (1,)))


def test_dual_flag_quiver_examples():
    D = quiver_to_diagram(dual_flag_quiver((2, 3, 3)))
    assert print_diagram(D) == "/2/4\\4/5\\5\\5/4/3/2/1/"
    assert dual_flag_quiver((1, 1, 1)) == QuiverSpec((2, 1), (3, 0))
    assert dual_flag_quiver((2, 3)) == QuiverSpec((1, 2, 2, 1), (0, 1, 1, 0))


@pytest.mark.parametrize("lam", [(1, 1, 1), (2, 3, 3), (1, 2, 2), (2, 3), (1, 1, 2, 3)])
def test_dual_flag_is_dual(lam):
    assert check_quiver_duality(flag_quiver(lam), dual_flag_quiver(lam))


def test_validate_margins_accepts_diagrams():
    assert validate_margins(parse_diagram(RUNNING))
    assert not validate_margins(parse_diagram("/2\\2\\"))
