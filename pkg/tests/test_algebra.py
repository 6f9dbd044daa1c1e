from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bowlab.algebra import (
    LIMIT_STATS,
    FactoredRational,
    LaurentPoly,
    LimitDoesNotExist,
    LinearForm,
    NonInvertibleSubstitution,
    PoleError,
    UsageError,
    VarSpace,
    divides_linear,
    divmod_linear,
    factored,
    format_poly,
    limit_at_zero,
    parse_poly,
    space_from_names,
    substitute,
    symmetrize,
)

U3 = VarSpace(3, 0, (), True)
ROOTS = VarSpace(3, 0, ((1, 1), (2, 1), (2, 2)), True, True)
EPS1 = VarSpace(1, 0, (), False, True)


def P(text, space=U3):
    return parse_poly(text, space)


# arithmetic


def test_additive_inverse():
    assert (P("u1-u2") + P("u2-u1")).is_zero()


def test_laurent_inverse_monomials():
    assert P("u1/u2") * P("u2/u1") == P("1")


def test_difference_of_squares():
    assert P("(u1+h)*(u1-h)") == P("u1^2-h^2")


def test_mismatched_space_is_usage_error():
    other = VarSpace(2, 0, (), True)
    with pytest.raises(UsageError):
        P("u1") + parse_poly("u1", other)


def test_canonical_term_order_and_format():
    p = P("h^2 + u1*u2 - 3*u3 + 1/2")
    assert format_poly(p) == format_poly(P("1/2 - 3*u3 + u1*u2 + h^2"))
    assert [c for _, c in p.sorted_terms()].count(Fraction(1, 2)) == 1


def test_json_round_trip():
    p = P("u1^2/u3 - 7/3*h + 5")
    data = p.to_json()
    assert data["vars"] == ["u1", "u2", "u3", "h"]
    assert LaurentPoly.from_json(data) == p


def test_space_from_names_checks_order():
    assert space_from_names(["u1", "u2", "h"]) == VarSpace(2, 0, (), True)
    with pytest.raises(UsageError):
        space_from_names(["h", "u1"])


# substitution


def test_substitute_root_by_shifted_weight():
    f = factored(ROOTS, ["u1 - x1_1 + h"])
    out = substitute(f, {"x1_1": LinearForm.parse(ROOTS, "u2 - h")})
    assert out.expand() == parse_poly("u1 - u2 + 2*h", ROOTS)


def test_identity_assignment():
    p = P("u1^2*u2 - h/u3")
    assert substitute(p, {"u1": P("u1")}) == p
    assert substitute(p, {}) == p


def test_k_theory_reparametrization():
    assert substitute(P("u1/u2"), {"u1": P("u1*h")}) == P("u1*h/u2")


def test_non_invertible_substitution():
    with pytest.raises(NonInvertibleSubstitution):
        substitute(P("1/u1"), {"u1": P("u1+h")})


def test_factored_zero_and_pole():
    zero = substitute(factored(ROOTS, ["x1_1 - u1"]), {"x1_1": LinearForm.parse(ROOTS, "u1")})
    assert zero.is_zero()
    with pytest.raises(PoleError):
        substitute(factored(ROOTS, ["x1_1 - u1"], exps=[-1]), {"x1_1": LinearForm.parse(ROOTS, "u1")})


def test_proportional_factors_merge():
    f = factored(U3, ["u1 - u2", "2*u2 - 2*u1"])
    assert len(f.factors) == 1 and f.factors[0][1] == 2
    assert f.scalar == -2


# divisibility


def test_divides_by_h():
    assert divides_linear(P("(u1-u3)*h"), LinearForm.parse(U3, "h"))


def test_does_not_divide():
    assert not divides_linear(P("(u2-u3)*h"), LinearForm.parse(U3, "u1-u2+2*h"))


def test_zero_divisible_by_everything():
    assert divides_linear(LaurentPoly.zero(U3), LinearForm.parse(U3, "u1+u2+u3"))


def test_zero_divisor_rejected():
    with pytest.raises(UsageError):
        divides_linear(P("u1"), LinearForm(U3, {}))


def test_divmod_reconstructs():
    p = P("u1^3 - 2*u1*u2*h + u3^2 + 4")
    f = LinearForm.parse(U3, "u1 - u2 + 3*h")
    q, r = divmod_linear(p, f)
    assert q * f.to_poly() + r == p


# symmetrization


def test_symmetrize_one_block_of_two():
    expr = factored(ROOTS, ["x2_1 - x2_2 + h", "x2_1 - u1"], exps=[1, -1])
    out = symmetrize(expr, [["x2_1", "x2_2"]])
    swapped = factored(ROOTS, ["x2_2 - x2_1 + h", "x2_2 - u1"], exps=[1, -1])
    assert out == [expr, swapped]


def test_symmetrize_singletons_return_input():
    expr = factored(ROOTS, ["x1_1 - u2"])
    assert symmetrize(expr, [["x1_1"], ["x2_1"], ["x2_2"]]) == [expr]


def test_symmetrize_rejects_overlapping_blocks():
    expr = factored(ROOTS, ["x2_1 - x2_2"])
    with pytest.raises(UsageError):
        symmetrize(expr, [["x2_1", "x2_2"], ["x2_2"]])


def test_symmetrize_then_expand_matches_expand_then_permute():
    # brute force on three roots
    space = VarSpace(1, 0, ((1, 1), (1, 2), (1, 3)), True)
    expr = factored(space, ["x1_1 - u1 + h", "x1_2 - x1_3", "x1_1 + 2*x1_3 - h"])
    summed = sum((s.expand() for s in symmetrize(expr, [["x1_1", "x1_2", "x1_3"]])), LaurentPoly.zero(space))
    import itertools

    base = expr.expand()
    names = ["x1_1", "x1_2", "x1_3"]
    brute = LaurentPoly.zero(space)
    for perm in itertools.permutations(names):
        brute = brute + substitute(base, {a: LaurentPoly.var(space, b) for a, b in zip(names, perm)})
    assert summed == brute


# limits


def test_limit_exact_cancellation():
    s1 = factored(EPS1, ["eps"], exps=[-1])
    s2 = factored(EPS1, ["eps"], coef=-1, exps=[-1])
    assert limit_at_zero([s1, s2]).is_zero()


def test_limit_first_order_cancellation():
    s1 = factored(EPS1, ["u1 + eps", "eps"], exps=[1, -1])
    s2 = factored(EPS1, ["u1", "eps"], coef=-1, exps=[1, -1])
    assert limit_at_zero([s1, s2]) == parse_poly("1", EPS1.without_eps())


def test_limit_second_order_pole():
    # (u1+eps)^2/eps^2 - u1^2/eps^2 - 2*u1/eps -> 1
    a = factored(EPS1, ["u1 + eps", "eps"], exps=[2, -2])
    b = factored(EPS1, ["u1", "eps"], coef=-1, exps=[2, -2])
    c = factored(EPS1, ["u1", "eps"], coef=-2, exps=[1, -1])
    assert limit_at_zero([a, b, c]) == parse_poly("1", EPS1.without_eps())


def test_limit_surviving_pole_raises():
    with pytest.raises(LimitDoesNotExist):
        limit_at_zero([factored(EPS1, ["u1", "eps"], exps=[1, -1])])


def test_limit_non_polynomial_value_raises():
    with pytest.raises(LimitDoesNotExist):
        limit_at_zero([factored(EPS1, ["u1 + eps"], exps=[-1])])


def test_limit_instrumentation_counts_calls():
    LIMIT_STATS.reset()
    limit_at_zero([factored(EPS1, ["u1 + eps"])])
    snap = LIMIT_STATS.snapshot()
    assert snap["calls"] == 1 and snap["summands"] >= 1


# properties

_VARS = ["u1", "u2", "u3", "h"]
_small = st.integers(-3, 3)


@st.composite
def polys(draw, space=U3, max_terms=8, allow_negative=True):
    n = draw(st.integers(0, max_terms))
    lo = -2 if allow_negative else 0
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(lo, 2)) for _ in range(len(space)))
        terms[e] = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 3)))
    return LaurentPoly(space, terms)


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == LaurentPoly.zero(U3)


@given(polys(allow_negative=False, max_terms=5), st.lists(_small, min_size=2, max_size=2),
       st.lists(_small, min_size=2, max_size=2))
def test_substitution_composition(p, c1, c2):
    # a touches u1 only, b touches u2 only: disjoint domains
    a = {"u1": LinearForm(U3, {"u3": 1, "h": c1[0]}, c1[1]).to_poly()}
    b = {"u2": LinearForm(U3, {"u3": c2[0], "h": -1}, c2[1]).to_poly()}
    both = {**a, **b}
    assert substitute(substitute(p, a), b) == substitute(p, both)


@st.composite
def forms(draw):
    coefs = {v: draw(_small) for v in _VARS}
    if not any(coefs.values()):
        coefs["u1"] = 1
    return LinearForm(VarSpace(3, 0, (), True, True), coefs, draw(_small))


@given(st.lists(st.tuples(forms(), st.integers(1, 3)), min_size=1, max_size=4),
       st.lists(st.integers(1, 9), min_size=4, max_size=4))
def test_limit_agrees_with_evaluation_when_nothing_vanishes(factors, point):
    space = VarSpace(3, 0, (), True, True)
    values = dict(zip(_VARS, map(Fraction, point)))
    if any(f.evaluate(values) == 0 for f, _ in factors):
        return
    expr = FactoredRational(space, 1, factors)
    shifted = [(LinearForm(space, {**{v: f.coefficient(v) for v in _VARS}, "eps": 1}, f.const), e)
               for f, e in factors]
    lim = limit_at_zero([FactoredRational(space, 1, shifted)])
    assert lim.evaluate(values) == expr.evaluate(values)
