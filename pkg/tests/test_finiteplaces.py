"""Local heights at finite places and the finite-place Mahler term."""
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from arithdyn.dynmodel import apply_map, iterate_lift, validate_model
from arithdyn.errors import InputError, ModelError, UnsupportedGeometry
from arithdyn.exactcore import HomogeneousForm, parse_form, parse_univariate
from arithdyn.exactcore.numbers import int_valuation, normalize_projective
from arithdyn.finiteplaces import (
    E_finite,
    R_v_bound,
    S_v,
    divisor_height_sum_roots,
    divisor_height_sum_sigma,
    finite_local_height,
    local_height_sequence,
)

PHI2 = validate_model(["2*x^2 + y^2", "2*y^2"])
coef = st.integers(-3, 3)


@st.composite
def bad_models(draw):
    """Degree-2 models on P^1 with at least one bad prime."""
    cs = draw(st.lists(coef, min_size=6, max_size=6))
    try:
        m = validate_model([HomogeneousForm.binary(cs[:3]), HomogeneousForm.binary(cs[3:])])
    except ModelError:
        assume(False)
    assume(abs(m.resultant) > 1)
    return m


def first_prime(n):
    n = abs(n)
    p = 2
    while n % p:
        p += 1
    return p


points = st.tuples(st.integers(-30, 30), st.integers(-30, 30)).filter(lambda t: t != (0, 0))


@settings(max_examples=40)
@given(bad_models(), points, st.integers(1, 3))
def test_sequence_matches_iterated_lift(m, pt, k):
    # oracle: h_k = v_p(Phi^k(x)) / d^k with Phi^k expanded symbolically
    p = first_prime(m.resultant)
    x = normalize_projective(pt)
    it = iterate_lift(m, k)
    vals = [f(*x) for f in it]
    direct = Fraction(min(int_valuation(p, v) for v in vals if v), m.d**k)
    assert local_height_sequence(m, p, x, k)[-1] == direct


@settings(max_examples=40)
@given(bad_models(), points)
def test_sequence_monotone_and_bounded(m, pt):
    p = first_prime(m.resultant)
    R = R_v_bound(m, p)
    seq = local_height_sequence(m, p, pt, 8)
    assert all(a <= b for a, b in zip(seq, seq[1:]))
    assert all(h <= Fraction(R, m.d - 1) for h in seq)


@settings(max_examples=40)
@given(bad_models(), points, st.integers(1, 50).filter(lambda c: c % 2 and c % 3 and c % 5 and c % 7))
def test_S_scaling_invariant(m, pt, c):
    p = first_prime(m.resultant)
    a = S_v(m, p, pt)
    assert a == S_v(m, p, (pt[0] * p * c, pt[1] * p * c))
    assert a == S_v(m, p, (Fraction(pt[0], p), Fraction(pt[1], p)))
    assert 0 <= a <= R_v_bound(m, p)


@settings(max_examples=30)
@given(bad_models(), points)
def test_limit_brackets_sequence(m, pt):
    p = first_prime(m.resultant)
    est = finite_local_height(m, p, pt)
    seq = local_height_sequence(m, p, pt, 6)
    assert est.lower_bound <= est.value <= est.upper_bound
    assert seq[-1] <= est.upper_bound
    assert est.width <= Fraction(1, 10**12)


@settings(max_examples=30)
@given(bad_models(), points)
def test_corrected_functional_law(m, pt):
    # h(phi P) = d h(P) - S(P)
    p = first_prime(m.resultant)
    h = finite_local_height(m, p, pt)
    h1 = finite_local_height(m, p, apply_map(m, pt))
    S = S_v(m, p, pt)
    gap = m.d * h.value - S - h1.value
    assert abs(gap) <= m.d * h.width / 2 + h1.width / 2


def test_exact_values_quadratic_example():
    h = finite_local_height(PHI2, 2, (1, 0))
    assert h.exact and h.value == 1
    h = finite_local_height(PHI2, 2, (1, 1))
    assert h.exact and h.value == Fraction(1, 2)
    assert finite_local_height(PHI2, 2, (0, 1)).value == Fraction(1, 2)


def test_good_prime_is_zero():
    assert finite_local_height(PHI2, 3, (5, 7)).value == 0
    pw = validate_model(["x^2", "y^2"])
    assert finite_local_height(pw, 2, (4, 3)).value == 0


def test_local_height_input_errors():
    with pytest.raises(InputError):
        finite_local_height(PHI2, 4, (1, 0))
    with pytest.raises(InputError):
        finite_local_height(PHI2, 2, (0, 0))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_E_quadratic_example(p):
    m = validate_model([f"{p}*x^2 + y^2", f"{p}*y^2"])
    E = E_finite(m, parse_univariate("x - 1"), mode="strict")
    assert E.exact and E.terms == {p: Fraction(1, 2)}


def test_E_content_and_infinity_roots():
    E = E_finite(PHI2, parse_univariate("2*x - 2"))
    assert E.terms == {2: Fraction(-1, 2)}
    # (y) vanishes at infinity only: c_p = h_p(inf) - h_p(inf) = 0
    assert E_finite(PHI2, parse_form("y", ["x", "y"])).terms == {}


def test_E_negative_under_negativity_conditions():
    m = validate_model(["x^2", "2*y^2"])
    E = E_finite(m, parse_univariate("x"))
    assert E.terms == {2: Fraction(-1)}
    assert math.isclose(E.value(), -math.log(2))


def test_E_good_reduction_vanishes():
    m = validate_model(["x^2 - y^2", "y^2"])
    assert E_finite(m, parse_univariate("x^2 - x - 1")).terms == {}


def test_E_strict_refuses_ramified_roots():
    F = parse_univariate("x^2 + 1")  # (x + 1)^2 mod 2
    with pytest.raises(UnsupportedGeometry):
        E_finite(PHI2, F, mode="strict")
    res = E_finite(PHI2, F, mode="residual")
    assert res.unresolved == (2,)
    auto = E_finite(PHI2, F)
    assert not auto.unresolved


def test_root_route_matches_pushforward_route():
    m = validate_model(["7*x^2 + y^2", "7*y^2"])
    F = parse_univariate("x^2 - 2")  # irreducible over Q, split in Q_7
    by_roots, unsupported = divisor_height_sum_roots(m, 7, F)
    assert not unsupported
    by_sigma = divisor_height_sum_sigma(m, 7, F.homogenize())
    assert by_roots.lower_bound <= by_sigma.upper_bound
    assert by_sigma.lower_bound <= by_roots.upper_bound


@settings(max_examples=25)
@given(bad_models(), st.lists(st.tuples(st.integers(-5, 5), st.integers(1, 3)), min_size=1, max_size=2))
def test_split_divisor_two_routes(m, roots):
    F = HomogeneousForm.binary([1])
    for a, b in roots:
        F = F * HomogeneousForm.binary([-a, b])
    F = F.primitive_part()
    p = first_prime(m.resultant)
    by_roots, _ = divisor_height_sum_roots(m, p, F.dehomogenize())
    by_sigma = divisor_height_sum_sigma(m, p, F)
    assert abs(by_roots.value - by_sigma.value) <= (by_roots.width + by_sigma.width) / 2 + Fraction(1, 10**12)
