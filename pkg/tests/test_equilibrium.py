"""Preimage trees and integrals against the equilibrium measure."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arithdyn.archplaces import green_value
from arithdyn.dynmodel import validate_model
from arithdyn.equilibrium import (
    build_tree,
    default_depth,
    integrate_log,
    integrate_log_ratio,
    invariance_check,
    is_exceptional,
    ks_uniform_arguments,
    preimage_fiber,
)
from arithdyn.errors import BudgetError, InputError
from arithdyn.exactcore import parse_form, parse_univariate

POWER = validate_model(["x^2", "y^2"])
BASILICA = validate_model(["x^2 - y^2", "y^2"])
PHI2 = validate_model(["2*x^2 + y^2", "2*y^2"])
CUBIC_POLY = validate_model(["x^3 - 2*x*y^2 + y^3", "y^3"])
RATIONAL = validate_model(["3*x^2 + x*y - 2*y^2", "x^2 + 2*y^2"])

_trees = {}


def tree(model, depth=None):
    key = (model, depth)
    if key not in _trees:
        _trees[key] = build_tree(model, depth=depth)
    return _trees[key]


def line(a, b=1):
    return parse_form(f"{b}*x - ({a})*y", ["x", "y"])


@pytest.mark.parametrize("model", [POWER, BASILICA, RATIONAL, CUBIC_POLY])
@pytest.mark.parametrize("w", [(0.3 + 0.1j, 1), (2, 1), (1, 0), (1, 1e-3)])
def test_fiber_maps_back(model, w):
    fib = preimage_fiber(model, w)
    assert sum(m for _, m in fib) == model.d
    wx, wy = w
    for (x, y), _ in fib:
        u, v = complex(model.lift[0](x, y)), complex(model.lift[1](x, y))
        # cross product of projective points
        assert abs(u * wy - v * wx) <= 1e-8 * max(abs(u), abs(v)) * max(abs(wx), abs(wy))


def test_fiber_multiplicity():
    fib = preimage_fiber(POWER, (0, 1))
    assert len(fib) == 1 and fib[0][1] == 2


def test_tree_shape_and_cap():
    t = tree(POWER, 8)
    assert [lv.shape[1] for lv in t.levels] == [2**k for k in range(9)]
    assert default_depth(2) == 16 and default_depth(3) == 10
    with pytest.raises(BudgetError):
        build_tree(POWER, depth=17)


def test_exceptional_base_refused():
    assert is_exceptional(POWER, (0, 1))
    with pytest.raises(InputError):
        build_tree(POWER, (0, 1), depth=4)


def test_tree_deterministic():
    a = build_tree(BASILICA, depth=8, seed=3)
    b = build_tree(BASILICA, depth=8, seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a.levels, b.levels))


@settings(max_examples=15)
@given(st.integers(-6, 6).filter(lambda a: abs(a) != 1), st.integers(1, 4))
def test_jensen_power_map(a, b):
    est = integrate_log(tree(POWER, 12), line(a, b))
    expected = math.log(max(abs(a), b))
    assert abs(est.value - expected) <= 3 * est.spread + 2e-3


@settings(max_examples=15)
@given(st.sampled_from([BASILICA, CUBIC_POLY]), st.fractions(min_value=-4, max_value=4, max_denominator=4))
def test_potential_formula_for_polynomials(model, a):
    # for a monic polynomial map the equilibrium potential is the escape rate
    est = integrate_log(tree(model), line(a.numerator, a.denominator))
    shift = math.log(a.denominator)  # the form is b x - a y
    g = green_value(model, (float(a), 1.0), 50).value
    assert abs(est.value - shift - g) <= 3 * est.spread + 2e-3


def test_golden_polynomial():
    est = integrate_log(tree(POWER, 12), parse_univariate("x^2 - x - 1"))
    assert abs(est.value - math.log((1 + math.sqrt(5)) / 2)) < 2e-3


def test_ratio_is_difference():
    t = tree(BASILICA)
    F, G = line(3), line(2)
    r = integrate_log_ratio(t, F, G)
    assert abs(r.value - (integrate_log(t, F).value - integrate_log(t, G).value)) < 1e-12
    with pytest.raises(InputError):
        integrate_log_ratio(t, F, parse_univariate("x^2 + 1"))


@pytest.mark.parametrize(
    "model, G",
    [
        (POWER, "x - 2*y"),
        (POWER, "x^2 - x*y - y^2"),
        (BASILICA, "x - 3*y"),
        (BASILICA, "x"),
        (PHI2, "x - y"),
        (RATIONAL, "x - y"),
        (RATIONAL, "2*x^2 + y^2"),
        (CUBIC_POLY, "x + 2*y"),
    ],
)
def test_invariance(model, G):
    chk = invariance_check(model, tree(model), parse_form(G, ["x", "y"]))
    assert chk.agrees()


def test_power_map_arguments_uniform():
    t = tree(POWER, 10)
    assert ks_uniform_arguments(t.levels[10]) < 0.05
