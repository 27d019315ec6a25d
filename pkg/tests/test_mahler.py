"""Both sides of the dynamical Mahler formula."""
import math
import random
from fractions import Fraction

import pytest

from _models import good_reduction_model
from arithdyn.dynmodel import validate_model
from arithdyn.errors import CapabilityError, InputError, UnsupportedGeometry
from arithdyn.exactcore import parse_form, parse_univariate
from arithdyn.mahler import (
    MahlerConfig,
    corollary_check,
    inequality_check,
    infinity_is_preperiodic,
    mahler_report,
    small_denominator_match,
)

POWER = validate_model(["x^2", "y^2"])
BASILICA = validate_model(["x^2 - y^2", "y^2"])
PHI2 = validate_model(["2*x^2 + y^2", "2*y^2"])


def test_golden_report():
    rep = mahler_report(POWER, parse_univariate("x^2 - x - 1"))
    assert rep.passed
    assert abs(rep.lhs_height.value - 0.481212) < 1e-6
    assert rep.E_term.terms == {} and abs(rep.infinity_term) < 1e-12


def test_quadratic_example_report():
    rep = mahler_report(PHI2, parse_univariate("x - 1"))
    assert rep.passed and rep.budget <= 5e-3
    assert rep.E_term.terms == {2: Fraction(1, 2)}
    assert abs(rep.recompute_residual() - rep.residual) < 1e-15


def test_basilica_all_terms_zero():
    rep = mahler_report(BASILICA, parse_univariate("x"))
    assert rep.passed
    assert abs(rep.lhs_height.value) < 1e-9 and abs(rep.arch_integral.value) < 1e-3
    assert rep.E_term.terms == {}


def test_report_json_fields_are_strings():
    d = mahler_report(PHI2, parse_univariate("x - 1")).to_dict()
    assert isinstance(d["residual"], str) and isinstance(d["lhs_height"]["value"], str)
    assert d["E_term"]["coefficients"] == [{"prime": 2, "c": "1/2"}]


def test_report_refuses_non_primitive():
    with pytest.raises(InputError):
        mahler_report(PHI2, parse_univariate("2*x - 2"))


def test_report_needs_dimension_one():
    m = validate_model(["x^2", "y^2", "z^2"], ["x", "y", "z"])
    with pytest.raises(CapabilityError):
        mahler_report(m, parse_univariate("x"))


def test_strict_failure_carries_partial_report():
    with pytest.raises(UnsupportedGeometry) as err:
        mahler_report(PHI2, parse_univariate("x^2 + 1"), MahlerConfig(e_mode="strict", threads=2))
    assert hasattr(err.value, "partial")


def test_irrational_roots_auto_mode():
    rep = mahler_report(PHI2, parse_univariate("x^2 + 1"))
    assert rep.passed


def test_residual_mode_heuristic():
    rep = mahler_report(PHI2, parse_univariate("x^2 + 1"), MahlerConfig(e_mode="residual"))
    assert rep.E_term.unresolved == (2,)
    # the missing E contribution is a rational multiple of log 2
    assert rep.heuristic is not None and rep.heuristic.prime == 2


def test_small_denominator_match():
    m = small_denominator_match(0.5 * math.log(3) + 1e-9, [2, 3], 2, 1e-6)
    assert m.prime == 3 and m.ratio == Fraction(1, 2)
    assert small_denominator_match(0.1234, [2], 2, 1e-6) is None


def test_threads_do_not_change_result():
    F = parse_univariate("x^2 - 3")
    a = mahler_report(PHI2, F, MahlerConfig(threads=1)).to_dict()
    b = mahler_report(PHI2, F, MahlerConfig(threads=4)).to_dict()
    assert a == b


@pytest.mark.parametrize("seed", range(4))
def test_good_reduction_E_vanishes(seed):
    m = good_reduction_model(random.Random(seed))
    rep = mahler_report(m, parse_univariate("x^2 - 2*x - 2"))
    assert rep.E_term.terms == {} and rep.E_term.exact
    assert rep.passed


def test_depth_doubling_does_not_hurt():
    F = parse_univariate("3*x - 1")
    m = validate_model(["3*x^2 + 2*y^2", "-3*x*y - 2*y^2"])
    shallow = mahler_report(m, F, MahlerConfig(tree_depth=8))
    deep = mahler_report(m, F, MahlerConfig(tree_depth=16))
    assert abs(deep.residual) <= max(abs(shallow.residual), deep.budget)


def test_corollary_jensen():
    rep = corollary_check(POWER, parse_univariate("x - 2"), parse_univariate("x - 3"))
    assert rep.passed and abs(rep.lhs - math.log(2 / 3)) < 1e-12


def test_corollary_identical_forms():
    F = parse_univariate("x^2 - 5")
    rep = corollary_check(PHI2, F, F)
    assert rep.lhs == 0 and rep.integral.value == 0 and rep.E_difference.terms == {}
    assert rep.passed


def test_corollary_with_infinity():
    rep = corollary_check(BASILICA, parse_form("x - 3*y", ["x", "y"]), parse_form("y", ["x", "y"]))
    assert rep.passed
    assert abs(rep.lhs - 1.0357521795810871) < 1e-10


def test_corollary_unequal_degrees():
    with pytest.raises(InputError):
        corollary_check(POWER, parse_univariate("x^2 - 2"), parse_univariate("x - 3"))


def test_inequality_equality_cases():
    for m, F in [(POWER, "x - 2"), (BASILICA, "x - 3")]:
        rep = inequality_check(m, parse_univariate(F))
        assert rep.holds and not rep.strict


def test_inequality_strict_case():
    m = validate_model(["x^2", "2*y^2"])
    rep = inequality_check(m, parse_univariate("x"))
    assert rep.holds and rep.strict
    assert math.isclose(rep.E_value, -math.log(2))


def test_inequality_refusals():
    with pytest.raises(InputError):
        inequality_check(PHI2, parse_univariate("x - 1"))  # negativity fails at 2
    with pytest.raises(InputError):
        inequality_check(POWER, parse_univariate("2*x - 4"))  # content 2
    assert infinity_is_preperiodic(BASILICA)
    assert not infinity_is_preperiodic(validate_model(["x^2", "x^2 + y^2"]))
