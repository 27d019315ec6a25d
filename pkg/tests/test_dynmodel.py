"""Model validation, bad reduction, iterates, negativity and pushforward."""
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arithdyn.dynmodel import (
    apply_map,
    bad_reduction_primes,
    check_negativity_conditions,
    indeterminacy_points_mod_p,
    iterate_lift,
    load_model,
    model_from_dict,
    projective_points_mod_p,
    pushforward_form,
    validate_model,
)
from arithdyn.errors import InputError, ModelError
from arithdyn.exactcore import complex_roots, parse_form
from arithdyn.exactcore.numbers import normalize_projective

V3 = ["x", "y", "z"]


def test_validate_rejects_bad_lifts():
    with pytest.raises(ModelError):
        validate_model(["x^2", "x*y"])  # common zero (0:1)
    with pytest.raises(ModelError):
        validate_model(["x^2", "y^3"])
    with pytest.raises(ModelError):
        validate_model(["x", "y"])  # degree 1
    with pytest.raises(ModelError):
        validate_model(["2*x^2", "2*y^2"])  # not primitive
    with pytest.raises(InputError):
        validate_model(["x^2", "0"])


def test_model_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"lift": ["x^2 - y^2", "y^2"]}))
    m = load_model(path)
    assert m.n == 1 and m.d == 2 and m.resultant == 1
    with pytest.raises(ModelError):
        model_from_dict({"lift": ["x^2", "y^2"], "degree": 3})
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InputError):
        load_model(bad)


def test_good_reduction_everywhere():
    m = validate_model(["x^2+x*y", "y^2+z*x+z*y", "z^2"], V3)
    rep = bad_reduction_primes(m)
    assert rep.good_everywhere and rep.primes == []


def test_bad_reduction_at_three():
    m = validate_model(["y^2-3*z^2", "x^2-3*y^2", "z*y"], V3)
    rep = bad_reduction_primes(m)
    assert rep.primes == [3]
    assert rep.indeterminacy[3] == [(0, 0, 1)]


def test_bad_reduction_at_three_and_five():
    m = validate_model(["3*y^2-5*z^2", "3*x^2-5*y^2", "z*y"], V3)
    rep = bad_reduction_primes(m)
    assert rep.primes == [3, 5]
    assert rep.indeterminacy[3] == [(1, 0, 0)]
    assert rep.indeterminacy[5] == [(0, 0, 1)]


def test_indeterminacy_brute_force():
    # independent check: enumerate P^2(F_p) and evaluate the lift directly
    m = validate_model(["3*y^2-5*z^2", "3*x^2-5*y^2", "z*y"], V3)
    for p in (3, 5):
        brute = [q for q in projective_points_mod_p(p, 2) if all(f.eval_mod(q, p) == 0 for f in m.lift)]
        assert indeterminacy_points_mod_p(m, p) == brute


@settings(max_examples=30)
@given(st.integers(-20, 20), st.integers(-20, 20).filter(bool), st.integers(1, 3))
def test_iterates_compose(a, b, k):
    m = validate_model(["2*x^2 - x*y + y^2", "3*y^2 + x*y"])
    x = (a, b)
    direct = x
    for _ in range(k):
        direct = normalize_projective(apply_map(m, direct))
    it = iterate_lift(m, k)
    assert normalize_projective(tuple(f(*x) for f in it)) == direct


def test_negativity_dimension_one():
    assert check_negativity_conditions(validate_model(["x^2", "2*y^2"])).holds
    cert = check_negativity_conditions(validate_model(["2*x^2 + y^2", "2*y^2"]))
    assert not cert.holds and cert.failing_primes == (2,)


def test_negativity_dimension_two():
    good = validate_model(["x^2+x*y", "y^2+z*x+z*y", "z^2"], V3)
    assert check_negativity_conditions(good, k_max=2).holds
    bad = validate_model(["3*y^2-5*z^2", "3*x^2-5*y^2", "z*y"], V3)
    assert not check_negativity_conditions(bad, k_max=2).holds


MODELS = [["x^2", "y^2"], ["x^2 - y^2", "y^2"], ["2*x^2 + y^2", "2*y^2"], ["3*x^2 + x*y - 2*y^2", "x^2 + 2*y^2"]]


@pytest.mark.parametrize("lift", MODELS)
@pytest.mark.parametrize("F", ["x - 2*y", "x^2 - x*y - y^2", "3*x^2 - 2*y^2", "y"])
def test_pushforward_roots_are_images(lift, F):
    m = validate_model(lift)
    G = parse_form(F, ["x", "y"])
    _, P = pushforward_form(m, G)
    assert P.degree == G.degree
    images = []
    cs = G.binary_coeffs()
    top = max(i for i, c in enumerate(cs) if c)
    pts = [complex(r) for r in complex_roots(G.dehomogenize())] if top else []
    X = [(z, 1) for z in pts] + [(1, 0)] * (G.degree - top)
    for x, y in X:
        images.append((complex(m.lift[0](x, y)), complex(m.lift[1](x, y))))
    # every image is a root of the pushforward form
    for u, v in images:
        s = max(abs(u), abs(v))
        val = P(u / s, v / s)
        assert abs(val) < 1e-8 * max(1, max(abs(c) for c in P.binary_coeffs()))


def test_pushforward_content():
    m = validate_model(["2*x^2 + y^2", "2*y^2"])
    c, P = pushforward_form(m, parse_form("x - y", ["x", "y"]))
    assert P.binary_coeffs() == [-3, 2] or P.binary_coeffs() == [3, -2]
    assert c == 1
