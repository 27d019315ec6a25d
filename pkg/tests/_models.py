"""Model generators shared by the test modules."""
import random

from hypothesis import strategies as st

from arithdyn.dynmodel import validate_model
from arithdyn.errors import ModelError
from arithdyn.exactcore import HomogeneousForm


def conjugate(lift, M):
    """Lift of M^-1 o phi o M for M in SL2(Z) (so the resultant is unchanged)."""
    (a, b), (c, e) = M
    assert a * e - b * c == 1
    X, Y = HomogeneousForm.variable(2, 0), HomogeneousForm.variable(2, 1)
    moved = [f.substitute([X.scale(a) + Y.scale(b), X.scale(c) + Y.scale(e)]) for f in lift]
    p, q = moved
    return [p.scale(e) - q.scale(b), q.scale(a) - p.scale(c)]


def random_sl2(rng, steps=2, bound=2):
    M = ((1, 0), (0, 1))
    for _ in range(steps):
        k = rng.randint(-bound, bound)
        T = ((1, k), (0, 1)) if rng.random() < 0.5 else ((1, 0), (k, 1))
        M = tuple(tuple(sum(M[i][t] * T[t][j] for t in range(2)) for j in range(2)) for i in range(2))
    return M


def good_reduction_model(rng):
    """A degree-2 map with unit resultant: a conjugated polynomial map."""
    a, b = rng.randint(-2, 2), rng.randint(-3, 3)
    base = [HomogeneousForm.binary([b, a, 1]), HomogeneousForm.binary([1, 0, 0])]
    return validate_model(conjugate(base, random_sl2(rng)))


def random_model(rng, bound=3):
    while True:
        cs = [rng.randint(-bound, bound) for _ in range(6)]
        try:
            return validate_model([HomogeneousForm.binary(cs[:3]), HomogeneousForm.binary(cs[3:])])
        except ModelError:
            continue


good_models = st.integers(0, 2**32).map(lambda s: good_reduction_model(random.Random(s)))
any_models = st.integers(0, 2**32).map(lambda s: random_model(random.Random(s)))
