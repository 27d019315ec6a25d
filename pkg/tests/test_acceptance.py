"""Acceptance criteria, each at its stated tolerance.

Every test records one pass/fail line, printed in the terminal summary
under "acceptance criteria".
"""
import random
import time
from fractions import Fraction

from _models import good_reduction_model, random_model
from arithdyn.dynmodel import apply_map, bad_reduction_primes, validate_model
from arithdyn.equilibrium import build_tree, integrate_log, invariance_check, ks_uniform_arguments
from arithdyn.exactcore import HomogeneousForm, IntPolynomial, complex_roots, parse_form, parse_univariate
from arithdyn.finiteplaces import E_finite, R_v_bound, S_v, finite_local_height, local_height_sequence
from arithdyn.heights import (
    canonical_height_divisor,
    canonical_height_divisor_split,
    canonical_height_point,
    naive_height,
    pushforward_divisor,
)
from arithdyn.mahler import MahlerConfig, mahler_report

POWER = validate_model(["x^2", "y^2"])
BASILICA = validate_model(["x^2 - y^2", "y^2"])
RATIONAL = validate_model(["3*x^2 + x*y - 2*y^2", "x^2 + 2*y^2"])
CUBIC = validate_model(["x^3 - 2*x*y^2 + y^3", "y^3"])
PHI = {p: validate_model([f"{p}*x^2 + y^2", f"{p}*y^2"]) for p in (2, 3, 5)}


def test_criterion_1_classical_mahler(verdict):
    t0 = time.perf_counter()
    F = parse_univariate("x^2 - x - 1")
    h = canonical_height_divisor(POWER, F)
    est = integrate_log(build_tree(POWER, depth=12), F)
    elapsed = time.perf_counter() - t0
    ok_h = abs(h.value - 0.481212) <= 1e-6
    ok_i = abs(est.value - 0.481212) <= 2e-3
    ok_t = elapsed < 10
    verdict(
        "criterion 1",
        ok_h and ok_i and ok_t,
        f"height {h.value:.9f}, integral {est.value:.6f}, {elapsed:.2f}s",
    )
    assert ok_h and ok_i and ok_t


def test_criterion_2_quadratic_E_value(verdict):
    parts, ok = [], True
    for p, m in PHI.items():
        t0 = time.perf_counter()
        F = parse_univariate("x - 1")
        E = E_finite(m, F, mode="strict")
        rep = mahler_report(m, F)
        elapsed = time.perf_counter() - t0
        c = E.terms.get(p, Fraction(0))
        literal = E.exact and E.terms == {p: Fraction(1)}
        identity = rep.passed and rep.budget <= 5e-3
        ok = ok and literal and identity and elapsed < 30
        parts.append(
            f"p={p}: c_p={c} (expected 1), residual {rep.residual:.1e} <= budget {rep.budget:.1e}: {identity}, {elapsed:.1f}s"
        )
    verdict("criterion 2", ok, "; ".join(parts))
    assert ok


REDUCTION = [
    (["x^2 + x*y", "y^2 + z*x + z*y", "z^2"], {}),
    (["y^2 - 3*z^2", "x^2 - 3*y^2", "z*y"], {3: [(0, 0, 1)]}),
    (["3*y^2 - 5*z^2", "3*x^2 - 5*y^2", "z*y"], {3: [(1, 0, 0)], 5: [(0, 0, 1)]}),
]


def test_criterion_3_reduction_examples(verdict):
    ok, parts = True, []
    for lift, expected in REDUCTION:
        t0 = time.perf_counter()
        rep = bad_reduction_primes(validate_model(lift, ["x", "y", "z"]))
        elapsed = time.perf_counter() - t0
        got = {p: [tuple(pt) for pt in rep.indeterminacy[p]] for p in rep.primes}
        good = got == expected and (rep.good_everywhere == (not expected)) and elapsed < 5
        ok = ok and good
        parts.append(f"{sorted(got) or 'good everywhere'} {elapsed:.2f}s")
    verdict("criterion 3", ok, "; ".join(parts))
    assert ok


def _local_triples(n, seed=2024):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        m = random_model(rng)
        primes = bad_reduction_primes(m).primes
        if not primes:
            continue
        p = rng.choice(primes)
        pt = (rng.randint(-20, 20), rng.randint(-20, 20))
        if pt != (0, 0):
            out.append((m, p, pt))
    return out


def test_criterion_4_local_height_laws(verdict):
    monotone = bounded = literal = corrected = 0
    triples = _local_triples(50)
    for m, p, pt in triples:
        seq = local_height_sequence(m, p, pt, 10)
        R = R_v_bound(m, p)
        monotone += all(a <= b for a, b in zip(seq, seq[1:]))
        bounded += all(h <= Fraction(R, m.d - 1) for h in seq)
        h = finite_local_height(m, p, pt)
        h1 = finite_local_height(m, p, apply_map(m, pt))
        tol = m.d * h.width / 2 + h1.width / 2
        literal += abs(h1.value - m.d * h.value) <= tol
        corrected += abs(h1.value - (m.d * h.value - S_v(m, p, pt))) <= tol
    n = len(triples)
    ok = monotone == bounded == literal == n
    verdict(
        "criterion 4",
        ok,
        f"monotone {monotone}/{n}, bounded {bounded}/{n}, h(phi P) = d h(P) {literal}/{n}, "
        f"h(phi P) = d h(P) - S(P) {corrected}/{n}",
    )
    assert monotone == n and bounded == n
    assert corrected == n
    assert literal == n


def test_criterion_5_canonical_height_laws(verdict):
    rng = random.Random(5)
    pts = []
    while len(pts) < 100:
        pt = (rng.randint(-10**9, 10**9), rng.randint(-10**9, 10**9))
        if pt != (0, 0):
            pts.append(pt)
    naive_ok = sum(canonical_height_point(POWER, pt).value == naive_height(pt) for pt in pts)

    functional_ok, worst_budget, total = 0, 0.0, 0
    for k in range(5):
        m = good_reduction_model(random.Random(100 + k))
        for _ in range(50):
            pt = (rng.randint(-50, 50), rng.randint(-50, 50))
            if pt == (0, 0):
                pt = (1, 0)
            h = canonical_height_point(m, pt)
            h1 = canonical_height_point(m, apply_map(m, pt))
            budget = m.d * h.error_bound + h1.error_bound
            worst_budget = max(worst_budget, budget)
            functional_ok += abs(h1.value - 2 * h.value) <= budget and budget <= 1e-6
            total += 1

    periodic = [(BASILICA, (0, 1)), (BASILICA, (1, 1)), (BASILICA, (1, 0)), (POWER, (1, 1)), (POWER, (-1, 1)), (POWER, (0, 1)), (PHI[2], (1, 0))]
    periodic_max = max(abs(canonical_height_point(m, pt).value) for m, pt in periodic)

    ok = naive_ok == 100 and functional_ok == total and periodic_max <= 1e-9
    verdict(
        "criterion 5",
        ok,
        f"naive {naive_ok}/100 exact, functional {functional_ok}/{total} (worst budget {worst_budget:.1e}), "
        f"periodic max {periodic_max:.1e}",
    )
    assert ok


SPLIT_FORMS = [
    [(2, 1)],
    [(1, 1), (-3, 2)],
    [(0, 1), (1, 3), (5, 1)],
    [(-1, 2), (-1, 2)],
]
DIVISOR_MODELS = [POWER, BASILICA, PHI[2], RATIONAL, validate_model(["x^2 + 2*x*y", "3*y^2 - x*y"])]


def _matched(a, b, tol):
    rest = list(b)
    for z in a:
        k = min(range(len(rest)), key=lambda i: abs(rest[i] - z))
        if abs(rest[k] - z) > tol * max(1, abs(z)):
            return False
        rest.pop(k)
    return not rest


def test_criterion_6_oracle_equivalence(verdict):
    worst, agree, total = 0.0, 0, 0
    for m in DIVISOR_MODELS:
        for roots in SPLIT_FORMS:
            F = HomogeneousForm.binary([1])
            for a, b in roots:
                F = F * HomogeneousForm.binary([-a, b])
            gap = abs(canonical_height_divisor(m, F).value - canonical_height_divisor_split(m, [((a, b), 1) for a, b in roots]).value)
            worst = max(worst, gap)
            agree += gap <= 1e-4
            total += 1
    multiset_ok, cases = 0, 0
    for m in DIVISOR_MODELS:
        for text in ["x^2 - x - 1", "x^3 - 2", "3*x^2 + 2*x + 5"]:
            f = parse_univariate(text)
            G = pushforward_divisor(m, f)
            images = [complex(m.lift[0](z, 1)) / complex(m.lift[1](z, 1)) for z in complex_roots(f)]
            multiset_ok += _matched(complex_roots(G.dehomogenize()), images, 1e-8)
            cases += 1
    ok = agree == total == 20 and multiset_ok == cases
    verdict("criterion 6", ok, f"divisor vs split {agree}/{total} (worst {worst:.1e}), pushforward multisets {multiset_ok}/{cases}")
    assert ok


INVARIANCE = [
    (POWER, "x - 2*y"),
    (POWER, "x^2 - x*y - y^2"),
    (BASILICA, "x - 3*y"),
    (BASILICA, "x"),
    (BASILICA, "x^2 + y^2"),
    (PHI[2], "x - y"),
    (PHI[3], "x + 2*y"),
    (RATIONAL, "x - y"),
    (RATIONAL, "2*x^2 + y^2"),
    (CUBIC, "x + 2*y"),
]


def test_criterion_7_measure_invariance(verdict):
    trees = {}
    agree = 0
    for m, G in INVARIANCE:
        if m not in trees:
            trees[m] = build_tree(m)
        agree += invariance_check(m, trees[m], parse_form(G, ["x", "y"])).agrees(3.0)
    ks = ks_uniform_arguments(build_tree(POWER, depth=10).levels[10])
    ok = agree == len(INVARIANCE) and ks < 0.05
    verdict("criterion 7", ok, f"invariance {agree}/{len(INVARIANCE)}, KS distance {ks:.4f}")
    assert ok


def _mahler_suite(seed=1):
    rng = random.Random(seed)
    models = [random_model(rng) for _ in range(20)]
    forms = []
    for _ in models:
        F = IntPolynomial([1])
        for _ in range(rng.randint(1, 2)):
            F = F * IntPolynomial([-rng.randint(-5, 5), rng.randint(1, 3)])
        forms.append(F.primitive_part())
    return list(zip(models, forms))


def test_criterion_8_random_mahler_suite(verdict):
    t0 = time.perf_counter()
    passed, worsened, shallow_fail = 0, 0, 0
    for m, F in _mahler_suite():
        rep = mahler_report(m, F)
        passed += rep.passed and rep.budget <= 5e-3
        for depth in (2, 3, 4, 8):
            shallow = mahler_report(m, F, MahlerConfig(tree_depth=depth))
            if not shallow.passed:
                doubled = rep if 2 * depth == 16 else mahler_report(m, F, MahlerConfig(tree_depth=2 * depth))
                shallow_fail += 1
                worsened += abs(doubled.residual) > abs(shallow.residual)
    elapsed = time.perf_counter() - t0
    ok = passed == 20 and worsened == 0 and elapsed < 300
    verdict(
        "criterion 8",
        ok,
        f"{passed}/20 pass at default depth, {worsened}/{shallow_fail} shallow failures worsened on doubling, {elapsed:.1f}s",
    )
    assert ok
