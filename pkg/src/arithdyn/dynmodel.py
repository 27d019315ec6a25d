"""Self-maps of projective space given by an integer lift.

A model is a tuple of n+1 homogeneous forms of a common degree d >= 2 in
n+1 variables whose resultant is nonzero, so the forms have no common zero
over an algebraic closure of Q.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd

from .errors import CapabilityError, InputError, ModelError
from .exactcore.numbers import factor_integer, int_content, normalize_projective, require_prime
from .exactcore.parser import parse_form
from .exactcore.polys import HomogeneousForm, default_names, num_monomials
from .exactcore.resultants import resultant, sylvester_resultant

MAX_ITERATE_TERMS = 60_000
ENUMERATION_BOUND = 97


@dataclass(frozen=True)
class MapModel:
    n: int
    d: int
    lift: tuple
    variables: tuple
    resultant: int

    def __post_init__(self):
        object.__setattr__(self, "_iterates", {1: self.lift})

    @property
    def num_vars(self) -> int:
        return self.n + 1

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "degree": self.d,
            "variables": list(self.variables),
            "lift": [f.to_string(list(self.variables)) for f in self.lift],
        }

    def __str__(self):
        body = " : ".join(f.to_string(list(self.variables)) for f in self.lift)
        return f"({body})"

    def __hash__(self):
        return hash((self.n, self.d, self.lift))

    def __eq__(self, other):
        return isinstance(other, MapModel) and self.lift == other.lift


def validate_model(lift, variables=None) -> MapModel:
    """Check degrees, primitivity and the resultant; return a MapModel.

    ``lift`` may hold HomogeneousForms or polynomial strings.
    """
    lift = list(lift)
    if len(lift) < 2:
        raise ModelError("a self-map of P^n needs at least two forms")
    nv = len(lift)
    variables = tuple(variables) if variables is not None else tuple(default_names(nv))
    if len(variables) != nv:
        raise ModelError(f"{nv} forms need {nv} variables, got {len(variables)}")
    if len(set(variables)) != nv:
        raise ModelError("variable names must be distinct")
    forms = []
    for k, f in enumerate(lift):
        if isinstance(f, str):
            f = parse_form(f, variables)
        if not isinstance(f, HomogeneousForm):
            raise ModelError(f"lift entry {k} is not a homogeneous form")
        if f.num_vars != nv:
            raise ModelError(f"lift entry {k} has {f.num_vars} variables, expected {nv}")
        forms.append(f)
    degrees = {f.degree for f in forms if not f.is_zero()}
    if len(degrees) != 1 or any(f.is_zero() for f in forms):
        if any(f.is_zero() for f in forms):
            raise ModelError("a lift entry is identically zero; not a morphism")
        raise ModelError(f"lift entries have different degrees {sorted(degrees)}")
    d = degrees.pop()
    if d < 2:
        raise ModelError(f"degree must be at least 2, got {d}")
    if int_content(c for f in forms for c in f.terms.values()) != 1:
        raise ModelError("lift coefficients share a common factor; divide it out first")
    res = resultant(forms)
    if res == 0:
        raise ModelError("resultant is zero: the forms have a common zero (not a regular sequence)")
    return MapModel(nv - 1, d, tuple(forms), variables, res)


def model_from_dict(data: dict) -> MapModel:
    try:
        lift = data["lift"]
    except (KeyError, TypeError):
        raise InputError("model JSON needs a 'lift' list of polynomial strings") from None
    if not isinstance(lift, list) or not all(isinstance(s, str) for s in lift):
        raise InputError("'lift' must be a list of polynomial strings")
    variables = data.get("variables") or default_names(len(lift))
    model = validate_model(lift, variables)
    if "n" in data and data["n"] != model.n:
        raise ModelError(f"declared n={data['n']} but the lift has {len(lift)} entries")
    if "degree" in data and data["degree"] != model.d:
        raise ModelError(f"declared degree {data['degree']} but the forms have degree {model.d}")
    return model


def load_model(path) -> MapModel:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise InputError(f"cannot read model file {path}: {exc.strerror}") from None
    return model_from_dict(data)


def iterate_lift(model: MapModel, k: int, max_terms: int = MAX_ITERATE_TERMS):
    """The k-th iterate of the lift, by repeated substitution (cached)."""
    if not isinstance(k, int) or k < 1:
        raise InputError("iterate index must be a positive integer")
    cache = model._iterates
    if k in cache:
        return cache[k]
    if num_monomials(model.num_vars, model.d**k) > max_terms:
        raise CapabilityError(
            f"iterate {k} has degree {model.d ** k}; too many monomials for the size budget"
        )
    j = max(i for i in cache if i < k)
    current = cache[j]
    for i in range(j + 1, k + 1):
        current = tuple(f.substitute(current) for f in model.lift)
        cache[i] = current
    if k <= 2 and model.n == 1 and sylvester_resultant(*current) == 0:
        raise ModelError("iterate has zero resultant")  # impossible for a valid model
    return current


@dataclass(frozen=True)
class ReductionReport:
    resultant: int
    bad_primes: tuple  # ((p, multiplicity), ...)
    cofactor: int = 1
    indeterminacy: dict = field(default_factory=dict)

    @property
    def primes(self):
        return [p for p, _ in self.bad_primes]

    @property
    def good_everywhere(self) -> bool:
        return not self.bad_primes and self.cofactor == 1


def bad_reduction_primes(model: MapModel, trial_bound: int = 10**5, enumerate_points: bool = True) -> ReductionReport:
    factors, cofactor = factor_integer(model.resultant, trial_bound)
    points = {}
    if enumerate_points and model.n <= 2:
        for p in factors:
            if p <= ENUMERATION_BOUND:
                points[p] = indeterminacy_points_mod_p(model, p)
    return ReductionReport(model.resultant, tuple(factors.items()), cofactor, points)


def projective_points_mod_p(p: int, n: int):
    """Points of P^n over F_p, first nonzero coordinate scaled to 1."""
    for lead in range(n + 1):
        for tail in product(range(p), repeat=n - lead):
            yield (0,) * lead + (1,) + tail


def indeterminacy_points_mod_p(model: MapModel, p: int, bound: int = ENUMERATION_BOUND):
    require_prime(p)
    if p > bound:
        raise CapabilityError(f"enumeration of P^n over F_{p} exceeds the bound {bound}")
    if model.n > 2:
        raise CapabilityError("indeterminacy enumeration supports n <= 2")
    reduced = [f.reduce_mod(p) for f in model.lift]
    return [
        pt
        for pt in projective_points_mod_p(p, model.n)
        if all(f.eval_mod(pt, p) == 0 for f in reduced)
    ]


def apply_map(model: MapModel, point):
    """Image of a rational point, normalized to coprime integer coordinates."""
    x = normalize_projective(point)
    if len(x) != model.num_vars:
        raise InputError(f"point has {len(x)} coordinates, model needs {model.num_vars}")
    image = [f(x) for f in model.lift]
    assert any(image), "nonzero resultant forbids a zero image"
    return normalize_projective(image)


def apply_lift(model: MapModel, x):
    """Raw lift evaluation (no normalization)."""
    return tuple(f(x) for f in model.lift)


@dataclass(frozen=True)
class NegativityCertificate:
    holds: bool
    verified_up_to: int
    all_k: bool = False
    failing_k: int | None = None
    failing_primes: tuple = ()
    detail: str = ""

    def __bool__(self):
        return self.holds


def check_negativity_conditions(model: MapModel, k_max: int = 4) -> NegativityCertificate:
    """Check that the iterates restricted to the last hyperplane keep a
    trivial radical: no common zero on {T_n = 0} over Q-bar or any F_p-bar.

    For n = 1 the restriction is evaluation at (1:0); the condition for all
    k is decided exactly by following the orbit of (1:0) modulo each bad prime.
    """
    if k_max < 1:
        raise InputError("k_max must be positive")
    if model.n == 1:
        return _negativity_dim1(model, k_max)
    if model.n != 2:
        raise CapabilityError("negativity check supports n <= 2")
    for k in range(1, k_max + 1):
        forms = iterate_lift(model, k)
        restricted = [f.restrict(model.n) for f in forms]
        bad = _common_zero_primes_binary([r for r in restricted if not r.is_zero()])
        if bad:
            return NegativityCertificate(
                False, k - 1, failing_k=k, failing_primes=tuple(bad),
                detail=f"iterate {k} restricted to the hyperplane has a common zero mod {bad}",
            )
    return NegativityCertificate(True, k_max, detail=f"verified for k <= {k_max}")


def _negativity_dim1(model, k_max):
    x = (1, 0)
    # at k=1: gcd of the leading coefficients
    a, b = apply_lift(model, x)
    g = gcd(a, b)
    if g != 1:
        primes = tuple(factor_integer(g)[0])
        return NegativityCertificate(False, 0, failing_k=1, failing_primes=primes,
                                     detail=f"leading coefficients share the factor {g}")
    # S at the orbit of (1:0) mod p depends only on the orbit mod p, so the
    # orbit mod p either hits a zero image or cycles within p+1 steps.
    failing = []
    first_k = None
    for p, _ in factor_integer(model.resultant)[0].items():
        seen = set()
        pt = (1, 0)
        k = 0
        while True:
            key = _normalize_mod_p(pt, p)
            if key in seen:
                break
            seen.add(key)
            img = tuple(f.eval_mod(key, p) for f in model.lift)
            k += 1
            if all(c == 0 for c in img):
                failing.append(p)
                first_k = k if first_k is None else min(first_k, k)
                break
            pt = img
    if failing:
        return NegativityCertificate(False, first_k - 1, failing_k=first_k, failing_primes=tuple(failing),
                                     detail=f"orbit of (1:0) reaches an indeterminacy point mod {failing}")
    return NegativityCertificate(True, k_max, all_k=True, detail="holds for every k (orbit of (1:0) avoids indeterminacy mod every bad prime)")


def _normalize_mod_p(pt, p):
    pt = [c % p for c in pt]
    lead = next(c for c in pt if c)
    inv = pow(lead, -1, p)
    return tuple(c * inv % p for c in pt)


def _poly_gcd_mod_p(a, b, p):
    """gcd of univariate polynomials (coefficient lists, low first) over F_p."""
    def trim(v):
        v = [c % p for c in v]
        while v and v[-1] == 0:
            v.pop()
        return v

    a, b = trim(a), trim(b)
    while b:
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b):
            c = a[-1] * inv % p
            shift = len(a) - len(b)
            for j, bj in enumerate(b):
                a[shift + j] = (a[shift + j] - c * bj) % p
            a = trim(a)
            if not a:
                break
        a, b = b, a
    return a


def _binary_common_zero_mod_p(forms, p) -> bool:
    coeff_lists = [f.binary_coeffs() for f in forms]
    live = [cs for cs in coeff_lists if any(c % p for c in cs)]
    if not live:
        return True
    if all(cs[-1] % p == 0 for cs in live):
        return True  # common zero at (1:0)
    g = None
    for cs in live:
        g = cs if g is None else _poly_gcd_mod_p(g, cs, p)
        g = [c % p for c in g]
        while g and g[-1] == 0:
            g.pop()
    return len(g) > 1


def _common_zero_primes_binary(forms):
    """Primes p (and 0 for Q) such that the binary forms share a zero mod p."""
    if not forms:
        return [0]
    if len(forms) == 1:
        return [0] if forms[0].degree > 0 else []
    from .exactcore.polys import poly_gcd

    g = None
    for f in forms:
        h = f.dehomogenize()
        g = h if g is None else poly_gcd(g, h)
    if g.degree > 0 or all(f.binary_coeffs()[-1] == 0 for f in forms):
        return [0]
    combos = []
    m = len(forms)
    for i in range(m):
        for j in range(i + 1, m):
            combos.append((forms[i], forms[j]))
    sums = [forms[0]]
    for f in forms[1:]:
        sums.append(sums[-1] + f)
    combos += [(forms[0], s) for s in sums[1:]] + [(forms[-1], s) for s in sums[:-1]]
    g_int = 0
    for f1, f2 in combos:
        g_int = gcd(g_int, sylvester_resultant(f1, f2))
        if g_int == 1:
            return []
    if g_int == 0:
        raise CapabilityError("could not isolate candidate primes for the restricted system")
    candidates = factor_integer(g_int)[0]
    return [p for p in candidates if _binary_common_zero_mod_p(forms, p)]


def to_fraction_point(point):
    return tuple(Fraction(c) for c in point)


def pushforward_resultant(model: MapModel, G: HomogeneousForm):
    """Res_X(G(X), Y1*p0(X) - Y0*p1(X)) as a binary form in (Y0, Y1).

    Its roots are the images of the roots of G, with multiplicity. Computed
    from exact Sylvester resultants at Y = (t : 1), t = 0..m, followed by
    exact interpolation.
    """
    if model.n != 1:
        raise CapabilityError("pushforward of divisors is implemented on P^1 only")
    if G.num_vars != 2 or G.is_zero():
        raise InputError("pushforward needs a nonzero binary form")
    m = G.degree
    p0, p1 = model.lift
    ts = list(range(m + 1))
    values = [sylvester_resultant(G, p0 - p1.scale(t)) for t in ts]
    coeffs = _interpolate_integer(ts, values)
    return HomogeneousForm.binary(coeffs, m)


def pushforward_form(model: MapModel, G: HomogeneousForm):
    """(content, primitive form) of the pushforward resultant, sign normalized
    so that the highest-index nonzero coefficient is positive."""
    R = pushforward_resultant(model, G)
    c = R.content()
    prim = R.primitive_part()
    cs = prim.binary_coeffs()
    top = next(x for x in reversed(cs) if x)
    if top < 0:
        prim = -prim
    return c, prim


def _interpolate_integer(xs, ys):
    """Coefficients (low first) of the integer polynomial through the points."""
    n = len(xs)
    # Newton divided differences over Q, then expand
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    basis = [Fraction(1)]
    for j in range(n):
        for k, b in enumerate(basis):
            poly[k] += coef[j] * b
        # basis *= (x - xs[j])
        nb = [Fraction(0)] * (len(basis) + 1)
        for k, b in enumerate(basis):
            nb[k + 1] += b
            nb[k] -= xs[j] * b
        basis = nb
    if any(c.denominator != 1 for c in poly):
        raise ArithmeticError("interpolation did not return integers")
    return [int(c) for c in poly]
