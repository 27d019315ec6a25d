"""Local theory at a finite prime p.

For a point P with primitive integer representative x, S_p(P) is the
valuation of the gcd of the lift values, v_p(Phi(x)). Along the orbit the
valuations s_j = S_p(P_j) determine the local height

    h_p(P) = sum_j s_j / d^(j+1),

whose partial sums are S_p(P, Phi^k) / d^k. All computations are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .dynmodel import MapModel, bad_reduction_primes, pushforward_resultant
from .errors import CapabilityError, InputError, UnsupportedGeometry
from .exactcore.numbers import (
    INF,
    factor_integer,
    int_valuation,
    normalize_projective,
    require_prime,
    valuation,
)
from .exactcore.polys import HomogeneousForm, IntPolynomial, squarefree_decomposition
from .exactcore.roots import complex_roots

DEFAULT_TARGET = Fraction(1, 10**12)
MAX_CHAIN_STEPS = 4000
ESCALATIONS = 5


@dataclass(frozen=True)
class LocalHeightEstimate:
    """A local height in valuation units (multiply by log p for nats)."""

    value: Fraction
    lower_bound: Fraction
    upper_bound: Fraction
    depth: int
    exact: bool
    prime: int | None = None

    def __float__(self):
        return float(self.value)

    @property
    def width(self) -> Fraction:
        return self.upper_bound - self.lower_bound

    def log_value(self) -> float:
        return float(self.value) * math.log(self.prime)

    def __add__(self, other):
        return LocalHeightEstimate(
            self.value + other.value,
            self.lower_bound + other.lower_bound,
            self.upper_bound + other.upper_bound,
            min(self.depth, other.depth),
            self.exact and other.exact,
            self.prime,
        )

    def scale(self, c) -> "LocalHeightEstimate":
        c = Fraction(c)
        lo, hi = sorted((self.lower_bound * c, self.upper_bound * c))
        return LocalHeightEstimate(self.value * c, lo, hi, self.depth, self.exact, self.prime)

    @classmethod
    def exact_value(cls, value, prime=None, depth=0):
        v = Fraction(value)
        return cls(v, v, v, depth, True, prime)

    def to_dict(self):
        return {
            "prime": self.prime,
            "value": str(self.value),
            "lower_bound": str(self.lower_bound),
            "upper_bound": str(self.upper_bound),
            "depth": self.depth,
            "exact": self.exact,
        }


@dataclass(frozen=True)
class FormalLogSum:
    """sum_p c_p log p with rational c_p; ``error_bound`` is in nats."""

    terms: dict = field(default_factory=dict)
    error_bound: float = 0.0
    exact: bool = True
    unresolved: tuple = ()

    def __post_init__(self):
        clean = {int(p): Fraction(c) for p, c in sorted(self.terms.items()) if c != 0}
        object.__setattr__(self, "terms", clean)

    def value(self) -> float:
        return math.fsum(float(c) * math.log(p) for p, c in self.terms.items())

    def coefficient(self, p) -> Fraction:
        return self.terms.get(p, Fraction(0))

    def __add__(self, other):
        t = dict(self.terms)
        for p, c in other.terms.items():
            t[p] = t.get(p, 0) + c
        return FormalLogSum(
            t,
            self.error_bound + other.error_bound,
            self.exact and other.exact,
            tuple(sorted(set(self.unresolved) | set(other.unresolved))),
        )

    def __neg__(self):
        return FormalLogSum({p: -c for p, c in self.terms.items()}, self.error_bound, self.exact, self.unresolved)

    def __sub__(self, other):
        return self + (-other)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*log({p})" for p, c in self.terms.items())

    def to_list(self):
        return [{"prime": p, "c": str(c)} for p, c in self.terms.items()]


# ---------------------------------------------------------------------------
# S_v and the local-height sequence


def S_v(model: MapModel, p: int, point) -> int:
    """v_p(Phi(x)) - d * v_p(x) for any (integer or rational) representative x."""
    require_prime(p)
    x = [Fraction(c) for c in point]
    if len(x) != model.num_vars:
        raise InputError(f"point has {len(x)} coordinates, model needs {model.num_vars}")
    if all(c == 0 for c in x):
        raise InputError("the zero vector is not a projective point")
    vx = min(valuation(p, c) for c in x if c != 0)
    values = [f(x) for f in model.lift]
    vimg = min((valuation(p, c) for c in values if c != 0), default=INF)
    if vimg is INF:
        raise InputError("point is a common zero of the lift")
    return vimg - model.d * vx


def R_v_bound(model: MapModel, p: int) -> int:
    """v_p of the resultant: an upper bound for S_v at every point.

    The resultant times a power of each variable lies in the ideal of the
    lift, which bounds v_p of the lift values at any primitive point.
    """
    require_prime(p)
    return int_valuation(p, model.resultant)


def _orbit_valuations(model, p, x, steps, R):
    """s_0..s_{steps-1} along the orbit of the primitive integer vector x,
    computed modulo p^M with enough precision to absorb the divisions."""
    M = R * steps + R + 1
    mod = p**M
    cur = [c % mod for c in x]
    out = []
    prec = M
    for _ in range(steps):
        img = [f.eval_mod(cur, mod) for f in model.lift]
        s = min((int_valuation(p, c) for c in img if c % p**prec), default=None)
        if s is None or s >= prec:
            raise ArithmeticError("precision exhausted in orbit valuations")
        out.append(s)
        ps = p**s
        cur = [c // ps for c in img]
        prec -= s
    return out


def local_height_sequence(model: MapModel, p: int, point, k_max: int) -> list[Fraction]:
    """h_k = S_v(P, Phi^k) / d^k for k = 1..k_max, by orbit recursion."""
    require_prime(p)
    if k_max < 1:
        raise InputError("k_max must be positive")
    x = normalize_projective(point)
    R = R_v_bound(model, p)
    if R == 0:
        return [Fraction(0)] * k_max
    s = _orbit_valuations(model, p, x, k_max, R)
    out = []
    acc = Fraction(0)
    d = model.d
    for j, sj in enumerate(s):
        acc += Fraction(sj, d ** (j + 1))
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# exact limits through chains of p-adic discs


def _shifted_expansion(form: HomogeneousForm, center, pK, chart):
    """Coefficients of form(center + pK * t) as a polynomial in the free
    coordinates t (all but ``chart``); keys are exponent tuples over them."""
    free = [i for i in range(form.num_vars) if i != chart]
    out: dict = {}
    for exps, c in form.terms.items():
        # chart coordinate contributes center[chart]^e (it is 1)
        partial = {(): c * center[chart] ** exps[chart]}
        for i in free:
            e = exps[i]
            nxt: dict = {}
            ci = center[i]
            for key, val in partial.items():
                for j in range(e + 1):
                    term = val * comb(e, j) * ci ** (e - j) * pK**j
                    if term:
                        k2 = key + (j,)
                        nxt[k2] = nxt.get(k2, 0) + term
            partial = nxt
        for key, val in partial.items():
            out[key] = out.get(key, 0) + val
    return out


def _disc_step(lift, p, chart, center, K, Kmax):
    """Map the disc {center + p^K t} one step.

    Returns (s, chart', center', K') with S constant (= s) on the disc and
    the image contained in the new disc, or None when no certified step at
    this precision exists.
    """
    pK = p**K
    expansions = [_shifted_expansion(f, center, pK, chart) for f in lift]
    zero = (0,) * (len(center) - 1)
    A0 = [e.get(zero, 0) for e in expansions]
    vals = [valuation(p, a) for a in A0]
    s = min(vals)
    if s is INF or s >= K:
        return None
    m2 = vals.index(s)
    base = expansions[m2]
    Kp = Kmax
    for k, e in enumerate(expansions):
        if k == m2:
            continue
        for alpha in set(e) | set(base):
            if alpha == zero:
                continue
            comb_val = e.get(alpha, 0) * A0[m2] - A0[k] * base.get(alpha, 0)
            if comb_val:
                Kp = min(Kp, int_valuation(p, comb_val) - 2 * s)
    if Kp < 1:
        return None
    mod = p**Kp
    ps = p**s
    inv = pow((A0[m2] // ps) % mod, -1, mod)
    new_center = tuple((a // ps) * inv % mod if k != m2 else 1 for k, a in enumerate(A0))
    return s, m2, new_center, Kp


def _chain_height(model: MapModel, p: int, start_disc, Kmax: int):
    """Follow discs until one is contained in an earlier one.

    Returns (exact height, steps) or None when a step cannot be certified or
    the step cap is reached.
    """
    d = model.d
    chart, center, K = start_disc
    discs = []
    index: dict = {}
    K_values: set = set()
    s_list = []
    for step in range(MAX_CHAIN_STEPS):
        # containment in an earlier disc with the same chart
        hit = None
        for Ki in sorted(K_values):
            if Ki > K:
                continue
            key = (chart, Ki, tuple(c % p**Ki for c in center))
            if key in index:
                hit = index[key]
                break
        if hit is not None:
            i, j = hit, step
            L = j - i
            head = sum(Fraction(s_list[t], d ** (t + 1)) for t in range(i))
            loop = sum(Fraction(s_list[t], d ** (t + 1)) for t in range(i, j))
            return head + loop * Fraction(d**L, d**L - 1), j
        key = (chart, K, tuple(c % p**K for c in center))
        index.setdefault(key, step)
        K_values.add(K)
        discs.append((chart, center, K))
        nxt = _disc_step(model.lift, p, chart, center, K, Kmax)
        if nxt is None:
            return None
        s, chart, center, K = nxt
        s_list.append(s)
    return None


def _rational_residues(x, p):
    """Residue function for a primitive integer vector: K -> (chart, center mod p^K)."""
    chart = next(i for i, c in enumerate(x) if c % p)

    def at(K):
        mod = p**K
        inv = pow(x[chart] % mod, -1, mod)
        return chart, tuple(c * inv % mod for c in x)

    return at


def _height_from_residues(model, p, residues, bounds_fallback, target_error):
    R = R_v_bound(model, p)
    if R == 0:
        return LocalHeightEstimate.exact_value(0, p)
    Kmax = R + 1
    for _ in range(ESCALATIONS + 1):
        chart, center = residues(Kmax)
        res = _chain_height(model, p, (chart, center, Kmax), Kmax)
        if res is not None:
            value, steps = res
            return LocalHeightEstimate(value, value, value, steps, True, p)
        Kmax *= 2
    return bounds_fallback(R, target_error)


def _bounds_from_sequence(model, p, s_values_fn, R, target_error):
    d = model.d
    target = Fraction(target_error)
    k = 1
    while Fraction(R, d**k * (d - 1)) > target:
        k += 1
    s = s_values_fn(k)
    lower = sum(Fraction(sj, d ** (j + 1)) for j, sj in enumerate(s))
    upper = lower + Fraction(R, d**k * (d - 1))
    return LocalHeightEstimate((lower + upper) / 2, lower, upper, k, False, p)


def finite_local_height(model: MapModel, p: int, point, target_error=DEFAULT_TARGET) -> LocalHeightEstimate:
    """Local height h_p(P) in valuation units.

    Exact whenever the orbit of discs around the point closes up, which is
    detected rigorously; otherwise the partial sum together with the tail
    bound R/(d^k (d-1)) <= target_error.
    """
    require_prime(p)
    x = normalize_projective(point)
    if len(x) != model.num_vars:
        raise InputError(f"point has {len(x)} coordinates, model needs {model.num_vars}")

    def fallback(R, target):
        return _bounds_from_sequence(model, p, lambda k: _orbit_valuations(model, p, x, k, R), R, target)

    return _height_from_residues(model, p, _rational_residues(x, p), fallback, target_error)


def padic_local_height(model: MapModel, p: int, residue_at, target_error=DEFAULT_TARGET) -> LocalHeightEstimate:
    """Local height at a point of P^n(Q_p) given by ``residue_at(K)``, which
    returns a primitive integer vector congruent to the point mod p^K."""
    require_prime(p)

    def residues(K):
        return _rational_residues(residue_at(K), p)(K)

    def fallback(R, target):
        def svals(k):
            M = R * k + R + 1
            return _orbit_valuations(model, p, residue_at(M), k, R)

        return _bounds_from_sequence(model, p, svals, R, target)

    return _height_from_residues(model, p, residues, fallback, target_error)


# ---------------------------------------------------------------------------
# p-adic roots


@dataclass(frozen=True)
class HenselRoots:
    """Roots of a polynomial in P^1(Q_p) found by Hensel lifting.

    ``roots`` are integers mod p^precision approximating roots in Z_p;
    ``inverse_roots`` are u mod p^precision with u in pZ_p and root = 1/u.
    ``unsupported`` lists residues (chart, r) where the reduction has a
    multiple root, so simple lifting does not apply.
    """

    prime: int
    precision: int
    roots: tuple
    inverse_roots: tuple
    unsupported: tuple

    @property
    def supported(self) -> bool:
        return not self.unsupported

    @property
    def roots_mod(self):
        return set(self.roots)


HENSEL_SEARCH_BOUND = 10**5


def _newton_lift(f: IntPolynomial, r: int, p: int, precision: int) -> int:
    fp = f.derivative()
    k = 1
    while k < precision:
        k = min(2 * k, precision)
        mod = p**k
        r = (r - f.eval_mod(r, mod) * pow(fp.eval_mod(r, mod), -1, mod)) % mod
    return r % p**precision


def _simple_roots_mod_p(f: IntPolynomial, p: int, residues):
    simple, multiple = [], []
    fp = f.derivative()
    for r in residues:
        if f.eval_mod(r, p) == 0:
            (simple if fp.eval_mod(r, p) else multiple).append(r)
    return simple, multiple


def hensel_rational_roots(F: IntPolynomial, p: int, precision: int) -> HenselRoots:
    """Lift simple roots of F mod p (and of its reversal, for roots of
    negative valuation) to Z/p^precision."""
    require_prime(p)
    if F.is_zero():
        raise InputError("polynomial is zero")
    if precision < 1:
        raise InputError("precision must be positive")
    if p > HENSEL_SEARCH_BOUND:
        raise CapabilityError(f"root search mod {p} exceeds the bound {HENSEL_SEARCH_BOUND}")
    roots, inv_roots, unsupported = [], [], []
    if F.degree >= 1:
        # a factor of x^k contributes the root 0 exactly
        k0 = next(i for i, c in enumerate(F.coeffs) if c)
        f = IntPolynomial(F.coeffs[k0:])
        roots.extend([0] * k0)
        for g, mult in squarefree_decomposition(f) if f.degree >= 1 else []:
            simple, multiple = _simple_roots_mod_p(g, p, range(p))
            for r in simple:
                roots.extend([_newton_lift(g, r, p, precision)] * mult)
            unsupported.extend(("z", r) for r in multiple)
            rev = g.reverse()
            simple_u, multiple_u = _simple_roots_mod_p(rev, p, [0])
            for r in simple_u:
                inv_roots.extend([_newton_lift(rev, r, p, precision)] * mult)
            unsupported.extend(("u", r) for r in multiple_u)
    return HenselRoots(p, precision, tuple(sorted(roots)), tuple(sorted(inv_roots)), tuple(unsupported))


def rational_roots(F: IntPolynomial):
    """Exact rational roots of F with multiplicity (numeric candidates,
    exact verification); returns (roots, cofactor) with F = cofactor * prod."""
    roots = []
    rest = F
    if F.degree < 1:
        return roots, rest
    candidates = []
    lead = abs(F.lead)
    for z in complex_roots(F, 1e-9):
        if abs(z.imag) < 1e-6 * (1 + abs(z.real)):
            q = Fraction(z.real).limit_denominator(max(lead, 1))
            if q not in candidates:
                candidates.append(q)
    for q in candidates:
        # (b x - a) is primitive, so by Gauss's lemma it divides F over Z
        lin = IntPolynomial([-q.numerator, q.denominator])
        while rest.degree >= 1 and rest(q) == 0:
            rest = rest.exact_div(lin)
            roots.append(q)
    return roots, rest


# ---------------------------------------------------------------------------
# the finite-place term of the Mahler formula


def _projective_rational(q: Fraction):
    return normalize_projective((q.numerator, q.denominator))


def divisor_height_sum_sigma(model: MapModel, p: int, G: HomogeneousForm, target_error=DEFAULT_TARGET) -> LocalHeightEstimate:
    """sum over the roots beta of G (with multiplicity) of h_p(beta).

    Uses sigma_j = v_p(content of the pushforward resultant of G_j): by
    Gauss's lemma it equals the sum of S_p over the roots of G_j, so the
    sum of local heights is sum_j sigma_j / d^(j+1). Works for any G,
    whatever the field of definition of its roots.
    """
    require_prime(p)
    if model.n != 1:
        raise CapabilityError("divisor local heights are implemented on P^1 only")
    R = R_v_bound(model, p)
    m = G.degree
    if R == 0 or m == 0:
        return LocalHeightEstimate.exact_value(0, p)
    d = model.d
    target = Fraction(target_error)
    J = 1
    while Fraction(m * R, d**J * (d - 1)) > target:
        J += 1
    M = m * R * J + 1
    mod = p**M
    cur = G.reduce_mod(mod)
    lower = Fraction(0)
    prec = M
    for j in range(J):
        res = pushforward_resultant(model, cur)
        coeffs = [c % p**prec for c in res.binary_coeffs()]
        sigma = min((int_valuation(p, c) for c in coeffs if c), default=None)
        if sigma is None or sigma >= prec:
            raise ArithmeticError("precision exhausted in pushforward valuations")
        lower += Fraction(sigma, d ** (j + 1))
        ps = p**sigma
        prec -= sigma
        cur = HomogeneousForm.binary([(c // ps) % p**prec for c in coeffs], m)
    upper = lower + Fraction(m * R, d**J * (d - 1))
    return LocalHeightEstimate((lower + upper) / 2, lower, upper, J, False, p)


def divisor_height_sum_roots(model: MapModel, p: int, F: IntPolynomial, target_error=DEFAULT_TARGET, strict=True):
    """sum over the roots of F (a polynomial in x = X0/X1) of h_p, computed
    root by root: rational roots exactly, other roots in Q_p by Hensel
    lifting. Returns (estimate, unsupported) where ``unsupported`` lists
    the residues that could not be handled (estimate then covers the rest)."""
    require_prime(p)
    total = LocalHeightEstimate.exact_value(0, p)
    roots, rest = rational_roots(F)
    for q in roots:
        total = total + finite_local_height(model, p, _projective_rational(q), target_error)
    unsupported = []
    if rest.degree >= 1:
        if R_v_bound(model, p) == 0:
            return total, []
        hr = hensel_rational_roots(rest, p, 1)
        unsupported = list(hr.unsupported)
        found = len(hr.roots) + len(hr.inverse_roots)
        if found < rest.degree and not unsupported:
            # roots outside Q_p: the local heights still exist but are not
            # reachable by lifting; report them as unsupported
            unsupported.append(("ext", rest.degree - found))
        if unsupported and strict:
            raise UnsupportedGeometry(
                f"roots of {rest} at p={p} are not all simple roots in Q_p: {unsupported}"
            )
        sqf = squarefree_decomposition(rest)
        for g, mult in sqf:
            hg = hensel_rational_roots(g, p, 1)
            for r in set(hg.roots):
                count = hg.roots.count(r)

                def at(K, g=g, r=r):
                    z = _newton_lift(g, r, p, K)
                    return (z, 1)

                h = padic_local_height(model, p, at, target_error)
                total = total + h.scale(count * mult)
            for u in set(hg.inverse_roots):
                count = hg.inverse_roots.count(u)
                rev = g.reverse()

                def at_inv(K, rev=rev, u=u):
                    return (1, _newton_lift(rev, u, p, K))

                h = padic_local_height(model, p, at_inv, target_error)
                total = total + h.scale(count * mult)
    return total, unsupported


def relevant_primes(model: MapModel, F) -> list[int]:
    primes = set(bad_reduction_primes(model, enumerate_points=False).primes)
    c = F.content()
    if c > 1:
        primes |= set(factor_integer(c)[0])
    return sorted(primes)


def E_finite(model: MapModel, F, mode: str = "auto", target_error=DEFAULT_TARGET) -> FormalLogSum:
    """Finite-place term E(F) = sum_p c_p log p of the Mahler formula.

    c_p = deg(F) h_p(inf) - sum_{F(beta)=0} h_p(beta) - v_p(F), with inf = (1:0)
    and roots counted with multiplicity. This sign is the one for which
    h(D) = integral + E + deg(F) h(inf) holds with the archimedean integral
    of log|F(x/y)|.

    ``mode``: "strict" raises on p-adic roots that cannot be lifted,
    "residual" skips them and lists the prime in ``unresolved``, "auto"
    (default) falls back to the pushforward valuation route for them.
    """
    if model.n != 1:
        raise CapabilityError("E is implemented on P^1 only")
    if mode not in ("strict", "residual", "auto"):
        raise InputError(f"unknown mode {mode!r}")
    if isinstance(F, HomogeneousForm):
        if F.num_vars != 2 or F.is_zero():
            raise InputError("F must be a nonzero binary form")
        m = F.degree
        F = F.dehomogenize()
        at_inf = m - F.degree
    else:
        if F.is_zero():
            raise InputError("F must be nonzero")
        m = F.degree
        at_inf = 0
    terms = {}
    width = 0.0
    exact = True
    unresolved = []
    for p in relevant_primes(model, F):
        vF = int_valuation(p, F.content())
        h_inf = finite_local_height(model, p, (1, 0), target_error)
        try:
            sD, unsupported = divisor_height_sum_roots(model, p, F, target_error, strict=(mode != "residual"))
        except UnsupportedGeometry:
            if mode == "strict":
                raise
            sD = divisor_height_sum_sigma(model, p, F.homogenize(), target_error)
            unsupported = []
        if at_inf:
            sD = sD + h_inf.scale(at_inf)
        if unsupported:
            unresolved.append(p)
        c = h_inf.scale(m)
        c_lower = c.lower_bound - sD.upper_bound - vF
        c_upper = c.upper_bound - sD.lower_bound - vF
        value = c.value - sD.value - vF
        terms[p] = value
        exact = exact and h_inf.exact and sD.exact
        width += float(c_upper - c_lower) / 2 * math.log(p)
    return FormalLogSum(terms, width, exact and not unresolved, tuple(unresolved))
