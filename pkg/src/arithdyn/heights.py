"""Canonical heights of rational points and of divisors on P^1.

Decomposition convention: for a point with primitive integer representative
x, h(P) = G_inf(x) - sum_p h_p(P) log p, where G_inf is the archimedean
escape rate and h_p the local height at p in valuation units. ``arch``
holds G_inf(x) and the finite part holds c_p = -h_p(P). Divisor heights are
sums over the points of the divisor with multiplicity (no normalization by
the degree).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import mpmath
import numpy as np

from .archplaces import green_batch, green_excess_integer
from .dynmodel import MapModel, apply_lift, bad_reduction_primes, pushforward_form
from .errors import BudgetError, CapabilityError, InputError
from .exactcore.numbers import int_valuation, normalize_projective
from .exactcore.polys import HomogeneousForm, IntPolynomial
from .exactcore.roots import roots_mp
from .finiteplaces import FormalLogSum, divisor_height_sum_sigma, finite_local_height

PREFIX_STEPS = 6
PREFIX_BITS = 4096
GREEN_DEPTH = 40
DIVISOR_DEGREE_CAP = 256
DIVISOR_BIT_BUDGET = 200_000
ROUNDING = 1e-14


@dataclass(frozen=True)
class HeightValue:
    value: float
    error_bound: float
    arch: float
    finite: FormalLogSum = field(default_factory=FormalLogSum)
    note: str = ""

    def __float__(self):
        return self.value

    def __add__(self, other):
        return HeightValue(
            self.value + other.value,
            self.error_bound + other.error_bound,
            self.arch + other.arch,
            self.finite + other.finite,
            self.note or other.note,
        )

    def scale(self, c: int) -> "HeightValue":
        f = FormalLogSum({p: c * v for p, v in self.finite.terms.items()},
                         abs(c) * self.finite.error_bound, self.finite.exact, self.finite.unresolved)
        return HeightValue(c * self.value, abs(c) * self.error_bound, c * self.arch, f, self.note)

    def to_dict(self):
        return {
            "value": _dec(self.value),
            "error_bound": _dec(self.error_bound),
            "arch": _dec(self.arch),
            "finite": self.finite.to_list(),
        }


def _dec(x: float) -> str:
    return format(x, ".15g") if math.isfinite(x) else str(x)


def _zero_height():
    return HeightValue(0.0, 0.0, 0.0, FormalLogSum())


@lru_cache(maxsize=128)
def model_bad_primes(model: MapModel):
    report = bad_reduction_primes(model, enumerate_points=False)
    if report.cofactor != 1:
        raise CapabilityError(f"resultant has an unfactored part {report.cofactor}")
    return tuple(report.primes)


def naive_height(point) -> float:
    """log of the sup-norm of the coprime integer representative."""
    x = normalize_projective(point)
    return math.log(max(abs(c) for c in x))


def _log_ratio(q: Fraction) -> float:
    """log of a positive rational, accurate when q is close to 1."""
    if abs(q - 1) < Fraction(1, 2):
        return math.log1p(float(q - 1))
    return math.log(q.numerator) - math.log(q.denominator)


def canonical_height_point(model: MapModel, point, target_error: float = 1e-10) -> HeightValue:
    """Canonical height of a rational point.

    The value is the naive height plus telescoping corrections
    d^-(k+1) log(||Phi(x_k)|| / (g_k ||x_k||^d)) along a short exact orbit
    prefix, where g_k is the gcd of the image (all finite places at once).
    The remainder d^-K (G(x_K) - log||x_K|| - sum_p h_p(x_K) log p) comes
    from the escape rate and the local heights, so every numeric error is
    divided by d^K. Each correction is the log of an exact rational, so a
    map with all ratios equal to 1 (the power map) returns the naive
    height with no rounding.
    """
    x = normalize_projective(point)
    if len(x) != model.num_vars:
        raise InputError(f"point has {len(x)} coordinates, model needs {model.num_vars}")
    d = model.d
    primes = model_bad_primes(model)
    value = naive_height(x)
    coeff = {p: Fraction(0) for p in primes}
    K = 0
    while K < PREFIX_STEPS and max(abs(c).bit_length() for c in x) < PREFIX_BITS:
        img = apply_lift(model, x)
        g = 0
        for c in img:
            g = gcd(g, c)
        ratio = Fraction(max(abs(c) for c in img), g * max(abs(c) for c in x) ** d)
        value += _log_ratio(ratio) / d ** (K + 1)
        for p in primes:
            coeff[p] -= Fraction(int_valuation(p, g), d ** (K + 1))
        x = tuple(c // g for c in img)
        K += 1
    dK = d**K
    depth = GREEN_DEPTH
    green = green_excess_integer(model, x, depth)
    while green.tail_bound / dK > target_error / 2 and depth < 200:
        depth += 20
        green = green_excess_integer(model, x, depth)
    tail_value = green.value
    err = green.tail_bound
    finite_err = 0.0
    exact = True
    for p in primes:
        h = finite_local_height(model, p, x, Fraction(target_error).limit_denominator(10**15) * dK / 4)
        coeff[p] -= h.value / dK
        tail_value -= float(h.value) * math.log(p)
        finite_err += float(h.width) / 2 * math.log(p)
        exact = exact and h.exact
    if tail_value:
        value += tail_value / dK
    finite = FormalLogSum(coeff, finite_err / dK, exact)
    arch = value - finite.value()
    error = (err + finite_err) / dK + ROUNDING * (1 + abs(arch))
    return HeightValue(value, error, arch, finite)


def canonical_height_divisor_split(model: MapModel, roots, target_error: float = 1e-10) -> HeightValue:
    """Sum of point heights over rational points with multiplicity.

    ``roots`` holds (point, multiplicity) pairs or bare points; a bare
    rational number r stands for (r : 1).
    """
    total = _zero_height()
    for item in roots:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], int) and not isinstance(item[0], int | Fraction):
            pt, mult = item
        else:
            pt, mult = item, 1
        if not isinstance(pt, tuple):
            q = Fraction(pt)
            pt = (q.numerator, q.denominator)
        total = total + canonical_height_point(model, pt, target_error).scale(mult)
    return total


def pushforward_divisor(model: MapModel, F) -> HomogeneousForm:
    """Primitive binary form whose roots are the images of the roots of F."""
    F = _as_form(F)
    return pushforward_form(model, F)[1]


def _as_form(F) -> HomogeneousForm:
    if isinstance(F, IntPolynomial):
        if F.is_zero():
            raise InputError("F must be nonzero")
        return F.homogenize()
    if isinstance(F, HomogeneousForm) and F.num_vars == 2 and not F.is_zero():
        return F
    raise InputError("expected a nonzero univariate polynomial or binary form")


def default_divisor_depth(d: int) -> int:
    k = 0
    while d ** (k + 1) <= DIVISOR_DEGREE_CAP:
        k += 1
    return k


def _roots_as_unit_points(G: HomogeneousForm, dps: int = 50):
    """Roots of a binary form as sup-normalized complex pairs, plus the
    log Mahler measure of G computed from the same roots."""
    cs = G.binary_coeffs()
    m = G.degree
    top = max(i for i, c in enumerate(cs) if c)
    f = IntPolynomial(cs[: top + 1])
    pts = [(1.0 + 0j, 0j)] * (m - top)
    with mpmath.workdps(dps):
        log_m = mpmath.log(abs(mpmath.mpf(f.lead)))
        radius = mpmath.mpf(0)
        if top >= 1:
            zs, rs = roots_mp(f, dps)
            for z, r in zip(zs, rs):
                a = abs(z)
                if a > 1:
                    log_m += mpmath.log(a)
                    pts.append((1.0 + 0j, complex(1 / z)))
                    radius += r / a
                else:
                    pts.append((complex(z), 1.0 + 0j))
                    radius += r
    return pts, float(log_m), float(radius)


def canonical_height_divisor(model: MapModel, F, depth: int | None = None, target_error: float = 1e-10) -> HeightValue:
    """Canonical height of the zero divisor of F (sum over its points).

    Pushes the divisor forward K times by resultants, then uses
    h(D) = d^-K [ log M(G_K) + sum_rho g(rho) - sum_p T_p log p ],
    where g = G_inf - log||.|| at the roots rho of G_K and T_p is the sum of
    local heights at p over those roots (pushforward valuation route). The
    identity holds for every K; pushing forward divides numeric errors by d^K.
    """
    if model.n != 1:
        raise CapabilityError("divisor heights are implemented on P^1 only")
    G = _as_form(F)
    G = G.primitive_part()
    d = model.d
    explicit = depth is not None
    K = default_divisor_depth(d) if depth is None else int(depth)
    if K < 0:
        raise InputError("depth must be nonnegative")
    contents = []
    for j in range(K):
        c, G_next = pushforward_form(model, G)
        if G_next.max_coefficient_bits() > DIVISOR_BIT_BUDGET:
            if explicit:
                raise BudgetError(f"pushforward step {j + 1} exceeds the coefficient budget")
            break
        contents.append(c)
        G = G_next
    K = len(contents)
    dK = d**K
    primes = model_bad_primes(model)
    pts, log_m, root_err = _roots_as_unit_points(G)
    X = np.array(pts, dtype=complex).T
    gvals, maxinc = green_batch(model, X, GREEN_DEPTH)
    gsum = float(np.sum(gvals))
    from .archplaces import increment_bound

    B = max(float(np.max(maxinc)) if maxinc.size else 0.0, increment_bound(model))
    green_err = len(pts) * B / (d**GREEN_DEPTH * (d - 1))
    coeff = {}
    finite_err = 0.0
    exact = True
    total_T = 0.0
    for p in primes:
        T = divisor_height_sum_sigma(model, p, G, Fraction(1, 10**12))
        total_T += float(T.value) * math.log(p)
        finite_err += float(T.width) / 2 * math.log(p)
        exact = exact and T.exact
        pref = sum(Fraction(int_valuation(p, c), d ** (j + 1)) for j, c in enumerate(contents))
        coeff[p] = -(pref + T.value / dK)
    value = (log_m + gsum - total_T) / dK
    arch = (log_m + gsum) / dK + sum(math.log(c) / d ** (j + 1) for j, c in enumerate(contents))
    lip = 1.0 + B
    error = (green_err + finite_err + lip * root_err + ROUNDING * (1 + abs(log_m) + abs(gsum))) / dK
    note = f"pushforward depth {K}"
    return HeightValue(value, error, arch, FormalLogSum(coeff, finite_err / dK, exact), note)
