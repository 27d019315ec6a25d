"""Complex roots of integer polynomials (Aberth iteration) and Mahler measure."""
from __future__ import annotations

import math

import mpmath
import numpy as np

from ..errors import InputError, NumericFailure
from .polys import IntPolynomial, squarefree_decomposition

EPS = np.finfo(float).eps
MAX_ITER = 400


def initial_circle(coeffs_high_first: np.ndarray, n: int) -> np.ndarray:
    """Deterministic start: n points on a circle whose radius comes from the
    Fujiwara bound, rotated off the real axis so conjugate pairs split."""
    a = np.abs(coeffs_high_first)
    lead = a[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ks = np.arange(1, n + 1)
        ratios = (a[1:] / lead) ** (1.0 / ks)
    bound = 2.0 * float(np.max(ratios)) if n else 1.0
    radius = bound / 2 if bound > 0 else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return radius * np.exp(1j * angles)


def _newton_ratio(coeffs, z):
    """f(z)/f'(z) evaluated stably: forward Horner inside the unit disk and
    the reversed polynomial outside it (avoids overflow for large |z|)."""
    n = len(coeffs) - 1
    out = np.empty_like(z)
    inside = np.abs(z) <= 1
    if inside.any():
        zi = z[inside]
        f = np.full_like(zi, coeffs[0])
        fp = np.zeros_like(zi)
        for c in coeffs[1:]:
            fp = fp * zi + f
            f = f * zi + c
        with np.errstate(divide="ignore", invalid="ignore"):
            out[inside] = f / fp
    outside = ~inside
    if outside.any():
        w = 1.0 / z[outside]
        g = np.full_like(w, coeffs[-1])
        gp = np.zeros_like(w)
        for c in coeffs[-2::-1]:
            gp = gp * w + g
            g = g * w + c
        with np.errstate(divide="ignore", invalid="ignore"):
            out[outside] = 1.0 / (n * w - w * w * gp / g)
    return out


def _aberth_double(coeffs, z0=None, max_iter=MAX_ITER):
    n = len(coeffs) - 1
    z = initial_circle(coeffs, n) if z0 is None else np.array(z0, dtype=complex)
    for _ in range(max_iter):
        ratio = _newton_ratio(coeffs, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = ratio / (1 - ratio * s)
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        z = z - step
        if np.all(np.abs(step) <= 4 * EPS * (1 + np.abs(z))):
            break
    return z


def inclusion_radii(coeffs, z) -> np.ndarray:
    """Weierstrass inclusion radii: each disc of radius r_i about z_i contains
    a root. Rounding in evaluating f is absorbed by a running-error term."""
    n = len(coeffs) - 1
    absc = np.abs(coeffs)
    radii = np.empty(n)
    for i in range(n):
        zi = z[i]
        if abs(zi) <= 1:
            f = 0j
            bound = 0.0
            for c, ac in zip(coeffs, absc):
                f = f * zi + c
                bound = bound * abs(zi) + ac
            denom = coeffs[0] * np.prod(zi - np.delete(z, i))
            num = abs(f) + 4 * n * EPS * bound
        else:
            w = 1.0 / zi
            g = 0j
            bound = 0.0
            for c, ac in zip(coeffs[::-1], absc[::-1]):
                g = g * w + c
                bound = bound * abs(w) + ac
            # f(z)/prod(z - z_j) = g(w) / prod(1 - w z_j)
            denom = coeffs[0] * np.prod(1 - w * np.delete(z, i))
            num = abs(g) + 4 * n * EPS * bound
        with np.errstate(divide="ignore", invalid="ignore"):
            radii[i] = n * num / abs(denom) if denom != 0 else np.inf
    return radii


def _mp_aberth(coeffs, start, dps, max_iter=120):
    """Aberth iteration in mpmath, started from given approximations."""
    with mpmath.workdps(dps):
        cs = [mpmath.mpc(c) for c in coeffs]
        n = len(cs) - 1
        z = [mpmath.mpc(complex(s)) for s in start]
        tol = mpmath.mpf(10) ** (-dps + 5)
        for _ in range(max_iter):
            biggest = 0
            newz = list(z)
            for i in range(n):
                f, fp = cs[0], mpmath.mpc(0)
                for c in cs[1:]:
                    fp = fp * z[i] + f
                    f = f * z[i] + c
                if f == 0:
                    continue
                ratio = f / fp if fp != 0 else mpmath.mpc(0)
                s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(n) if j != i)
                step = ratio / (1 - ratio * s)
                newz[i] = z[i] - step
                biggest = max(biggest, abs(step) / (1 + abs(newz[i])))
            z = newz
            if biggest < tol:
                break
        radii = []
        for i in range(n):
            f = mpmath.polyval(cs, z[i])
            denom = cs[0]
            for j in range(n):
                if j != i:
                    denom *= z[i] - z[j]
            radii.append(float(n * abs(f) / abs(denom)) if denom != 0 else math.inf)
        return z, radii


def _squarefree_roots(f: IntPolynomial, tolerance: float):
    n = f.degree
    if n == 1:
        return [complex(-mpmath.mpf(f[0]) / f[1])], [0.0]
    big = max(abs(c).bit_length() for c in f.coeffs)
    if big < 900:
        coeffs = np.array([float(c) for c in reversed(f.coeffs)], dtype=complex)
        z = _aberth_double(coeffs)
        radii = inclusion_radii(coeffs, z)
        if np.all(np.isfinite(z)) and float(np.max(radii)) <= tolerance:
            return list(z), list(radii)
        start = z if np.all(np.isfinite(z)) else initial_circle(coeffs, n)
    else:
        start = None
    # working precision grows with coefficient size: root conditioning does too
    dps = max(30, int(0.6 * big) + 15)
    while dps <= 2000:
        coeffs_mp = list(reversed(f.coeffs))
        if start is None:
            with mpmath.workdps(dps):
                a = [abs(mpmath.mpf(c)) for c in coeffs_mp]
                ratios = [(a[k] / a[0]) ** (mpmath.mpf(1) / k) for k in range(1, n + 1)]
                radius = max(ratios) if max(ratios) > 0 else 1
                start = [complex(radius * mpmath.expjpi(2 * mpmath.mpf(k) / n + 0.4 / mpmath.pi)) for k in range(n)]
        zs, radii = _mp_aberth(coeffs_mp, start, dps)
        if max(radii) <= tolerance:
            return [complex(v) for v in zs], radii
        start = [complex(v) for v in zs]
        dps *= 2
    raise NumericFailure("root finder did not reach the requested tolerance", max(radii))


def _sort_key(z):
    return (round(z.real, 12), round(z.imag, 12))


def roots_with_radii(f: IntPolynomial, tolerance: float = 1e-12):
    """All complex roots with multiplicity and per-root error radii."""
    if not isinstance(f, IntPolynomial):
        f = IntPolynomial(f)
    if f.degree < 1:
        raise InputError("complex_roots needs a polynomial of degree at least 1")
    out = []
    # exact zero roots first
    k = next(i for i, c in enumerate(f.coeffs) if c)
    if k:
        out.extend([(0j, 0.0)] * k)
        f = IntPolynomial(f.coeffs[k:])
    if f.degree >= 1:
        for factor, mult in squarefree_decomposition(f):
            zs, rs = _squarefree_roots(factor, tolerance)
            for z, r in zip(zs, rs):
                out.extend([(complex(z), float(r))] * mult)
    out.sort(key=lambda t: _sort_key(t[0]))
    return [z for z, _ in out], [r for _, r in out]


def complex_roots(f: IntPolynomial, tolerance: float = 1e-12) -> list[complex]:
    """Roots of ``f`` with multiplicity, sorted by (real, imaginary).

    >>> [round(z.real, 6) for z in complex_roots(IntPolynomial([-1, -1, 1]))]
    [-0.618034, 1.618034]
    """
    return roots_with_radii(f, tolerance)[0]


class MahlerMeasure(float):
    """Logarithmic Mahler measure; ``error`` bounds the numeric error."""

    error: float

    def __new__(cls, value, error):
        obj = super().__new__(cls, value)
        obj.error = error
        return obj


def mahler_measure(f: IntPolynomial, tolerance: float = 1e-12) -> MahlerMeasure:
    """log|lead| + sum of log+|root|, in nats."""
    if not isinstance(f, IntPolynomial):
        f = IntPolynomial(f)
    if f.is_zero():
        raise InputError("Mahler measure of the zero polynomial is undefined")
    value = math.log(abs(f.lead)) if f.lead.bit_length() < 1000 else float(mpmath.log(abs(f.lead)))
    if f.degree < 1:
        return MahlerMeasure(value, 0.0)
    zs, rs = roots_with_radii(f, tolerance)
    err = 0.0
    for z, r in zip(zs, rs):
        a = abs(z)
        if a > 1:
            value += math.log(a)
        if a + r > 1:
            # log+ is 1-Lipschitz in log|z| and log(1 + r/|z|) <= r/|z|
            err += r / max(a - r, 1.0) if a - r > 0 else r
    return MahlerMeasure(value, err)


def roots_mp(f: IntPolynomial, dps: int = 50):
    """Roots with multiplicity as mpmath complex numbers, for polynomials
    whose coefficients or roots leave the double-precision range.

    Returns (roots, radii) with radii as mpmath reals.
    """
    if not isinstance(f, IntPolynomial):
        f = IntPolynomial(f)
    if f.degree < 1:
        raise InputError("need a polynomial of degree at least 1")
    out = []
    k = next(i for i, c in enumerate(f.coeffs) if c)
    zero = mpmath.mpc(0)
    out.extend([(zero, mpmath.mpf(0))] * k)
    f = IntPolynomial(f.coeffs[k:])
    if f.degree >= 1:
        for g, mult in squarefree_decomposition(f):
            bits = max(abs(c).bit_length() for c in g.coeffs)
            work = max(dps, int(0.35 * bits) + dps)
            zs, rs = _mp_roots_squarefree(g, work, dps)
            for z, r in zip(zs, rs):
                out.extend([(z, r)] * mult)
    return [z for z, _ in out], [r for _, r in out]


def _mp_roots_squarefree(g: IntPolynomial, work: int, target_dps: int):
    n = g.degree
    cs = list(reversed(g.coeffs))
    with mpmath.workdps(work):
        if n == 1:
            return [mpmath.mpc(-mpmath.mpf(g[0]) / g[1])], [mpmath.mpf(0)]
        a = [abs(mpmath.mpf(c)) for c in cs]
        radius = max((a[k] / a[0]) ** (mpmath.mpf(1) / k) for k in range(1, n + 1))
        if radius == 0:
            radius = mpmath.mpf(1)
        z = [radius * mpmath.expj(2 * mpmath.pi * k / n + mpmath.mpf("0.4")) for k in range(n)]
        tol = mpmath.mpf(10) ** (-target_dps)
        for _ in range(2000):
            biggest = mpmath.mpf(0)
            for i in range(n):
                f, fp = mpmath.mpc(cs[0]), mpmath.mpc(0)
                for c in cs[1:]:
                    fp = fp * z[i] + f
                    f = f * z[i] + c
                if f == 0:
                    continue
                ratio = f / fp if fp != 0 else mpmath.mpc(0)
                s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(n) if j != i)
                step = ratio / (1 - ratio * s)
                z[i] = z[i] - step
                biggest = max(biggest, abs(step) / (1 + abs(z[i])))
            if biggest < tol:
                break
        radii = []
        for i in range(n):
            f = mpmath.polyval([mpmath.mpf(c) for c in cs], z[i])
            denom = mpmath.mpf(cs[0])
            for j in range(n):
                if j != i:
                    denom *= z[i] - z[j]
            radii.append(n * abs(f) / abs(denom))
        if max(radii) / (1 + max(abs(v) for v in z)) > mpmath.mpf(10) ** (-target_dps // 2):
            raise NumericFailure("multiprecision root finder did not converge", float(max(radii)))
        return z, radii
