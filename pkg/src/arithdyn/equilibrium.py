"""Equilibrium measure of a map of P^1 through iterated preimages.

The uniform probability on the d^k preimages of a non-exceptional base
point converges weakly to the equilibrium measure mu. For integrands of the
form log|F(x/y)| the level-k average differs from the integral by
d^-k times a bounded Green-function sum, so the estimates settle
geometrically; the spread over the last three levels is reported as the
error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynmodel import MapModel
from .errors import BudgetError, InputError, NumericFailure
from .exactcore.polys import HomogeneousForm, IntPolynomial

NODE_CAP = 2**16
DEFAULT_BASE = (0.5 + 0.8j, 1.0)
ROOT_TOL = 1e-9
SINGULAR_LOG = math.log(1e-12)


def default_depth(d: int) -> int:
    """Deepest level whose leaf count stays within the node cap."""
    k = 0
    while d ** (k + 1) <= NODE_CAP:
        k += 1
    return k


def _as_projective(z):
    if isinstance(z, (tuple, list, np.ndarray)):
        if len(z) != 2:
            raise InputError("a point of P^1 has two coordinates")
        v = np.array([complex(z[0]), complex(z[1])])
    else:
        v = np.array([complex(z), 1.0])
    m = np.max(np.abs(v))
    if m == 0:
        raise InputError("the zero vector is not a projective point")
    return v / m


def _pencil_coeffs(model: MapModel, W: np.ndarray) -> np.ndarray:
    """Coefficients (low x-power first) of w1*p0 - w0*p1 for each column w."""
    p0, p1 = model.lift
    a = np.array([float(c) for c in p0.binary_coeffs()])
    b = np.array([float(c) for c in p1.binary_coeffs()])
    return W[1][:, None] * a[None, :] - W[0][:, None] * b[None, :]


def _batch_aberth(C: np.ndarray, max_iter: int = 500):
    """Roots of many polynomials at once; row i of C holds the coefficients
    (low power first) of a polynomial whose top coefficient is nonzero.
    Returns (roots, inclusion radii)."""
    N, n1 = C.shape
    n = n1 - 1
    lead = C[:, -1]
    M = C / lead[:, None]
    # Fujiwara-type radius from the coefficients, fixed rotation
    with np.errstate(divide="ignore"):
        ratios = np.abs(M[:, :-1][:, ::-1]) ** (1.0 / np.arange(1, n + 1))[None, :]
    radius = np.max(ratios, axis=1)
    radius[radius == 0] = 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    Z = radius[:, None] * np.exp(1j * angles)[None, :]
    active = np.ones(N, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        z = Z[idx]
        m = M[idx]
        f = np.ones_like(z)
        fp = np.zeros_like(z)
        for k in range(n - 1, -1, -1):
            fp = fp * z + f
            f = f * z + m[:, k][:, None]
        diff = z[:, :, None] - z[:, None, :]
        eye = np.eye(n, dtype=bool)[None, :, :]
        diff = np.where(eye, 1.0, diff)
        s = np.where(eye, 0.0, 1.0 / diff).sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = f / fp
            step = ratio / (1 - ratio * s)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        Z[idx] = z
        done = np.all(np.abs(step) <= 1e-15 * (1 + np.abs(z)), axis=1)
        active[idx[done]] = False
    # inclusion radii
    f = np.ones_like(Z)
    absb = np.ones(Z.shape)
    for k in range(n - 1, -1, -1):
        f = f * Z + M[:, k][:, None]
        absb = absb * np.abs(Z) + np.abs(M[:, k])[:, None]
    diff = Z[:, :, None] - Z[:, None, :]
    eye = np.eye(n, dtype=bool)[None, :, :]
    prod = np.where(eye, 1.0, diff).prod(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        radii = n * (np.abs(f) + 4 * n * np.finfo(float).eps * absb) / np.abs(prod)
    radii = np.where(np.isfinite(radii), radii, np.inf)
    return Z, radii


def _fiber_points(model: MapModel, W: np.ndarray):
    """All preimages of the columns of W; returns (points (2, N*d), radii)."""
    d = model.d
    C = _pencil_coeffs(model, W)  # (N, d+1), index = power of x
    N = C.shape[0]
    out = np.empty((2, N, d), dtype=complex)
    radii = np.zeros((N, d))
    use_z = np.abs(C[:, -1]) >= np.abs(C[:, 0])
    special = (C[:, -1] == 0) | (C[:, 0] == 0)
    regular = ~special
    for chart in (True, False):
        rows = np.nonzero(regular & (use_z == chart))[0]
        if rows.size == 0:
            continue
        coeffs = C[rows] if chart else C[rows][:, ::-1]
        Z, r = _batch_aberth(coeffs)
        big = np.abs(Z) > 1
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / Z
        if chart:  # roots are x/y
            out[0, rows] = np.where(big, 1.0, Z)
            out[1, rows] = np.where(big, inv, 1.0)
        else:  # roots are y/x
            out[0, rows] = np.where(big, inv, 1.0)
            out[1, rows] = np.where(big, 1.0, Z)
        radii[rows] = r
    for i in np.nonzero(special)[0]:
        pts, r = _fiber_exact_ends(C[i], d)
        out[:, i, :] = pts
        radii[i] = r
    return out.reshape(2, N * d), radii.reshape(N * d)


def _fiber_exact_ends(c: np.ndarray, d: int):
    """Fiber of one pencil with exactly vanishing end coefficients: strip
    roots at (1:0) and (0:1) with their multiplicities, solve the rest."""
    c = np.array(c, dtype=complex)
    if not np.any(c):
        raise NumericFailure("degenerate pencil (zero polynomial)")
    lo = int(np.argmax(c != 0))  # multiplicity of x = 0 root
    hi = d - int(np.nonzero(c)[0][-1])  # multiplicity of y = 0 root
    core = c[lo: d + 1 - hi]
    pts = [(0.0, 1.0)] * lo + [(1.0, 0.0)] * hi
    radii = [0.0] * (lo + hi)
    if core.size > 1:
        Z, r = _batch_aberth(core[None, :])
        for z, rr in zip(Z[0], r[0]):
            pts.append((1.0, 1 / z) if abs(z) > 1 else (z, 1.0))
            radii.append(rr)
    arr = np.array(pts, dtype=complex).T
    return arr, np.array(radii)


def preimage_fiber(model: MapModel, w, tolerance: float = ROOT_TOL):
    """The d preimages of w (sup-normalized pairs), with multiplicity.

    Returns a list of (point, multiplicity); coincident roots are merged.
    """
    if model.n != 1:
        raise InputError("preimage fibers are implemented on P^1 only")
    v = _as_projective(w)
    pts, radii = _fiber_points(model, v[:, None])
    if not np.all(np.isfinite(radii)):
        raise NumericFailure("fiber root finding failed", float(np.max(radii)))
    out = []
    for k in range(pts.shape[1]):
        p = (complex(pts[0, k]), complex(pts[1, k]))
        for j, (q, m) in enumerate(out):
            if abs(p[0] - q[0]) + abs(p[1] - q[1]) < math.sqrt(tolerance):
                out[j] = (q, m + 1)
                break
        else:
            out.append((p, 1))
    out.sort(key=lambda t: _point_key(t[0]))
    return out


def _point_key(p):
    z = p[0] / p[1] if abs(p[1]) >= abs(p[0]) else complex("inf")
    if z == complex("inf"):
        return (1, 0.0, 0.0)
    return (0, round(z.real, 12), round(z.imag, 12))


@dataclass
class PreimageTree:
    """Levels of iterated preimages; ``levels[k]`` has shape (2, d^k)."""

    model: MapModel
    base: tuple
    depth: int
    seed: int
    levels: list = field(default_factory=list)
    max_radius: float = 0.0

    def leaves(self, k: int | None = None):
        return self.levels[self.depth if k is None else k]

    def level_size(self, k):
        return self.levels[k].shape[1]

    def dump_rows(self):
        for k, lev in enumerate(self.levels):
            for x, y in lev.T:
                z = x / y if y != 0 else complex("inf")
                yield k, z.real, z.imag, 1


def _distinct(points: np.ndarray, tol=1e-7) -> int:
    reps = []
    for x, y in points.T:
        v = np.array([x, y]) / max(abs(x), abs(y))
        # compare projectively via the cross product
        if not any(abs(v[0] * r[1] - v[1] * r[0]) < tol for r in reps):
            reps.append(v)
    return len(reps)


def is_exceptional(model: MapModel, z0, levels: int = 2) -> bool:
    """Heuristic: the backward orbit up to ``levels`` has at most 2 points."""
    v = _as_projective(z0)
    cur = v[:, None]
    seen = cur
    for _ in range(levels):
        cur, _ = _fiber_points(model, cur)
        seen = np.hstack([seen, cur])
    return _distinct(seen) <= 2


def build_tree(model: MapModel, z0=DEFAULT_BASE, depth: int | None = None, seed: int = 0) -> PreimageTree:
    """Full preimage tree of z0. The seed only orders tied roots; results do
    not otherwise depend on it."""
    if model.n != 1:
        raise InputError("the equilibrium measure is implemented on P^1 only")
    d = model.d
    depth = default_depth(d) if depth is None else int(depth)
    if depth < 0:
        raise InputError("depth must be nonnegative")
    if d**depth > NODE_CAP:
        raise BudgetError(f"{d}^{depth} leaves exceed the node cap {NODE_CAP}")
    v = _as_projective(z0)
    if is_exceptional(model, v):
        raise InputError("base point is exceptional (its backward orbit has at most two points)")
    levels = [v[:, None]]
    worst = 0.0
    for _ in range(depth):
        nxt, radii = _fiber_points(model, levels[-1])
        worst = max(worst, float(np.max(radii)))
        levels.append(nxt)
    return PreimageTree(model, (complex(v[0]), complex(v[1])), depth, seed, levels, worst)


class _LogIntegrand:
    """w -> log|F_hom(w)| - m log|w_1|, i.e. log|F(x/y)| on P^1."""

    def __init__(self, F):
        if isinstance(F, IntPolynomial):
            if F.is_zero():
                raise InputError("F must be nonzero")
            F = F.homogenize()
        if not isinstance(F, HomogeneousForm) or F.num_vars != 2:
            raise InputError("F must be a univariate polynomial or a binary form")
        if F.is_zero():
            raise InputError("F must be nonzero")
        self.form = F
        self.m = F.degree
        self.coeffs = np.array([float(c) for c in F.binary_coeffs()])

    def raw(self, W):
        x, y = W
        acc = np.zeros(W.shape[1], dtype=complex)
        for i, c in enumerate(self.coeffs):
            if c:
                acc = acc + c * x**i * y ** (self.m - i)
        return acc

    def __call__(self, W):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.raw(W))) - self.m * np.log(np.abs(W[1]))


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    spread: float
    depth: int
    level_values: tuple
    singular: bool = False

    def __float__(self):
        return self.value


def _level_means(tree: PreimageTree, fn, levels):
    out = []
    singular = False
    for k in levels:
        vals = fn(tree.levels[k])
        if not np.all(np.isfinite(vals)) or np.any(vals < SINGULAR_LOG):
            singular = True
            vals = np.where(np.isfinite(vals), vals, SINGULAR_LOG)
        out.append(float(np.mean(vals)))
    return out, singular


def _estimate(values, depth, singular):
    last = values[-3:]
    spread = max(abs(a - b) for a in last for b in last) if len(last) > 1 else float("inf")
    value = values[-1]
    if singular and len(values) >= 2:
        value = (values[-1] + values[-2]) / 2
    return IntegralEstimate(value, spread, depth, tuple(values), singular)


def integrate_log(tree: PreimageTree, F) -> IntegralEstimate:
    """Estimate of the integral of log|F(x/y)| against the equilibrium measure.

    Level means are taken at every level; the value is the deepest one (the
    mean of the two deepest when a leaf falls within 1e-12 of a zero of F)
    and the spread is the largest gap among the last three levels.
    """
    fn = _LogIntegrand(F)
    values, singular = _level_means(tree, fn, range(tree.depth + 1))
    return _estimate(values, tree.depth, singular)


def integrate_log_ratio(tree: PreimageTree, F_plus, F_minus) -> IntegralEstimate:
    """Integral of log|F+/F-| for binary forms of equal degree."""
    fp, fm = _LogIntegrand(F_plus), _LogIntegrand(F_minus)
    if fp.m != fm.m:
        raise InputError("F+ and F- must have equal degree")

    def fn(W):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(fp.raw(W))) - np.log(np.abs(fm.raw(W)))

    values, singular = _level_means(tree, fn, range(tree.depth + 1))
    return _estimate(values, tree.depth, singular)


@dataclass(frozen=True)
class InvarianceCheck:
    direct: IntegralEstimate
    pulled_back: IntegralEstimate

    @property
    def difference(self) -> float:
        return abs(self.direct.value - self.pulled_back.value)

    @property
    def spread(self) -> float:
        return max(self.direct.spread, self.pulled_back.spread)

    def agrees(self, factor: float = 3.0) -> bool:
        return self.difference <= factor * self.spread + 1e-12


def invariance_check(model: MapModel, tree: PreimageTree, G) -> InvarianceCheck:
    """Level-k estimate of the integral of log|G| against the level-(k-1)
    estimate of the integral of log|G o phi|, with G o phi formed
    symbolically as G_hom(p0, p1) / p1^m."""
    if tree.depth < 2:
        raise InputError("invariance check needs a tree of depth at least 2")
    g = _LogIntegrand(G)
    composed = g.form.substitute(model.lift)
    gphi = _LogIntegrand(composed)
    p1 = model.lift[1]
    p1c = np.array([float(c) for c in p1.binary_coeffs()])
    m = g.m

    def pulled(W):
        x, y = W
        q = np.zeros(W.shape[1], dtype=complex)
        for i, c in enumerate(p1c):
            if c:
                q = q + c * x**i * y ** (model.d - i)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(gphi.raw(W))) - m * np.log(np.abs(q))

    direct = integrate_log(tree, G)
    vals, singular = _level_means(tree, pulled, range(tree.depth))
    back = _estimate(vals, tree.depth - 1, singular)
    return InvarianceCheck(direct, back)


def ks_uniform_arguments(points: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between leaf arguments (as fractions of a
    turn) and the uniform distribution on [0, 1)."""
    z = points[0] / points[1]
    t = np.sort((np.angle(z) / (2 * np.pi)) % 1.0)
    n = t.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - t), np.max(t - (i - 1) / n)))
