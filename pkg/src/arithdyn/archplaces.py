"""Archimedean local theory: the homogeneous escape rate of the lift.

For x in C^{n+1} \\ {0},

    G(x) = lim_k d^-k log ||Phi^k(x)||_sup
         = log ||x|| + sum_j d^-(j+1) log ||Phi(x_j)||,   x_0 = x/||x||,
                                                        x_{j+1} = Phi(x_j)/||Phi(x_j)||.

G(c x) = G(x) + log|c| and G(Phi(x)) = d G(x). Each increment is bounded by
B = sup over the unit sup-sphere of |log ||Phi(y)|||, so the tail after k
steps is at most B / (d^k (d - 1)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynmodel import MapModel
from .errors import InputError

DEFAULT_DEPTH = 30


class FormEvaluator:
    """Vectorized evaluation of a tuple of forms on complex coordinate arrays."""

    def __init__(self, forms):
        self.forms = tuple(forms)
        self.num_vars = forms[0].num_vars
        self.degree = forms[0].degree
        self.tables = []
        for f in self.forms:
            exps = np.array(list(f.terms.keys()), dtype=int).reshape(-1, self.num_vars)
            coeffs = np.array([float(c) for c in f.terms.values()], dtype=float)
            self.tables.append((exps, coeffs))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """X has shape (num_vars, N); returns shape (len(forms), N)."""
        X = np.asarray(X, dtype=complex)
        powers = [[np.ones(X.shape[1:], dtype=complex)] for _ in range(self.num_vars)]
        for i in range(self.num_vars):
            for _ in range(self.degree):
                powers[i].append(powers[i][-1] * X[i])
        out = np.zeros((len(self.forms),) + X.shape[1:], dtype=complex)
        for k, (exps, coeffs) in enumerate(self.tables):
            acc = np.zeros(X.shape[1:], dtype=complex)
            for e, c in zip(exps, coeffs):
                term = np.full(X.shape[1:], c, dtype=complex)
                for i, ei in enumerate(e):
                    if ei:
                        term = term * powers[i][ei]
                acc = acc + term
            out[k] = acc
        return out


@lru_cache(maxsize=64)
def evaluator(model: MapModel) -> FormEvaluator:
    return FormEvaluator(model.lift)


def sup_normalize(X: np.ndarray):
    """Divide each column by its sup-norm; returns (normalized, log norms)."""
    X = np.asarray(X, dtype=complex)
    norms = np.max(np.abs(X), axis=0)
    if np.any(norms == 0):
        raise InputError("the zero vector is not a projective point")
    return X / norms, np.log(norms)


@lru_cache(maxsize=64)
def increment_bound(model: MapModel) -> float:
    """Estimate of B = sup |log ||Phi(y)||| over the unit sup-sphere.

    The upper side is certified (sum of absolute coefficients); the lower
    side is the minimum over a deterministic sample of the sphere.
    """
    upper = math.log(max(sum(abs(c) for c in f.terms.values()) for f in model.lift))
    nv = model.num_vars
    ev = evaluator(model)
    r = np.linspace(0, 1, 41)
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    grid = (r[:, None] * np.exp(1j * t[None, :])).ravel()
    rng = np.random.default_rng(12345)
    low = math.inf
    for i in range(nv):
        m = grid.size if nv == 2 else 4000
        X = np.empty((nv, m), dtype=complex)
        for j in range(nv):
            if j == i:
                X[j] = 1.0
            elif nv == 2:
                X[j] = grid
            else:
                X[j] = np.sqrt(rng.uniform(0, 1, m)) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
        vals = np.max(np.abs(ev(X)), axis=0)
        low = min(low, float(np.min(vals)))
    lower = math.log(low) if low > 0 else -math.inf
    return max(abs(upper), abs(lower))


def green_batch(model: MapModel, X, depth: int = DEFAULT_DEPTH):
    """G at every column of X (shape (n+1, N)).

    Returns (values, max_abs_increment) with the max taken per column over
    the computed orbit increments log||Phi(x_j)||.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    ev = evaluator(model)
    d = model.d
    Y, logn = sup_normalize(X)
    total = logn.astype(float)
    maxinc = np.zeros(X.shape[1])
    scale = 1.0
    for _ in range(depth):
        Z = ev(Y)
        Y, inc = sup_normalize(Z)
        scale /= d
        total = total + scale * inc
        maxinc = np.maximum(maxinc, np.abs(inc))
    return total, maxinc


@dataclass(frozen=True)
class GreenValue:
    value: float
    depth: int
    rate_bound: float
    tail_bound: float

    def __float__(self):
        return self.value


def _as_vector(model, x):
    x = np.asarray([complex(c) for c in x], dtype=complex)
    if x.shape != (model.num_vars,):
        raise InputError(f"point has {x.size} coordinates, model needs {model.num_vars}")
    if not np.any(x):
        raise InputError("the zero vector is not a projective point")
    return x


def green_value(model: MapModel, x, depth: int = DEFAULT_DEPTH) -> GreenValue:
    """Escape rate G(x) of the lift at a complex vector x.

    ``rate_bound`` is d times the largest observed one-step increment;
    ``tail_bound`` bounds |G - value| using the larger of the observed
    increments and the model constant B.
    """
    if depth < 0:
        raise InputError("depth must be nonnegative")
    v = _as_vector(model, x)
    vals, maxinc = green_batch(model, v[:, None], depth)
    d = model.d
    observed = float(maxinc[0])
    B = max(observed, increment_bound(model))
    tail = B / (d**depth * (d - 1))
    return GreenValue(float(vals[0]), depth, d * observed, tail)


def green_excess_integer(model: MapModel, x, depth: int = DEFAULT_DEPTH) -> GreenValue:
    """G(x) - log||x|| at an integer vector of arbitrary size (a bounded quantity)."""
    x = [int(c) for c in x]
    big = max(abs(c) for c in x)
    scaled = [float(c / big) if big.bit_length() < 1000 else float(_ratio(c, big)) for c in x]
    return green_value(model, scaled, depth)


def green_of_integer_point(model: MapModel, x, depth: int = DEFAULT_DEPTH) -> GreenValue:
    """G at an integer vector of arbitrary size (scaled before leaving exact arithmetic)."""
    g = green_excess_integer(model, x, depth)
    logbig = math.log(max(abs(int(c)) for c in x))
    return GreenValue(g.value + logbig, g.depth, g.rate_bound, g.tail_bound)


def _ratio(a, b):
    from fractions import Fraction

    return Fraction(a, b)


def canonical_metric_norm(model: MapModel, section, point, depth: int = DEFAULT_DEPTH) -> float:
    """|sum lambda_i a_i| / exp(G(a)): the canonical metric of a section of O(1)."""
    lam = [complex(c) for c in section]
    if len(lam) != model.num_vars or not any(lam):
        raise InputError("section needs n+1 coefficients, not all zero")
    a = _as_vector(model, point)
    g = green_value(model, a, depth).value
    return abs(sum(l * ai for l, ai in zip(lam, a))) / math.exp(g)


@dataclass(frozen=True)
class ConvergenceReport:
    increments: np.ndarray  # shape (num_points, depth): |g_{k+1} - g_k|
    ratio: float | None
    bound_ok: bool
    slack: float

    def rows(self):
        for k in range(self.increments.shape[1]):
            col = self.increments[:, k]
            yield k, float(np.max(col)), float(np.mean(col))


def convergence_report(model: MapModel, points, depth: int = 40, slack: float = 0.1) -> ConvergenceReport:
    """Per-step increments of the escape-rate series and their fitted
    geometric ratio (expected 1/d)."""
    X = np.array([[complex(c) for c in p] for p in points], dtype=complex).T
    ev = evaluator(model)
    d = model.d
    Y, _ = sup_normalize(X)
    incs = np.zeros((X.shape[1], depth))
    scale = 1.0
    for k in range(depth):
        Y, inc = sup_normalize(ev(Y))
        scale /= d
        incs[:, k] = np.abs(scale * inc)
    # fit log(max increment) ~ a + k log r over steps with nonzero increments
    m = np.max(incs, axis=0)
    ks = np.nonzero(m > 1e-300)[0]
    ks = ks[ks >= 1]
    ratio = None
    if ks.size >= 3:
        slope = np.polyfit(ks, np.log(m[ks]), 1)[0]
        ratio = float(np.exp(slope))
    ok = ratio is None or ratio <= 1 / d + slack
    return ConvergenceReport(incs, ratio, ok, slack)


def green_grid(model: MapModel, window, resolution, depth: int = DEFAULT_DEPTH):
    """Rows (re, im, G(z, 1)) over a rectangle, row-major from the top-left
    corner; ``window`` = (re_min, re_max, im_min, im_max)."""
    if model.n != 1:
        raise InputError("grid output is defined for maps of P^1")
    re_min, re_max, im_min, im_max = map(float, window)
    nx, ny = resolution
    if nx < 1 or ny < 1:
        raise InputError("resolution must be positive")
    xs = np.linspace(re_min, re_max, nx) if nx > 1 else np.array([re_min])
    ys = np.linspace(im_max, im_min, ny) if ny > 1 else np.array([im_max])
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    X = np.vstack([Z, np.ones_like(Z)])
    vals, _ = green_batch(model, X, depth)
    return [(float(z.real), float(z.imag), float(g)) for z, g in zip(Z, vals)]
