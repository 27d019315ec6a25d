"""Both sides of the dynamical Mahler formula on P^1.

For a primitive integer form F of degree m with zero divisor D,

    h(D) = integral of log|F(x/y)| d mu  +  E(F)  +  m h(inf),

with E(F) = sum_p c_p log p from ``finiteplaces.E_finite``. Heights of
divisors are sums over points with multiplicity.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .dynmodel import MapModel, apply_lift, check_negativity_conditions
from .equilibrium import DEFAULT_BASE, IntegralEstimate, build_tree, integrate_log, integrate_log_ratio
from .errors import CapabilityError, InputError, UnsupportedGeometry
from .exactcore.numbers import normalize_projective
from .exactcore.polys import HomogeneousForm, IntPolynomial
from .finiteplaces import FormalLogSum, E_finite
from .heights import HeightValue, canonical_height_divisor, canonical_height_point, model_bad_primes

SPREAD_FACTOR = 3.0

CONVENTION = (
    "divisor heights sum over points with multiplicity; "
    "integral of log|F(x/y)| against the equilibrium measure; "
    f"budget = height bounds + E bounds + {SPREAD_FACTOR:g} x integral spread"
)


@dataclass(frozen=True)
class MahlerConfig:
    tree_depth: int | None = None
    divisor_depth: int | None = None
    base_point: tuple = DEFAULT_BASE
    seed: int = 0
    e_mode: str = "auto"
    target_error: float = 1e-10
    threads: int | None = None


@dataclass(frozen=True)
class HeuristicMatch:
    prime: int
    ratio: Fraction
    distance: float


@dataclass(frozen=True)
class MahlerReport:
    lhs_height: HeightValue
    infinity_term: float
    arch_integral: IntegralEstimate
    E_term: FormalLogSum
    residual: float
    budget: float
    degree: int
    notes: str = CONVENTION
    heuristic: HeuristicMatch | None = None
    infinity_error: float = 0.0

    @property
    def passed(self) -> bool:
        return abs(self.residual) <= self.budget

    def recompute_residual(self) -> float:
        return self.lhs_height.value - self.arch_integral.value - self.E_term.value() - self.infinity_term

    def to_dict(self):
        out = {
            "passed": self.passed,
            "degree": self.degree,
            "lhs_height": self.lhs_height.to_dict(),
            "infinity_term": _dec(self.infinity_term),
            "arch_integral": {
                "value": _dec(self.arch_integral.value),
                "spread": _dec(self.arch_integral.spread),
                "depth": self.arch_integral.depth,
                "singular": self.arch_integral.singular,
            },
            "E_term": {
                "value": _dec(self.E_term.value()),
                "error_bound": _dec(self.E_term.error_bound),
                "exact": self.E_term.exact,
                "coefficients": self.E_term.to_list(),
                "unresolved": list(self.E_term.unresolved),
            },
            "residual": _dec(self.residual),
            "budget": _dec(self.budget),
            "notes": self.notes,
            "heuristic": None,
        }
        if self.heuristic is not None:
            out["heuristic"] = {
                "prime": self.heuristic.prime,
                "ratio": str(self.heuristic.ratio),
                "distance": _dec(self.heuristic.distance),
                "flag": "heuristic",
            }
        return out


def _dec(x: float) -> str:
    return format(x, ".15g") if math.isfinite(x) else str(x)


def _threads(config: MahlerConfig) -> int:
    if config.threads is not None:
        return max(1, int(config.threads))
    env = os.environ.get("ARITHDYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InputError(f"ARITHDYN_THREADS must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def _as_form(F) -> HomogeneousForm:
    if isinstance(F, IntPolynomial):
        if F.is_zero():
            raise InputError("F must be nonzero")
        return F.homogenize()
    if isinstance(F, HomogeneousForm) and F.num_vars == 2:
        if F.is_zero():
            raise InputError("F must be nonzero")
        return F
    raise InputError("F must be a univariate polynomial or a binary form")


def _require_primitive(F: HomogeneousForm):
    c = F.content()
    if c != 1:
        raise InputError(f"F is not primitive (content {c}); divide out the content first")


def small_denominator_match(residual: float, primes, max_den: int, tol: float) -> HeuristicMatch | None:
    """Best p and r = a/b with b <= max_den and |residual/log p - r| <= tol."""
    best = None
    for p in primes:
        x = residual / math.log(p)
        r = Fraction(x).limit_denominator(max_den)
        dist = abs(x - float(r))
        if dist <= tol and (best is None or dist < best.distance):
            best = HeuristicMatch(p, r, dist)
    return best


def _run_terms(model, F, config, tree=None):
    if tree is None:
        tree = build_tree(model, config.base_point, config.tree_depth, config.seed)
    tasks = {
        "lhs": lambda: canonical_height_divisor(model, F, config.divisor_depth, config.target_error),
        "inf": lambda: canonical_height_point(model, (1, 0), config.target_error),
        "arch": lambda: integrate_log(tree, F),
        "E": lambda: E_finite(model, F, config.e_mode, Fraction(config.target_error).limit_denominator(10**15)),
    }
    n = _threads(config)
    if n == 1:
        return {k: f() for k, f in tasks.items()}, tree
    with ThreadPoolExecutor(max_workers=n) as pool:
        futures = {k: pool.submit(f) for k, f in tasks.items()}
        results = {}
        errors = {}
        for k in tasks:
            try:
                results[k] = futures[k].result()
            except Exception as exc:  # re-raised below in a fixed order
                errors[k] = exc
    for k in tasks:
        if k in errors:
            exc = errors[k]
            exc.partial = results
            raise exc
    return results, tree


def mahler_report(model: MapModel, F, config: MahlerConfig | None = None) -> MahlerReport:
    """Evaluate every term of the formula and the residual with its budget."""
    config = config or MahlerConfig()
    if model.n != 1:
        raise CapabilityError("the formula is checked on P^1 only")
    G = _as_form(F)
    _require_primitive(G)
    try:
        r, _ = _run_terms(model, G, config)
    except UnsupportedGeometry as exc:
        if not hasattr(exc, "partial"):
            exc.partial = {}
        raise
    lhs, inf, arch, E = r["lhs"], r["inf"], r["arch"], r["E"]
    m = G.degree
    inf_term = m * inf.value
    residual = lhs.value - arch.value - E.value() - inf_term
    budget = lhs.error_bound + m * inf.error_bound + E.error_bound + SPREAD_FACTOR * arch.spread
    heuristic = None
    if E.unresolved:
        d = model.d
        heuristic = small_denominator_match(residual, E.unresolved, d * (d - 1), max(budget, 1e-3))
    return MahlerReport(lhs, inf_term, arch, E, residual, budget, m, CONVENTION, heuristic, m * inf.error_bound)


@dataclass(frozen=True)
class CorollaryReport:
    lhs: float
    lhs_error: float
    integral: IntegralEstimate
    E_difference: FormalLogSum
    infinity_cancelled: bool
    residual: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.infinity_cancelled and abs(self.residual) <= self.budget

    def to_dict(self):
        return {
            "passed": self.passed,
            "lhs": _dec(self.lhs),
            "lhs_error": _dec(self.lhs_error),
            "integral": _dec(self.integral.value),
            "integral_spread": _dec(self.integral.spread),
            "E_difference": _dec(self.E_difference.value()),
            "E_coefficients": self.E_difference.to_list(),
            "residual": _dec(self.residual),
            "budget": _dec(self.budget),
        }


def corollary_check(model: MapModel, F_plus, F_minus, config: MahlerConfig | None = None) -> CorollaryReport:
    """h(D+) - h(D-) against the integral of log|F+/F-| plus E(F+) - E(F-)."""
    config = config or MahlerConfig()
    if model.n != 1:
        raise CapabilityError("the formula is checked on P^1 only")
    Gp, Gm = _as_form(F_plus), _as_form(F_minus)
    if Gp.degree != Gm.degree:
        raise InputError("F+ and F- must have equal degree")
    _require_primitive(Gp)
    _require_primitive(Gm)
    tree = build_tree(model, config.base_point, config.tree_depth, config.seed)
    hp = canonical_height_divisor(model, Gp, config.divisor_depth, config.target_error)
    hm = canonical_height_divisor(model, Gm, config.divisor_depth, config.target_error)
    integral = integrate_log_ratio(tree, Gp, Gm)
    target = Fraction(config.target_error).limit_denominator(10**15)
    Ep, Em = E_finite(model, Gp, config.e_mode, target), E_finite(model, Gm, config.e_mode, target)
    dE = Ep - Em
    # each side carries m h(inf); with equal degrees the two terms cancel
    lhs = hp.value - hm.value
    residual = lhs - integral.value - dE.value()
    budget = hp.error_bound + hm.error_bound + dE.error_bound + SPREAD_FACTOR * integral.spread
    return CorollaryReport(lhs, hp.error_bound + hm.error_bound, integral, dE, Gp.degree == Gm.degree, residual, budget)


def infinity_is_preperiodic(model: MapModel, max_steps: int = 64) -> bool:
    """Exact check that the orbit of (1:0) is finite (so h(inf) = 0)."""
    x = (1, 0)
    seen = {x}
    for _ in range(max_steps):
        x = normalize_projective(apply_lift(model, x))
        if x in seen:
            return True
        if max(abs(c) for c in x).bit_length() > 4096:
            return False
        seen.add(x)
    return False


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    integral: IntegralEstimate
    E_value: float
    budget: float
    holds: bool
    strict: bool

    def to_dict(self):
        return {
            "holds": self.holds,
            "strict": self.strict,
            "lhs": _dec(self.lhs),
            "integral": _dec(self.integral.value),
            "E": _dec(self.E_value),
            "budget": _dec(self.budget),
        }


def inequality_check(model: MapModel, F, config: MahlerConfig | None = None) -> InequalityReport:
    """h(D) <= integral of log|F| for models satisfying the negativity conditions.

    Refuses (InputError) unless the negativity conditions hold for all
    iterates, F has content 1 and (1:0) has a finite orbit.
    """
    config = config or MahlerConfig()
    if model.n != 1:
        raise CapabilityError("the inequality is checked on P^1 only")
    G = _as_form(F)
    if G.content() != 1:
        raise InputError("F must have content 1")
    cert = check_negativity_conditions(model)
    if not (cert.holds and cert.all_k):
        raise InputError(f"negativity conditions not established: {cert.detail}")
    if not infinity_is_preperiodic(model):
        raise InputError("the orbit of (1:0) is not certified finite")
    report = mahler_report(model, G, config)
    budget = report.budget
    lhs = report.lhs_height.value
    integral = report.arch_integral
    E = report.E_term.value()
    holds = lhs <= integral.value + budget
    strict = lhs < integral.value - budget
    return InequalityReport(lhs, integral, E, budget, holds, strict)


__all__ = [
    "CONVENTION",
    "CorollaryReport",
    "HeuristicMatch",
    "InequalityReport",
    "MahlerConfig",
    "MahlerReport",
    "corollary_check",
    "inequality_check",
    "infinity_is_preperiodic",
    "mahler_report",
    "model_bad_primes",
    "small_denominator_match",
]
