"""Integers, rationals, p-adic valuations and places of Q."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd

import sympy

from ..errors import InputError


class ValuationTop(enum.Enum):
    """The valuation of zero.

    Orders above every integer so that ``min`` over a mix of integers and
    ``INF`` is total and never needs a sentinel.
    """

    INF = "+inf"

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is ValuationTop.INF

    def __gt__(self, other):
        return other is not ValuationTop.INF

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __repr__(self):
        return "INF"


INF = ValuationTop.INF


def is_prime(p) -> bool:
    return isinstance(p, int) and p >= 2 and bool(sympy.isprime(p))


def require_prime(p) -> int:
    if not is_prime(p):
        raise InputError(f"{p!r} is not a prime")
    return p


def int_valuation(p: int, n: int):
    """Exponent of ``p`` in the integer ``n`` (``INF`` for zero)."""
    if n == 0:
        return INF
    n = abs(n)
    k = 0
    # square-and-divide keeps this fast for large exponents
    while n % p == 0:
        pk, e = p, 1
        while n % (pk * pk) == 0:
            pk *= pk
            e *= 2
        n //= pk
        k += e
    return k


def valuation(p: int, x):
    """p-adic valuation of a nonzero rational; zero maps to ``INF``.

    >>> valuation(2, 12), valuation(3, Fraction(5, 9)), valuation(7, 10)
    (2, -2, 0)
    """
    if isinstance(x, Fraction):
        if x == 0:
            return INF
        return int_valuation(p, x.numerator) - int_valuation(p, x.denominator)
    return int_valuation(p, int(x))


def vector_valuation(p: int, xs):
    """Minimum valuation over the entries; ``INF`` for the zero vector."""
    return min((valuation(p, x) for x in xs), default=INF)


def int_content(values) -> int:
    return reduce(gcd, (abs(int(v)) for v in values), 0)


def normalize_projective(coords) -> tuple[int, ...]:
    """Coprime integer coordinates with the first nonzero entry positive.

    Accepts ints or Fractions; rejects the zero vector.
    """
    fr = [Fraction(c) for c in coords]
    if all(c == 0 for c in fr):
        raise InputError("the zero vector is not a projective point")
    den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for c in fr), 1)
    ints = [int(c * den) for c in fr]
    g = int_content(ints)
    ints = [c // g for c in ints]
    lead = next(c for c in ints if c != 0)
    if lead < 0:
        ints = [-c for c in ints]
    return tuple(ints)


def factor_integer(n: int, trial_bound: int = 10**5):
    """Factor ``|n|`` by trial division then sympy's general-purpose factorint.

    Returns ``(factors, cofactor)`` where ``factors`` maps primes to
    exponents and ``cofactor`` is whatever could not be split (1 on success).
    """
    n = abs(int(n))
    if n == 0:
        raise InputError("cannot factor zero")
    factors: dict[int, int] = {}
    for p in sympy.primerange(2, trial_bound + 1):
        if p * p > n:
            break
        if n % p == 0:
            e = int_valuation(p, n)
            factors[p] = e
            n //= p**e
    if n > 1:
        if n <= trial_bound * trial_bound or sympy.isprime(n):
            factors[n] = factors.get(n, 0) + 1
            n = 1
        else:
            rest = sympy.factorint(n)
            for q, e in rest.items():
                factors[int(q)] = factors.get(int(q), 0) + int(e)
            n = 1
    return dict(sorted(factors.items())), n


@dataclass(frozen=True)
class Place:
    """A place of Q: archimedean (``prime is None``) or p-adic."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None:
            require_prime(self.prime)

    @classmethod
    def archimedean(cls) -> "Place":
        return cls(None)

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls(p)

    @property
    def is_archimedean(self) -> bool:
        return self.prime is None

    @property
    def log_norm(self) -> float:
        """log N(v); N(v) = p for the place above p."""
        import math

        if self.prime is None:
            raise InputError("the archimedean place has no residue field")
        return math.log(self.prime)

    def __str__(self):
        return "inf" if self.prime is None else str(self.prime)
