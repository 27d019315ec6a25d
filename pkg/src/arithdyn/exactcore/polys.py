"""Exact univariate polynomials and homogeneous forms over the integers."""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from itertools import product
from math import comb, gcd

from ..errors import InputError
from .numbers import int_content, valuation, INF


def _strip(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class IntPolynomial:
    """Univariate polynomial with integer coefficients.

    ``coeffs[i]`` is the coefficient of ``x**i``. Instances are immutable and
    hashable; the zero polynomial has ``degree == -1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = _strip(int(c) for c in coeffs)
        object.__setattr__(self, "coeffs", cs)

    def __setattr__(self, name, value):
        raise AttributeError("IntPolynomial is immutable")

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPolynomial":
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots, lead: int = 1) -> "IntPolynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntPolynomial([other])
        return isinstance(other, IntPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("IntPolynomial", self.coeffs))

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)})"

    def __str__(self):
        return format_univariate(self.coeffs, "x")

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, IntPolynomial):
            return other
        if isinstance(other, int):
            return IntPolynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial(self[i] + other[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.coeffs or not other.coeffs:
            return IntPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = IntPolynomial([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mod(self, x: int, m: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % m
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def content(self) -> int:
        if not self.coeffs:
            raise InputError("content of the zero polynomial is undefined")
        return int_content(self.coeffs)

    def primitive_part(self) -> "IntPolynomial":
        g = self.content()
        if self.lead < 0:
            g = -g
        return IntPolynomial(c // g for c in self.coeffs)

    def divmod_exact(self, other: "IntPolynomial"):
        """Division over Q returning (quotient, remainder) as Fraction lists."""
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        rem = [Fraction(c) for c in self.coeffs]
        q = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        lead = other.lead
        for k in range(len(q) - 1, -1, -1):
            coef = rem[k + other.degree] / lead
            q[k] = coef
            if coef:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= coef * b
        while rem and rem[-1] == 0:
            rem.pop()
        return q, rem

    def exact_div(self, other) -> "IntPolynomial":
        """Quotient when ``other`` divides ``self`` over Z; raises otherwise."""
        if isinstance(other, int):
            if any(c % other for c in self.coeffs):
                raise ArithmeticError("inexact division")
            return IntPolynomial(c // other for c in self.coeffs)
        q, r = self.divmod_exact(other)
        if r or any(c.denominator != 1 for c in q):
            raise ArithmeticError("inexact division")
        return IntPolynomial(int(c) for c in q)

    def __floordiv__(self, other):
        return self.exact_div(other)

    def reverse(self, degree: int | None = None) -> "IntPolynomial":
        """``x**degree * f(1/x)``."""
        degree = self.degree if degree is None else degree
        padded = list(self.coeffs) + [0] * (degree + 1 - len(self.coeffs))
        return IntPolynomial(reversed(padded))

    def compose(self, other: "IntPolynomial") -> "IntPolynomial":
        acc = IntPolynomial()
        for c in reversed(self.coeffs):
            acc = acc * other + c
        return acc

    def homogenize(self, degree: int | None = None) -> "HomogeneousForm":
        """Binary form ``y**degree * f(x/y)`` in variables (x, y)."""
        degree = self.degree if degree is None else degree
        if degree < self.degree:
            raise InputError("homogenizing degree is below the polynomial degree")
        return HomogeneousForm.binary(list(self.coeffs) + [0] * (degree - self.degree), degree)


def format_univariate(coeffs, var="x") -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if mono and abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}" + (f"*{mono}" if mono else "")
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def poly_gcd(f: IntPolynomial, g: IntPolynomial) -> IntPolynomial:
    """Primitive gcd over Z[x] via the primitive polynomial remainder sequence."""
    if not f:
        return g.primitive_part() if g else IntPolynomial()
    if not g:
        return f.primitive_part()
    a, b = f.primitive_part(), g.primitive_part()
    if a.degree < b.degree:
        a, b = b, a
    while b:
        r = pseudo_remainder(a, b)
        a, b = b, (r.primitive_part() if r else r)
    return a.primitive_part()


def pseudo_remainder(f: IntPolynomial, g: IntPolynomial) -> IntPolynomial:
    if f.degree < g.degree:
        return f
    rem = list(f.coeffs)
    lg = g.lead
    dg = g.degree
    for k in range(f.degree - dg, -1, -1):
        c = rem[k + dg]
        rem = [x * lg for x in rem]
        for j, b in enumerate(g.coeffs):
            rem[k + j] -= c * b
        rem.pop()
    return IntPolynomial(rem)


def squarefree_decomposition(f: IntPolynomial):
    """Yun's algorithm: list of (squarefree primitive factor, multiplicity).

    The product of ``factor**mult`` equals the primitive part of ``f`` up to sign.
    """
    if f.degree < 1:
        return []
    b = _frac(f)
    fp = _frac(f.derivative())
    a = _frac(poly_gcd(f, f.derivative()))
    b, c = _fdiv(b, a), _fdiv(fp, a)
    out = []
    k = 1
    while len(b) > 1:
        d = _fsub(c, _fderiv(b))
        g = _frac(poly_gcd(_toint(b), _toint(d))) if d else b
        if len(g) > 1:
            out.append((_toint(g).primitive_part(), k))
        b = _fdiv(b, g)
        c = _fdiv(d, g) if d else []
        k += 1
    return out


def _frac(p):
    return [Fraction(c) for c in p.coeffs]


def _toint(cs):
    den = reduce(lambda x, y: x * y // gcd(x, y), (c.denominator for c in cs), 1)
    return IntPolynomial(int(c * den) for c in cs)


def _fderiv(cs):
    return [i * c for i, c in enumerate(cs) if i]


def _fsub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _fdiv(a, b):
    rem = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    for k in range(len(q) - 1, -1, -1):
        coef = rem[k + len(b) - 1] / b[-1]
        q[k] = coef
        for j, x in enumerate(b):
            rem[k + j] -= coef * x
    if any(rem):
        raise ArithmeticError("inexact division in squarefree decomposition")
    return q


class HomogeneousForm:
    """Homogeneous polynomial in ``num_vars`` variables with integer coefficients.

    ``terms`` maps exponent tuples (summing to ``degree``) to nonzero integers.
    The zero form is allowed and keeps its nominal degree.
    """

    __slots__ = ("num_vars", "degree", "terms", "_hash")

    def __init__(self, num_vars: int, degree: int, terms=None):
        if num_vars < 1 or degree < 0:
            raise InputError("a form needs at least one variable and a nonnegative degree")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars or sum(exps) != degree or min(exps) < 0:
                raise InputError(f"exponent vector {exps} does not fit a degree-{degree} form in {num_vars} variables")
            c = int(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if clean[exps] == 0:
                    del clean[exps]
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("HomogeneousForm is immutable")

    # constructors
    @classmethod
    def zero(cls, num_vars, degree):
        return cls(num_vars, degree, {})

    @classmethod
    def variable(cls, num_vars, i):
        e = [0] * num_vars
        e[i] = 1
        return cls(num_vars, 1, {tuple(e): 1})

    @classmethod
    def constant(cls, num_vars, c):
        return cls(num_vars, 0, {(0,) * num_vars: c})

    @classmethod
    def binary(cls, coeffs, degree=None):
        """Binary form with ``coeffs[i]`` the coefficient of ``x**i * y**(degree-i)``."""
        coeffs = list(coeffs)
        degree = len(coeffs) - 1 if degree is None else degree
        coeffs += [0] * (degree + 1 - len(coeffs))
        if len(coeffs) != degree + 1:
            raise InputError("too many coefficients for the requested degree")
        return cls(2, degree, {(i, degree - i): c for i, c in enumerate(coeffs) if c})

    # basic protocol
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, HomogeneousForm)
            and self.num_vars == other.num_vars
            and (self.degree == other.degree or (not self.terms and not other.terms))
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.num_vars, self.degree, frozenset(self.terms.items()))))
        return self._hash

    def __repr__(self):
        return f"HomogeneousForm({self.num_vars}, {self.degree}, {self.terms!r})"

    def to_string(self, names=None) -> str:
        names = names or default_names(self.num_vars)
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, reverse=True):
            c = self.terms[exps]
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exps) if e
            )
            if mono and abs(c) == 1:
                body = mono
            else:
                body = str(abs(c)) + (f"*{mono}" if mono else "")
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            out += f" {s} {b}"
        return out

    __str__ = to_string

    # arithmetic
    def _check(self, other):
        if self.num_vars != other.num_vars:
            raise InputError("forms live in different numbers of variables")

    def __add__(self, other):
        self._check(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        if self.degree != other.degree:
            raise InputError("cannot add forms of different degrees")
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return HomogeneousForm(self.num_vars, self.degree, t)

    def __neg__(self):
        return HomogeneousForm(self.num_vars, self.degree, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: int) -> "HomogeneousForm":
        return HomogeneousForm(self.num_vars, self.degree, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return HomogeneousForm(self.num_vars, self.degree + other.degree, t)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k):
        result = HomogeneousForm.constant(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # evaluation
    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (tuple, list)):
            point = tuple(point[0])
        if len(point) != self.num_vars:
            raise InputError("wrong number of coordinates")
        total = 0
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(point, exps):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def eval_mod(self, point, m: int) -> int:
        total = 0
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(point, exps):
                if e:
                    term = term * pow(x, e, m) % m
            total += term
        return total % m

    def substitute(self, forms) -> "HomogeneousForm":
        """Compose: replace variable i by ``forms[i]`` (all of one degree)."""
        forms = list(forms)
        if len(forms) != self.num_vars:
            raise InputError("need one form per variable")
        nv = forms[0].num_vars
        deg = forms[0].degree
        if any(f.degree != deg or f.num_vars != nv for f in forms):
            raise InputError("substituted forms must share degree and variables")
        cache: dict = {}

        def power(i, e):
            key = (i, e)
            if key not in cache:
                cache[key] = forms[i] ** e
            return cache[key]

        acc = HomogeneousForm.zero(nv, self.degree * deg)
        t: dict = {}
        for exps, c in self.terms.items():
            term = HomogeneousForm.constant(nv, c)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            for e2, c2 in term.terms.items():
                t[e2] = t.get(e2, 0) + c2
        return HomogeneousForm(nv, self.degree * deg, t) if t else acc

    # structure
    def content(self) -> int:
        if not self.terms:
            raise InputError("content of the zero form is undefined")
        return int_content(self.terms.values())

    def primitive_part(self) -> "HomogeneousForm":
        g = self.content()
        return HomogeneousForm(self.num_vars, self.degree, {e: c // g for e, c in self.terms.items()})

    def valuation(self, p: int):
        return min((valuation(p, c) for c in self.terms.values()), default=INF)

    def reduce_mod(self, m: int) -> "HomogeneousForm":
        return HomogeneousForm(self.num_vars, self.degree, {e: c % m for e, c in self.terms.items()})

    def restrict(self, var: int) -> "HomogeneousForm":
        """Set variable ``var`` to zero and drop it."""
        t = {e[:var] + e[var + 1:]: c for e, c in self.terms.items() if e[var] == 0}
        return HomogeneousForm(self.num_vars - 1, self.degree, t)

    def coefficient(self, exps) -> int:
        return self.terms.get(tuple(exps), 0)

    def max_coefficient_bits(self) -> int:
        return max((abs(c).bit_length() for c in self.terms.values()), default=0)

    # binary-form helpers
    def binary_coeffs(self) -> list[int]:
        """For a binary form: ``[c_0, ..., c_m]`` with ``c_i`` the x**i y**(m-i) coefficient."""
        if self.num_vars != 2:
            raise InputError("not a binary form")
        return [self.terms.get((i, self.degree - i), 0) for i in range(self.degree + 1)]

    def dehomogenize(self) -> IntPolynomial:
        """Binary form -> f(x, 1)."""
        return IntPolynomial(self.binary_coeffs())

    def monomials(self):
        return all_exponents(self.num_vars, self.degree)


def all_exponents(num_vars: int, degree: int):
    """Exponent vectors of a given total degree, in lexicographically decreasing order."""
    if num_vars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in all_exponents(num_vars - 1, degree - first):
            out.append((first,) + rest)
    return out


def num_monomials(num_vars: int, degree: int) -> int:
    return comb(degree + num_vars - 1, num_vars - 1)


def default_names(num_vars: int):
    if num_vars == 2:
        return ["x", "y"]
    if num_vars == 3:
        return ["x", "y", "z"]
    return [f"x{i}" for i in range(num_vars)]


def iterate_forms(lift, k: int):
    """k-fold composition of a lift (sequence of forms) with itself."""
    current = list(lift)
    for _ in range(k - 1):
        current = [f.substitute(lift) for f in current]
    return current


def exponent_grid(num_vars, max_each):
    return product(*(range(m + 1) for m in max_each))
