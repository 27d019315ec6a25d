"""Exact arithmetic: integers, valuations, forms, resultants, roots."""
from .numbers import (
    INF,
    Place,
    ValuationTop,
    factor_integer,
    int_content,
    is_prime,
    normalize_projective,
    valuation,
    vector_valuation,
)
from .parser import parse_form, parse_point, parse_polynomial, parse_univariate
from .polys import HomogeneousForm, IntPolynomial, poly_gcd, squarefree_decomposition
from .resultants import bareiss_determinant, macaulay_resultant, resultant, sylvester_resultant
from .roots import MahlerMeasure, complex_roots, mahler_measure, roots_with_radii


def content(f) -> int:
    """gcd of the coefficients of a nonzero IntPolynomial or HomogeneousForm."""
    return f.content()


def primitive_part(f):
    return f.primitive_part()


__all__ = [
    "INF",
    "Place",
    "ValuationTop",
    "HomogeneousForm",
    "IntPolynomial",
    "MahlerMeasure",
    "bareiss_determinant",
    "complex_roots",
    "content",
    "factor_integer",
    "int_content",
    "is_prime",
    "macaulay_resultant",
    "mahler_measure",
    "normalize_projective",
    "parse_form",
    "parse_point",
    "parse_polynomial",
    "parse_univariate",
    "poly_gcd",
    "primitive_part",
    "resultant",
    "roots_with_radii",
    "squarefree_decomposition",
    "sylvester_resultant",
    "valuation",
    "vector_valuation",
]
