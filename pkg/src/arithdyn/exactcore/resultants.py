"""Exact determinants and resultants (Sylvester for binary forms, Macaulay in general)."""
from __future__ import annotations

from fractions import Fraction

from ..errors import CapabilityError, IndeterminateError, InputError
from .polys import HomogeneousForm, all_exponents

MACAULAY_MAX_SIZE = 400


def bareiss_determinant(matrix) -> int:
    """Fraction-free Gaussian elimination; exact for integer matrices."""
    m = [list(map(int, row)) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    if any(len(row) != n for row in m):
        raise InputError("determinant of a non-square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            a = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - a * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def sylvester_matrix(f: HomogeneousForm, g: HomogeneousForm):
    a, b = f.degree, g.degree
    fc = list(reversed(f.binary_coeffs()))  # x^a coefficient first
    gc = list(reversed(g.binary_coeffs()))
    size = a + b
    rows = []
    for i in range(b):
        rows.append([0] * i + fc + [0] * (size - a - 1 - i))
    for i in range(a):
        rows.append([0] * i + gc + [0] * (size - b - 1 - i))
    return rows


def sylvester_resultant(f: HomogeneousForm, g: HomogeneousForm) -> int:
    """Homogeneous resultant of two binary forms.

    >>> from arithdyn.exactcore.polys import HomogeneousForm as H
    >>> sylvester_resultant(H.binary([0, 0, 1]), H.binary([1, 0, 0]))
    1
    """
    if f.num_vars != 2 or g.num_vars != 2:
        raise InputError("Sylvester resultant needs binary forms")
    if f.degree + g.degree == 0:
        return 1
    return bareiss_determinant(sylvester_matrix(f, g))


def _macaulay_layout(degrees):
    nv = len(degrees)
    D = sum(d - 1 for d in degrees) + 1
    monos = all_exponents(nv, D)
    index = {m: k for k, m in enumerate(monos)}
    owner = []
    for m in monos:
        i = next(i for i in range(nv) if m[i] >= degrees[i])
        owner.append(i)
    reduced = [sum(1 for i in range(nv) if m[i] >= degrees[i]) == 1 for m in monos]
    return monos, index, owner, reduced


def _macaulay_rows(forms, monos, index, owner):
    degrees = [f.degree for f in forms]
    rows = []
    for m, i in zip(monos, owner):
        shift = list(m)
        shift[i] -= degrees[i]
        row = [0] * len(monos)
        for e, c in forms[i].terms.items():
            row[index[tuple(a + b for a, b in zip(e, shift))]] = c
        rows.append(row)
    return rows


def macaulay_matrix(forms):
    monos, index, owner, _ = _macaulay_layout([f.degree for f in forms])
    return _macaulay_rows(forms, monos, index, owner)


def _macaulay_quotient(forms, layout):
    monos, index, owner, reduced = layout
    rows = _macaulay_rows(forms, monos, index, owner)
    keep = [k for k, r in enumerate(reduced) if not r]
    minor = [[rows[i][j] for j in keep] for i in keep]
    return bareiss_determinant(rows), bareiss_determinant(minor)


def macaulay_resultant(forms) -> int:
    """Resultant of n+1 forms in n+1 variables via Macaulay's quotient formula.

    Normalized so that the resultant of ``(x_0^d0, ..., x_n^dn)`` is 1. When
    the extraneous minor is singular the forms are perturbed to
    ``f_i + t*x_i^d_i``; the quotient is then an integer polynomial in ``t``
    which is recovered by exact interpolation and evaluated at ``t = 0``.
    """
    forms = list(forms)
    nv = len(forms)
    if nv < 2 or any(f.num_vars != nv for f in forms):
        raise InputError("need n+1 forms in n+1 variables")
    degrees = [f.degree for f in forms]
    if min(degrees) < 1:
        raise InputError("Macaulay resultant needs forms of positive degree")
    if nv == 2:
        return sylvester_resultant(forms[0], forms[1])
    layout = _macaulay_layout(degrees)
    size = len(layout[0])
    if size > MACAULAY_MAX_SIZE:
        raise CapabilityError(
            f"Macaulay matrix of size {size} exceeds the supported maximum {MACAULAY_MAX_SIZE}"
        )
    det_m, det_minor = _macaulay_quotient(forms, layout)
    if det_minor != 0:
        q, r = divmod(det_m, det_minor)
        if r:
            raise IndeterminateError("Macaulay quotient is not an integer")
        return q
    return _perturbed_resultant(forms, layout)


def _perturbed_resultant(forms, layout):
    nv = len(forms)
    degrees = [f.degree for f in forms]
    # degree of the resultant in the coefficients of f_i is prod_{j != i} d_j
    total = 0
    for i in range(nv):
        p = 1
        for j in range(nv):
            if j != i:
                p *= degrees[j]
        total += p
    samples = []
    t = 0
    while len(samples) < total + 1:
        t += 1
        if t > 50 * (total + 1):
            raise IndeterminateError("perturbation fallback failed to find enough regular samples")
        pert = []
        for i, f in enumerate(forms):
            e = [0] * nv
            e[i] = degrees[i]
            pert.append(f + HomogeneousForm(nv, degrees[i], {tuple(e): t}))
        det_m, det_minor = _macaulay_quotient(pert, layout)
        if det_minor == 0:
            continue
        q, r = divmod(det_m, det_minor)
        if r:
            raise IndeterminateError("perturbed Macaulay quotient is not an integer")
        samples.append((t, q))
    # Lagrange evaluation at t = 0
    value = Fraction(0)
    for j, (tj, vj) in enumerate(samples):
        w = Fraction(vj)
        for k, (tk, _) in enumerate(samples):
            if k != j:
                w *= Fraction(-tk, tj - tk)
        value += w
    if value.denominator != 1:
        raise IndeterminateError("interpolated resultant is not an integer")
    return int(value)


def resultant(forms) -> int:
    """Resultant of a square system: Sylvester for two forms, Macaulay beyond."""
    forms = list(forms)
    if len(forms) == 2:
        return sylvester_resultant(*forms)
    return macaulay_resultant(forms)
