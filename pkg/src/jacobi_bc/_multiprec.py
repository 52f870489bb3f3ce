"""Multiprecision backends for the ill-conditioned linear algebra.

Hankel and connecting matrices of rapidly growing coefficient families
span hundreds of orders of magnitude, putting their smallest eigenvalues
far below the float64 noise floor (~eps * ||matrix||).  EXTENDED mode
routes the eigenvalue and Cholesky work through mpmath at a fixed
working precision instead.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from mpmath import mp, mpf, workdps

from .core import PrecisionMode

EXTENDED_DPS = 50


def mp_context():
    """Working-precision context for object-dtype mpf arithmetic.

    mpf values carry their creation precision, but arithmetic runs at the
    ambient precision, so every site that combines mpf values must wrap
    itself in this context (harmless around exact Fraction work).
    """
    return workdps(EXTENDED_DPS)


def as_mpf(x):
    """Exact conversion of int/float/Fraction to an mpf."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    if isinstance(x, (int, float)):
        return mpf(x)
    if isinstance(x, mpf):
        return x
    return mpf(float(x))


def to_mp_matrix(matrix) -> "mp.matrix":
    arr = np.asarray(matrix)
    n, m = arr.shape
    out = mp.matrix(n, m)
    for i in range(n):
        for j in range(m):
            out[i, j] = as_mpf(arr[i, j])
    return out


def sym_eigenvalues(matrix, precision: PrecisionMode) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, ascending, as float64.

    DOUBLE uses LAPACK; EXTENDED (and RATIONAL, whose eigenvalue work
    falls back to floating point) uses mpmath at EXTENDED_DPS digits so
    that tiny eigenvalues of huge matrices keep their leading digits.
    """
    if precision is PrecisionMode.DOUBLE:
        return np.linalg.eigvalsh(np.asarray(matrix, dtype=float))
    with workdps(EXTENDED_DPS):
        ev = mp.eigsy(to_mp_matrix(matrix), eigvals_only=True)
        vals = sorted(float(v) for v in ev)
    return np.array(vals)


def mp_cholesky_lower(matrix) -> np.ndarray:
    """Lower-triangular L with matrix = L L^T, entries mpf.

    Raises ValueError when the matrix is not positive definite (mpmath
    signals this during the factorization).
    """
    with workdps(EXTENDED_DPS):
        lower = mp.cholesky(to_mp_matrix(matrix))
        n = lower.rows
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = lower[i, j]
    return out


def mp_pd_solve(matrix, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve a real positive-definite system with a complex right side.

    Real and imaginary parts are solved separately through the mpmath
    Cholesky path at EXTENDED_DPS digits; returns (x as an object array
    of mpc values, relative residual).  The multiprecision entries are
    kept because downstream identities (reproducing property, special
    states) cancel catastrophically when the solution is rounded to
    float64.  Raises ValueError when not positive definite.
    """
    rhs = np.asarray(rhs, dtype=complex)
    n = rhs.size
    with workdps(EXTENDED_DPS):
        A = to_mp_matrix(matrix)
        parts = []
        for component in (rhs.real, rhs.imag):
            b = mp.matrix([as_mpf(v) for v in component])
            parts.append(mp.cholesky_solve(A, b))
        x_re, x_im = parts
        resid = mpf(0)
        scale = mpf(0)
        for i in range(n):
            row_re = sum(A[i, j] * x_re[j] for j in range(n))
            row_im = sum(A[i, j] * x_im[j] for j in range(n))
            resid += (row_re - as_mpf(rhs.real[i])) ** 2 \
                + (row_im - as_mpf(rhs.imag[i])) ** 2
            scale += as_mpf(rhs.real[i]) ** 2 + as_mpf(rhs.imag[i]) ** 2
        residual = float(mp.sqrt(resid) / max(mp.sqrt(scale), mpf("1e-300")))
        x = np.array([mp.mpc(x_re[i], x_im[i]) for i in range(n)],
                     dtype=object)
    return x, residual
