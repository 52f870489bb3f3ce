"""Hankel matrices and the exact transform between responses and moments.

The monomial coefficients of the propagation polynomials T_1..T_size
form a unit lower-triangular integer matrix; the same matrix maps a
moment sequence to the response vector of the associated system, r =
transform @ s, and its unit diagonal makes the inverse map an exact
back-substitution.  Entries are always computed in exact integer
arithmetic (Python ints never overflow) and converted to the requested
precision at the boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    ConditioningWarning,
    InsufficientDataError,
    MomentSequence,
    PrecisionMode,
    ResponseVector,
    sequence_values,
    _to_fraction,
)
from ._multiprec import sym_eigenvalues

__all__ = [
    "HankelMatrix",
    "ChebyshevTransform",
    "HankelPositivityReport",
    "build_hankel",
    "chebyshev_transform",
    "moments_to_response",
    "response_to_moments",
    "hankel_positivity",
    "hankel_min_eigs",
]

# Double-precision eigenvalues below this multiple of eps * ||S|| are noise.
NOISE_FLOOR_FACTOR = 1e3


@dataclass(frozen=True)
class HankelMatrix:
    """Matrix with constant anti-diagonals: entry (i, j) = s_{i+j}."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("Hankel matrix must be square")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def leading_block(self, size: int) -> np.ndarray:
        return self.matrix[:size, :size]

    def to_csv(self) -> str:
        lines = [",".join(f"{float(v):.17g}" for v in row)
                 for row in self.matrix]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ChebyshevTransform:
    """Unit lower-triangular integer matrix of T_k monomial coefficients.

    Row i (0-based) holds the coefficients of T_{i+1} in the monomial
    basis; the determinant is 1, so the transform is invertible over the
    rationals.  Entries are Python ints (object dtype) and thus exact at
    every size.
    """

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def as_float(self) -> np.ndarray:
        return self.matrix.astype(float)

    def row_coefficients(self, k: int) -> list:
        """Monomial coefficients of T_k (k is 1-based), padded to size."""
        if not (1 <= k <= self.size):
            raise IndexError("row index out of range")
        return list(self.matrix[k - 1])


def build_hankel(s, size: int) -> HankelMatrix:
    """The size x size block with entries s_{i+j} (0-based indices).

    Entries keep their numeric type, so Fraction moments stay exact.
    """
    sv = sequence_values(s)
    if size < 1:
        raise ValueError("size must be >= 1")
    if len(sv) < 2 * size - 1:
        raise InsufficientDataError(
            f"insufficient moments: need {2 * size - 1}, got {len(sv)}")
    dtype = object if sv.dtype == object else None
    mat = np.empty((size, size), dtype=dtype)
    for i in range(size):
        for j in range(size):
            mat[i, j] = sv[i + j]
    return HankelMatrix(mat)


def chebyshev_transform(size: int) -> ChebyshevTransform:
    """Exact integer transform of order ``size``.

    Entry (i, j), 0-based, is zero for i < j or odd i + j, and otherwise
    C((i+j)/2, j) * (-1)^((i+j)/2 + j); the 0-based convention is pinned
    by matching rows against the T_k recurrence.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    mat = np.zeros((size, size), dtype=object)
    for i in range(size):
        for j in range(i + 1):
            if (i + j) % 2:
                continue
            half = (i + j) // 2
            mat[i, j] = math.comb(half, j) * (-1) ** (half + j)
    return ChebyshevTransform(mat)


def _lift(values, precision: PrecisionMode):
    if precision is PrecisionMode.RATIONAL:
        return [_to_fraction(v) for v in values]
    from ._multiprec import as_mpf
    return [as_mpf(v) for v in values]


def moments_to_response(s, precision: PrecisionMode = PrecisionMode.DOUBLE) -> ResponseVector:
    """r = transform @ s; exact in rational mode."""
    sv = sequence_values(s)
    size = len(sv)
    lam = chebyshev_transform(size).matrix
    if precision is not PrecisionMode.DOUBLE:
        from ._multiprec import mp_context
        with mp_context():
            sx = _lift(sv, precision)
            r = [sum(lam[i, j] * sx[j] for j in range(i + 1))
                 for i in range(size)]
        return ResponseVector(np.array(r, dtype=object))
    r = lam.astype(float) @ sv.astype(float)
    return ResponseVector(r)


def response_to_moments(r, precision: PrecisionMode = PrecisionMode.DOUBLE) -> MomentSequence:
    """s = transform^{-1} r by back-substitution on the unit diagonal.

    Round-trips with moments_to_response exactly in rational mode.
    """
    rv = sequence_values(r)
    size = len(rv)
    lam = chebyshev_transform(size).matrix
    if precision is not PrecisionMode.DOUBLE:
        from ._multiprec import mp_context
        with mp_context():
            rx = _lift(rv, precision)
            s: list = []
            for i in range(size):
                s.append(rx[i] - sum(lam[i, j] * s[j] for j in range(i)))
        return MomentSequence(np.array(s, dtype=object))
    lam_f = lam.astype(float)
    rf = rv.astype(float)
    s_f = np.empty(size)
    for i in range(size):
        s_f[i] = rf[i] - lam_f[i, :i] @ s_f[:i]
    return MomentSequence(s_f)


def hankel_min_eigs(s, n_max: int,
                    precision: PrecisionMode = PrecisionMode.DOUBLE) -> np.ndarray:
    """Smallest eigenvalue of S_N for N = 1..n_max.

    In double precision a ConditioningWarning is emitted once the value
    drops below NOISE_FLOOR_FACTOR * eps * ||S_N||; extended precision is
    recommended past that point (Hankel blocks of genuine moment
    sequences are exponentially ill-conditioned).
    """
    sv = sequence_values(s)
    if len(sv) < 2 * n_max - 1:
        raise InsufficientDataError(
            f"insufficient moments: need {2 * n_max - 1}, got {len(sv)}")
    hank = build_hankel(sv, n_max)
    out = np.empty(n_max)
    warned = False
    eps = np.finfo(float).eps
    for n in range(1, n_max + 1):
        block = hank.leading_block(n)
        eigs = sym_eigenvalues(block, precision)
        out[n - 1] = eigs[0]
        if precision is PrecisionMode.DOUBLE and not warned:
            scale = abs(eigs[-1]) if n > 1 else abs(float(block[0, 0]))
            if abs(eigs[0]) < NOISE_FLOOR_FACTOR * eps * max(scale, 1.0):
                warnings.warn(
                    f"smallest Hankel eigenvalue at N={n} is below the "
                    f"double-precision noise floor; use extended precision",
                    ConditioningWarning, stacklevel=2)
                warned = True
    return out


@dataclass(frozen=True)
class HankelPositivityReport:
    """Solvability verdict from the leading Hankel blocks."""

    min_eigenvalues: np.ndarray
    solvable: bool
    first_failure: int | None

    def __post_init__(self):
        arr = np.array(self.min_eigenvalues, dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "min_eigenvalues", arr)


def hankel_positivity(s, n_max: int,
                      precision: PrecisionMode = PrecisionMode.DOUBLE) -> HankelPositivityReport:
    """Minimum eigenvalues of S_1..S_{n_max} and the positivity verdict.

    A moment problem is solvable by a positive measure exactly when every
    leading block is positive definite; the report gives the first N
    where that fails, if any.
    """
    eigs = hankel_min_eigs(s, n_max, precision)
    bad = np.flatnonzero(eigs <= 0)
    first = int(bad[0]) + 1 if bad.size else None
    return HankelPositivityReport(min_eigenvalues=eigs,
                                  solvable=first is None,
                                  first_failure=first)
