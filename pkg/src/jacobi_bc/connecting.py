"""Connecting operators by four independent constructions.

The connecting operator is the Gram matrix of the control-to-state map:
(C f, g) = (state of f, state of g) at the fixed horizon.  Two fillings
of the same bilinear form circulate and silently confusing them is the
classic implementation bug, so the orientation is an explicit tag:

* CORNER_BOTTOM ("C^T"): entry (i, j), 1-based, is
  sum_{k=0..T-max(i,j)} r_{|i-j|+2k}; the bottom-right entry is r_0.
* CORNER_TOP ("C_T" = J C^T J): entry (i, j) is
  sum_{k=0..min(i,j)-1} r_{|i-j|+2k}; the top-left entry is r_0, the
  leading principal blocks are nested, and C_T = W_T^* W_T.

Constructions: dynamic (from a response vector), spectral (quadrature of
T_{T-l} T_{T-m}), Gram (W^*W from simulation), and Hankel (conjugation
of S_T by the Chebyshev transform).  They agree on genuine data, and the
agreement is part of the test suite, not an assumption.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    InsufficientDataError,
    JacobiCoefficients,
    PrecisionMode,
    SpectralData,
    sequence_values,
)
from .dynamics import control_operator
from .moments import HankelMatrix, chebyshev_transform
from .spectral import chebyshev_all
from ._multiprec import mp_context, sym_eigenvalues

__all__ = [
    "Orientation",
    "ConnectingMatrix",
    "ResponseValidation",
    "connecting_from_response",
    "connecting_from_spectrum",
    "gram_from_control",
    "connecting_from_hankel",
    "validate_response",
]


class Orientation(Enum):
    CORNER_TOP = "corner-top"        # C_T, filled from the upper left
    CORNER_BOTTOM = "corner-bottom"  # C^T, filled from the lower right


def _mirror_lower(mat: np.ndarray) -> np.ndarray:
    """Bitwise-symmetric copy built from the lower triangle."""
    out = np.array(mat, copy=True)
    n = out.shape[0]
    for i in range(n):
        for j in range(i):
            out[j, i] = out[i, j]
    return out


@dataclass(frozen=True)
class ConnectingMatrix:
    """Symmetric connecting-operator block with its filling orientation."""

    matrix: np.ndarray
    orientation: Orientation

    def __post_init__(self):
        arr = np.array(self.matrix, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("connecting matrix must be square")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def flipped(self) -> "ConnectingMatrix":
        """Conjugation by the order-reversal J: swaps the orientation."""
        other = (Orientation.CORNER_TOP
                 if self.orientation is Orientation.CORNER_BOTTOM
                 else Orientation.CORNER_BOTTOM)
        return ConnectingMatrix(self.matrix[::-1, ::-1], other)

    def aligned(self, orientation: Orientation) -> "ConnectingMatrix":
        return self if self.orientation is orientation else self.flipped()

    def require(self, orientation: Orientation) -> np.ndarray:
        """Matrix under the stated orientation; refuses to guess."""
        if self.orientation is not orientation:
            raise ValueError(
                f"expected a {orientation.value} connecting matrix, got "
                f"{self.orientation.value}; align explicitly with .flipped()")
        return self.matrix

    def as_float(self) -> np.ndarray:
        return self.matrix.astype(float)

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.as_float())
            return True
        except np.linalg.LinAlgError:
            return False

    def min_eigenvalue(self, precision: PrecisionMode = PrecisionMode.DOUBLE) -> float:
        return float(sym_eigenvalues(self.matrix, precision)[0])


def connecting_from_response(r, size: int) -> ConnectingMatrix:
    """C^T from the response formula (CORNER_BOTTOM).

    Entry (i, j), 1-based, is sum_{k=0..T-max(i,j)} r_{|i-j|+2k}; needs
    r_0..r_{2T-2}.  Exact input entries stay exact.
    """
    rv = sequence_values(r)
    if size < 1:
        raise ValueError("size must be >= 1")
    if len(rv) < 2 * size - 1:
        raise InsufficientDataError(
            f"insufficient response data: need {2 * size - 1}, got {len(rv)}")
    dtype = object if rv.dtype == object else float
    mat = np.zeros((size, size), dtype=dtype)
    with mp_context():
        for d in range(size):
            # anti-symmetric offset d = j - i; cumulative sums along r_{d::2}
            strided = np.cumsum(rv[d::2])
            for i in range(1, size - d + 1):   # 1-based row, column j = i + d
                mat[i - 1, i - 1 + d] = strided[size - i - d]
                mat[i - 1 + d, i - 1] = mat[i - 1, i - 1 + d]
    return ConnectingMatrix(mat, Orientation.CORNER_BOTTOM)


def connecting_from_spectrum(data: SpectralData, size: int) -> ConnectingMatrix:
    """C^T by quadrature: entry (l+1, m+1) = int T_{T-l} T_{T-m} d(rho).

    Requires size <= number of nodes: within that horizon the finite
    system is indistinguishable from the semi-infinite one, so the
    quadrature reproduces the dynamic construction.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    if size > data.size:
        raise ValueError(
            f"spectral construction needs size <= {data.size} nodes, got {size}")
    cheb = chebyshev_all(size, data.lambdas)          # rows T_1..T_size
    scaled = cheb[::-1] * np.sqrt(data.weights)[None, :]  # rows T_size..T_1
    mat = _mirror_lower(scaled @ scaled.T)
    return ConnectingMatrix(mat, Orientation.CORNER_BOTTOM)


def gram_from_control(coeffs: JacobiCoefficients, size: int,
                      precision: PrecisionMode = PrecisionMode.DOUBLE) -> ConnectingMatrix:
    """C_T = W_T^* W_T with W_T simulated from the coefficients (CORNER_TOP)."""
    w = control_operator(coeffs, size, precision).matrix
    if w.dtype == object:
        with mp_context():
            gram = np.array([[sum(w[k, i] * w[k, j] for k in range(size))
                              for j in range(size)] for i in range(size)],
                            dtype=object)
    else:
        gram = _mirror_lower(w.T @ w)
    return ConnectingMatrix(gram, Orientation.CORNER_TOP)


def connecting_from_hankel(hankel, size: int | None = None) -> ConnectingMatrix:
    """C_T by conjugating the Hankel block with the Chebyshev transform
    (CORNER_TOP); exact when the Hankel entries are exact."""
    smat = hankel.matrix if isinstance(hankel, HankelMatrix) else np.asarray(hankel)
    if size is None:
        size = smat.shape[0]
    if smat.shape[0] < size:
        raise ValueError("Hankel block smaller than the requested size")
    smat = smat[:size, :size]
    lam = chebyshev_transform(size).matrix
    if smat.dtype == object:
        with mp_context():
            ls = np.empty((size, size), dtype=object)
            for i in range(size):
                for j in range(size):
                    ls[i, j] = sum(lam[i, k] * smat[k, j] for k in range(i + 1))
            out = np.empty((size, size), dtype=object)
            for i in range(size):
                for j in range(size):
                    out[i, j] = sum(ls[i, k] * lam[j, k] for k in range(j + 1))
        return ConnectingMatrix(out, Orientation.CORNER_TOP)
    lam_f = lam.astype(float)
    mat = _mirror_lower(lam_f @ smat.astype(float) @ lam_f.T)
    return ConnectingMatrix(mat, Orientation.CORNER_TOP)


@dataclass(frozen=True)
class ResponseValidation:
    """Positive-definiteness verdict with its eigenvalue certificate."""

    accepted: bool
    min_eigenvalue: float


def validate_response(r, size: int,
                      precision: PrecisionMode = PrecisionMode.DOUBLE) -> ResponseValidation:
    """Whether r_0..r_{2N-2} is the response of some genuine system.

    True exactly when the connecting matrix C^N is positive definite;
    Cholesky is the canonical test and the smallest eigenvalue is
    returned as the certificate.
    """
    conn = connecting_from_response(r, size)
    if precision is PrecisionMode.DOUBLE:
        accepted = conn.is_positive_definite()
        certificate = conn.min_eigenvalue(precision)
    else:
        certificate = conn.min_eigenvalue(precision)
        accepted = certificate > 0
    return ResponseValidation(accepted=accepted, min_eigenvalue=certificate)
