"""Recovery of Jacobi coefficients from response vectors or moments.

The corner-top connecting matrix factors as C_T = W_T^* W_T, and the
Cholesky factor with positive diagonal is unique, so the factor IS the
control operator: its diagonal ratios return the off-diagonal entries
a_k and its first superdiagonal carries the partial sums b_1 + ... + b_k
(scaled by the diagonal), whose differences return the diagonal entries.
b_T itself never influences the states within the horizon and is not
recoverable.  The same ratio extraction applied to the transposed lower
Cholesky factor of the Hankel block S_T gives the classical
orthogonal-polynomial route, kept as an independent path.

The superdiagonal identity behind the b-extraction ships as a tested
lemma (oracle: forward simulation), not an assumption; the test suite
also checks that the Cholesky factor reproduces the simulated control
operator entry by entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .core import (
    ConditioningError,
    InsufficientDataError,
    JacobiBCError,
    JacobiCoefficients,
    NotAMomentSequenceError,
    NotAResponseVectorError,
    PrecisionMode,
    sequence_values,
    _to_fraction,
)
from .dynamics import response_vector
from .moments import build_hankel, moments_to_response
from .connecting import Orientation, connecting_from_response
from ._multiprec import mp_cholesky_lower

__all__ = ["RecoveryResult", "recover_from_response", "recover_from_moments"]

PIVOT_RATIO_FLOOR = 1e-10


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered a_1..a_{T-1}, b_1..b_{T-1} with a round-trip residual.

    ``coefficients`` holds a_0 = 1 plus the recovered entries; the
    residual is the max deviation between the input response and the
    response re-simulated from the recovered coefficients over the
    window where the two systems must agree.
    """

    coefficients: JacobiCoefficients
    residual: float
    path: str
    precision: PrecisionMode

    @property
    def a(self) -> np.ndarray:
        """Recovered (a_1, ..., a_{T-1})."""
        return np.array(self.coefficients.a_head(self.coefficients.size + 1)[1:],
                        dtype=float)

    @property
    def b(self) -> np.ndarray:
        """Recovered (b_1, ..., b_{T-1})."""
        return np.array(self.coefficients.b_head(self.coefficients.size),
                        dtype=float)


def _guard_pivots(diag, precision: PrecisionMode):
    dv = [float(x) for x in diag]
    top = max(dv)
    if precision is PrecisionMode.DOUBLE and top > 0:
        worst = min(range(len(dv)), key=lambda k: dv[k])
        if dv[worst] / top < PIVOT_RATIO_FLOOR:
            raise ConditioningError(
                f"Cholesky pivot ratio {dv[worst] / top:.3e} at index {worst} "
                f"is below {PIVOT_RATIO_FLOOR:g}; use extended precision")


def _extract_from_upper(upper) -> tuple[list, list]:
    """a_k and b_k from an upper Cholesky factor with positive diagonal.

    a_k is the diagonal ratio; the superdiagonal-over-diagonal ratios are
    the partial sums b_1 + ... + b_k, so b comes from their differences.
    """
    from ._multiprec import mp_context
    n = upper.shape[0]
    a_rec, b_rec, prev_sum = [], [], 0.0
    with mp_context():
        for k in range(1, n):
            a_rec.append(float(upper[k, k] / upper[k - 1, k - 1]))
            cur = float(upper[k - 1, k] / upper[k - 1, k - 1])
            b_rec.append(cur - prev_sum)
            prev_sum = cur
    return a_rec, b_rec


def _ldl_exact(mat, failure: type[JacobiBCError], label: str):
    """Unit lower L and positive pivots d with mat = L diag(d) L^T, exact."""
    n = mat.shape[0]
    c = [[_to_fraction(mat[i, j]) for j in range(n)] for i in range(n)]
    low = [[Fraction(0)] * n for _ in range(n)]
    piv: list[Fraction] = []
    for j in range(n):
        d_j = c[j][j] - sum(low[j][k] * low[j][k] * piv[k] for k in range(j))
        if d_j <= 0:
            raise failure(f"{label}: pivot {j} is not positive")
        piv.append(d_j)
        low[j][j] = Fraction(1)
        for i in range(j + 1, n):
            acc = c[i][j] - sum(low[i][k] * low[j][k] * piv[k] for k in range(j))
            low[i][j] = acc / d_j
    return low, piv


def _extract_from_ldl(low, piv) -> tuple[list, list]:
    """Same extraction as _extract_from_upper, but from the exact LDL^T.

    The subdiagonal of the unit factor equals the superdiagonal ratios of
    the implicit upper factor, so the b differences stay exact; only the
    a square roots leave rational arithmetic.
    """
    n = len(piv)
    a_rec, b_rec, prev_sum = [], [], Fraction(0)
    for k in range(1, n):
        a_rec.append(math.sqrt(float(piv[k] / piv[k - 1])))
        cur = low[k][k - 1]
        b_rec.append(float(cur - prev_sum))
        prev_sum = cur
    return a_rec, b_rec


def _round_trip_residual(a_rec, b_rec, reference, horizon: int) -> float:
    """Max response deviation over the window 0..2(T-1)-1 where the
    recovered size-(T-1) system must match the input."""
    if horizon == 1:
        return 0.0
    rec = JacobiCoefficients.from_arrays([1.0] + list(a_rec), list(b_rec))
    window = 2 * horizon - 2
    simulated = response_vector(rec, window).as_array()
    ref = np.asarray([float(x) for x in reference[:window]])
    return float(np.max(np.abs(simulated - ref)))


def _result(a_rec, b_rec, reference, horizon, path, precision) -> RecoveryResult:
    coeffs = JacobiCoefficients.from_arrays([1.0] + [float(x) for x in a_rec],
                                            [float(x) for x in b_rec])
    residual = _round_trip_residual(a_rec, b_rec, reference, horizon)
    return RecoveryResult(coefficients=coeffs, residual=residual,
                          path=path, precision=precision)


def recover_from_response(r, horizon: int,
                          precision: PrecisionMode = PrecisionMode.DOUBLE) -> RecoveryResult:
    """Coefficients from r_0..r_{2T-2} via the connecting-matrix factorization.

    Builds the corner-top connecting matrix, Cholesky-factors it, and
    reads the coefficients off the factor.  A factorization failure means
    the data is not a response vector of any genuine system.
    """
    rv = sequence_values(r)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if len(rv) < 2 * horizon - 1:
        raise InsufficientDataError(
            f"insufficient response data: need {2 * horizon - 1}, got {len(rv)}")
    conn = connecting_from_response(rv, horizon).aligned(Orientation.CORNER_TOP)

    if precision is PrecisionMode.RATIONAL:
        low, piv = _ldl_exact(conn.matrix, NotAResponseVectorError,
                              "not a response vector")
        a_rec, b_rec = _extract_from_ldl(low, piv)
    elif precision is PrecisionMode.EXTENDED:
        try:
            upper = mp_cholesky_lower(conn.matrix).T
        except ValueError as exc:
            raise NotAResponseVectorError(
                f"not a response vector: {exc}") from exc
        a_rec, b_rec = _extract_from_upper(upper)
    else:
        try:
            upper = scipy.linalg.cholesky(conn.as_float(), lower=False)
        except np.linalg.LinAlgError as exc:
            raise NotAResponseVectorError(
                "not a response vector: the connecting matrix is not "
                "positive definite at double precision (genuine but "
                "ill-conditioned data needs extended precision)") from exc
        _guard_pivots(np.diagonal(upper), precision)
        a_rec, b_rec = _extract_from_upper(upper)
    return _result(a_rec, b_rec, rv, horizon, "BoundaryControl", precision)


def recover_from_moments(s, horizon: int,
                         precision: PrecisionMode = PrecisionMode.DOUBLE) -> RecoveryResult:
    """Coefficients from s_0..s_{2T-2} via the Hankel factorization.

    Factors S_T = L L^T and reads the three-term recurrence off L (the
    rows of L^{-1} are the orthonormal polynomial coefficients); the
    independent route through the response conversion is computed as
    well, and the two must agree within 1e-8.
    """
    sv = sequence_values(s)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if len(sv) < 2 * horizon - 1:
        raise InsufficientDataError(
            f"insufficient moments: need {2 * horizon - 1}, got {len(sv)}")
    hank = build_hankel(sv, horizon)

    if precision is PrecisionMode.RATIONAL:
        low, piv = _ldl_exact(hank.matrix, NotAMomentSequenceError,
                              "not a moment sequence of a positive measure")
        a_rec, b_rec = _extract_from_ldl(low, piv)
    elif precision is PrecisionMode.EXTENDED:
        try:
            upper = mp_cholesky_lower(hank.matrix).T
        except ValueError as exc:
            raise NotAMomentSequenceError(
                f"not a moment sequence of a positive measure: {exc}") from exc
        a_rec, b_rec = _extract_from_upper(upper)
    else:
        try:
            lower = scipy.linalg.cholesky(hank.matrix.astype(float), lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotAMomentSequenceError(
                "not a moment sequence of a positive measure: the Hankel "
                "matrix is not positive definite") from exc
        _guard_pivots(np.diagonal(lower), precision)
        a_rec, b_rec = _extract_from_upper(lower.T)

    converted = moments_to_response(sv[:2 * horizon - 1], precision)
    cross = recover_from_response(converted, horizon, precision)
    gap = max(
        float(np.max(np.abs(np.asarray(a_rec, dtype=float) - cross.a)))
        if a_rec else 0.0,
        float(np.max(np.abs(np.asarray(b_rec, dtype=float) - cross.b)))
        if b_rec else 0.0,
    )
    if gap > 1e-8:
        raise JacobiBCError(
            f"Hankel and boundary-control recovery paths disagree by {gap:.3e}; "
            f"the data is too ill-conditioned for {precision.value} precision")

    result = _result(a_rec, b_rec, converted.as_array(), horizon,
                     "Hankel", precision)
    return result
