"""Krein solvers, reproducing kernels, and the Hermite-Biehler function.

The space of states reachable at a fixed horizon T, pushed through the
Fourier transform, is the polynomials of degree < T with the scalar
product [F, G] = (C_T f, g) on the T_k-coefficients.  Solving

    C_T j = conj(T_1(z), ..., T_T(z))

produces the coefficient vector of the reproducing kernel at z: the
kernel evaluates as sum_k T_k(lam) j_k, and independently as the
polynomial sum over the first-kind family, sum_n conj(p_n(z)) p_n(lam).
Both backends are implemented and their agreement is a test, not an
assumption.  In the limit-circle regime the polynomial sum converges as
T grows, giving the infinite kernel; the Hermite-Biehler function is
assembled from the kernel at z = i.

The closed-form kernel built from E by the standard de Branges formula
uses a 1/pi-weighted scalar product whose normalization differs from
the coefficient-space product here; the constant between the two kernel
routes is measured (kernel_backend_ratio) and reported, never silently
absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    ConditioningError,
    JacobiCoefficients,
    NotAMomentSequenceError,
    NotAResponseVectorError,
    NotLimitCircleError,
    PrecisionMode,
)
from .connecting import ConnectingMatrix, Orientation, gram_from_control
from .moments import HankelMatrix
from .spectral import chebyshev_all, eval_p_all

__all__ = [
    "KreinSolution",
    "InfiniteKernelValue",
    "HermiteBiehlerFunction",
    "krein_solve",
    "krein_solve_hankel",
    "kernel_finite",
    "kernel_infinite",
    "scalar_product",
    "hermite_biehler",
    "kernel_from_E",
    "kernel_backend_ratio",
]

_RESIDUAL_TOL = 1e-10
_REFINE_STEPS = 5


@dataclass(frozen=True)
class KreinSolution:
    """Coefficients j with C_T j = conj(T_1(z), ..., T_T(z)).

    Double-precision solves store complex128 entries; extended solves
    keep multiprecision entries (object dtype), since the identities the
    solution feeds cancel catastrophically once rounded.  Convert with
    ``values.astype(complex)`` when float64 suffices.
    """

    values: np.ndarray
    z: complex
    horizon: int
    residual: float

    def __post_init__(self):
        raw = np.asarray(self.values)
        arr = raw.copy() if raw.dtype == object else raw.astype(complex)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def kernel_value(self, lam) -> complex:
        """Reproducing kernel J_z(lam) = sum_k T_k(lam) j_k."""
        if isinstance(lam, np.ndarray):
            return np.array([self.kernel_value(v) for v in lam])
        cheb = chebyshev_all(self.horizon, complex(lam))
        if self.values.dtype == object:
            from ._multiprec import mp_context
            with mp_context():
                total = 0
                for k in range(self.horizon):
                    total = total + self.values[k] * cheb[k]
                return complex(total)
        total = 0
        for k in range(self.horizon):
            total = total + cheb[k] * self.values[k]
        return total


def _corner_top_matrix(connecting) -> np.ndarray:
    if isinstance(connecting, ConnectingMatrix):
        return connecting.require(Orientation.CORNER_TOP)
    return np.asarray(connecting)


def _refined_pd_solve(mat: np.ndarray, rhs: np.ndarray, failure: Exception):
    """Cholesky solve with iterative refinement down to _RESIDUAL_TOL."""
    try:
        factor = scipy.linalg.cho_factor(mat, lower=False)
    except np.linalg.LinAlgError as exc:
        raise failure from exc
    x = scipy.linalg.cho_solve(factor, rhs)
    norm_rhs = float(np.linalg.norm(rhs))
    scale = max(norm_rhs, 1e-300)
    residual = float(np.linalg.norm(mat @ x - rhs)) / scale
    for _ in range(_REFINE_STEPS):
        if residual <= _RESIDUAL_TOL:
            break
        x = x + scipy.linalg.cho_solve(factor, rhs - mat @ x)
        residual = float(np.linalg.norm(mat @ x - rhs)) / scale
    if residual > _RESIDUAL_TOL:
        raise ConditioningError(
            f"linear solve stalled at relative residual {residual:.3e}; "
            f"the matrix is too ill-conditioned for double precision")
    return x, residual


def _pd_solve(mat_raw: np.ndarray, rhs: np.ndarray,
              precision: PrecisionMode, failure: Exception):
    if precision is PrecisionMode.DOUBLE:
        return _refined_pd_solve(mat_raw.astype(float), rhs, failure)
    from ._multiprec import mp_pd_solve
    try:
        return mp_pd_solve(mat_raw, rhs)
    except ValueError as exc:
        raise failure from exc


def krein_solve(connecting, z: complex,
                precision: PrecisionMode = PrecisionMode.DOUBLE) -> KreinSolution:
    """Solve C_T j = conj(T_1(z), ..., T_T(z)) for a corner-top block.

    Positive definiteness of the block is exactly the characterization of
    genuine response data, so a factorization failure raises
    NotAResponseVectorError.  The double path refines the solution until
    the relative residual is below 1e-10; badly conditioned blocks can go
    through extended precision instead.
    """
    mat = _corner_top_matrix(connecting)
    horizon = mat.shape[0]
    rhs = np.conj(np.asarray(chebyshev_all(horizon, complex(z)), dtype=complex))
    failure = NotAResponseVectorError(
        "connecting matrix is not positive definite, so the data does not "
        "come from a genuine response vector")
    x, residual = _pd_solve(mat, rhs, precision, failure)
    return KreinSolution(values=x, z=complex(z), horizon=horizon,
                         residual=residual)


def krein_solve_hankel(hankel, z: complex,
                       precision: PrecisionMode = PrecisionMode.DOUBLE) -> np.ndarray:
    """Solve S_T f = conj(1, z, ..., z^{T-1}).

    The solution is the monomial-coefficient form of the reproducing
    kernel and relates to the connecting-side solution by f =
    transform^T j (tested, not assumed).
    """
    smat = hankel.matrix if isinstance(hankel, HankelMatrix) else np.asarray(hankel)
    horizon = smat.shape[0]
    rhs = np.conj(np.asarray(complex(z) ** np.arange(horizon), dtype=complex))
    failure = NotAMomentSequenceError(
        "Hankel matrix is not positive definite, so the data are not the "
        "moments of a positive measure")
    x, _ = _pd_solve(smat, rhs, precision, failure)
    return x


def kernel_finite(source, z: complex, lam, horizon: int | None = None,
                  method: str = "direct",
                  precision: PrecisionMode = PrecisionMode.DOUBLE) -> complex:
    """Reproducing kernel J_z(lam) of the horizon-T polynomial space.

    ``source`` is either coefficients (method "direct" sums
    conj(p_n(z)) p_n(lam); method "krein" builds the Gram block and goes
    through the Krein equation) or a corner-top ConnectingMatrix (always
    the Krein route).  The two backends agree on genuine data.
    """
    if isinstance(source, ConnectingMatrix) or not isinstance(source, JacobiCoefficients):
        return krein_solve(source, z, precision).kernel_value(lam)
    if horizon is None:
        raise ValueError("horizon is required with coefficient input")
    if method == "direct":
        p_z = eval_p_all(source, horizon, complex(z))
        p_l = eval_p_all(source, horizon, lam)
        total = 0
        for n in range(horizon):
            total = total + np.conj(p_z[n]) * p_l[n]
        return total
    if method == "krein":
        conn = gram_from_control(source, horizon, precision)
        return krein_solve(conn, z, precision).kernel_value(lam)
    raise ValueError(f"unknown kernel backend {method!r}")


@dataclass(frozen=True)
class InfiniteKernelValue:
    """Converged value of sum_n conj(p_n(z)) p_n(lam) with its truncation."""

    value: complex
    order: int
    tail: float


def kernel_infinite(coeffs: JacobiCoefficients, z: complex, lam: complex,
                    tol: float = 1e-12, n_cap: int = 10000) -> InfiniteKernelValue:
    """Partial sums of the infinite kernel until the relative tail over a
    5-term window drops below ``tol``.

    The series converges locally uniformly exactly in the limit-circle
    regime; hitting the cap raises NotLimitCircleError.
    """
    window = 5
    z = complex(z)
    lam = complex(lam)
    pz_prev, pl_prev = 0.0, 0.0
    pz, pl = 1.0 + 0j, 1.0 + 0j
    total = np.conj(pz) * pl
    recent = [abs(np.conj(pz) * pl)]
    n = 1
    while True:
        tail = sum(recent) / max(abs(total), 1e-300)
        if tail <= tol:
            return InfiniteKernelValue(value=complex(total), order=n,
                                       tail=float(tail))
        if n >= n_cap:
            raise NotLimitCircleError(
                f"series not converging after {n_cap} terms: likely limit point")
        a_n, b_n = coeffs.a(n), coeffs.b(n)
        a_prev = coeffs.a(n - 1)
        pz_prev, pz = pz, ((z - b_n) * pz - a_prev * pz_prev) / a_n
        pl_prev, pl = pl, ((lam - b_n) * pl - a_prev * pl_prev) / a_n
        n += 1
        term = np.conj(pz) * pl
        total += term
        recent.append(abs(term))
        if len(recent) > window:
            recent.pop(0)


def scalar_product(f, g, connecting) -> complex:
    """[F, G] = (C_T f, g) for F = sum T_k f_k, G = sum T_k g_k.

    Conjugate-linear in f, linear in g; equals the integral of conj(F) G
    against the spectral measure of the size-T block.  Object-dtype
    blocks (extended/rational constructions) are combined at working
    precision.
    """
    mat = _corner_top_matrix(connecting)
    fv = np.asarray(f)
    gv = np.asarray(g)
    if fv.dtype != object:
        fv = fv.astype(complex)
    if gv.dtype != object:
        gv = gv.astype(complex)
    if fv.shape != gv.shape or fv.ndim != 1 or fv.size != mat.shape[0]:
        raise ValueError("coefficient vectors must match the block size")
    if object in (mat.dtype, fv.dtype, gv.dtype):
        from ._multiprec import mp_context
        n = fv.size
        with mp_context():
            total = 0
            for i in range(n):
                row = sum(mat[i, k] * fv[k] for k in range(n))
                total = total + row.conjugate() * gv[i]
            return complex(total)
    return complex(np.vdot(mat @ fv, gv))


@dataclass(frozen=True)
class HermiteBiehlerFunction:
    """E_T(z) = sqrt(pi) (1 - iz) J_i(z) / sqrt(J_i(i)).

    J_i is the finite kernel at z = i and J_i(i) = sum_n |p_n(i)|^2 > 0
    is its squared norm by the reproducing identity (exact and cheap, no
    quadrature).  Entire by construction; |E(z)| > |E(conj z)| on the
    open upper half-plane, which the tests sample.
    """

    coeffs: JacobiCoefficients
    horizon: int
    kernel_coeffs: np.ndarray
    norm_sq: float

    def __post_init__(self):
        arr = np.array(self.kernel_coeffs, dtype=complex, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "kernel_coeffs", arr)

    def kernel_at_i(self, z):
        """J_i(z) = sum_n conj(p_n(i)) p_n(z); z scalar or ndarray."""
        p_z = eval_p_all(self.coeffs, self.horizon, z)
        total = 0
        for n in range(self.horizon):
            total = total + self.kernel_coeffs[n] * p_z[n]
        return total

    def __call__(self, z):
        val = (np.sqrt(np.pi) * (1 - 1j * np.asarray(z)) * self.kernel_at_i(z)
               / np.sqrt(self.norm_sq))
        return complex(val) if np.ndim(z) == 0 else val


def hermite_biehler(coeffs: JacobiCoefficients, horizon: int) -> HermiteBiehlerFunction:
    """Hermite-Biehler function of the horizon-T reachable space."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    p_i = eval_p_all(coeffs, horizon, 1j)
    kernel_coeffs = np.conj(np.asarray(p_i, dtype=complex))
    norm_sq = float(np.sum(np.abs(kernel_coeffs) ** 2))
    return HermiteBiehlerFunction(coeffs=coeffs, horizon=horizon,
                                  kernel_coeffs=kernel_coeffs, norm_sq=norm_sq)


def kernel_from_E(E, z: complex, xi: complex, *, step: float = 1e-5,
                  singular_tol: float = 1e-8) -> complex:
    """Kernel from the Hermite-Biehler function,

        (conj(E(z)) E(xi) - E(conj z) conj(E(conj xi))) / (2i (conj z - xi)).

    Diagnostic cross-check against kernel_finite; their ratio is a
    normalization constant that is measured, not asserted.  The
    singularity at xi = conj(z) is removable and handled by a symmetric
    difference quotient of the numerator.
    """
    z = complex(z)
    xi = complex(xi)

    def numerator(x):
        return (np.conj(E(z)) * E(x)
                - E(np.conj(z)) * np.conj(E(np.conj(x))))

    denom = np.conj(z) - xi
    if abs(denom) < singular_tol:
        deriv = (numerator(xi + step) - numerator(xi - step)) / (2 * step)
        return complex(0.5j * deriv)
    return complex(numerator(xi) / (2j * denom))


def kernel_backend_ratio(coeffs: JacobiCoefficients, horizon: int,
                         points) -> np.ndarray:
    """Measured ratios kernel_from_E / kernel_finite at (z, xi) samples.

    Reports the empirical normalization constant between the closed-form
    route and the polynomial-sum route.
    """
    E = hermite_biehler(coeffs, horizon)
    ratios = []
    for z, xi in points:
        direct = kernel_finite(coeffs, z, xi, horizon)
        ratios.append(kernel_from_E(E, z, xi) / direct)
    return np.asarray(ratios)
