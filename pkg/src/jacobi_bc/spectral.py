"""Orthogonal polynomials, spectral data of A^N, and discrete quadrature.

Two polynomial families solve the three-term recurrence

    a_n phi_{n+1} + a_{n-1} phi_{n-1} + b_n phi_n = z phi_n,  n >= 1:

the first kind p with p_1 = 1, p_2 = (z - b_1)/a_1 (degree n - 1) and
the second kind q with q_1 = 0, q_2 = 1/a_1 (degree n - 2).  The
propagation polynomials T_t obey T_{t+1} = z T_t - T_{t-1} with T_0 = 0,
T_1 = 1; they are the second-kind Chebyshev polynomials rescaled to the
interval (-2, 2), i.e. T_t(z) = U_{t-1}(z/2).

Evaluation is always by forward recurrence; monomial coefficient lists
of p_n and q_n are ill-conditioned and never formed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .core import (
    BoundaryControl,
    JacobiBCError,
    JacobiCoefficients,
    SpectralData,
)
from .dynamics import WaveField

__all__ = [
    "PolynomialKind",
    "PolynomialEvaluator",
    "eval_p",
    "eval_q",
    "eval_chebyshev",
    "eval_p_all",
    "eval_q_all",
    "chebyshev_all",
    "spectral_data",
    "quadrature",
    "solution_via_spectrum",
    "fourier_image",
    "extension_parameter",
    "ExtensionParameterEstimate",
]


def _one_like(z):
    return np.ones_like(z) if isinstance(z, np.ndarray) else 0 * z + 1


def _zero_like(z):
    return np.zeros_like(z) if isinstance(z, np.ndarray) else 0 * z


def _poly_all(coeffs, n_max, z, kind):
    """Values (phi_1(z), ..., phi_{n_max}(z)); z scalar or ndarray."""
    if n_max < 1:
        raise ValueError("the polynomial index starts at 1")
    if kind == "p":
        first = _one_like(z)
    else:
        first = _zero_like(z)
    out = [first]
    if n_max == 1:
        return out
    a1 = coeffs.a(1)
    if kind == "p":
        second = (z - coeffs.b(1)) / a1
    else:
        second = _one_like(z) / a1
    out.append(second)
    for n in range(2, n_max):
        a_n, a_prev, b_n = coeffs.a(n), coeffs.a(n - 1), coeffs.b(n)
        out.append(((z - b_n) * out[-1] - a_prev * out[-2]) / a_n)
    return out


def eval_p_all(coeffs: JacobiCoefficients, n_max: int, z):
    """[p_1(z), ..., p_{n_max}(z)] by forward recurrence."""
    vals = _poly_all(coeffs, n_max, z, "p")
    return np.asarray(vals) if isinstance(z, np.ndarray) else vals


def eval_q_all(coeffs: JacobiCoefficients, n_max: int, z):
    """[q_1(z), ..., q_{n_max}(z)] by forward recurrence."""
    vals = _poly_all(coeffs, n_max, z, "q")
    return np.asarray(vals) if isinstance(z, np.ndarray) else vals


def eval_p(coeffs: JacobiCoefficients, n: int, z):
    """p_n(z); first-kind polynomial of degree n - 1 (n is 1-based)."""
    return _poly_all(coeffs, n, z, "p")[-1]


def eval_q(coeffs: JacobiCoefficients, n: int, z):
    """q_n(z); second-kind polynomial of degree n - 2 (n is 1-based)."""
    return _poly_all(coeffs, n, z, "q")[-1]


def eval_chebyshev(t: int, z):
    """T_t(z) with T_0 = 0, T_1 = 1, T_{t+1} = z T_t - T_{t-1}.

    Integer z keeps the value exact (no divisions are involved).
    """
    if t < 0:
        raise ValueError("the index must be >= 0")
    prev = _zero_like(z)
    if t == 0:
        return prev
    cur = _one_like(z)
    for _ in range(t - 1):
        prev, cur = cur, z * cur - prev
    return cur


def chebyshev_all(t_max: int, z):
    """[T_1(z), ..., T_{t_max}(z)]."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    out = [_one_like(z)]
    prev = _zero_like(z)
    for _ in range(t_max - 1):
        prev, out_last = out[-1], z * out[-1] - prev
        out.append(out_last)
    return np.asarray(out) if isinstance(z, np.ndarray) else out


class PolynomialKind(Enum):
    P = "p"
    Q = "q"
    CHEBYSHEV = "chebyshev"


@dataclass(frozen=True)
class PolynomialEvaluator:
    """Recurrence-backed evaluator for one polynomial family."""

    kind: PolynomialKind
    coeffs: JacobiCoefficients | None = None

    def __call__(self, n: int, z):
        if self.kind is PolynomialKind.CHEBYSHEV:
            return eval_chebyshev(n, z)
        if self.coeffs is None:
            raise ValueError("p/q evaluation needs coefficients")
        if self.kind is PolynomialKind.P:
            return eval_p(self.coeffs, n, z)
        return eval_q(self.coeffs, n, z)


def spectral_data(coeffs: JacobiCoefficients, size: int) -> SpectralData:
    """Eigenvalues of A^N with weights w_k = 1/rho_k.

    Weights come from the squared first components of the normalized
    eigenvectors, which equals 1/sum_i p_i(lambda_k)^2 and is numerically
    stabler than root-finding on p_{N+1}.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    diag = np.array([float(x) for x in coeffs.b_head(size)])
    off = np.array([float(x) for x in coeffs.a_head(size)[1:]])
    if size == 1:
        return SpectralData(lambdas=diag, weights=np.array([1.0]))
    try:
        lam, vec = scipy.linalg.eigh_tridiagonal(diag, off)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise JacobiBCError(f"tridiagonal eigensolver failed: {exc}") from exc
    return SpectralData(lambdas=lam, weights=vec[0, :] ** 2)


def quadrature(data: SpectralData, integrand) -> complex:
    """sum_k w_k f(lambda_k); exact for polynomials of degree <= 2N - 1."""
    total = 0
    for lam, w in zip(data.lambdas, data.weights):
        total = total + w * integrand(lam)
    return total


def solution_via_spectrum(coeffs: JacobiCoefficients, size: int, control,
                          horizon: int | None = None) -> WaveField:
    """Field of the size-N system assembled from its spectral data.

    v_{n,t} = sum_k w_k [sum_{j=1..t} T_j(lambda_k) f_{t-j}] p_n(lambda_k);
    a cross-representation check against the time-stepping solver.
    """
    if horizon is None:
        horizon = control.horizon if hasattr(control, "horizon") else len(control)
    if isinstance(control, BoundaryControl):
        f = np.asarray(control.padded(horizon))
    else:
        f = np.asarray(list(control) + [0] * (horizon - len(control)))
    data = spectral_data(coeffs, size)
    nodes = data.lambdas
    cheb = chebyshev_all(horizon, nodes)          # (horizon, K): rows T_1..T_horizon
    pvals = eval_p_all(coeffs, size, nodes)       # (size, K)
    conv = np.zeros((horizon + 1, nodes.size), dtype=np.result_type(f, float))
    for t in range(1, horizon + 1):
        # sum_{j=1..t} T_j(lam) f_{t-j}
        conv[t] = np.tensordot(f[t - 1::-1], cheb[:t], axes=(0, 0))
    inner = pvals @ (data.weights[None, :] * conv).T    # (size, horizon+1)
    values = np.zeros((size + 1, horizon + 2), dtype=inner.dtype)
    values[0, 1:horizon + 1] = f[:horizon]
    values[1:, 1:] = inner
    return WaveField(values=values, n_space=size, horizon=horizon)


def fourier_image(control, z):
    """Image sum_{k=1..T} T_k(z) f_{T-k} of the state driven by ``control``.

    This is the degree < T polynomial the state at time T transforms to;
    z may be a scalar or an ndarray.
    """
    f = list(getattr(control, "values", control))
    horizon = len(f)
    if horizon < 1:
        raise ValueError("control must have at least one entry")
    cheb = chebyshev_all(horizon, z)
    total = _zero_like(z)
    for k in range(1, horizon + 1):
        total = total + cheb[k - 1] * f[horizon - k]
    return total


@dataclass(frozen=True)
class ExtensionParameterEstimate:
    """Numerical limit of -q_n(0)/p_n(0) with its convergence evidence.

    ``value`` is None whenever the flag is raised: either the usable
    ratio subsequence does not stabilize, or the tails of sum p_n(0)^2
    and sum q_n(0)^2 keep growing, in which case the limit that the
    self-adjoint-extension parameter is defined by does not exist
    numerically.  ``candidate`` always reports the last usable ratio.
    """

    value: float | None
    candidate: float | None
    converged: bool
    summable: bool
    last_delta: float
    skipped: tuple
    message: str


def extension_parameter(coeffs: JacobiCoefficients, n_max: int,
                        rtol: float = 1e-10,
                        tail_tol: float = 1e-10) -> ExtensionParameterEstimate:
    """Estimate h = -lim q_n(0)/p_n(0) along indices with p_n(0) != 0.

    Indices where p_n(0) vanishes are skipped and reported.  The limit
    only exists in the limit-circle regime, where p(0) and q(0) are
    square-summable; the flag is raised when the tail sums keep growing
    (e.g. the free coefficients, where the skipped/parity structure makes
    the raw ratio trivially constant) or when the ratios oscillate.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    p = [float(v) for v in eval_p_all(coeffs, n_max, 0.0)]
    q = [float(v) for v in eval_q_all(coeffs, n_max, 0.0)]

    skipped, ratios = [], []
    for n in range(1, n_max + 1):
        pn = p[n - 1]
        if pn == 0.0 or abs(pn) < 1e-280:
            skipped.append(n)
            continue
        ratios.append((n, -q[n - 1] / pn))

    window = 5
    p_sq = np.cumsum(np.square(p))
    q_sq = np.cumsum(np.square(q))
    total = p_sq[-1] + q_sq[-1]
    if len(p) > window and total > 0:
        tail = (p_sq[-1] - p_sq[-1 - window]) + (q_sq[-1] - q_sq[-1 - window])
        summable = tail <= tail_tol * total
    else:
        summable = False

    if not ratios:
        return ExtensionParameterEstimate(
            value=None, candidate=None, converged=False, summable=summable,
            last_delta=float("inf"), skipped=tuple(skipped),
            message="no numerical limit: p_n(0) vanishes at every index")

    candidate = ratios[-1][1]
    if len(ratios) >= 2:
        last_delta = abs(ratios[-1][1] - ratios[-2][1])
        converged = last_delta <= rtol * max(1.0, abs(candidate))
    else:
        last_delta = float("inf")
        converged = False

    if converged and summable:
        return ExtensionParameterEstimate(
            value=candidate, candidate=candidate, converged=True, summable=True,
            last_delta=last_delta, skipped=tuple(skipped),
            message=f"converged with |h_N - h_prev| = {last_delta:.3e}")
    if not summable:
        message = ("no numerical limit: sum p_n(0)^2 + q_n(0)^2 does not "
                   "converge, so the extension parameter is undefined "
                   "(limit point suspected)")
    else:
        message = f"no numerical limit: ratios still move by {last_delta:.3e}"
    return ExtensionParameterEstimate(
        value=None, candidate=candidate, converged=converged, summable=summable,
        last_delta=last_delta, skipped=tuple(skipped), message=message)
