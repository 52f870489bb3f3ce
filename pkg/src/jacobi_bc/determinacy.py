"""Eigenvalue-sequence diagnostics for moment-problem determinacy.

Two sequences probe the limit point / limit circle dichotomy:

* lambda_N, the smallest eigenvalue of the Hankel block S_N, which tends
  to zero exactly in the determinate (limit point) case and is bounded
  below in the indeterminate case by the reciprocal of the unit-circle
  average of 1 / sum_k |p_k(z)|^2;
* beta_T, the smallest eigenvalue of the corner-top connecting block
  C_T, monotone non-increasing, and bounded below in the limit-circle
  case by the reciprocal of the Chebyshev-weighted integral of
  sum_k |p_k(x)|^2 over (-1, 1).

The beta criterion is one-directional only: the free coefficients are
limit point yet keep beta_T = 1, so no verdict here ever rests on
beta_T alone.  All finite-depth verdicts are heuristic; the thresholds
are artifact policy, documented and tunable, not mathematical content.

Convention note on the beta bound: the propagation polynomials T_k of
this package are orthogonal on (-2, 2) against sqrt(4 - x^2) dx / (2 pi)
and are not normalized by the (-1, 1) Chebyshev weight the bound
integrates against, so sum |f_k|^2 and the weighted norm of sum f_k T_k
differ by a bounded factor.  The bound is implemented with the (-1, 1)
weight as stated (it is a trace bound and holds with slack, which the
acceptance suite checks numerically); both conventions are recorded
here rather than silently reconciled.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    ConditioningWarning,
    InsufficientDataError,
    JacobiBCError,
    JacobiCoefficients,
    NotLimitCircleError,
    PrecisionMode,
    sequence_values,
)
from .connecting import Orientation, connecting_from_response
from .dynamics import response_vector
from .moments import NOISE_FLOOR_FACTOR, build_hankel, response_to_moments
from .spectral import eval_p_all, eval_q_all
from ._multiprec import EXTENDED_DPS, sym_eigenvalues

__all__ = [
    "Verdict",
    "DeterminacyReport",
    "CircleBoundEstimate",
    "hankel_min_eig_sequence",
    "connecting_min_eig_sequence",
    "connecting_max_eig_sequence",
    "deficiency_partial_sums",
    "circle_bound_hankel",
    "circle_bound_connecting",
    "classify",
]

_TAIL_WINDOW = 5
# Eigenvalue-sequence monotonicity is asserted up to this absolute slack
# plus the eigensolver noise floor of the active precision.
_MONOTONE_SLACK = 1e-12


class Verdict(Enum):
    LIKELY_DETERMINATE = "LikelyDeterminate"
    LIKELY_INDETERMINATE = "LikelyIndeterminate"
    INCONCLUSIVE = "Inconclusive"


def _eig_noise_floor(norm: float, precision: PrecisionMode) -> float:
    if precision is PrecisionMode.DOUBLE:
        return NOISE_FLOOR_FACTOR * np.finfo(float).eps * max(norm, 1.0)
    return 10.0 ** (5 - EXTENDED_DPS) * max(norm, 1.0)


def hankel_min_eig_sequence(s, n_max: int,
                            precision: PrecisionMode = PrecisionMode.DOUBLE) -> np.ndarray:
    """lambda_N = min eig(S_N) for N = 1..n_max.

    Double precision by default, with conditioning warnings once the
    values sink to the noise floor (see moments.hankel_min_eigs).
    """
    from .moments import hankel_min_eigs
    return hankel_min_eigs(s, n_max, precision)


def _connecting_blocks(r, t_max: int) -> np.ndarray:
    rv = sequence_values(r)
    if len(rv) < 2 * t_max - 1:
        raise InsufficientDataError(
            f"insufficient response data: need {2 * t_max - 1}, got {len(rv)}")
    # corner-top blocks are nested, so one build serves every horizon
    return connecting_from_response(rv, t_max).aligned(Orientation.CORNER_TOP).matrix


def _eig_sequence(r, t_max, precision, which: str,
                  check_monotone: bool = True) -> np.ndarray:
    top = _connecting_blocks(r, t_max)
    out = np.empty(t_max)
    norms = np.empty(t_max)
    for t in range(1, t_max + 1):
        eigs = sym_eigenvalues(top[:t, :t], precision)
        out[t - 1] = eigs[0] if which == "min" else eigs[-1]
        norms[t - 1] = max(abs(eigs[0]), abs(eigs[-1]))
    for t in range(1, t_max):
        slack = _MONOTONE_SLACK + _eig_noise_floor(norms[t], precision)
        drift = out[t] - out[t - 1] if which == "min" else out[t - 1] - out[t]
        if check_monotone and drift > slack:
            raise JacobiBCError(
                f"{'beta' if which == 'min' else 'gamma'} sequence violates "
                f"monotonicity at T={t + 1} by {drift:.3e} (slack {slack:.3e})")
    return out


def connecting_min_eig_sequence(r, t_max: int,
                                precision: PrecisionMode = PrecisionMode.DOUBLE) -> np.ndarray:
    """beta_T = min eig(C_T) for T = 1..t_max; asserts the sequence is
    non-increasing up to the eigensolver noise floor."""
    return _eig_sequence(r, t_max, precision, "min")


def connecting_max_eig_sequence(r, t_max: int,
                                precision: PrecisionMode = PrecisionMode.DOUBLE) -> np.ndarray:
    """gamma_T = max eig(C_T) for T = 1..t_max; asserts non-decrease
    (the corner-top blocks are nested, so eigenvalues interlace)."""
    return _eig_sequence(r, t_max, precision, "max")


def deficiency_partial_sums(coeffs: JacobiCoefficients, depth: int,
                            z: complex = 1j):
    """Partial sums of |p_n(z)|^2 and |q_n(z)|^2 up to ``depth``.

    Square-summability at one non-real point decides the deficiency
    dichotomy; z = i is the canonical choice.
    """
    p = eval_p_all(coeffs, depth, complex(z))
    q = eval_q_all(coeffs, depth, complex(z))
    p_sums = np.cumsum([abs(v) ** 2 for v in p])
    q_sums = np.cumsum([abs(v) ** 2 for v in q])
    return p_sums, q_sums


def _tail_converged(partial_sums: np.ndarray, tol: float) -> bool:
    if partial_sums.size <= _TAIL_WINDOW:
        return False
    total = partial_sums[-1]
    tail = total - partial_sums[-1 - _TAIL_WINDOW]
    return bool(total > 0 and tail <= tol * total)


@dataclass(frozen=True)
class CircleBoundEstimate:
    """Lower-bound value with the truncation evidence behind it."""

    value: float
    tail_estimate: float
    truncation: int

    def __float__(self):
        return self.value


def _partial_square_sums(coeffs, truncation, nodes):
    """Final sums over n <= truncation of |p_n(z)|^2 on the given nodes,
    plus the worst relative last-window contribution; raises when the
    tail is not decreasing (the series only converges everywhere in the
    limit-circle regime)."""
    pv = eval_p_all(coeffs, truncation, np.asarray(nodes))
    sq = np.abs(pv) ** 2
    sums = np.cumsum(sq, axis=0)
    if truncation <= 2 * _TAIL_WINDOW:
        return sums[-1], float("nan")
    last = sums[-1] - sums[-1 - _TAIL_WINDOW]
    prev = sums[-1 - _TAIL_WINDOW] - sums[-1 - 2 * _TAIL_WINDOW]
    rel = last / sums[-1]
    growing = (last >= prev) & (rel > 1e-12)
    if np.any(growing):
        raise NotLimitCircleError(
            "not limit circle: sum_n |p_n(z)|^2 has a non-decreasing "
            f"tail at {int(np.count_nonzero(growing))} of {len(nodes)} "
            "quadrature nodes")
    return sums[-1], float(np.max(rel))


def circle_bound_hankel(coeffs: JacobiCoefficients, truncation: int,
                        theta_nodes: int = 2048) -> CircleBoundEstimate:
    """Limit-circle lower bound for lim lambda_N.

    Averages sum_{n<=K} |p_n(e^{i theta})|^2 over the unit circle with
    the trapezoid rule (periodic integrand, spectral accuracy) and
    returns the reciprocal: the trace of S_N^{-1} in the orthonormal
    basis is the circle average of the squared polynomial mass, by
    coefficient Parseval, which caps 1 / lambda_N.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    thetas = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    nodes = np.exp(1j * thetas)
    sums, tail = _partial_square_sums(coeffs, truncation, nodes)
    return CircleBoundEstimate(value=1.0 / float(np.mean(sums)),
                               tail_estimate=tail, truncation=truncation)


def circle_bound_connecting(coeffs: JacobiCoefficients, truncation: int,
                            nodes: int = 256) -> CircleBoundEstimate:
    """Limit-circle lower bound for lim beta_T.

    Integrates sum_{n<=K} |p_n(x)|^2 against dx / sqrt(1 - x^2) over
    (-1, 1) by Gauss-Chebyshev quadrature and returns the reciprocal.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    x = np.cos((2 * np.arange(1, nodes + 1) - 1) * np.pi / (2 * nodes))
    sums, tail = _partial_square_sums(coeffs, truncation, x)
    integral = float(np.pi / nodes * np.sum(sums))
    return CircleBoundEstimate(value=1.0 / integral, tail_estimate=tail,
                               truncation=truncation)


@dataclass(frozen=True)
class DeterminacyReport:
    """All determinacy evidence for one coefficient family."""

    lambda_seq: np.ndarray
    beta_seq: np.ndarray
    gamma_seq: np.ndarray
    hankel_bound: float | None
    connecting_bound: float | None
    deficiency_p: np.ndarray
    deficiency_q: np.ndarray
    verdict: Verdict
    precision: PrecisionMode
    notes: tuple

    def csv_rows(self):
        yield ["N", "lambda_N", "beta_N", "gamma_N"]
        for i in range(len(self.lambda_seq)):
            yield [str(i + 1), f"{self.lambda_seq[i]:.17g}",
                   f"{self.beta_seq[i]:.17g}", f"{self.gamma_seq[i]:.17g}"]

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "precision": self.precision.value,
            "lambda_seq": [float(v) for v in self.lambda_seq],
            "beta_seq": [float(v) for v in self.beta_seq],
            "gamma_seq": [float(v) for v in self.gamma_seq],
            "hankel_bound": self.hankel_bound,
            "connecting_bound": self.connecting_bound,
            "deficiency_p_sums": [float(v) for v in self.deficiency_p],
            "deficiency_q_sums": [float(v) for v in self.deficiency_q],
            "notes": list(self.notes),
        }


def classify(coeffs: JacobiCoefficients, n_max: int,
             precision: PrecisionMode = PrecisionMode.DOUBLE,
             deficiency_depth: int = 60,
             eps_det: float = 1e-8,
             tail_tol: float = 1e-10) -> DeterminacyReport:
    """Assemble all determinacy evidence and a heuristic verdict.

    Policy (artifact thresholds, tunable):

    * LikelyIndeterminate when both deficiency sums converge (relative
      tail below ``tail_tol`` over a 5-term window) and the trusted part
      of the lambda sequence stays above ``eps_det``;
    * LikelyDeterminate when some trusted lambda_N falls below
      ``eps_det``, or gamma_T stabilizes to a bounded value;
    * Inconclusive otherwise, and always for n_max < 4.

    "Trusted" excludes double-precision eigenvalues below the noise
    floor of their block norm; a note recommends extended precision when
    that truncates the sequence.  beta_T never decides a verdict by
    itself: its lower bound holds in the limit-circle case but the
    converse fails (free coefficients keep beta_T = 1).
    """
    notes = []
    length = 2 * n_max - 1
    r = response_vector(coeffs, length, precision)
    s = response_to_moments(r, precision)

    hank = build_hankel(s.as_array(), n_max)
    lambda_seq = np.empty(n_max)
    lambda_trusted = np.zeros(n_max, dtype=bool)
    for n in range(1, n_max + 1):
        eigs = sym_eigenvalues(hank.leading_block(n), precision)
        lambda_seq[n - 1] = eigs[0]
        floor = _eig_noise_floor(max(abs(eigs[0]), abs(eigs[-1])), precision)
        lambda_trusted[n - 1] = abs(eigs[0]) >= floor
    if not lambda_trusted.all():
        first_bad = int(np.flatnonzero(~lambda_trusted)[0]) + 1
        notes.append(
            f"lambda_N at or below the {precision.value} noise floor from "
            f"N={first_bad}; values beyond are excluded from the verdict "
            f"(re-run with extended precision)")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        beta_seq = connecting_min_eig_sequence(r, n_max, precision)
        gamma_seq = connecting_max_eig_sequence(r, n_max, precision)

    deficiency_p, deficiency_q = deficiency_partial_sums(coeffs, deficiency_depth)
    deficiency_converged = (_tail_converged(deficiency_p, tail_tol)
                            and _tail_converged(deficiency_q, tail_tol))

    hankel_bound = connecting_bound = None
    try:
        hankel_bound = float(circle_bound_hankel(coeffs, deficiency_depth))
        connecting_bound = float(circle_bound_connecting(coeffs, deficiency_depth))
    except NotLimitCircleError as exc:
        notes.append(f"limit-circle bounds unavailable: {exc}")

    trusted_vals = lambda_seq[lambda_trusted]
    lambda_decays = bool(trusted_vals.size and np.min(trusted_vals) < eps_det)
    if gamma_seq.size >= 4:
        g_last, g_prev = gamma_seq[-1], gamma_seq[-4]
        gamma_bounded = bool(abs(g_last - g_prev) <= 1e-6 * max(1.0, abs(g_last)))
    else:
        gamma_bounded = False
    lambda_stays_up = bool(trusted_vals.size and trusted_vals[-1] > eps_det)

    determinate = lambda_decays or gamma_bounded
    indeterminate = deficiency_converged and lambda_stays_up

    if n_max < 4:
        verdict = Verdict.INCONCLUSIVE
        notes.append("insufficient horizon: n_max < 4")
    elif determinate and not indeterminate:
        verdict = Verdict.LIKELY_DETERMINATE
    elif indeterminate and not determinate:
        verdict = Verdict.LIKELY_INDETERMINATE
    else:
        verdict = Verdict.INCONCLUSIVE
        if determinate and indeterminate:
            notes.append("conflicting signals; raise n_max or precision")

    return DeterminacyReport(
        lambda_seq=lambda_seq, beta_seq=beta_seq, gamma_seq=gamma_seq,
        hankel_bound=hankel_bound, connecting_bound=connecting_bound,
        deficiency_p=deficiency_p, deficiency_q=deficiency_q,
        verdict=verdict, precision=precision, notes=tuple(notes))
