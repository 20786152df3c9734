"""Closed-form evaluation of the theoretical bounds, for side-by-side
comparison with Monte Carlo measurements.

All absolute constants hidden behind big-O statements are explicit
parameters (``c`` for the increment metric, ``C`` for the main bound),
defaulting to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .optimizer import StepSchedule


@dataclass(frozen=True)
class BoundReport:
    """An evaluated bound with the parameters that produced it."""

    name: str
    value: float
    inputs: dict = field(default_factory=dict)
    notes: str = ""
    divergent: bool = False


def opt_error_bound(T: int, schedule: StepSchedule, w0_dist: float,
                    sigma: float) -> BoundReport:
    """Optimization error of the running average after ``T`` steps:
    ``w0_dist^2 / (2 sum a_k) + sigma^2 (sum a_k^2) / (sum a_k)``.
    """
    if w0_dist < 0 or sigma < 0:
        raise ValueError("w0_dist and sigma must be nonnegative")
    sa = schedule.sum_alpha(T)
    saq = schedule.sum_alpha_sq(T)
    value = w0_dist**2 / (2.0 * sa) + sigma**2 * saq / sa
    return BoundReport("opt_error", value,
                       {"T": T, "schedule": schedule.kind, "c": schedule.c,
                        "cap": schedule.cap, "w0_dist": w0_dist, "sigma": sigma})


def stability_bound(n: int, schedule: StepSchedule, T: int, B: float) -> BoundReport:
    """Uniform-stability generalization bound ``(2 B^2 / n) sum_t alpha_t``.

    Grows without bound in ``T`` whenever the step sizes are not summable,
    which is flagged as divergent-in-T.
    """
    if B is None:
        raise ValueError("stability bound needs a gradient bound B")
    value = 2.0 * B**2 / n * schedule.sum_alpha(T)
    divergent = schedule.kind in ("constant", "inverse_sqrt")
    return BoundReport("stability", value,
                       {"n": n, "T": T, "B": B, "schedule": schedule.kind,
                        "c": schedule.c, "cap": schedule.cap},
                       notes="divergent as T -> inf" if divergent else "",
                       divergent=divergent)


def strongly_convex_bound(n: int, B: float, mu: float) -> BoundReport:
    """T-independent strongly convex bound ``2 B^2 / (mu n)``."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if mu == 0:
        return BoundReport("strongly_convex", math.inf,
                           {"n": n, "B": B, "mu": mu}, divergent=True)
    return BoundReport("strongly_convex", 2.0 * B**2 / (mu * n),
                       {"n": n, "B": B, "mu": mu})


def main_theorem_bound(T: int, schedule: StepSchedule, w0_dist: float,
                       sigma: float, sigma_star: float, L: float, R: float,
                       d: int, n: int, C: float = 1.0) -> BoundReport:
    """Main generalization bound: optimization error plus the
    T-independent plateau ``C (sigma* R + L R^2 sqrt(d)) / sqrt(n)``.

    The plateau is also reported separately in ``inputs["plateau"]``.
    """
    if C <= 0:
        raise ValueError("the bound's absolute constant C must be positive")
    opt = opt_error_bound(T, schedule, w0_dist, sigma)
    plateau = C * (sigma_star * R + L * R**2 * math.sqrt(d)) / math.sqrt(n)
    inputs = dict(opt.inputs)
    inputs.update({"sigma_star": sigma_star, "L": L, "R": R, "d": d, "n": n,
                   "C": C, "plateau": plateau, "opt_error": opt.value})
    return BoundReport("main_theorem", opt.value + plateau, inputs)


def inexact_bound(T: int, schedule: StepSchedule, w0_dist: float, sigma: float,
                  R: float, pbar) -> BoundReport:
    """Inexact-PSGD suboptimality bound with perturbation bounds ``pbar_t``:
    adds ``2R (sum a_t pbar_t) / (sum a_t)`` to the optimization error.
    """
    pbar = np.asarray(pbar, dtype=float)
    if pbar.shape != (T,):
        raise ValueError(f"need one perturbation bound per step, got {pbar.shape}")
    if np.any(pbar < 0):
        raise ValueError("perturbation bounds must be nonnegative")
    a = schedule.alphas(T)
    sa = float(a.sum())
    value = (w0_dist**2 / (2.0 * sa)
             + sigma**2 * float((a * a).sum()) / sa
             + 2.0 * R * float((a * pbar).sum()) / sa)
    return BoundReport("inexact_psgd", value,
                       {"T": T, "schedule": schedule.kind, "c": schedule.c,
                        "cap": schedule.cap, "w0_dist": w0_dist, "sigma": sigma,
                        "R": R, "pbar_max": float(pbar.max())})


# ---------------------------------------------------------------------------
# covering numbers and the Dudley chaining sum
# ---------------------------------------------------------------------------


def covering_constants(R: float, L: float, n: int, c: float = 1.0):
    """``(eps0, R_hat_bound)`` for the gradient-increment metric
    ``d(w1, w2) = c L ||w1 - w2|| / sqrt(n)`` on a radius-R Euclidean ball:
    ``eps0 = 2 c L R / sqrt(n)`` and the metric radius is at most eps0/2.
    """
    eps0 = 2.0 * c * L * R / math.sqrt(n)
    return eps0, eps0 / 2.0


def covering_number_bound(eps: float, R: float, L: float, n: int, d: int,
                          c: float = 1.0) -> float:
    """Volume bound ``(1 + eps0/eps)^d`` on the eps-covering number of the
    radius-R ball in the increment metric.  May overflow to inf for large
    ``d``; use :func:`log_covering_number_bound` in that regime.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps0, _ = covering_constants(R, L, n, c)
    log_n = d * math.log1p(eps0 / eps)
    return math.inf if log_n > 709.0 else (1.0 + eps0 / eps) ** d


def log_covering_number_bound(eps: float, R: float, L: float, n: int, d: int,
                              c: float = 1.0) -> float:
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps0, _ = covering_constants(R, L, n, c)
    return d * math.log1p(eps0 / eps)


def covering_log_map(R: float, L: float, n: int, d: int,
                     c: float = 1.0) -> Callable[[float], float]:
    """eps -> log N(eps) for the standard volume covering bound, returning
    0 beyond the metric radius (one ball suffices there)."""
    _, r_hat = covering_constants(R, L, n, c)

    def log_n(eps: float) -> float:
        if eps > r_hat:
            return 0.0
        return log_covering_number_bound(eps, R, L, n, d, c)

    return log_n


@dataclass(frozen=True)
class DudleyScale:
    j: int
    log_N: float
    log_M: float
    a_j: float
    term: float


@dataclass(frozen=True)
class DudleyScales:
    i: int
    scales: tuple


def _coerce_log_covering(covering, log_form: bool):
    if log_form:
        return covering
    return lambda eps: math.log(float(covering(eps)))


def largest_dyadic_index(R_hat: float) -> int:
    """Largest integer ``i`` with ``2^-i >= R_hat``."""
    if R_hat <= 0:
        raise ValueError("R_hat must be positive")
    i = math.floor(-math.log2(R_hat))
    # guard against log2 round-off at exact powers of two
    while 2.0 ** (-i) < R_hat:
        i -= 1
    while 2.0 ** (-(i + 1)) >= R_hat:
        i += 1
    return i


def dudley_discrete_bound(R_hat: float, K: float, covering,
                          log_form: bool = False, tol: float = 1e-12,
                          max_scales: int = 400):
    """Chaining sum ``sum_{j>i} 2^-j sqrt(log(K N(2^-j)))``.

    ``covering`` maps eps to the covering number N(eps) (or to log N with
    ``log_form=True``; use that for large dimension, where N overflows).
    The infinite sum is truncated once terms drop below ``tol``.  Returns
    ``(value, DudleyScales)`` with per-scale ``a_j`` diagnostics
    ``a_j = 4 * 2^-j * sqrt(log(K 2^{j-i} M_j))``, ``M_j = N_j N_{j-1}``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    log_K = math.log(K)
    log_n_at = _coerce_log_covering(covering, log_form)
    i = largest_dyadic_index(R_hat)
    total = 0.0
    scales = []
    prev_log_N = log_n_at(2.0 ** (-i))
    for j in range(i + 1, i + 1 + max_scales):
        two_j = 2.0 ** (-j)
        log_N = log_n_at(two_j)
        if log_N < 0:
            raise ValueError("covering numbers must be >= 1")
        term = two_j * math.sqrt(max(log_K + log_N, 0.0))
        log_M = log_N + prev_log_N
        a_j = 4.0 * two_j * math.sqrt(max(log_K + (j - i) * math.log(2.0) + log_M, 0.0))
        scales.append(DudleyScale(j, log_N, log_M, a_j, term))
        total += term
        prev_log_N = log_N
        if term < tol:
            break
    return total, DudleyScales(i, tuple(scales))


def dudley_integral_bound(R_hat: float, K: float, covering,
                          log_form: bool = False) -> float:
    """Entropy integral ``int_0^R_hat sqrt(log(K N(eps))) d eps`` by
    adaptive quadrature; upper-bounds the discrete form for nonincreasing N.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    log_K = math.log(K)
    log_n_at = _coerce_log_covering(covering, log_form)

    def integrand(eps: float) -> float:
        return math.sqrt(max(log_K + log_n_at(eps), 0.0))

    value, _ = integrate.quad(integrand, 0.0, R_hat, limit=200)
    return float(value)


def dudley_gradient_concentration(R: float, L: float, n: int, d: int,
                                  c: float = 1.0) -> BoundReport:
    """Dudley sum evaluated on the standard covering bound with K = d,
    i.e. the entropy part of the gradient-difference concentration bound."""
    _, r_hat = covering_constants(R, L, n, c)
    value, scales = dudley_discrete_bound(r_hat, float(max(d, 1)),
                                          covering_log_map(R, L, n, d, c),
                                          log_form=True)
    return BoundReport("dudley_entropy_sum", value,
                       {"R": R, "L": L, "n": n, "d": d, "c": c,
                        "R_hat": r_hat, "i": scales.i})
