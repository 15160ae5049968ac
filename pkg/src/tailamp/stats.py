"""Exact binomial statistics for amplified measurement rounds.

Each batch of shots at amplification order k is a binomial draw whose success
probability is sin^2((2k+1) theta).  Everything downstream (feasible sets,
confidence bookkeeping, likelihood surfaces) is built from the pieces here:
Clopper-Pearson interval endpoints through an inverse regularized incomplete
beta, a summable per-round confidence schedule, and the exact log-likelihood
of a collection of rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

INV_BETA_TOL = 1e-12
INV_BETA_MAX_ITER = 200


@dataclass(frozen=True)
class RoundRecord:
    """One executed batch: k amplification order, m shots, h successes.

    delta is the confidence budget consumed by this batch's interval.
    """

    k: int
    m: int
    h: int
    delta: float

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0 <= self.h <= self.m:
            raise ValueError("h must lie in [0, m]")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float


def inverse_reg_incomplete_beta(q: float, a: float, b: float) -> float:
    """Solve I_x(a, b) = q for x in [0, 1].

    Bisection provides a bracketing seed, then Newton steps (guarded to stay
    inside the bracket) polish to INV_BETA_TOL.  Raises RuntimeError if the
    combined iteration count exceeds INV_BETA_MAX_ITER without converging.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("beta parameters must be positive")
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0

    lo, hi = 0.0, 1.0
    iters = 0
    # Bisection until the bracket is narrow enough to trust Newton.
    while hi - lo > 1e-4:
        iters += 1
        if iters > INV_BETA_MAX_ITER:
            raise RuntimeError("inverse incomplete beta: bisection stalled")
        mid = 0.5 * (lo + hi)
        if special.betainc(a, b, mid) < q:
            lo = mid
        else:
            hi = mid

    ln_beta = special.betaln(a, b)
    x = 0.5 * (lo + hi)
    while iters <= INV_BETA_MAX_ITER:
        iters += 1
        f = special.betainc(a, b, x) - q
        if f < 0.0:
            lo = max(lo, x)
        else:
            hi = min(hi, x)
        # Beta density at x; underflows to 0 far in the tails.
        if 0.0 < x < 1.0:
            pdf = math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - ln_beta)
        else:
            pdf = 0.0
        if pdf > 0.0:
            step = f / pdf
            x_new = x - step
        else:
            x_new = math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)  # Newton left the bracket; fall back
        if abs(x_new - x) <= INV_BETA_TOL:
            return x_new
        x = x_new
    raise RuntimeError("inverse incomplete beta: did not converge")


def clopper_pearson(h: int, m: int, delta: float) -> ConfidenceInterval:
    """Exact two-sided binomial confidence interval at miscoverage delta.

    Endpoints are beta quantiles; the conventional boundary cases h = 0 and
    h = m pin the corresponding endpoint to 0 or 1.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0 <= h <= m:
        raise ValueError("h must lie in [0, m]")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if h == 0:
        p_lo = 0.0
    else:
        p_lo = inverse_reg_incomplete_beta(delta / 2.0, h, m - h + 1)
    if h == m:
        p_hi = 1.0
    else:
        p_hi = inverse_reg_incomplete_beta(1.0 - delta / 2.0, h + 1, m - h)
    return ConfidenceInterval(p_lo, p_hi)


def delta_schedule(t: int, delta_tot: float) -> float:
    """Per-batch confidence budget: delta_t = (6/pi^2) delta_tot / t^2.

    Summing over all t >= 1 gives exactly delta_tot, so a union bound over
    every executed batch preserves the overall confidence level.
    """
    if t < 1:
        raise ValueError("batch index t starts at 1")
    if not 0.0 < delta_tot < 1.0:
        raise ValueError("delta_tot must lie in (0, 1)")
    return (6.0 / math.pi**2) * delta_tot / (t * t)


def log_likelihood_terms(
    theta: np.ndarray,
    omega: np.ndarray,
    hs: np.ndarray,
    tails: np.ndarray,
) -> np.ndarray:
    """Log-likelihood over a theta grid from pre-extracted round arrays.

    omega = 2k+1 per round, hs = successes, tails = m - h.  Zero counts
    annihilate their term even when the corresponding log is -inf, matching
    the 0 * log 0 = 0 convention; -inf is a legitimate output elsewhere.
    """
    ang = np.multiply.outer(omega.astype(float), theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.log(np.abs(np.sin(ang)))
        lq = np.log(np.abs(np.cos(ang)))
        t1 = np.where(hs[:, None] > 0, hs[:, None] * lp, 0.0)
        t2 = np.where(tails[:, None] > 0, tails[:, None] * lq, 0.0)
    return 2.0 * (t1 + t2).sum(axis=0)


def log_likelihood(theta, rounds) -> float | np.ndarray:
    """Exact log-likelihood of the observed rounds at angle(s) theta.

    Each round contributes h log sin^2(w theta) + (m - h) log cos^2(w theta)
    with w = 2k+1.  Scalar in, scalar out; arrays are evaluated pointwise.
    """
    th = np.asarray(theta, dtype=float)
    scalar = th.ndim == 0
    th = np.atleast_1d(th)
    if not rounds:
        out = np.zeros_like(th)
        return float(out[0]) if scalar else out
    omega = np.array([2 * r.k + 1 for r in rounds])
    hs = np.array([r.h for r in rounds])
    tails = np.array([r.m - r.h for r in rounds])
    out = log_likelihood_terms(th, omega, hs, tails)
    return float(out[0]) if scalar else out
