"""Normal-approximation envelopes that shape the deviation bounds.

All bounds are stated modulo an unspecified absolute constant, which is set
to 1 here. They are meant for relative comparisons and log-log slopes, not
as absolute pass/fail thresholds.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ParameterError

__all__ = [
    "MomentProfile",
    "NumericCLTError",
    "g_bound",
    "G_bound",
    "g_exact_numeric",
    "envelope_terms",
    "contamination_envelope",
]


@dataclass(frozen=True)
class MomentProfile:
    """``sigma``, ``E|X - EX|^(2+delta)`` and the exponent ``delta`` in (0, 1]."""

    sigma: float
    abs_central_moment: float
    delta_exponent: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if not 0 < self.delta_exponent <= 1:
            raise ParameterError("delta_exponent must lie in (0, 1]")
        # Jensen: E|Y|^(2+d) >= (E Y^2)^(1+d/2); allow rounding slack
        floor = self.sigma ** (2 + self.delta_exponent)
        if not self.abs_central_moment >= floor * (1 - 1e-12):
            raise ParameterError("abs_central_moment is below sigma^(2+delta), violating Jensen")

    @property
    def kappa(self):
        return self.abs_central_moment / self.sigma ** (2 + self.delta_exponent)

    @classmethod
    def from_distribution(cls, dist, delta_exponent=1.0):
        return cls(dist.true_sigma, dist.abs_central_moment(2 + delta_exponent), delta_exponent)


def g_bound(mp: MomentProfile, n, t):
    """``M / (n^(delta/2) * (sigma + |t|)^(2+delta))`` with unit constant."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    d = mp.delta_exponent
    return mp.abs_central_moment / (n ** (d / 2) * (mp.sigma + abs(t)) ** (2 + d))


def G_bound(mp: MomentProfile, n, delta):
    """``M / (Delta^(2+delta) * n^(delta/2))`` with unit constant."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not delta > 0:
        raise ParameterError("Delta must be positive")
    d = mp.delta_exponent
    return mp.abs_central_moment / (delta ** (2 + d) * n ** (d / 2))


@dataclass
class NumericCLTError:
    value: float
    stderr: float
    probability: float
    n: int
    t: float
    budget: int


def _std_normal_cdf(t):
    return 0.5 * special.erfc(-t / math.sqrt(2.0))


def g_exact_numeric(dist, n, t, mc_budget=200_000, seed=0, chunk=20_000) -> NumericCLTError:
    """Monte Carlo estimate of ``|P(S_n <= t) - Phi(t)|``.

    ``S_n`` is the standardised sum of ``n`` draws from ``dist``. The
    reported standard error is that of the empirical probability.
    """
    if not dist.finite_variance:
        raise ParameterError(f"{dist.label} has infinite variance; the CLT error is undefined")
    if n < 1 or mc_budget < 1:
        raise ParameterError("n and mc_budget must be positive")
    mu, sigma = dist.true_mean, dist.true_sigma
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < mc_budget:
        b = min(chunk, mc_budget - done)
        s = (dist.sample(rng, (b, n)).sum(axis=1) - n * mu) / (sigma * math.sqrt(n))
        hits += int(np.count_nonzero(s <= t))
        done += b
    p = hits / mc_budget
    se = math.sqrt(max(p * (1 - p), 1.0 / mc_budget) / mc_budget)
    return NumericCLTError(abs(p - _std_normal_cdf(t)), se, p, int(n), float(t), int(mc_budget))


def envelope_terms(lambda_max, tr_sigma, N, eps, delta_exp, kappa, s):
    """Individual terms of the contaminated multivariate envelope.

    Returns a dict with ``statistical`` (``sqrt(tr/N)``), ``confidence``
    (``sqrt(lambda_max * s / N)``), ``contamination``
    (``sqrt(lambda_max) * eps^((1+d)/(2+d)) * kappa^(1/(2+d))``) and
    ``block_bias`` (``kappa^(1/(2+d)) * s / (eps^(1/(2+d)) * N)``).
    With ``eps = 0`` the last two are 0: no block-count rule is in play.
    """
    if not (lambda_max >= 0 and tr_sigma >= 0 and N >= 1 and s > 0):
        raise ParameterError("need lambda_max, tr_sigma >= 0, N >= 1 and s > 0")
    if not 0 < delta_exp <= 1:
        raise ParameterError("delta_exp must lie in (0, 1]")
    if not kappa >= 1:
        raise ParameterError("kappa must be >= 1")
    if eps != 0 and not (1.0 / N <= eps < 0.5):
        raise ParameterError(f"eps must be 0 or lie in [1/N, 1/2), got {eps}")
    root_lam = math.sqrt(lambda_max)
    terms = {
        "statistical": math.sqrt(tr_sigma / N),
        "confidence": root_lam * math.sqrt(s / N),
        "contamination": 0.0,
        "block_bias": 0.0,
    }
    if eps > 0:
        kap = kappa ** (1.0 / (2 + delta_exp))
        terms["contamination"] = root_lam * eps ** ((1 + delta_exp) / (2 + delta_exp)) * kap
        terms["block_bias"] = kap * s / (eps ** (1.0 / (2 + delta_exp)) * N)
    return terms


def contamination_envelope(lambda_max, tr_sigma, N, eps, delta_exp, kappa, s):
    """Sum of :func:`envelope_terms`; the error shape under ``eps``-contamination.

    ``lambda_max`` is the largest covariance eigenvalue (a variance, so its
    square root enters the bound).
    """
    return sum(envelope_terms(lambda_max, tr_sigma, N, eps, delta_exp, kappa, s).values())
