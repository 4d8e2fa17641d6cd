"""Seeded synthetic distributions with known means, variances and moments."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .errors import ParameterError

__all__ = [
    "NamedDistribution",
    "MomentCheck",
    "normal",
    "student_t",
    "pareto",
    "lognormal",
    "two_point",
    "rademacher",
    "least_favorable",
    "mc_moment_check",
]

_FAMILIES = ("normal", "student_t", "pareto", "lognormal", "two_point")


@dataclass(frozen=True)
class NamedDistribution:
    """A parametric family plus its parameters.

    ====================  =========================================
    family                params
    ====================  =========================================
    ``normal``            ``mu, sigma``
    ``student_t``         ``nu, loc, scale``
    ``pareto``            ``alpha, loc, scale`` (support ``>= loc + scale``)
    ``lognormal``         ``mu, sigma`` (of the underlying normal)
    ``two_point``         ``p, a, b``: ``b`` with probability ``p``, else ``a``
    ====================  =========================================
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; expected one of {_FAMILIES}")
        p = self.params
        bad = None
        if self.family == "normal" and not p.get("sigma", 0) > 0:
            bad = "sigma > 0"
        elif self.family == "student_t" and not (p.get("nu", 0) > 0 and p.get("scale", 0) > 0):
            bad = "nu > 0 and scale > 0"
        elif self.family == "pareto" and not (p.get("alpha", 0) > 0 and p.get("scale", 0) > 0):
            bad = "alpha > 0 and scale > 0"
        elif self.family == "lognormal" and not p.get("sigma", 0) > 0:
            bad = "sigma > 0"
        elif self.family == "two_point" and not (0 < p.get("p", -1) < 1 and p.get("a") != p.get("b")):
            bad = "0 < p < 1 and a != b"
        if bad:
            raise ParameterError(f"{self.family} needs {bad}, got {p}")

    @property
    def label(self):
        args = ",".join(f"{v:g}" for v in self.params.values())
        return f"{self.family}({args})"

    def sample(self, rng, size):
        p = self.params
        f = self.family
        if f == "normal":
            return rng.normal(p["mu"], p["sigma"], size)
        if f == "student_t":
            return p["loc"] + p["scale"] * rng.standard_t(p["nu"], size)
        if f == "pareto":
            # inverse CDF of the classical Pareto law
            return p["loc"] + p["scale"] * (1.0 - rng.random(size)) ** (-1.0 / p["alpha"])
        if f == "lognormal":
            return rng.lognormal(p["mu"], p["sigma"], size)
        u = rng.random(size)
        return np.where(u < p["p"], float(p["b"]), float(p["a"]))

    def sample_matrix(self, rng, N, d):
        """``N`` rows of ``d`` independent coordinates."""
        return self.sample(rng, (N, d))

    @property
    def true_mean(self):
        p = self.params
        f = self.family
        if f == "normal":
            return float(p["mu"])
        if f == "student_t":
            return float(p["loc"]) if p["nu"] > 1 else math.nan
        if f == "pareto":
            a = p["alpha"]
            return p["loc"] + p["scale"] * a / (a - 1) if a > 1 else math.inf
        if f == "lognormal":
            return math.exp(p["mu"] + p["sigma"] ** 2 / 2)
        return (1 - p["p"]) * p["a"] + p["p"] * p["b"]

    @property
    def true_sigma(self):
        """Standard deviation; ``inf`` when the variance does not exist."""
        p = self.params
        f = self.family
        if f == "normal":
            return float(p["sigma"])
        if f == "student_t":
            nu = p["nu"]
            return p["scale"] * math.sqrt(nu / (nu - 2)) if nu > 2 else math.inf
        if f == "pareto":
            a = p["alpha"]
            return p["scale"] * math.sqrt(a / ((a - 1) ** 2 * (a - 2))) if a > 2 else math.inf
        if f == "lognormal":
            s2 = p["sigma"] ** 2
            return math.sqrt((math.exp(s2) - 1) * math.exp(2 * p["mu"] + s2))
        return abs(p["b"] - p["a"]) * math.sqrt(p["p"] * (1 - p["p"]))

    @property
    def finite_variance(self):
        return math.isfinite(self.true_sigma)

    @property
    def scale_proxy(self):
        """A finite scale: ``true_sigma`` when finite, else the family's scale parameter."""
        if self.finite_variance:
            return self.true_sigma
        return float(self.params.get("scale", self.params.get("sigma", 1.0)))

    def abs_central_moment(self, order):
        """``E|X - EX|^order``; ``inf`` when it does not exist.

        Closed forms for normal, Student t and two-point laws; adaptive
        quadrature for Pareto and lognormal.
        """
        p = self.params
        f = self.family
        q = float(order)
        if f == "normal":
            return p["sigma"] ** q * 2 ** (q / 2) * special.gamma((q + 1) / 2) / math.sqrt(math.pi)
        if f == "student_t":
            nu = p["nu"]
            if q >= nu:
                return math.inf
            return (
                p["scale"] ** q
                * nu ** (q / 2)
                * special.gamma((q + 1) / 2)
                * special.gamma((nu - q) / 2)
                / (math.sqrt(math.pi) * special.gamma(nu / 2))
            )
        if f == "two_point":
            m = self.true_mean
            return (1 - p["p"]) * abs(p["a"] - m) ** q + p["p"] * abs(p["b"] - m) ** q
        if f == "pareto" and q >= p["alpha"]:
            return math.inf
        m = self.true_mean
        if f == "pareto":
            dist = stats.pareto(p["alpha"], loc=p["loc"], scale=p["scale"])
            lower = p["loc"] + p["scale"]
        else:
            dist = stats.lognorm(p["sigma"], scale=math.exp(p["mu"]))
            lower = 0.0

        def integrand(x):
            return abs(x - m) ** q * dist.pdf(x)

        left, _ = integrate.quad(integrand, lower, max(m, lower), limit=200)
        right, _ = integrate.quad(integrand, max(m, lower), math.inf, limit=200)
        return left + right

    def kappa(self, delta):
        """``E|X - EX|^(2+delta) / sigma^(2+delta)``."""
        return self.abs_central_moment(2 + delta) / self.true_sigma ** (2 + delta)

    def to_dict(self):
        return {"family": self.family, **self.params}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "family" not in d:
            raise ParameterError("distribution needs a 'family' key")
        family = d.pop("family")
        return cls(family, d)


@dataclass(frozen=True)
class MomentCheck:
    analytic: float
    empirical: float
    stderr: float
    budget: int

    @property
    def z_score(self):
        return abs(self.empirical - self.analytic) / self.stderr if self.stderr > 0 else 0.0


def mc_moment_check(dist: NamedDistribution, order, budget=10_000_000, seed=0, chunk=1_000_000):
    """Compare ``abs_central_moment(order)`` with a Monte Carlo average.

    Uses the analytic mean for centring. The standard error is that of the
    sample average of ``|X - EX|^order`` and is only meaningful when the
    moment of twice that order exists.
    """
    analytic = dist.abs_central_moment(order)
    m = dist.true_mean
    rng = np.random.default_rng(seed)
    s1 = s2 = 0.0
    done = 0
    while done < budget:
        b = min(chunk, budget - done)
        v = np.abs(dist.sample(rng, b) - m) ** order
        s1 += float(v.sum())
        s2 += float(np.square(v).sum())
        done += b
    mean = s1 / budget
    var = max(s2 / budget - mean**2, 0.0)
    return MomentCheck(analytic, mean, math.sqrt(var / budget), int(budget))


def normal(mu=0.0, sigma=1.0):
    return NamedDistribution("normal", {"mu": mu, "sigma": sigma})


def student_t(nu, loc=0.0, scale=1.0):
    return NamedDistribution("student_t", {"nu": nu, "loc": loc, "scale": scale})


def pareto(alpha, loc=0.0, scale=1.0):
    return NamedDistribution("pareto", {"alpha": alpha, "loc": loc, "scale": scale})


def lognormal(mu=0.0, sigma=1.0):
    return NamedDistribution("lognormal", {"mu": mu, "sigma": sigma})


def two_point(p, a, b):
    return NamedDistribution("two_point", {"p": p, "a": a, "b": b})


def rademacher():
    return two_point(0.5, -1.0, 1.0)


def least_favorable(eps, delta_exponent=1.0):
    """Two-point law that is hardest to tell apart under ``eps``-contamination.

    Mass ``eps / (1 - eps)`` at ``eps**(-1/p)`` and the rest at 0, with
    ``p = 2 + delta_exponent``. Appending ``eps * N`` points at
    ``-eps**(-1/p)`` makes it indistinguishable from its mirror image, whose
    mean differs by ``2 * eps**(1 - 1/p) / (1 - eps)``. Its ``p``-th absolute
    central moment stays bounded as ``eps -> 0``.
    """
    if not 0 < eps < 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
    p = 2.0 + delta_exponent
    return two_point(eps / (1 - eps), 0.0, eps ** (-1.0 / p))
