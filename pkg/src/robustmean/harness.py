"""Monte Carlo studies: deviation quantiles, regime sweeps, contamination
scaling and U-statistic agreement.

Seeding is counter based. Replication ``r`` of a study with master seed ``s``
draws its clean sample from ``np.random.default_rng([s, r])`` and partitions
it with seed ``cfg.seed + r``, so any replication can be rerun in isolation
and every estimator in a study sees the same samples (paired design).
"""

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .blocking import block_means, enumerate_subsets, partition_disjoint
from .contamination import ContaminationSpec, check_block_budget, contaminate
from .distributions import NamedDistribution, least_favorable
from .errors import ConfigError, ParameterError
from .multivariate import (
    DirectionSet,
    coordinatewise_mom,
    directional_estimates,
    estimate_multivariate,
    solve_slab_intersection,
)
from .score import HUBER, ScoreFunction
from .univariate import (
    EstimatorConfig,
    block_roots,
    estimate_block_huber,
    estimate_mom,
    estimate_ustat,
    robust_scale,
)

__all__ = [
    "LEVELS",
    "CSV_COLUMNS",
    "DeviationReport",
    "RegimeSweep",
    "ContaminationSweep",
    "UstatAgreement",
    "replication_rng",
    "sub_gaussian_ratio",
    "run_deviation_study",
    "run_regime_sweep",
    "run_contamination_sweep",
    "run_ustat_agreement",
    "default_menu",
    "fit_loglog_slope",
    "rows_to_csv",
    "STUDY_KEYS",
    "validate_study_config",
    "run_study",
]

LEVELS = (0.5, 0.9, 0.99, 0.999)
CSV_COLUMNS = (
    "study_id",
    "estimator",
    "family",
    "N",
    "k",
    "n",
    "delta",
    "eps",
    "level",
    "quantile",
    "runtime_ms",
    "seed",
)


def replication_rng(master_seed, rep):
    """Generator for replication ``rep``; independent of every other index."""
    return np.random.default_rng([int(master_seed), int(rep)])


def _quantiles(errors, levels=LEVELS):
    # "higher" keeps every reported value an observed error
    return [float(np.quantile(errors, p, method="higher")) for p in levels]


def sub_gaussian_ratio(q, p, sigma, N):
    """``q / (sigma * sqrt(2 * log(1 / (1 - p)) / N))``."""
    return q / (sigma * math.sqrt(2.0 * math.log(1.0 / (1.0 - p)) / N))


def _fmt(v):
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows):
    """Serialise dict rows with the fixed column order; floats use ``repr``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# deviation study


@dataclass
class DeviationReport:
    """Quantiles of ``|estimate - mean|`` for an estimator and paired baselines.

    ``deviations`` maps estimator name to the per-replication errors (signed
    for scalar studies, Euclidean norms for multivariate ones).
    """

    study_id: str
    family: str
    dist: dict
    N: int
    R: int
    seed: int
    config: dict
    levels: tuple
    deviations: dict
    scale: float
    infinite_variance: bool
    k: int = 0
    n: int = 0
    delta: object = None
    eps: float = 0.0
    sup_deviation: Optional[np.ndarray] = None
    runtime_ms: Optional[float] = None

    @property
    def estimators(self):
        return list(self.deviations)

    def abs_errors(self, name):
        return np.abs(self.deviations[name])

    def quantiles(self, name):
        return _quantiles(self.abs_errors(name), self.levels)

    def median_error(self, name):
        return float(np.median(self.abs_errors(name)))

    def ratios(self, name):
        """Empirical sub-Gaussian ratio per level (against ``scale``)."""
        return [sub_gaussian_ratio(q, p, self.scale, self.N) for q, p in zip(self.quantiles(name), self.levels)]

    def bias(self, name):
        """Mean signed error and its Monte Carlo standard error."""
        e = np.asarray(self.deviations[name], dtype=float)
        return float(e.mean()), float(e.std(ddof=1) / math.sqrt(e.size))

    def csv_rows(self, timing=False):
        rows = []
        for name in self.deviations:
            for p, q in zip(self.levels, self.quantiles(name)):
                rows.append(
                    {
                        "study_id": self.study_id,
                        "estimator": name,
                        "family": self.family,
                        "N": self.N,
                        "k": self.k,
                        "n": self.n,
                        "delta": self.delta,
                        "eps": float(self.eps),
                        "level": float(p),
                        "quantile": q,
                        "runtime_ms": self.runtime_ms if timing else None,
                        "seed": self.seed,
                    }
                )
        return rows

    def summary(self):
        out = {
            "study_id": self.study_id,
            "dist": self.dist,
            "N": self.N,
            "R": self.R,
            "seed": self.seed,
            "config": self.config,
            "levels": list(self.levels),
            "scale": self.scale,
            "infinite_variance": self.infinite_variance,
            "quantiles": {e: self.quantiles(e) for e in self.deviations},
            "sub_gaussian_ratio": {e: self.ratios(e) for e in self.deviations},
            "median_error": {e: self.median_error(e) for e in self.deviations},
        }
        if self.sup_deviation is not None:
            out["sup_deviation_quantiles"] = _quantiles(self.sup_deviation, self.levels)
        return _json_safe(out)


def _with_seed(cfg: EstimatorConfig, rep):
    return dataclasses.replace(cfg, seed=cfg.seed + int(rep))


def run_deviation_study(
    dist: NamedDistribution,
    N,
    cfg: EstimatorConfig,
    R=2000,
    seed=0,
    d=1,
    m_directions=None,
    study_id="deviation",
    levels=LEVELS,
) -> DeviationReport:
    """``R`` paired replications of the estimator, the sample mean and MOM.

    For ``d > 1`` the estimator is the multivariate slab estimator, errors
    are Euclidean norms and ``sup_deviation`` records the largest
    directional error over the estimator's direction family.
    Infinite-variance families still run; ratios then use
    ``dist.scale_proxy``.
    """
    if R < 100:
        raise ParameterError(f"a deviation study needs R >= 100, got {R}")
    if N < cfg.k:
        raise ParameterError(f"N={N} is smaller than k={cfg.k}")
    t0 = time.perf_counter()
    mu = dist.true_mean
    errs = {"block_huber": [], "sample_mean": [], "mom": []}
    sup = [] if d > 1 else None
    deltas = []
    for r in range(R):
        rng = replication_rng(seed, r)
        c = _with_seed(cfg, r)
        if d == 1:
            x = dist.sample(rng, N)
            res = estimate_block_huber(x, c)
            errs["block_huber"].append(res.estimate - mu)
            errs["sample_mean"].append(float(x.mean()) - mu)
            errs["mom"].append(estimate_mom(x, c.k, c.seed) - mu)
            deltas.append(res.delta)
        else:
            x = dist.sample_matrix(rng, N, d)
            # same directions as estimate_multivariate, kept for the sup-deviation
            dirs = DirectionSet.random_sphere(d, m_directions or 32 * d, c.seed).union(DirectionSet.basis(d))
            de = directional_estimates(x, dirs, c)
            sol = solve_slab_intersection(de)
            errs["block_huber"].append(float(np.linalg.norm(sol.mu_hat - mu)))
            errs["sample_mean"].append(float(np.linalg.norm(x.mean(axis=0) - mu)))
            errs["mom"].append(float(np.linalg.norm(coordinatewise_mom(x, c.k, c.seed) - mu)))
            sup.append(float(np.max(np.abs(de.theta - dirs.vectors @ np.full(d, mu)))))
            deltas.append(de.delta)
    k = cfg.k
    n = cfg.n or N // k
    delta = cfg.delta if isinstance(cfg.delta, str) else float(cfg.delta)
    return DeviationReport(
        study_id=study_id,
        family=dist.label,
        dist=dist.to_dict(),
        N=int(N),
        R=int(R),
        seed=int(seed),
        config={**cfg.to_dict(), "d": d, "median_delta_used": float(np.median(deltas))},
        levels=tuple(levels),
        deviations={kk: np.asarray(v) for kk, v in errs.items()},
        scale=dist.scale_proxy,
        infinite_variance=not dist.finite_variance,
        k=k,
        n=n,
        delta=delta,
        sup_deviation=None if sup is None else np.asarray(sup),
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )


# ---------------------------------------------------------------------------
# regime sweep


@dataclass
class RegimeSweep:
    """One :class:`DeviationReport` per ``(k, delta multiplier)`` cell.

    The multiplier scales the per-sample robust scale ``sigma_hat``;
    ``inf`` is the sample-mean limit.
    """

    reports: dict
    ks: tuple
    multipliers: tuple

    def cell(self, k, mult):
        return self.reports[(k, mult)]

    def median_errors(self, k):
        return [self.reports[(k, m)].median_error("block_huber") for m in self.multipliers]

    def csv_rows(self, timing=False):
        rows = []
        for key in sorted(self.reports, key=lambda t: (t[0], t[1])):
            rows.extend(self.reports[key].csv_rows(timing))
        return rows

    def summary(self):
        return _json_safe(
            {
                "ks": list(self.ks),
                "multipliers": [m if math.isfinite(m) else "inf" for m in self.multipliers],
                "cells": [
                    {"k": k, "multiplier": m if math.isfinite(m) else "inf", **self.reports[(k, m)].summary()}
                    for (k, m) in sorted(self.reports)
                ],
            }
        )


def run_regime_sweep(
    dist: NamedDistribution,
    N,
    ks: Sequence[int],
    multipliers: Sequence[float],
    R=500,
    seed=0,
    score: ScoreFunction = HUBER,
    partition_seed=0,
    study_id="regimes",
) -> RegimeSweep:
    """Grid over block counts and ``delta = multiplier * sigma_hat``.

    All cells share the samples of each replication. ``sigma_hat`` is
    :func:`robust_scale` of the sample (computed with the cell's ``k``).
    """
    if R < 1:
        raise ParameterError("R must be positive")
    ks = tuple(int(k) for k in ks)
    mults = tuple(float(m) for m in multipliers)
    if any(not m > 0 for m in mults):
        raise ParameterError("delta multipliers must be positive")
    mu = dist.true_mean
    errs = {(k, m): [] for k in ks for m in mults}
    base = {k: {"sample_mean": [], "mom": []} for k in ks}
    times = {key: 0.0 for key in errs}
    for r in range(R):
        x = dist.sample(replication_rng(seed, r), N)
        xbar = float(x.mean())
        for k in ks:
            cfg = EstimatorConfig(k=k, delta=1.0, score=score, seed=partition_seed + r)
            bm = block_means(x, partition_disjoint(N, k, cfg.seed))
            base[k]["sample_mean"].append(xbar - mu)
            base[k]["mom"].append(float(np.median(bm.values)) - mu)
            sig = robust_scale(x, k, cfg.seed)
            for m in mults:
                t0 = time.perf_counter()
                root = block_roots(bm.values, bm.n, m * sig if math.isfinite(m) else math.inf, score)
                times[(k, m)] += time.perf_counter() - t0
                errs[(k, m)].append(float(root.roots[0]) - mu)
    reports = {}
    for k in ks:
        for m in mults:
            reports[(k, m)] = DeviationReport(
                study_id=study_id,
                family=dist.label,
                dist=dist.to_dict(),
                N=int(N),
                R=int(R),
                seed=int(seed),
                config={"k": k, "delta_multiplier": m if math.isfinite(m) else "inf", "score": score.to_dict()},
                levels=LEVELS,
                deviations={
                    "block_huber": np.asarray(errs[(k, m)]),
                    "sample_mean": np.asarray(base[k]["sample_mean"]),
                    "mom": np.asarray(base[k]["mom"]),
                },
                scale=dist.scale_proxy,
                infinite_variance=not dist.finite_variance,
                k=k,
                n=N // k,
                delta=f"{m!r}*sigma_hat" if math.isfinite(m) else "inf",
                runtime_ms=times[(k, m)] * 1e3,
            )
    return RegimeSweep(reports, ks, mults)


# ---------------------------------------------------------------------------
# contamination sweep


def default_menu(d, magnitude=1e6):
    """Two-sided far point masses and far directional shifts along axis 1."""
    axis = tuple([1.0] + [0.0] * (d - 1))
    neg = tuple(-v for v in axis)
    return [
        {"strategy": "point_mass", "value": magnitude},
        {"strategy": "point_mass", "value": -magnitude},
        {"strategy": "directional_shift", "magnitude": magnitude, "direction": axis},
        {"strategy": "directional_shift", "magnitude": magnitude, "direction": neg},
    ]


def fit_loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ParameterError("need at least two points for a slope")
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class ContaminationSweep:
    eps_grid: tuple
    ks: tuple
    outliers: tuple
    errors: dict
    baseline_errors: dict
    worst_index: dict
    slope: float
    config: dict
    study_id: str = "contamination"
    family: str = ""
    N: int = 0
    seed: int = 0
    runtime_ms: dict = field(default_factory=dict)

    def median_error(self, eps):
        return float(np.median(self.errors[eps]))

    def baseline_median(self, eps):
        return float(np.median(self.baseline_errors[eps]))

    def baseline_ratio(self, eps):
        """Median sample-mean error under the far point mass over the estimator's median worst-of error."""
        return self.baseline_median(eps) / self.median_error(eps)

    def csv_rows(self, timing=False):
        rows = []
        for eps, k in zip(self.eps_grid, self.ks):
            for name, data in (("block_huber", self.errors[eps]), ("sample_mean", self.baseline_errors[eps])):
                for p, q in zip(LEVELS, _quantiles(data)):
                    rows.append(
                        {
                            "study_id": self.study_id,
                            "estimator": name,
                            "family": self.family,
                            "N": self.N,
                            "k": k,
                            "n": self.N // k,
                            # delta is this multiple of the clean law's true sigma
                            "delta": f"{float(self.config['delta_multiplier'])!r}*sigma",
                            "eps": float(eps),
                            "level": float(p),
                            "quantile": q,
                            "runtime_ms": self.runtime_ms.get(eps) if timing else None,
                            "seed": self.seed,
                        }
                    )
        return rows

    def summary(self):
        cells = []
        for eps, k, O in zip(self.eps_grid, self.ks, self.outliers):
            cells.append(
                {
                    "eps": eps,
                    "k": k,
                    "outliers": O,
                    "median_error": self.median_error(eps),
                    "baseline_median_error": self.baseline_median(eps),
                    "worst_strategy_counts": np.bincount(self.worst_index[eps]).tolist()
                    if len(self.worst_index[eps])
                    else [],
                }
            )
        return _json_safe({"config": self.config, "slope": self.slope, "cells": cells})


def run_contamination_sweep(
    dist,
    N,
    eps_grid: Sequence[float],
    menu: Optional[Sequence[dict]] = None,
    k_factor=5.0,
    R=500,
    seed=0,
    d=2,
    delta_multiplier=1.0,
    delta_exponent=1.0,
    baseline_value=1e6,
    m_directions=None,
    k_at_zero=None,
    study_id="contamination",
) -> ContaminationSweep:
    """Worst-of-menu error of the estimator as a function of ``eps``.

    ``O = round(eps * N)`` outliers are appended and the estimator uses
    ``k = round(k_factor * eps * N)`` blocks; ``k > 2 O`` is enforced.
    ``dist`` is either a fixed :class:`NamedDistribution` or the string
    ``"least_favorable"``, meaning :func:`least_favorable` at each ``eps``
    (coordinates i.i.d.). In the latter case the menu gains the mirror
    point mass at ``-eps**(-1/(2+delta_exponent))``.

    ``delta = delta_multiplier * sigma`` with ``sigma`` the clean law's
    standard deviation. The clean sample of replication ``r`` uses the same
    generator for every ``eps``. An ``eps = 0`` cell uses ``k_at_zero``
    blocks (default ``floor(sqrt(N))``) and is left out of the slope fit.
    Each replication also records the sample-mean error under
    ``point_mass(baseline_value)``.
    """
    eps_grid = tuple(float(e) for e in eps_grid)
    lf = isinstance(dist, str)
    if lf and dist != "least_favorable":
        raise ParameterError(f"unknown clean law {dist!r}")
    if any(e != 0 and not (1.0 / N <= e <= 0.2) for e in eps_grid):
        raise ParameterError(f"eps values must be 0 or lie in [1/N, 0.2], got {list(eps_grid)}")
    if lf and 0.0 in eps_grid:
        raise ParameterError("the least-favourable law is undefined at eps = 0")
    menu = default_menu(d, baseline_value) if menu is None else [dict(m) for m in menu]
    for m in menu:
        if "count" in m or "seed" in m:
            raise ParameterError("menu entries must not set count or seed; the sweep assigns both")
    ks, outs = [], []
    for e in eps_grid:
        O = int(round(e * N))
        k = int(round(k_factor * e * N)) if e > 0 else (k_at_zero or max(1, math.isqrt(N)))
        check_block_budget(k, O)
        if k > N:
            raise ParameterError(f"k={k} exceeds N={N} at eps={e}")
        ks.append(k)
        outs.append(O)

    errors, base, worst, times = {}, {}, {}, {}
    for e, k, O in zip(eps_grid, ks, outs):
        law = least_favorable(e, delta_exponent) if lf else dist
        mu = np.full(d, law.true_mean)
        sigma = law.true_sigma if law.finite_variance else law.scale_proxy
        delta = delta_multiplier * sigma
        entries = list(menu)
        if lf:
            entries.append({"strategy": "point_mass", "value": -(e ** (-1.0 / (2.0 + delta_exponent)))})
        t0 = time.perf_counter()
        errs, b, w = [], [], []
        for r in range(R):
            rng = replication_rng(seed, r)
            x = law.sample(rng, N) if d == 1 else law.sample_matrix(rng, N, d)
            cfg = EstimatorConfig(k=k, delta=delta, seed=r)

            def target(s):
                if d == 1:
                    return estimate_block_huber(s, cfg).estimate
                return estimate_multivariate(s, cfg, m_directions=m_directions).mu_hat

            if O == 0:
                errs.append(float(np.linalg.norm(np.atleast_1d(target(x)) - mu)))
                b.append(float(np.linalg.norm(np.atleast_1d(x.mean(axis=0)) - mu)))
                w.append(0)
                continue
            specs = [ContaminationSpec.from_dict({**m, "count": O, "seed": r}) for m in entries]
            dmg = [float(np.linalg.norm(np.atleast_1d(target(contaminate(x, s)[0])) - mu)) for s in specs]
            i = int(np.argmax(dmg))
            errs.append(dmg[i])
            w.append(i)
            far = contaminate(x, ContaminationSpec(O, "point_mass", value=baseline_value, seed=r))[0]
            b.append(float(np.linalg.norm(np.atleast_1d(far.mean(axis=0)) - mu)))
        times[e] = (time.perf_counter() - t0) * 1e3
        errors[e], base[e], worst[e] = np.asarray(errs), np.asarray(b), np.asarray(w, dtype=int)

    pos = [e for e in eps_grid if e > 0]
    slope = fit_loglog_slope(pos, [float(np.median(errors[e])) for e in pos]) if len(pos) >= 2 else math.nan
    config = {
        "dist": dist if lf else dist.to_dict(),
        "N": int(N),
        "d": int(d),
        "R": int(R),
        "seed": int(seed),
        "eps_grid": list(eps_grid),
        "k_factor": float(k_factor),
        "delta_multiplier": float(delta_multiplier),
        "delta_exponent": float(delta_exponent),
        "baseline_value": float(baseline_value),
        "menu": menu,
        "m_directions": m_directions,
    }
    family = dist if lf else dist.label
    return ContaminationSweep(
        eps_grid, tuple(ks), tuple(outs), errors, base, worst, slope, config, study_id, family, int(N), int(seed), times
    )


# ---------------------------------------------------------------------------
# U-statistic agreement


@dataclass
class UstatAgreement:
    """Exact, incomplete and disjoint-block estimates per replication."""

    exact: np.ndarray
    dedup: np.ndarray
    incomplete: dict
    disjoint: np.ndarray
    permuted: np.ndarray
    sigma: float
    config: dict
    study_id: str = "ustat"
    family: str = ""
    N: int = 0
    n: int = 0
    seed: int = 0

    @property
    def max_gap(self):
        """``max |exact - dedup-complete incomplete|`` over replications."""
        return float(np.max(np.abs(self.exact - self.dedup)))

    @property
    def permutation_gap(self):
        return float(np.max(np.abs(self.exact - self.permuted)))

    @property
    def median_disjoint_gap(self):
        return float(np.median(np.abs(self.exact - self.disjoint)))

    @property
    def gap_threshold(self):
        return 2.0 * self.sigma / math.sqrt(self.N)

    def quantile_gaps(self):
        """Largest gap between the error quantiles of exact vs each other estimator."""
        mu = self.config["true_mean"]
        ref = _quantiles(np.abs(self.exact - mu))
        out = {"disjoint": max(abs(a - b) for a, b in zip(ref, _quantiles(np.abs(self.disjoint - mu))))}
        for B, v in self.incomplete.items():
            out[f"incomplete_B{B}"] = max(abs(a - b) for a, b in zip(ref, _quantiles(np.abs(v - mu))))
        return out

    def csv_rows(self, timing=False):
        mu = self.config["true_mean"]
        series = {"ustat_exact": self.exact, "ustat_dedup": self.dedup, "disjoint": self.disjoint}
        series.update({f"ustat_incomplete_B{B}": v for B, v in self.incomplete.items()})
        rows = []
        for name, v in series.items():
            for p, q in zip(LEVELS, _quantiles(np.abs(v - mu))):
                rows.append(
                    {
                        "study_id": self.study_id,
                        "estimator": name,
                        "family": self.family,
                        "N": self.N,
                        "k": self.N // self.n,
                        "n": self.n,
                        "delta": self.config["delta"],
                        "eps": 0.0,
                        "level": float(p),
                        "quantile": q,
                        "runtime_ms": None,
                        "seed": self.seed,
                    }
                )
        return rows

    def summary(self):
        return _json_safe(
            {
                "config": self.config,
                "max_gap": self.max_gap,
                "permutation_gap": self.permutation_gap,
                "median_disjoint_gap": self.median_disjoint_gap,
                "gap_threshold": self.gap_threshold,
                "quantile_gaps": self.quantile_gaps(),
            }
        )


def run_ustat_agreement(
    dist: NamedDistribution, N, n, delta, R=100, seed=0, B_grid=(50, 200), score: ScoreFunction = HUBER, study_id="ustat"
) -> UstatAgreement:
    """Compare the exact U-statistic estimator with its sampled variants.

    The dedup-complete variant draws subsets until all ``C(N, n)`` have
    appeared, so it must agree with exhaustive enumeration up to summation
    order. ``delta`` may be a number or an ``auto:`` rule.
    """
    if N > 14 or n > 4:
        raise ParameterError("agreement studies are limited to N <= 14 and n <= 4")
    total = enumerate_subsets(N, n).k_effective
    ex, dd, dj, pm = [], [], [], []
    inc = {int(B): [] for B in B_grid}
    for r in range(R):
        rng = replication_rng(seed, r)
        x = dist.sample(rng, N)
        ex.append(estimate_ustat(x, n, delta, "exact", score=score).estimate)
        dd.append(estimate_ustat(x, n, delta, "incomplete", B=total, complete=True, seed=r, score=score).estimate)
        pm.append(estimate_ustat(rng.permutation(x), n, delta, "exact", score=score).estimate)
        for B in inc:
            inc[B].append(estimate_ustat(x, n, delta, "incomplete", B=B, seed=r, score=score).estimate)
        dj.append(estimate_block_huber(x, EstimatorConfig(k=N // n, delta=delta, score=score, seed=r)).estimate)
    config = {
        "dist": dist.to_dict(),
        "N": int(N),
        "n": int(n),
        "delta": delta if isinstance(delta, str) else float(delta),
        "R": int(R),
        "seed": int(seed),
        "B_grid": list(inc),
        "true_mean": dist.true_mean,
        "score": score.to_dict(),
    }
    sigma = dist.true_sigma if dist.finite_variance else dist.scale_proxy
    return UstatAgreement(
        np.asarray(ex),
        np.asarray(dd),
        {B: np.asarray(v) for B, v in inc.items()},
        np.asarray(dj),
        np.asarray(pm),
        sigma,
        config,
        study_id,
        dist.label,
        int(N),
        int(n),
        int(seed),
    )


# ---------------------------------------------------------------------------
# config-driven runner

STUDY_KEYS = {
    "deviation": {"study", "study_id", "dist", "N", "R", "seed", "d", "m_directions", "estimator"},
    "regimes": {"study", "study_id", "dist", "N", "R", "seed", "ks", "delta_multipliers", "score", "partition_seed"},
    "contamination": {
        "study",
        "study_id",
        "dist",
        "N",
        "R",
        "seed",
        "d",
        "eps_grid",
        "menu",
        "k_factor",
        "delta_multiplier",
        "delta_exponent",
        "baseline_value",
        "m_directions",
        "k_at_zero",
    },
    "ustat": {"study", "study_id", "dist", "N", "n", "delta", "R", "seed", "B_grid", "score"},
}

_DEFAULTS = {
    "deviation": {"R": 2000, "seed": 0, "d": 1, "m_directions": None},
    "regimes": {"R": 500, "seed": 0, "partition_seed": 0, "score": {"kind": "huber"}},
    "contamination": {
        "R": 500,
        "seed": 0,
        "d": 2,
        "menu": None,
        "k_factor": 5.0,
        "delta_multiplier": 1.0,
        "delta_exponent": 1.0,
        "baseline_value": 1e6,
        "m_directions": None,
        "k_at_zero": None,
    },
    "ustat": {"R": 100, "seed": 0, "B_grid": [50, 200], "score": {"kind": "huber"}},
}

_REQUIRED = {
    "deviation": {"dist", "N", "estimator"},
    "regimes": {"dist", "N", "ks", "delta_multipliers"},
    "contamination": {"dist", "N", "eps_grid"},
    "ustat": {"dist", "N", "n", "delta"},
}


def _parse_mult(m):
    if m in ("inf", "Infinity", math.inf):
        return math.inf
    return float(m)


def validate_study_config(config, study=None):
    """Fill defaults and check a study config; raise :class:`ConfigError` listing bad keys."""
    if not isinstance(config, dict):
        raise ConfigError("study config must be a JSON object", [])
    kind = study or config.get("study")
    if kind not in STUDY_KEYS:
        raise ConfigError(f"unknown study {kind!r}; expected one of {sorted(STUDY_KEYS)}", ["study"])
    unknown = sorted(set(config) - STUDY_KEYS[kind])
    if unknown:
        raise ConfigError(f"unknown keys for {kind} study: {unknown}", unknown)
    missing = sorted(_REQUIRED[kind] - set(config))
    if missing:
        raise ConfigError(f"missing keys for {kind} study: {missing}", missing)
    out = {**_DEFAULTS[kind], **config, "study": kind}
    out.setdefault("study_id", f"{kind}-{out['seed']}")
    bad = []
    try:
        if not (out["dist"] == "least_favorable" and kind == "contamination"):
            NamedDistribution.from_dict(out["dist"])
    except (ParameterError, TypeError, AttributeError, ValueError):
        bad.append("dist")
    for key in ("N", "R"):
        if not (isinstance(out[key], int) and out[key] >= 1):
            bad.append(key)
    if kind == "deviation":
        try:
            EstimatorConfig.from_dict(out["estimator"])
        except (ParameterError, TypeError, ValueError):
            bad.append("estimator")
    if kind == "contamination" and "N" not in bad and "eps_grid" in out:
        try:
            eps = [float(e) for e in out["eps_grid"]]
            for e in eps:
                O = int(round(e * out["N"]))
                k = int(round(float(out["k_factor"]) * e * out["N"])) if e > 0 else 1
                if e > 0 and not k > 2 * O:
                    raise ConfigError(
                        f"k={k} blocks with O={O} outliers at eps={e} violates the requirement k > 2*O; "
                        "raise k_factor above 2",
                        ["k_factor", "eps_grid"],
                    )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            bad.append("eps_grid")
    if kind == "regimes":
        try:
            [_parse_mult(m) for m in out["delta_multipliers"]]
        except (TypeError, ValueError):
            bad.append("delta_multipliers")
    if bad:
        raise ConfigError(f"invalid values for keys: {sorted(set(bad))}", sorted(set(bad)))
    return out


def _execute(cfg):
    kind = cfg["study"]
    dist = cfg["dist"] if cfg["dist"] == "least_favorable" else NamedDistribution.from_dict(cfg["dist"])
    sid = cfg["study_id"]
    if kind == "deviation":
        est = EstimatorConfig.from_dict(cfg["estimator"])
        return run_deviation_study(
            dist, cfg["N"], est, cfg["R"], cfg["seed"], cfg["d"], cfg["m_directions"], study_id=sid
        )
    if kind == "regimes":
        return run_regime_sweep(
            dist,
            cfg["N"],
            cfg["ks"],
            [_parse_mult(m) for m in cfg["delta_multipliers"]],
            cfg["R"],
            cfg["seed"],
            ScoreFunction.from_dict(cfg["score"]),
            cfg["partition_seed"],
            study_id=sid,
        )
    if kind == "contamination":
        return run_contamination_sweep(
            dist,
            cfg["N"],
            cfg["eps_grid"],
            cfg["menu"],
            cfg["k_factor"],
            cfg["R"],
            cfg["seed"],
            cfg["d"],
            cfg["delta_multiplier"],
            cfg["delta_exponent"],
            cfg["baseline_value"],
            cfg["m_directions"],
            cfg["k_at_zero"],
            study_id=sid,
        )
    delta = cfg["delta"]
    if not isinstance(delta, str):
        delta = float(delta)
    return run_ustat_agreement(
        dist,
        cfg["N"],
        cfg["n"],
        delta,
        cfg["R"],
        cfg["seed"],
        cfg["B_grid"],
        ScoreFunction.from_dict(cfg["score"]),
        study_id=sid,
    )


def run_study(config, out_dir, study=None, timing=False):
    """Validate, run, and write ``<study_id>.csv`` and ``<study_id>.json``.

    Output is byte-identical for identical configs unless ``timing`` is set,
    which fills the ``runtime_ms`` column. Returns ``(result, csv_path, json_path)``.
    """
    from pathlib import Path

    cfg = validate_study_config(config, study)
    result = _execute(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg['study_id']}.csv"
    json_path = out / f"{cfg['study_id']}.json"
    csv_path.write_text(rows_to_csv(result.csv_rows(timing)))
    summary = {"resolved_config": _json_safe(cfg), "result": result.summary()}
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return result, csv_path, json_path
