"""Scalar robust mean estimators.

The main estimator is the root of the block score

    G(z) = k**-0.5 * sum_j psi(sqrt(n) * (mean_j - z) / delta)

where ``mean_j`` are block means. Small ``delta`` (on the scale of the data)
makes it behave like median-of-means, ``n = 1`` with ``delta ~ sigma*sqrt(N)``
gives a Catoni-type estimator, and ``delta -> inf`` gives the sample mean.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Union

import numpy as np
from scipy import stats

from .blocking import (
    ENUMERATION_CAP,
    BlockMeans,
    BlockScheme,
    block_means,
    enumerate_subsets,
    partition_disjoint,
    sample_subsets,
)
from .errors import NumericError, ParameterError
from .score import HUBER, ScoreFunction

__all__ = [
    "EstimatorConfig",
    "EstimateResult",
    "RootResult",
    "MAD_TO_SIGMA",
    "score_curve",
    "block_roots",
    "estimate_from_block_means",
    "estimate_block_huber",
    "estimate_catoni_limit",
    "estimate_mom",
    "estimate_ustat",
    "default_delta",
    "resolve_delta",
    "robust_scale",
    "parse_delta_rule",
    "sample_mean",
    "trimmed_mean",
]

MAD_TO_SIGMA = 1.4826

DeltaSpec = Union[float, str]


def parse_delta_rule(rule):
    """Parse ``"auto:<regime>[:s]"`` into ``(regime, s)``.

    Regimes: ``mom_like``, ``catoni_like``, ``confidence`` (needs ``s``).
    """
    if not isinstance(rule, str) or not rule.startswith("auto:"):
        raise ParameterError(f"delta rule must look like 'auto:<regime>', got {rule!r}")
    parts = rule.split(":")[1:]
    regime = parts[0]
    if regime not in ("mom_like", "catoni_like", "confidence"):
        raise ParameterError(f"unknown delta regime {regime!r}")
    s = None
    if regime == "confidence":
        if len(parts) != 2:
            raise ParameterError("confidence regime needs a level: 'auto:confidence:<s>'")
        try:
            s = float(parts[1])
        except ValueError:
            raise ParameterError(f"bad confidence level {parts[1]!r}") from None
        if not s > 0:
            raise ParameterError("confidence level s must be positive")
    elif len(parts) != 1:
        raise ParameterError(f"regime {regime!r} takes no argument")
    return regime, s


@dataclass(frozen=True)
class EstimatorConfig:
    """Everything needed to reproduce an estimate.

    ``delta`` is a positive number in data units, ``math.inf`` for the
    sample-mean limit, or a rule string ``"auto:<regime>[:s]"`` resolved per
    sample by :func:`default_delta`. ``n=None`` means ``n = N // k``.
    """

    k: int
    delta: DeltaSpec = "auto:mom_like"
    n: Optional[int] = None
    score: ScoreFunction = HUBER
    root_tol: float = 1e-10
    max_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.delta, str):
            parse_delta_rule(self.delta)
        elif not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta!r}")
        if not self.root_tol > 0:
            raise ParameterError("root_tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ParameterError("max_iter must be a positive integer")

    def to_dict(self):
        d = asdict(self)
        d["score"] = self.score.to_dict()
        if isinstance(self.delta, float) and math.isinf(self.delta):
            d["delta"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "score" in d and isinstance(d["score"], dict):
            d["score"] = ScoreFunction.from_dict(d["score"])
        if d.get("delta") == "inf":
            d["delta"] = math.inf
        return cls(**d)


@dataclass
class RootResult:
    """Column-wise output of :func:`block_roots`."""

    roots: np.ndarray
    iterations: np.ndarray
    widths: np.ndarray
    converged: np.ndarray


@dataclass
class EstimateResult:
    estimate: float
    iterations: int
    bracket_width: float
    converged: bool
    delta: float
    estimator: str
    k_effective: int
    n: int
    scheme_digest: str = ""
    config: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        if math.isinf(self.delta):
            d["delta"] = "inf"
        return d


def score_curve(z, bm: BlockMeans, cfg: EstimatorConfig):
    """``G(z) = k**-0.5 * sum_j psi(sqrt(n) * (mean_j - z) / delta)``."""
    values = np.asarray(bm.values, dtype=float)
    if values.size == 0:
        raise ParameterError("block means are empty")
    if isinstance(cfg.delta, str):
        raise ParameterError("score_curve needs a numeric delta; resolve the rule first")
    u = math.sqrt(bm.n) * (values - z) / cfg.delta
    return float(cfg.score.psi(u).sum() / math.sqrt(values.shape[0]))


def block_roots(values, n, delta, score: ScoreFunction = HUBER, tol=1e-10, max_iter=200) -> RootResult:
    """Roots of the block score for every column of ``values``.

    Parameters
    ----------
    values : array, shape (k,) or (k, m)
        Block means; each column is an independent problem.
    n : int
        Block size.
    delta : float or array of shape (m,)
        Scale per column. ``inf`` yields the mean of the column.
    tol : float
        Absolute bracket width at which a column stops.

    Notes
    -----
    The score is nonincreasing in ``z`` and strictly positive (negative) one
    ``delta / sqrt(n)`` left (right) of the extreme block means, so the zero
    set is a nonempty closed interval inside that bracket. Two bisections
    locate its left and right ends and the midpoint is returned; for a
    single root both ends coincide. Columns freeze individually so results
    do not depend on which other columns share the call.
    """
    v = np.asarray(values, dtype=float)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] == 0:
        raise ParameterError("values must be a nonempty (k,) or (k, m) array")
    if not np.all(np.isfinite(v)):
        raise NumericError("block means contain non-finite values")
    m = v.shape[1]
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (m,)).copy()
    if not np.all(delta > 0):
        raise ParameterError("delta must be positive")
    root_n = math.sqrt(n)

    roots = np.empty(m)
    iters = np.zeros(m, dtype=np.int64)
    widths = np.zeros(m)
    converged = np.ones(m, dtype=bool)

    linear = np.isinf(delta)
    if linear.any():
        roots[linear] = v[:, linear].mean(axis=0)

    cols = np.flatnonzero(~linear)
    if cols.size:
        # (columns, k) layout so the score sum reduces over contiguous memory
        vv = np.ascontiguousarray(v[:, cols].T)
        scale = root_n / delta[cols]
        margin = delta[cols] / root_n
        lo0 = vv.min(axis=1) - margin
        hi0 = vv.max(axis=1) + margin
        if not (np.all(np.isfinite(lo0)) and np.all(np.isfinite(hi0))):
            raise NumericError("root bracket is not finite")
        # rows: 0 = left end of zero set, 1 = right end
        lo = np.vstack([lo0, lo0])
        hi = np.vstack([hi0, hi0])
        active = np.ones(cols.size, dtype=bool)
        count = np.zeros(cols.size, dtype=np.int64)
        idx = np.arange(cols.size)
        sub, sub_scale = vv, scale[:, None]
        for _ in range(int(max_iter)):
            if not active[idx].all():
                idx = np.flatnonzero(active)
                sub, sub_scale = vv[idx], scale[idx, None]
            if idx.size == 0:
                break
            l, h = lo[:, idx], hi[:, idx]
            mid = 0.5 * (l + h)
            # inputs were checked above, so the unchecked score is safe here
            g = score._psi((sub[None] - mid[:, :, None]) * sub_scale).sum(axis=-1)
            go_right = np.empty(g.shape, dtype=bool)
            np.greater(g[0], 0, out=go_right[0])
            np.greater_equal(g[1], 0, out=go_right[1])
            lo[:, idx] = np.where(go_right, mid, l)
            hi[:, idx] = np.where(go_right, h, mid)
            count[idx] += 1
            w = (hi[:, idx] - lo[:, idx]).max(axis=0)
            # stop at tolerance or once the midpoint no longer moves in floating point
            exhausted = np.all((mid == l) | (mid == h), axis=0)
            active[idx] = ~((w <= tol) | exhausted)
        w_all = (hi - lo).max(axis=0)
        roots[cols] = 0.5 * (0.5 * (lo[0] + hi[0]) + 0.5 * (lo[1] + hi[1]))
        iters[cols] = count
        widths[cols] = w_all
        converged[cols] = ~active

    if squeeze:
        return RootResult(roots[:1], iters[:1], widths[:1], converged[:1])
    return RootResult(roots, iters, widths, converged)


def estimate_from_block_means(
    bm: BlockMeans, delta, score: ScoreFunction = HUBER, root_tol=1e-10, max_iter=200
) -> EstimateResult:
    """Root of the block score for precomputed scalar block means."""
    values = np.asarray(bm.values, dtype=float)
    if values.ndim != 1:
        raise ParameterError("expected scalar block means")
    r = block_roots(values, bm.n, delta, score, root_tol, max_iter)
    return EstimateResult(
        estimate=float(r.roots[0]),
        iterations=int(r.iterations[0]),
        bracket_width=float(r.widths[0]),
        converged=bool(r.converged[0]),
        delta=float(delta),
        estimator="block_huber",
        k_effective=values.shape[0],
        n=bm.n,
        scheme_digest=bm.scheme_digest,
    )


def _as_vector(sample):
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ParameterError("sample must be a nonempty 1-d array")
    if not np.all(np.isfinite(x)):
        raise NumericError("sample contains non-finite values")
    return x


def robust_scale(sample, k=None, seed=0):
    """``1.4826 * MAD`` about the median-of-means estimate.

    ``k`` defaults to ``max(1, floor(sqrt(N)))``. For ``(N, d)`` input the
    largest coordinate scale is returned. Degenerate samples fall back to the
    standard deviation, then to 1.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim == 2:
        return max(robust_scale(col, k, seed) for col in x.T)
    x = _as_vector(x)
    if k is None:
        k = max(1, int(math.isqrt(x.size)))
    center = estimate_mom(x, min(int(k), x.size), seed)
    s = MAD_TO_SIGMA * float(np.median(np.abs(x - center)))
    if s > 0:
        return s
    s = float(np.std(x))
    return s if s > 0 else 1.0


def default_delta(sample, k, regime="mom_like", s=None, seed=0):
    """Truncation level from a robust scale estimate.

    ``mom_like`` returns ``sigma_hat``, ``catoni_like`` returns
    ``sigma_hat * sqrt(N)`` (for use with ``n = 1``) and ``confidence``
    returns ``sigma_hat * sqrt(k / s)``.
    """
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ParameterError("sample is empty")
    if regime == "confidence":
        if s is None or not s > 0:
            raise ParameterError("confidence regime needs s > 0")
        factor = math.sqrt(k / s)
    elif regime == "mom_like":
        factor = 1.0
    elif regime == "catoni_like":
        factor = math.sqrt(x.shape[0])
    else:
        raise ParameterError(f"unknown delta regime {regime!r}")
    return robust_scale(x, k, seed) * factor


def resolve_delta(delta: DeltaSpec, sample, k, seed=0):
    if isinstance(delta, str):
        regime, s = parse_delta_rule(delta)
        return default_delta(sample, k, regime, s, seed)
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta!r}")
    return float(delta)


def estimate_block_huber(sample, cfg: EstimatorConfig) -> EstimateResult:
    """Block-score root estimator on a seeded disjoint partition.

    Examples
    --------
    >>> x = np.arange(1.0, 1001.0)
    >>> round(estimate_block_huber(x, EstimatorConfig(k=10, delta=1e9)).estimate, 6)
    500.5
    """
    x = _as_vector(sample)
    scheme = partition_disjoint(x.size, cfg.k, cfg.seed, cfg.n)
    bm = block_means(x, scheme)
    delta = resolve_delta(cfg.delta, x, cfg.k, cfg.seed)
    res = estimate_from_block_means(bm, delta, cfg.score, cfg.root_tol, cfg.max_iter)
    res.config = cfg.to_dict()
    return res


def estimate_catoni_limit(sample, delta, score: ScoreFunction = HUBER, root_tol=1e-10, max_iter=200):
    """The ``n = 1, k = N`` member of the family (a Catoni-type estimator)."""
    x = _as_vector(sample)
    cfg = EstimatorConfig(k=x.size, n=1, delta=delta, score=score, root_tol=root_tol, max_iter=max_iter)
    res = estimate_block_huber(x, cfg)
    res.estimator = "catoni"
    return res


def estimate_mom(sample, k, seed=0):
    """Median of ``k`` disjoint block means (even ``k``: average of the middle two)."""
    x = _as_vector(sample)
    scheme = partition_disjoint(x.size, k, seed)
    return float(np.median(block_means(x, scheme).values))


def estimate_ustat(
    sample,
    n,
    delta,
    mode="exact",
    B=None,
    score: ScoreFunction = HUBER,
    seed=0,
    complete=False,
    cap=ENUMERATION_CAP,
    root_tol=1e-10,
    max_iter=200,
) -> EstimateResult:
    """Permutation-invariant variant built on size-``n`` subsets.

    ``mode="exact"`` uses all ``C(N, n)`` subsets; ``mode="incomplete"``
    uses ``B`` subsets drawn uniformly with replacement (or ``B`` distinct
    ones when ``complete=True``).
    """
    x = _as_vector(sample)
    if mode == "exact":
        scheme = enumerate_subsets(x.size, n, cap)
    elif mode == "incomplete":
        if B is None:
            raise ParameterError("incomplete mode needs the number of subsets B")
        scheme = sample_subsets(x.size, n, B, seed, complete=complete)
    else:
        raise ParameterError(f"mode must be 'exact' or 'incomplete', got {mode!r}")
    k = max(1, x.size // int(n))
    delta = resolve_delta(delta, x, k, seed)
    res = estimate_from_block_means(block_means(x, scheme), delta, score, root_tol, max_iter)
    res.estimator = f"ustat_{mode}"
    res.config = {
        "n": int(n),
        "mode": mode,
        "B": B,
        "complete": complete,
        "delta": res.to_dict()["delta"],
        "score": score.to_dict(),
        "seed": seed,
        "root_tol": root_tol,
        "max_iter": max_iter,
    }
    return res


def sample_mean(sample):
    return float(np.mean(_as_vector(sample)))


def trimmed_mean(sample, proportion=0.1):
    """Symmetric trimmed mean; ``proportion`` is cut from each tail."""
    return float(stats.trim_mean(_as_vector(sample), proportion))
