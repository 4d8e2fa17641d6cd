"""Mean of a random vector from robust one-dimensional projections.

For a finite set of unit directions ``v_i`` with robust estimates
``theta_i`` of ``<mu, v_i>``, the estimate is a point of the smallest
non-empty intersection of the slabs ``{y : |<y, v_i> - theta_i| <= eps}``,
i.e. a minimiser of ``max_i |<y, v_i> - theta_i|``.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .blocking import partition_disjoint
from .errors import NumericError, ParameterError
from .univariate import EstimatorConfig, block_roots, estimate_mom, resolve_delta

__all__ = [
    "DirectionSet",
    "DirectionalEstimates",
    "SlabSolution",
    "directional_estimates",
    "slab_epsilon",
    "slab_lower_bound",
    "solve_slab_intersection",
    "coordinatewise_mom",
    "estimate_multivariate",
]


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Unit vectors stored as the rows of ``vectors`` (shape ``(m, d)``)."""

    vectors: np.ndarray
    kind: str = "user"
    seed: Optional[int] = None

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise ParameterError("need at least one direction in R^d, d >= 1")
        if not np.all(np.isfinite(v)):
            raise ParameterError("directions must be finite")
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms == 0):
            raise ParameterError("zero vector is not a direction")
        v = v / norms[:, None]
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def m(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]

    @classmethod
    def basis(cls, d):
        return cls(np.eye(d), "basis")

    @classmethod
    def random_sphere(cls, d, m, seed=0):
        """``m`` directions uniform on the unit sphere of ``R^d``."""
        if m < 1:
            raise ParameterError("m must be positive")
        g = np.random.default_rng(seed).standard_normal((m, d))
        # a zero row has probability zero; redraw it anyway
        while np.any(np.linalg.norm(g, axis=1) == 0):
            g = np.random.default_rng(seed + 1).standard_normal((m, d))
        return cls(g, "random_sphere", seed)

    def union(self, other: "DirectionSet"):
        if other.d != self.d:
            raise ParameterError("direction sets live in different dimensions")
        return DirectionSet(np.vstack([self.vectors, other.vectors]), f"{self.kind}+{other.kind}", self.seed)

    def to_json(self):
        return json.dumps({"kind": self.kind, "seed": self.seed, "vectors": self.vectors.tolist()})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(np.asarray(d["vectors"], dtype=float), d.get("kind", "user"), d.get("seed"))


@dataclass(eq=False)
class DirectionalEstimates:
    directions: DirectionSet
    theta: np.ndarray
    config: EstimatorConfig
    delta: float
    scheme_digest: str = ""
    converged: bool = True


@dataclass(eq=False)
class SlabSolution:
    """Minimiser of the largest slab violation.

    ``residual_gap`` is ``eps_star`` minus a certified lower bound on the
    optimum, so the true minimum lies in ``[eps_star - residual_gap, eps_star]``.
    """

    mu_hat: np.ndarray
    eps_star: float
    solver_iterations: int
    residual_gap: float
    lower_bound: float
    method: str
    converged: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mu_hat": [float(v) for v in self.mu_hat],
            "eps_star": self.eps_star,
            "solver_iterations": self.solver_iterations,
            "residual_gap": self.residual_gap,
            "lower_bound": self.lower_bound,
            "method": self.method,
            "converged": self.converged,
            **self.extra,
        }


def _as_matrix(data):
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ParameterError("data must be a nonempty (N, d) matrix")
    if not np.all(np.isfinite(x)):
        raise NumericError("data contain non-finite values")
    return x


def directional_estimates(data, dirs: DirectionSet, cfg: EstimatorConfig) -> DirectionalEstimates:
    """Block-score estimate of every projection, all sharing one partition."""
    x = _as_matrix(data)
    if x.shape[1] != dirs.d:
        raise ParameterError(f"data have d={x.shape[1]} but directions have d={dirs.d}")
    N = x.shape[0]
    scheme = partition_disjoint(N, cfg.k, cfg.seed, cfg.n)
    delta = resolve_delta(cfg.delta, x, cfg.k, cfg.seed)
    proj = x @ dirs.vectors.T
    means = proj[scheme.blocks].mean(axis=1)
    r = block_roots(means, scheme.n, delta, cfg.score, cfg.root_tol, cfg.max_iter)
    return DirectionalEstimates(dirs, r.roots, cfg, delta, scheme.digest, bool(r.converged.all()))


def slab_epsilon(y, de: DirectionalEstimates):
    """``max_i |<y, v_i> - theta_i|``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (de.directions.d,):
        raise ParameterError(f"point must have shape ({de.directions.d},)")
    return float(np.max(np.abs(de.directions.vectors @ y - de.theta)))


def slab_lower_bound(A, theta, w):
    """Certified lower bound on ``min_y max_i |A_i y - theta_i|``.

    Any ``w`` with ``A.T @ w = 0`` and ``||w||_1 <= 1`` gives
    ``w @ theta <= min``; ``w`` is first projected onto the null space of
    ``A.T`` and rescaled.
    """
    w = np.asarray(w, dtype=float)
    coef, *_ = np.linalg.lstsq(A, w, rcond=None)
    w = w - A @ coef
    norm1 = np.abs(w).sum()
    if norm1 == 0:
        return 0.0
    return max(0.0, float(w @ theta) / max(1.0, norm1))


def _lp_solve(A, theta):
    m, d = A.shape
    c = np.zeros(d + 1)
    c[-1] = 1.0
    ones = np.ones((m, 1))
    A_ub = np.block([[A, -ones], [-A, -ones]])
    b_ub = np.concatenate([theta, -theta])
    bounds = [(None, None)] * d + [(0, None)]
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise NumericError(f"slab LP failed: {res.message}")
    lam = -np.asarray(res.ineqlin.marginals)
    w = lam[m:] - lam[:m]
    return res.x[:d], w, int(getattr(res, "nit", 0))


def _polish(A, theta, y, eps):
    """Re-solve the active constraints exactly; keeps the better point."""
    r = A @ y - theta
    scale = max(1.0, float(np.abs(theta).max()))
    act = np.flatnonzero(np.abs(np.abs(r) - eps) <= 1e-7 * scale)
    if act.size == 0:
        return y
    s = np.sign(r[act])
    s[s == 0] = 1.0
    M = np.hstack([A[act], -s[:, None]])
    sol, *_ = np.linalg.lstsq(M, theta[act], rcond=None)
    cand = sol[:-1]
    if np.max(np.abs(A @ cand - theta)) < np.max(np.abs(r)):
        return cand
    return y


def _subgradient_solve(A, theta, y0, tol, max_iter, check_every=50):
    """Subgradient descent with a Polyak-type step on the best value so far.

    Tracks the ergodic average of the dual one-hot weights so a certified
    lower bound is available at any iteration.
    """
    y = np.array(y0, dtype=float)
    r = A @ y - theta
    i = int(np.argmax(np.abs(r)))
    f = abs(r[i])
    best_y, best_f = y.copy(), f
    w_sum = np.zeros(A.shape[0])
    step_sum = 0.0
    lb = 0.0
    it = 0
    for it in range(1, int(max_iter) + 1):
        s = 1.0 if r[i] >= 0 else -1.0
        g = s * A[i]
        gg = float(g @ g)
        # target a value below the best seen; the offset shrinks as the gap closes
        gamma = max(best_f - lb, tol) / math.sqrt(it)
        step = (f - best_f + gamma) / gg
        y = y - step * g
        w_sum[i] -= s * step
        step_sum += step
        r = A @ y - theta
        i = int(np.argmax(np.abs(r)))
        f = abs(r[i])
        if f < best_f:
            best_f, best_y = f, y.copy()
        if it % check_every == 0:
            lb = max(lb, slab_lower_bound(A, theta, w_sum / step_sum))
            if best_f - lb <= tol:
                break
    if step_sum > 0:
        lb = max(lb, slab_lower_bound(A, theta, w_sum / step_sum))
    return best_y, best_f, lb, it


def solve_slab_intersection(
    de: DirectionalEstimates, tol=1e-9, max_iter=None, method="lp", init=None
) -> SlabSolution:
    """Minimise ``y -> slab_epsilon(y, de)``.

    Parameters
    ----------
    method : {"lp", "subgradient"}
        ``lp`` solves the linear program ``min eps s.t. |A y - theta| <= eps``
        with HiGHS and polishes the active set. ``subgradient`` runs a
        dependency-free Polyak-type subgradient method from ``init``.
    tol : float
        Target certified optimality gap. Not reaching it is reported through
        ``converged`` and ``residual_gap`` rather than raised.
    max_iter : int, optional
        Iteration cap for the subgradient method; default ``10 * d * m``.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    A = de.directions.vectors
    theta = np.asarray(de.theta, dtype=float)
    m, d = A.shape
    if method == "lp":
        y, w, nit = _lp_solve(A, theta)
        eps_lp = float(np.max(np.abs(A @ y - theta)))
        y = _polish(A, theta, y, eps_lp)
        eps = float(np.max(np.abs(A @ y - theta)))
        lb = slab_lower_bound(A, theta, w)
    elif method == "subgradient":
        if init is None:
            init, *_ = np.linalg.lstsq(A, theta, rcond=None)
        if max_iter is None:
            max_iter = 10 * d * m
        y, eps, lb, nit = _subgradient_solve(A, theta, np.asarray(init, dtype=float), tol, max_iter)
    else:
        raise ParameterError(f"unknown method {method!r}")
    gap = max(0.0, eps - lb)
    return SlabSolution(np.asarray(y, dtype=float), eps, int(nit), gap, lb, method, gap <= tol)


def coordinatewise_mom(data, k, seed=0):
    x = _as_matrix(data)
    k = min(int(k), x.shape[0])
    return np.array([estimate_mom(col, k, seed) for col in x.T])


def estimate_multivariate(
    data, cfg: EstimatorConfig, m_directions=None, tol=1e-9, method="lp", direction_seed=None
) -> SlabSolution:
    """Random sphere directions plus the coordinate basis, then the slab solve.

    ``m_directions`` defaults to ``32 * d``. Directions are seeded by
    ``direction_seed`` (default: ``cfg.seed``).
    """
    x = _as_matrix(data)
    d = x.shape[1]
    if m_directions is None:
        m_directions = 32 * d
    seed = cfg.seed if direction_seed is None else direction_seed
    dirs = DirectionSet.random_sphere(d, int(m_directions), seed).union(DirectionSet.basis(d))
    de = directional_estimates(x, dirs, cfg)
    init = coordinatewise_mom(x, cfg.k, cfg.seed) if method == "subgradient" else None
    sol = solve_slab_intersection(de, tol=tol, method=method, init=init)
    sol.extra = {"delta": de.delta, "m_directions": dirs.m, "scheme_digest": de.scheme_digest}
    return sol
