"""Adversarial contamination: ``O`` arbitrary points appended to a clean sample.

The estimators never see which rows are outliers; the index set returned by
:func:`contaminate` is for diagnostics only.
"""

import math
from dataclasses import dataclass, asdict
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError

__all__ = [
    "STRATEGIES",
    "ContaminationSpec",
    "pilot_estimate",
    "contaminate",
    "contamination_damages",
    "adaptive_worst_of",
    "check_block_budget",
]

STRATEGIES = ("point_mass", "directional_shift", "cluster_at_estimate_plus")


@dataclass(frozen=True)
class ContaminationSpec:
    """How many outliers to append and where to put them.

    Strategies
    ----------
    point_mass
        Every outlier equals ``value`` (scalar, broadcast over coordinates).
    directional_shift
        Outliers sit at ``pilot + magnitude * direction / ||direction||``;
        ``direction`` defaults to the first coordinate axis.
    cluster_at_estimate_plus
        Outliers sit at ``pilot + offset`` (scalar offsets are broadcast).

    ``pilot`` is :func:`pilot_estimate` of the clean sample, i.e. what an
    adversary who inspects the data would compute.
    """

    count: int
    strategy: str = "point_mass"
    value: float = 0.0
    magnitude: float = 0.0
    direction: Optional[tuple] = None
    offset: object = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 0:
            raise ParameterError(f"outlier count must be a nonnegative integer, got {self.count!r}")
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.direction is not None:
            object.__setattr__(self, "direction", tuple(float(v) for v in np.ravel(self.direction)))
        if not np.isscalar(self.offset):
            object.__setattr__(self, "offset", tuple(float(v) for v in np.ravel(self.offset)))

    def to_dict(self):
        d = asdict(self)
        d["direction"] = list(self.direction) if self.direction is not None else None
        d["offset"] = list(self.offset) if isinstance(self.offset, tuple) else self.offset
        return d

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown contamination keys: {sorted(unknown)}")
        return cls(**d)

    def with_count(self, count):
        return ContaminationSpec(**{**asdict(self), "count": count})


def pilot_estimate(clean, seed=0):
    """Coordinatewise median-of-means with ``k = floor(sqrt(N))`` blocks."""
    from .univariate import estimate_mom

    x = np.asarray(clean, dtype=float)
    k = max(1, math.isqrt(x.shape[0]))
    if x.ndim == 1:
        return np.array(estimate_mom(x, k, seed))
    return np.array([estimate_mom(col, k, seed) for col in x.T])


def _outlier_rows(clean, spec: ContaminationSpec):
    x = np.asarray(clean, dtype=float)
    d = 1 if x.ndim == 1 else x.shape[1]
    if spec.strategy == "point_mass":
        point = np.full(d, float(spec.value))
    else:
        pilot = np.atleast_1d(pilot_estimate(x, spec.seed))
        if spec.strategy == "directional_shift":
            u = np.zeros(d) if spec.direction is None else np.asarray(spec.direction, dtype=float)
            if spec.direction is None:
                u[0] = 1.0
            if u.shape != (d,) or not np.linalg.norm(u) > 0:
                raise ParameterError(f"direction must be a nonzero vector of length {d}")
            point = pilot + spec.magnitude * u / np.linalg.norm(u)
        else:
            off = np.broadcast_to(np.asarray(spec.offset, dtype=float), (d,))
            point = pilot + off
    rows = np.tile(point, (spec.count, 1))
    return rows[:, 0] if x.ndim == 1 else rows


def contaminate(clean, spec: ContaminationSpec):
    """Append ``spec.count`` adversarial rows and shuffle with ``spec.seed``.

    Returns
    -------
    sample : ndarray
        ``N + O`` rows; the clean rows are value-identical to the input.
    outlier_index : ndarray
        Positions of the appended rows after shuffling.
    """
    x = np.asarray(clean, dtype=float)
    if x.ndim not in (1, 2):
        raise ParameterError("clean sample must be a vector or an (N, d) matrix")
    N = x.shape[0]
    if spec.count >= N:
        raise ParameterError(f"need fewer outliers than clean points (O={spec.count}, N={N})")
    out = _outlier_rows(x, spec)
    merged = np.concatenate([x, out], axis=0)
    perm = np.random.default_rng(spec.seed).permutation(merged.shape[0])
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.size)
    return merged[perm], np.sort(inverse[N:])


def _damage(estimate, true_mean):
    return float(np.linalg.norm(np.atleast_1d(np.asarray(estimate, dtype=float) - true_mean)))


def contamination_damages(clean, specs: Sequence[ContaminationSpec], target: Callable, true_mean):
    """``|target(contaminated) - true_mean|`` (Euclidean norm) for each spec."""
    return [_damage(target(contaminate(clean, s)[0]), true_mean) for s in specs]


def adaptive_worst_of(clean, specs: Sequence[ContaminationSpec], target: Callable, true_mean):
    """The spec doing the most damage to ``target``.

    ``target`` maps a raw sample to an estimate. Ties go to the earliest spec.
    """
    if not specs:
        raise ParameterError("need at least one contamination spec")
    damages = contamination_damages(clean, specs, target, true_mean)
    return specs[int(np.argmax(damages))]


def check_block_budget(k, outliers):
    """Raise unless ``k > 2 * O``, the regime where a clean majority of blocks is guaranteed."""
    if not k > 2 * outliers:
        raise ParameterError(f"k={k} blocks with O={outliers} outliers violates the requirement k > 2*O")
