"""Bounded score functions and the convex losses they derive from.

A score ``psi`` is the derivative of an even convex loss ``rho`` with

* ``psi(z) = z`` on ``|z| <= 1``,
* ``psi`` constant for ``z >= 2``,
* ``z - psi(z)`` nondecreasing.

These three conditions force ``|psi| <= 2`` and a Lipschitz constant of 1,
which is what gives every block a bounded influence on the estimator.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Union

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "ScoreFunction",
    "HUBER",
    "huber",
    "smoothed_huber",
    "psi",
    "rho",
    "ValidationReport",
    "validate_assumption1",
]

_KINDS = ("huber", "smoothed_huber")


def _check_finite(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("score functions are only defined for finite arguments")
    return z


@dataclass(frozen=True)
class ScoreFunction:
    """Score ``psi = rho'`` of a Huber-type loss.

    Parameters
    ----------
    kind : {"huber", "smoothed_huber"}
        ``huber`` saturates at 1 (``psi = clip(z, -1, 1)``). ``smoothed_huber``
        follows a monotone cubic from ``psi(transition_lo) = transition_lo``
        to ``psi(transition_hi) = psi_max`` and is flat afterwards.
    transition_lo, transition_hi : float
        Saturation band. The band must sit inside ``[1, 2]``.
    psi_max : float
        Plateau height of ``smoothed_huber``. ``psi_max = 1`` reproduces
        ``huber``; the largest admissible value is
        ``transition_lo + (transition_hi - transition_lo)``.
    """

    kind: str = "huber"
    transition_lo: float = 1.0
    transition_hi: float = 2.0
    psi_max: float = 1.0
    _coef: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown score kind {self.kind!r}; expected one of {_KINDS}")
        lo, hi = float(self.transition_lo), float(self.transition_hi)
        if not (lo == 1.0 and 1.0 < hi <= 2.0):
            raise ParameterError("saturation band must start at 1 and end in (1, 2]")
        width = hi - lo
        rise = float(self.psi_max) - lo
        if self.kind == "huber" and rise != 0.0:
            raise ParameterError("huber has psi_max = 1; use kind='smoothed_huber'")
        if not (0.0 <= rise <= width):
            raise ParameterError(
                f"psi_max must lie in [{lo}, {lo + width}] to keep psi 1-Lipschitz"
            )
        # Hermite end slopes keeping psi' within [0, 1] for every mean slope in [0, 1].
        mean_slope = rise / width
        s0 = min(1.0, 3.0 * mean_slope)
        s1 = max(0.0, 3.0 * mean_slope - 2.0)
        b = width * s0
        c = 3.0 * rise - 2.0 * b - width * s1
        d = b + width * s1 - 2.0 * rise
        object.__setattr__(self, "_coef", (lo, b, c, d))

    @property
    def sup_norm(self):
        """``max |psi|``, attained on the plateau."""
        return float(self.psi_max)

    def psi(self, z):
        return self._psi(_check_finite(z))

    def _psi(self, z):
        # unchecked evaluation for callers that have validated their input
        if self.kind == "huber":
            return np.clip(z, -1.0, 1.0)
        a, b, c, d = self._coef
        lo, hi = self.transition_lo, self.transition_hi
        u = np.abs(z)
        t = np.clip((u - lo) / (hi - lo), 0.0, 1.0)
        band = a + t * (b + t * (c + t * d))
        core = np.where(u <= lo, u, np.where(u >= hi, self.psi_max, band))
        return np.copysign(core, z)

    def rho(self, z):
        z = _check_finite(z)
        u = np.abs(z)
        if self.kind == "huber":
            return np.where(u <= 1.0, 0.5 * u * u, u - 0.5)
        a, b, c, d = self._coef
        lo, hi = self.transition_lo, self.transition_hi
        width = hi - lo

        def band_integral(t):
            return width * t * (a + t * (b / 2.0 + t * (c / 3.0 + t * d / 4.0)))

        t = np.clip((u - lo) / width, 0.0, 1.0)
        at_hi = 0.5 * lo * lo + band_integral(1.0)
        return np.where(
            u <= lo,
            0.5 * u * u,
            np.where(u >= hi, at_hi + self.psi_max * (u - hi), 0.5 * lo * lo + band_integral(t)),
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "transition_lo": self.transition_lo,
            "transition_hi": self.transition_hi,
            "psi_max": self.psi_max,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


HUBER = ScoreFunction()


def huber():
    return HUBER


def smoothed_huber(psi_max=1.0, transition_hi=2.0):
    return ScoreFunction("smoothed_huber", 1.0, transition_hi, psi_max)


def psi(s: ScoreFunction, z):
    """Evaluate the score; scalar in, float out."""
    out = s.psi(z)
    return float(out) if np.ndim(out) == 0 else out


def rho(s: ScoreFunction, z):
    """Evaluate the loss; scalar in, float out."""
    out = s.rho(z)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ValidationReport:
    """Largest violation of each score invariant on a grid (0 means exact)."""

    grid_step: float
    violations: Dict[str, float]

    @property
    def max_violation(self):
        return max(self.violations.values())

    def passed(self, tol=0.0):
        return self.max_violation <= tol

    def to_dict(self):
        return {"grid_step": self.grid_step, "violations": dict(self.violations)}


def validate_assumption1(
    s: Union[ScoreFunction, Callable], grid_step=1e-3, half_width=10.0
) -> ValidationReport:
    """Check the score invariants on a symmetric grid over ``[-10, 10]``.

    ``s`` may be a :class:`ScoreFunction` or any vectorised callable, so
    deliberately broken scores can be probed. Violations are reported, never
    raised.
    """
    if grid_step <= 0:
        raise ParameterError("grid_step must be positive")
    f = s.psi if isinstance(s, ScoreFunction) else s
    m = int(round(half_width / grid_step))
    # integer multiples keep the grid exactly symmetric
    z = np.arange(-m, m + 1, dtype=float) * grid_step
    p = np.asarray(f(z), dtype=float)
    p_neg = np.asarray(f(-z), dtype=float)
    p2 = float(np.asarray(f(np.array([2.0])), dtype=float)[0])

    dz = np.diff(z)
    dp = np.diff(p)
    inner = np.abs(z) <= 1.0
    outer = z >= 2.0
    resid = z - p

    def worst(x):
        return float(max(0.0, np.max(x))) if np.size(x) else 0.0

    violations = {
        "odd": worst(np.abs(p + p_neg)),
        "identity": worst(np.abs(p[inner] - z[inner])),
        "saturation": worst(np.abs(p[outer] - p2)),
        "lipschitz": worst(np.abs(dp) - np.abs(dz)),
        "bounded": worst(np.abs(p) - 2.0),
        "residual_monotone": worst(-np.diff(resid)),
    }
    return ValidationReport(grid_step=grid_step, violations=violations)
