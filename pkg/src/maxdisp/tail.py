"""Tail probabilities for uniform sampling on a radius-sqrt(n) sphere.

For a fixed nonzero vector b in R^n (n >= 2) and eta drawn uniformly from the
sphere of radius sqrt(n), the tail function

    tail_s(n, a) = Pr(b . eta >= a * ||b||)

depends only on n and a.  For 0 <= a <= sqrt(n) it equals the normalized
spherical-cap integral

    S(n, a) = int_{a/sqrt(n)}^1 (1 - t^2)^((n-3)/2) dt
              / (2 int_0^1 (1 - t^2)^((n-3)/2) dt)

and it vanishes beyond a = sqrt(n).  Substituting u = t^2 turns the integral
into a regularized incomplete beta function, which is how it is computed for
n >= 3; n = 2 uses the closed form arccos(a / sqrt(2)) / pi.  Either way the
absolute accuracy is far better than the 1e-10 promised by the contract.

Two classical estimates are exposed through checks and used by the sampling
algorithms: S(n, a) < exp(-0.45 a^2) for every n >= 2 and a > 0, and the
derived inverse estimate S^{-1}(n, beta) < sqrt((20/9) ln(1/beta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "TailQuery",
    "TailBoundReport",
    "tail_s",
    "tail_s_inverse",
    "sample_sphere",
    "sample_sphere_batch",
    "tail_bound_check",
]

_INVERSE_TOL = 1e-10
_INVERSE_MAX_ITER = 200


def _check_n(n) -> int:
    if int(n) != n or int(n) < 2:
        raise ValueError(f"sphere dimension must be an integer >= 2, got {n!r}")
    return int(n)


def tail_s(n: int, alpha: float) -> float:
    """Probability that a radius-sqrt(n) sphere point has b-projection >= alpha * ||b||.

    Parameters
    ----------
    n : int
        Ambient dimension, n >= 2.
    alpha : float
        Nonnegative threshold.  Values above sqrt(n) give probability 0.

    Returns
    -------
    float in [0, 1/2], decreasing in alpha, with tail_s(n, 0) = 1/2.
    """
    n = _check_n(n)
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0.0:
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    if alpha * alpha >= n:
        return 0.0
    if n == 2:
        return float(np.arccos(alpha / math.sqrt(2.0)) / np.pi)
    # u = t^2 maps the cap integral onto a regularized incomplete beta tail
    return float(0.5 * (1.0 - special.betainc(0.5, 0.5 * (n - 1), alpha * alpha / n)))


def tail_s_inverse(n: int, beta: float) -> float:
    """Solve tail_s(n, alpha) = beta for alpha, beta in the open interval (0, 1/2).

    Bisection on (0, sqrt(n)); stops once |tail_s - beta| <= 1e-10, within at
    most 200 iterations.
    """
    n = _check_n(n)
    beta = float(beta)
    if not (0.0 < beta < 0.5):
        raise ValueError(f"beta must lie strictly between 0 and 0.5, got {beta!r}")
    lo, hi = 0.0, math.sqrt(n)
    mid = 0.5 * hi
    for _ in range(_INVERSE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        val = tail_s(n, mid)
        if abs(val - beta) <= _INVERSE_TOL:
            return mid
        if val > beta:  # tail too heavy, move right
            lo = mid
        else:
            hi = mid
    return mid


def sample_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """One point uniform on the unit sphere in R^n (normalized Gaussian draw)."""
    if int(n) != n or int(n) < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {n!r}")
    n = int(n)
    while True:
        v = rng.standard_normal(n)
        nrm = np.linalg.norm(v)
        if nrm > 0.0:
            return v / nrm


def sample_sphere_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """count unit-sphere points as rows of a (count, n) array."""
    if int(n) != n or int(n) < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {n!r}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    out = rng.standard_normal((int(count), int(n)))
    nrms = np.linalg.norm(out, axis=1)
    bad = np.flatnonzero(nrms == 0.0)
    for i in bad:  # essentially unreachable, kept for exactness of the law
        row = rng.standard_normal(int(n))
        while np.linalg.norm(row) == 0.0:
            row = rng.standard_normal(int(n))
        out[i] = row
        nrms[i] = np.linalg.norm(row)
    return out / nrms[:, None]


@dataclass(frozen=True)
class TailQuery:
    """A resolved tail evaluation: forward (alpha given) or inverse (beta given)."""

    n: int
    alpha: float | None
    beta: float | None
    value: float

    @classmethod
    def forward(cls, n: int, alpha: float) -> "TailQuery":
        return cls(n=int(n), alpha=float(alpha), beta=None, value=tail_s(n, alpha))

    @classmethod
    def inverse(cls, n: int, beta: float) -> "TailQuery":
        return cls(n=int(n), alpha=None, beta=float(beta), value=tail_s_inverse(n, beta))


@dataclass(frozen=True)
class TailBoundReport:
    """Result of sweeping the sub-Gaussian estimate exp(-0.45 a^2) over a grid."""

    checked: int
    min_margin: float
    argmin_n: int
    argmin_alpha: float
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations and self.min_margin > 0.0


def tail_bound_check(n_range, alpha_grid=None) -> TailBoundReport:
    """Verify tail_s(n, a) < exp(-0.45 a^2) over the given grid.

    Returns the minimal margin exp(-0.45 a^2) - tail_s(n, a) found, where it
    occurred, and any outright violations (margin <= 0).  The default alpha
    grid is 0.0 to 7.9 in steps of 0.1, which reaches far enough into the
    flat region of the tail that the margin there is the bound itself.
    """
    ns = [int(v) for v in n_range]
    if alpha_grid is None:
        alpha_grid = np.arange(0.0, 8.0, 0.1)
    alphas = [float(v) for v in alpha_grid]
    if not ns or not alphas:
        raise ValueError("n_range and alpha_grid must be non-empty")
    best = math.inf
    arg = (ns[0], alphas[0])
    violations = []
    for n in ns:
        for a in alphas:
            margin = math.exp(-0.45 * a * a) - tail_s(n, a)
            if margin < best:
                best = margin
                arg = (n, a)
            if margin <= 0.0:
                violations.append((n, a, margin))
    return TailBoundReport(
        checked=len(ns) * len(alphas),
        min_margin=best,
        argmin_n=arg[0],
        argmin_alpha=arg[1],
        violations=tuple(violations),
    )
