"""Polynomial-time exact solver for a tight family of ball instances.

If some nonzero direction d satisfies p_i . d <= 0 for every anchor p_i, the
ball relaxation is tight: starting from a relaxation optimum x*, moving along
d until the unit sphere is reached never decreases any term of the objective,
and the boundary point attains the relaxation value.  The step length

    alpha = (-x*.d + sqrt(||d||^2 (1 - ||x*||^2) + (x*.d)^2)) / ||d||^2

is the nonnegative root of ||x* + alpha d||^2 = 1.

Finding such a direction is itself polynomial.  With m <= n anchors one
always exists: take d orthogonal to the first m - 1 anchors and flip it
against the last one.  In general, maximizing |x_j| over the cone
{p_i . x <= 0 for all i} intersected with ||x||_inf <= 1 (two small linear
programs per coordinate) either produces a nonzero solution or proves that
the cone is trivial, in which case this solver does not apply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .instance import DispersionInstance, Geometry, evaluate
from .relax import RelaxationResult, solve_cr_ball

__all__ = [
    "NotApplicableError",
    "ExactResult",
    "find_sign_direction",
    "solve_exact",
]

# coordinate maxima this small count as zero (sign system considered infeasible)
_ZERO_THRESHOLD = 1e-9
# required slack for the returned unit direction: p_i . d <= _SLACK_TOL
_SLACK_TOL = 1e-10


class NotApplicableError(RuntimeError):
    """The tightness condition fails: the sign system p_i . x <= 0 for all
    anchors admits only the zero solution, so the exact boundary-lifting
    method does not apply to this instance."""


@dataclass(frozen=True)
class ExactResult:
    """Optimal point on the unit sphere together with its tightness data.

    value = f(x_opt) matches the relaxation value zeta_star up to roundoff;
    certificate is the unit sign-direction used for the lift and alpha the
    step length along it.
    """

    x_opt: np.ndarray
    value: float
    certificate: np.ndarray
    alpha: float
    relaxation: RelaxationResult


def _repair_direction(points, d, rounds=200):
    """Nudge d into the cone {p_i . d <= 0} by cyclic halfspace projections."""
    for _ in range(rounds):
        s = points @ d
        worst = int(np.argmax(s))
        if s[worst] <= 0.0:
            return d
        p = points[worst]
        p_sq = float(p @ p)
        if p_sq == 0.0:
            return d
        d = d - (s[worst] / p_sq) * p
    return d


def _finalize_direction(points, d):
    """Normalize d and check p_i . d <= slack tolerance; None if unusable."""
    nrm = float(np.linalg.norm(d))
    if nrm < 1e-12:
        return None
    d = d / nrm
    if float(np.max(points @ d)) > 0.0:
        d = _repair_direction(points, d)
        nrm = float(np.linalg.norm(d))
        if nrm < 1e-9:
            return None
        d = d / nrm
    if float(np.max(points @ d)) > _SLACK_TOL:
        return None
    return d


def _direction_small_m(points):
    """m <= n case: build the direction from the orthogonal complement."""
    m, n = points.shape
    if m == 1:
        p = points[0]
        nrm = float(np.linalg.norm(p))
        if nrm == 0.0:
            d = np.zeros(n)
            d[0] = 1.0
            return d
        return -p / nrm
    basis = null_space(points[:-1])
    if basis.shape[1] == 0:  # cannot happen for m <= n, kept as a guard
        return None
    cand = basis[:, 0]
    proj = float(points[-1] @ cand)
    d = -math.copysign(1.0, proj) * cand if abs(proj) > 0.0 else cand
    return _finalize_direction(points, d)


def _direction_linear_programs(points):
    """General case: maximize |x_j| over the box-truncated sign cone."""
    m, n = points.shape
    bounds = [(-1.0, 1.0)] * n
    for j in range(n):
        for sign in (-1.0, 1.0):
            c = np.zeros(n)
            c[j] = sign  # linprog minimizes, so this maximizes -sign * x_j
            res = linprog(c, A_ub=points, b_ub=np.zeros(m), bounds=bounds, method="highs")
            if not res.success:
                continue
            if abs(res.x[j]) <= _ZERO_THRESHOLD:
                continue
            d = _finalize_direction(points, np.asarray(res.x, dtype=float))
            if d is not None:
                return d
    return None


def find_sign_direction(inst: DispersionInstance) -> np.ndarray | None:
    """A unit vector d with p_i . d <= 0 for every anchor, or None.

    Uses the orthogonal-complement construction when m <= n (always
    succeeds there) and per-coordinate linear programs otherwise.  The
    returned direction satisfies every inequality with slack at most 1e-10;
    None means every coordinate maximum over the cone was below 1e-9, i.e.
    the cone is numerically trivial.
    """
    points = inst.points
    if inst.m <= inst.dim:
        d = _direction_small_m(points)
        if d is not None:
            return d
    return _direction_linear_programs(points)


def solve_exact(inst: DispersionInstance, tol: float | None = None) -> ExactResult:
    """Exact maximizer of the dispersion objective when the sign cone is nontrivial.

    Solves the ball relaxation, then slides its optimum along a sign
    direction to the unit sphere; no objective term decreases along the way,
    so the boundary point attains the relaxation value and is therefore a
    global maximizer.  Raises NotApplicableError when no nonzero sign
    direction exists.
    """
    if inst.geometry is not Geometry.BALL:
        raise ValueError("solve_exact requires a ball-geometry instance")
    d = find_sign_direction(inst)
    if d is None:
        raise NotApplicableError(
            "exact method not applicable: the sign system p_i . x <= 0 "
            "(one inequality per anchor) admits only the zero solution for "
            "this instance"
        )
    relaxation = solve_cr_ball(inst, tol=tol)
    x_star = relaxation.x_star
    d_sq = float(d @ d)
    proj = float(x_star @ d)
    radicand = d_sq * max(0.0, 1.0 - float(x_star @ x_star)) + proj * proj
    alpha = max(0.0, (-proj + math.sqrt(max(radicand, 0.0))) / d_sq)
    x_opt = x_star + alpha * d
    ev = evaluate(inst, x_opt)
    return ExactResult(
        x_opt=x_opt,
        value=ev.value,
        certificate=d,
        alpha=alpha,
        relaxation=relaxation,
    )
