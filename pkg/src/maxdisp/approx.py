"""Randomized approximation algorithms with provable quality bounds.

Three rejection samplers share one shape: draw candidate directions until one
is simultaneously far from every anchor direction, in the sense of a strict
inequality whose threshold alpha is chosen so that, by a union bound over the
anchors, acceptance happens with probability at least 1 - rho per draw.

* approx_ball draws uniformly on the unit sphere and uses the spherical tail
  threshold alpha = tail_s_inverse(n, rho/m).  Every accepted point is
  deterministically guaranteed a fraction (1 - alpha/sqrt(n))/2 of the ball
  relaxation value; no relaxation has to be solved.
* approx_general_fixed draws sign vectors weighted by the diagonal of a
  lifted relaxation matrix (ball or box geometry) with the sub-Gaussian
  threshold alpha = sqrt(2 ln(m/rho)).  Anchors whose weighted image is zero
  are exempt from the acceptance test; requiring them would make the strict
  predicate unsatisfiable.
* approx_box_simplified specializes the previous sampler to box instances,
  where the lift's diagonal is constant and cancels: plain sign vectors are
  tested directly against the anchors, and no relaxation is solved.

All samplers take an explicit numpy Generator and consume it in fixed-size
batches, so reruns with an equally seeded generator reproduce draws exactly,
and a second call with the same generator continues where an exhausted
budget stopped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instance import DispersionInstance, Geometry, evaluate
from .relax import (
    LiftedMatrix,
    RelaxationResult,
    gamma1,
    lift_ball,
    lift_box,
    solve_cr_ball,
    solve_cr_box,
)
from .tail import tail_s_inverse

__all__ = [
    "ApproxResult",
    "SampleBudgetExceeded",
    "approx_ball",
    "approx_general_fixed",
    "approx_box_simplified",
    "bound_refined",
]

_BATCH = 128
_DEFAULT_BUDGET = 1_000_000


class SampleBudgetExceeded(RuntimeError):
    """No draw was accepted within the sample budget.

    The generator has consumed `draws` candidates; calling the sampler again
    with the same generator resumes the stream.
    """

    def __init__(self, draws: int):
        super().__init__(f"no sample accepted within the budget ({draws} draws)")
        self.draws = draws


@dataclass(frozen=True)
class ApproxResult:
    """One accepted sample and its guarantees.

    f_value is the objective at x_tilde; bound_r is the multiplicative
    factor of the relaxation value guaranteed by the sampler (for the ball
    sampler, (1 - alpha/sqrt(n))/2, always positive); refined_bound is the
    anchor-distance-aware improvement where one exists, else None.
    raw_samples counts every draw consumed from the generator and
    accepted_at is the 1-based index of the accepted draw.
    """

    x_tilde: np.ndarray
    f_value: float
    raw_samples: int
    accepted_at: int
    alpha_used: float
    bound_r: float
    refined_bound: float | None


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly between 0 and 1, got {rho}")
    return rho


def _rejection_sample(draw_batch, accept_rows, budget):
    """Generic batched rejection loop -> (sample, raw draws, accepted index)."""
    seen = 0
    while seen < budget:
        take = min(_BATCH, budget - seen)
        batch = draw_batch(take)
        good = accept_rows(batch)
        hits = np.flatnonzero(good)
        if hits.size:
            k = int(hits[0])
            return batch[k].copy(), seen + take, seen + k + 1
        seen += take
    raise SampleBudgetExceeded(seen)


def approx_ball(
    inst: DispersionInstance,
    rho: float,
    rng: np.random.Generator,
    budget: int = _DEFAULT_BUDGET,
) -> ApproxResult:
    """Sphere rejection sampler for ball instances (n >= 2).

    Accepts a unit vector z once sqrt(n) * p_i . z < alpha * ||p_i|| holds
    for every nonzero anchor, with alpha = tail_s_inverse(n, rho/m).  When
    rho/m >= 0.5 that threshold is outside the tail function's range; the
    sampler then requires plain negative correlation (alpha = 0), which is
    outside the advertised bound regime but still terminates whenever some
    direction opposes all anchors.
    """
    if inst.geometry is not Geometry.BALL:
        raise ValueError("approx_ball requires a ball-geometry instance")
    n = inst.dim
    if n < 2:
        raise ValueError("approx_ball requires dimension n >= 2")
    rho = _check_rho(rho)
    ratio = rho / inst.m
    alpha = tail_s_inverse(n, ratio) if ratio < 0.5 else 0.0

    norms = np.linalg.norm(inst.points, axis=1)
    active = norms > 0.0
    P = inst.points[active]
    thresholds = alpha * norms[active]
    root_n = math.sqrt(n)

    def draw_batch(k):
        raw = rng.standard_normal((k, n))
        nrm = np.linalg.norm(raw, axis=1)
        nrm[nrm == 0.0] = 1.0
        return raw / nrm[:, None]

    def accept_rows(batch):
        if P.shape[0] == 0:
            return np.ones(batch.shape[0], dtype=bool)
        return np.all(root_n * (batch @ P.T) < thresholds[None, :], axis=1)

    x, raw, at = _rejection_sample(draw_batch, accept_rows, budget)
    return ApproxResult(
        x_tilde=x,
        f_value=evaluate(inst, x).value,
        raw_samples=raw,
        accepted_at=at,
        alpha_used=alpha,
        bound_r=0.5 * (1.0 - alpha / root_n),
        refined_bound=bound_refined(inst, rho),
    )


def _rademacher(rng, shape):
    return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0


def approx_general_fixed(
    inst: DispersionInstance,
    rho: float,
    rng: np.random.Generator,
    budget: int = _DEFAULT_BUDGET,
    lift: LiftedMatrix | None = None,
    relaxation: RelaxationResult | None = None,
) -> ApproxResult:
    """Sign-vector sampler driven by a lifted relaxation diagonal (ball or box).

    Precomputed `relaxation` and `lift` results may be passed to amortize the
    solve across repeated runs; they must belong to this instance.  bound_r
    is (1 - alpha sqrt(g1))/2 where g1 is the lift's diagonal concentration,
    which can be negative, in which case the guarantee is vacuous.
    """
    rho = _check_rho(rho)
    n, m = inst.dim, inst.m
    if relaxation is None:
        relaxation = (
            solve_cr_ball(inst) if inst.geometry is Geometry.BALL else solve_cr_box(inst)
        )
    if lift is None:
        lift = (
            lift_ball(relaxation, inst)
            if inst.geometry is Geometry.BALL
            else lift_box(relaxation, inst)
        )
    alpha = math.sqrt(2.0 * math.log(m / rho))
    diag = np.maximum(np.diag(lift.entries)[:n], 0.0)
    scale = np.sqrt(diag)
    corner = float(lift.entries[n, n])
    images = inst.points * scale[None, :]  # rows are the weighted anchor images
    image_norms = np.linalg.norm(images, axis=1)
    # only anchors with a nonzero image can satisfy the strict inequality
    active = image_norms > 0.0
    Bm = images[active]
    thresholds = alpha * image_norms[active]

    def draw_batch(k):
        return _rademacher(rng, (k, n))

    def accept_rows(batch):
        if Bm.shape[0] == 0:
            return np.ones(batch.shape[0], dtype=bool)
        return np.all(batch @ Bm.T < thresholds[None, :], axis=1)

    xi, raw, at = _rejection_sample(draw_batch, accept_rows, budget)
    x = scale * xi / math.sqrt(corner)
    g1 = gamma1(lift)
    return ApproxResult(
        x_tilde=x,
        f_value=evaluate(inst, x).value,
        raw_samples=raw,
        accepted_at=at,
        alpha_used=alpha,
        bound_r=0.5 * (1.0 - alpha * math.sqrt(g1)),
        refined_bound=None,
    )


def approx_box_simplified(
    inst: DispersionInstance,
    rho: float,
    rng: np.random.Generator,
    budget: int = _DEFAULT_BUDGET,
) -> ApproxResult:
    """Relaxation-free sign-vector sampler for box instances.

    Tests plain sign vectors directly: accept xi once p_i . xi < alpha ||p_i||
    for every nonzero anchor, alpha = sqrt(2 ln(m/rho)), and output xi itself.
    Distributionally identical to approx_general_fixed on box instances.
    """
    if inst.geometry is not Geometry.BOX:
        raise ValueError("approx_box_simplified requires a box-geometry instance")
    rho = _check_rho(rho)
    n, m = inst.dim, inst.m
    alpha = math.sqrt(2.0 * math.log(m / rho))
    norms = np.linalg.norm(inst.points, axis=1)
    active = norms > 0.0
    P = inst.points[active]
    thresholds = alpha * norms[active]

    def draw_batch(k):
        return _rademacher(rng, (k, n))

    def accept_rows(batch):
        if P.shape[0] == 0:
            return np.ones(batch.shape[0], dtype=bool)
        return np.all(batch @ P.T < thresholds[None, :], axis=1)

    xi, raw, at = _rejection_sample(draw_batch, accept_rows, budget)
    return ApproxResult(
        x_tilde=xi,
        f_value=evaluate(inst, xi).value,
        raw_samples=raw,
        accepted_at=at,
        alpha_used=alpha,
        bound_r=0.5 * (1.0 - alpha / math.sqrt(n)),
        refined_bound=None,
    )


def bound_refined(inst: DispersionInstance, rho: float) -> float:
    """Distance-aware guarantee factor for the sphere sampler.

    With d = min_i ||p_i|| and nu = d + 1/d when d > 1 (else 2), the factor

        nu/(2 + nu) - (2/(2 + nu)) sqrt((20/(9n)) ln(m/rho))

    multiplies the ball relaxation value.  At d <= 1 it reduces to the plain
    (1 - sqrt((20/(9n)) ln(m/rho)))/2 estimate, and it only improves as the
    anchors move farther from the feasible ball.
    """
    rho = _check_rho(rho)
    n, m = inst.dim, inst.m
    d = float(np.linalg.norm(inst.points, axis=1).min())
    nu = d + 1.0 / d if d > 1.0 else 2.0
    spread = math.sqrt((20.0 / (9.0 * n)) * math.log(m / rho))
    return nu / (2.0 + nu) - (2.0 / (2.0 + nu)) * spread
