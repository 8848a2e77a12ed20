"""Certified solvers for the ball and box convex relaxations.

Replacing ||x||^2 by its maximum over the feasible region (1 on the ball, n on
the box) turns the dispersion problem into the concave piecewise-linear
program

    maximize   F(x) = min_i w_i (mu - 2 p_i . x + ||p_i||^2)
    subject to x in ball / box,

whose value sandwiches the original one from above.  F is maximized by
projected supergradient ascent with Polyak-type steps.  The matching upper
bound comes from simplex multipliers: for any lam >= 0 with sum(lam) = 1,

    U(lam) = sum_i lam_i w_i (mu + ||p_i||^2) + N(sum_i 2 lam_i w_i p_i),

where N is the Euclidean norm on the ball and the l1 norm on the box (the
closed-form inner maximum of the weighted combination).  Any feasible x gives
a lower bound F(x) and any simplex lam gives an upper bound U(lam), so the
returned gap is a certificate independent of how the iterates were produced.
Multiplier candidates come from active-index frequencies along the ascent and
from small nonnegative least-squares / linear programs on the near-active
set, which usually collapse the gap as soon as the active set is identified.

The optimum also induces a feasible matrix for the semidefinite relaxation of
the same problem (`lift_ball`, `lift_box`), realizing the equivalence between
the two relaxations constructively instead of calling a conic solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls

from .instance import DispersionInstance, Geometry

__all__ = [
    "RelaxationResult",
    "LiftedMatrix",
    "NonPositiveValueError",
    "solve_cr_ball",
    "solve_cr_box",
    "lift_ball",
    "lift_box",
    "gamma1",
]

_POLISH_EVERY = 40
_STALL_WINDOW = 60
_ACTIVE_CAP_PAD = 6
_CUT_ROUNDS = 400


class NonPositiveValueError(RuntimeError):
    """The relaxation value is not strictly positive, so no lift exists."""


@dataclass(frozen=True)
class RelaxationResult:
    """Certified output of solve_cr_ball / solve_cr_box.

    zeta_star is F(x_star) computed exactly from x_star, and the true
    relaxation value lies in [zeta_star, zeta_star + gap].  converged is False
    when the iteration budget ran out before gap <= tol.
    """

    x_star: np.ndarray
    zeta_star: float
    gap: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class LiftedMatrix:
    """(n+1) x (n+1) feasible matrix for the semidefinite relaxation."""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0] - 1

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def constraint_products(self, inst: DispersionInstance) -> np.ndarray:
        """w_i * <A_i, Z> for A_i = [[I, -p_i], [-p_i^T, ||p_i||^2]]; all >= 1."""
        n = self.dim
        z_block_trace = float(np.trace(self.entries[:n, :n]))
        z_cross = self.entries[:n, n]
        z_corner = float(self.entries[n, n])
        p_sq = np.einsum("ij,ij->i", inst.points, inst.points)
        return inst.weights * (z_block_trace - 2.0 * inst.points @ z_cross + p_sq * z_corner)


# ---------------------------------------------------------------------------
# supergradient engine
# ---------------------------------------------------------------------------


def _project_ball(x):
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 1.0 else x


def _project_box(x):
    return np.clip(x, -1.0, 1.0)


def _dual_norm_ball(c):
    return float(np.linalg.norm(c))


def _dual_norm_box(c):
    return float(np.abs(c).sum())


def _upper_value(a, B, lam, dual_norm):
    return float(lam @ a + dual_norm(B.T @ lam))


def _active_indices(r, f_val, eps, cap):
    act = np.flatnonzero(r <= f_val + eps)
    if act.size == 0:
        act = np.array([int(np.argmin(r))])
    if act.size > cap:
        act = act[np.argsort(r[act])[:cap]]
    return act


def _multiplier_ball(a, B, x, act):
    """Simplex multipliers supported on act that nearly annihilate B^T lam.

    At a boundary optimum the combined slope sum lam_i b_i must be a
    nonnegative multiple of -x; at an interior optimum it must vanish.  Both
    cases are one nonnegative least-squares solve (the radial column is only
    offered when x is away from the origin).
    """
    k = act.size
    n = B.shape[1]
    bt = B[act].T
    cols = [bt]
    xn = np.linalg.norm(x)
    if xn > 1e-9:
        cols.append((x / xn).reshape(n, 1))
    mat = np.hstack(cols)
    scale = max(1.0, float(np.abs(mat).max()))
    penalty = np.zeros(mat.shape[1])
    penalty[:k] = scale
    mat = np.vstack([mat, penalty])
    rhs = np.zeros(n + 1)
    rhs[-1] = scale
    try:
        sol, _ = nnls(mat, rhs)
    except RuntimeError:
        return None
    lam_act = sol[:k]
    tot = lam_act.sum()
    if tot <= 1e-12:
        return None
    lam = np.zeros(B.shape[0])
    lam[act] = lam_act / tot
    return lam


def _multiplier_box(a, B, x, act):
    """Exact minimizer of U over multipliers supported on act (a small LP)."""
    k = act.size
    n = B.shape[1]
    bt = B[act].T
    c = np.concatenate([a[act], np.ones(n)])
    A_ub = np.block([[bt, -np.eye(n)], [-bt, -np.eye(n)]])
    A_eq = np.zeros((1, k + n))
    A_eq[0, :k] = 1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(2 * n),
        A_eq=A_eq,
        b_eq=[1.0],
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        return None
    lam_act = np.maximum(res.x[:k], 0.0)
    tot = lam_act.sum()
    if tot <= 1e-12:
        return None
    lam = np.zeros(B.shape[0])
    lam[act] = lam_act / tot
    return lam


def _candidate_multipliers(a, B, x_best, f_best, counts, multiplier):
    """Candidate simplex vectors: visit frequencies, the argmin singleton,
    and active-set solves at widening activity thresholds."""
    m, n = B.shape
    out = []
    total = counts.sum()
    if total > 0:
        out.append(counts / total)
    r = a - B @ x_best
    singleton = np.zeros(m)
    singleton[int(np.argmin(r))] = 1.0
    out.append(singleton)
    scale = max(1.0, abs(f_best))
    cap = 3 * n + _ACTIVE_CAP_PAD
    for eps in (1e-10 * scale, 1e-6 * scale, 1e-3 * scale):
        act = _active_indices(r, f_best, eps, cap)
        lam = multiplier(a, B, x_best, act)
        if lam is not None:
            out.append(lam)
    return out


def _primal_candidates(a, B, ball, lam, upper):
    """Feasible points suggested by a multiplier vector.

    At a boundary optimum of the ball the combined slope of the active pieces
    opposes the optimizer, so the negated unit slope is a candidate; a
    least-squares residual equalization on the support covers interior
    optima.  On the box the optimum sits at the sign pattern opposing the
    combined slope.  Candidates are only suggestions; each is scored by a
    full objective evaluation.
    """
    n = B.shape[1]
    c = B.T @ lam
    out = []
    if ball:
        nc = float(np.linalg.norm(c))
        if nc > 1e-13:
            out.append(-c / nc)
        sup = np.flatnonzero(lam > 1e-14)
        if 0 < sup.size <= n + 1:
            x, *_ = np.linalg.lstsq(B[sup], a[sup] - upper, rcond=None)
            nx = float(np.linalg.norm(x))
            out.append(x / nx if nx > 1.0 else x)
    else:
        out.append(-np.sign(c))
    return out


def _polish(a, B, ball, x_best, f_best, counts, upper, dual_norm, multiplier, rounds=4):
    """Ping-pong dual and primal candidates until neither side improves."""
    project = _project_ball if ball else _project_box
    for _ in range(rounds):
        improved = False
        for lam in _candidate_multipliers(a, B, x_best, f_best, counts, multiplier):
            val = _upper_value(a, B, lam, dual_norm)
            gain = (upper - val) if math.isfinite(upper) else math.inf
            if gain > 1e-15 * max(1.0, abs(val)):
                upper = val
                improved = True
            for x_hat in _primal_candidates(a, B, ball, lam, upper):
                x_hat = project(x_hat)
                f = float(np.min(a - B @ x_hat))
                if f > f_best:
                    f_best = f
                    x_best = x_hat.copy()
                    improved = True
        if not improved:
            break
    return upper, x_best, f_best


def _escalate_box(a, B, x_best, f_best, upper, dual_norm):
    """Exact linear program for the box geometry.

    Variables (x, t), maximize t subject to B x + t <= a and the box bounds.
    The primal solution is kept only through a fresh objective evaluation and
    the dual only as a cleaned simplex vector fed through the closed-form
    bound, so solver tolerances never leak into the certificate.
    """
    m, n = B.shape
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    res = linprog(
        cost,
        A_ub=np.hstack([B, np.ones((m, 1))]),
        b_ub=a,
        bounds=[(-1.0, 1.0)] * n + [(None, None)],
        method="highs",
    )
    if not res.success:
        return x_best, f_best, upper
    x = np.clip(res.x[:n], -1.0, 1.0)
    f = float(np.min(a - B @ x))
    if f > f_best:
        f_best, x_best = f, x
    lam = np.maximum(-np.asarray(res.ineqlin.marginals), 0.0)
    tot = lam.sum()
    if tot > 1e-12:
        upper = min(upper, _upper_value(a, B, lam / tot, dual_norm))
    return x_best, f_best, upper


def _escalate_ball(a, B, x_best, f_best, upper, tol, counts, rounds_allowed):
    """Cutting-plane refinement for the ball geometry.

    The ball is outer-approximated by the box plus accumulated tangent
    halfspaces u . x <= 1; the LP value over any such polytope upper-bounds
    the ball value.  Each round renormalizes the LP optimizer into the ball
    (primal candidate), recycles the LP duals as a simplex vector (upper
    bound via the closed form), polishes, and adds the tangent cut at the LP
    point.  Cuts concentrate near the optimizer, so the polytope hugs the
    sphere exactly where it matters.
    """
    m, n = B.shape
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    base = np.hstack([B, np.ones((m, 1))])
    bounds = [(-1.0, 1.0)] * n + [(None, None)]
    cuts: list[np.ndarray] = []
    nrm0 = float(np.linalg.norm(x_best))
    if nrm0 > 1e-9:
        cuts.append(x_best / nrm0)
    used = 0
    for _ in range(rounds_allowed):
        used += 1
        if cuts:
            C = np.asarray(cuts)
            A_ub = np.vstack([base, np.hstack([C, np.zeros((C.shape[0], 1))])])
            b_ub = np.concatenate([a, np.ones(C.shape[0])])
        else:
            A_ub, b_ub = base, a
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if not res.success:
            break
        lam = np.maximum(-np.asarray(res.ineqlin.marginals[:m]), 0.0)
        tot = lam.sum()
        if tot > 1e-12:
            lam = lam / tot
            upper = min(upper, _upper_value(a, B, lam, _dual_norm_ball))
            for x_hat in _primal_candidates(a, B, True, lam, upper):
                x_hat = _project_ball(x_hat)
                f = float(np.min(a - B @ x_hat))
                if f > f_best:
                    f_best, x_best = f, x_hat.copy()
        x_lp = res.x[:n]
        nrm = float(np.linalg.norm(x_lp))
        x_feas = x_lp / nrm if nrm > 1.0 else x_lp
        f = float(np.min(a - B @ x_feas))
        if f > f_best:
            f_best, x_best = f, x_feas.copy()
        upper, x_best, f_best = _polish(
            a, B, True, x_best, f_best, counts, upper, _dual_norm_ball,
            _multiplier_ball, rounds=2,
        )
        if upper - f_best <= tol or nrm <= 1.0 + 1e-12:
            break
        cuts.append(x_lp / nrm)
    return x_best, f_best, upper, used


def _maximize_min_affine(a, B, geometry: Geometry, tol, max_iter):
    """Maximize min(a - B x) over the ball or box with a certified gap.

    Phase one is projected supergradient ascent with Polyak steps toward the
    best known upper bound, polishing periodically.  If the gap is still
    open within the iteration budget, phase two runs the geometry's exact
    escalation (one LP for the box, cutting planes for the ball), with its
    rounds charged against the same budget.
    """
    m, n = B.shape
    ball = geometry is Geometry.BALL
    project = _project_ball if ball else _project_box
    dual_norm = _dual_norm_ball if ball else _dual_norm_box
    multiplier = _multiplier_ball if ball else _multiplier_box

    x = np.zeros(n)
    best_x = x.copy()
    best_f = float(np.min(a))
    counts = np.zeros(m)

    upper, best_x, best_f = _polish(
        a, B, ball, best_x, best_f, counts, math.inf, dual_norm, multiplier, rounds=2
    )
    if tol is None:
        tol = 1e-7 * max(1.0, upper)

    damp = 1.0
    last_gain = 0
    it = 0
    ascent_cap = min(max_iter, 8 * (m + n) + 40)
    while upper - best_f > tol and it < ascent_cap:
        it += 1
        r = a - B @ x
        i = int(np.argmin(r))
        f_val = float(r[i])
        counts[i] += 1
        if f_val > best_f:
            best_f = f_val
            best_x = x.copy()
            last_gain = it
            if upper - best_f <= tol:
                break
        g = B[i]
        g_sq = float(g @ g)
        if g_sq <= 1e-28:
            # the active piece is constant, so its singleton multiplier is exact
            lam = np.zeros(m)
            lam[i] = 1.0
            upper = min(upper, _upper_value(a, B, lam, dual_norm))
            break
        x = project(x - (damp * (upper - f_val) / g_sq) * g)
        if it % _POLISH_EVERY == 0:
            upper, best_x, best_f = _polish(
                a, B, ball, best_x, best_f, counts, upper, dual_norm, multiplier,
                rounds=1,
            )
        if it - last_gain > _STALL_WINDOW:
            x = best_x.copy()
            damp = max(0.5 * damp, 1.0 / 64.0)
            last_gain = it

    upper, best_x, best_f = _polish(
        a, B, ball, best_x, best_f, counts, upper, dual_norm, multiplier
    )

    if upper - best_f > tol and it < max_iter:
        if ball:
            rounds = min(_CUT_ROUNDS, max_iter - it)
            best_x, best_f, upper, used = _escalate_ball(
                a, B, best_x, best_f, upper, tol, counts, rounds
            )
            it += used
        else:
            best_x, best_f, upper = _escalate_box(a, B, best_x, best_f, upper, dual_norm)
            it += 1
            upper, best_x, best_f = _polish(
                a, B, ball, best_x, best_f, counts, upper, dual_norm, multiplier
            )

    x_star = best_x
    if ball:
        nrm = np.linalg.norm(x_star)
        if nrm > 1.0:
            x_star = x_star / nrm
    else:
        x_star = np.clip(x_star, -1.0, 1.0)
    zeta = float(np.min(a - B @ x_star))
    gap = max(upper - zeta, 0.0)
    return x_star, zeta, gap, it, gap <= tol


def _linear_data(inst: DispersionInstance, mu: float):
    p_sq = np.einsum("ij,ij->i", inst.points, inst.points)
    a = inst.weights * (mu + p_sq)
    B = 2.0 * inst.weights[:, None] * inst.points
    return a, B


def _solve_relaxation(inst: DispersionInstance, geometry: Geometry, tol, max_iter):
    if inst.geometry is not geometry:
        raise ValueError(
            f"instance geometry is {inst.geometry.value!r}, expected {geometry.value!r}"
        )
    if tol is not None and tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    n, m = inst.dim, inst.m
    mu = 1.0 if geometry is Geometry.BALL else float(n)
    a, B = _linear_data(inst, mu)

    if max_iter is None:
        max_iter = 200 * m * n

    if not np.any(B):
        # every anchor sits at the origin: F is the constant min_i a_i
        return RelaxationResult(np.zeros(n), float(np.min(a)), 0.0, 0, True)

    if m == 1:
        p = inst.points[0]
        if geometry is Geometry.BALL:
            x = -p / np.linalg.norm(p)
        else:
            x = -np.sign(p)
        zeta = float((a - B @ x)[0])
        return RelaxationResult(x, zeta, 0.0, 0, True)

    x_star, zeta, gap, iters, converged = _maximize_min_affine(
        a, B, geometry, tol, max_iter
    )
    return RelaxationResult(x_star, zeta, gap, iters, converged)


def solve_cr_ball(
    inst: DispersionInstance, tol: float | None = None, max_iter: int | None = None
) -> RelaxationResult:
    """Certified maximization of min_i w_i (1 - 2 p_i.x + ||p_i||^2) over the ball.

    The default tolerance is 1e-7 * max(1, initial upper bound) and the
    default iteration cap is 200 * m * n.  On a single anchor the optimum is
    closed form (the antipode of the anchor direction).
    """
    return _solve_relaxation(inst, Geometry.BALL, tol, max_iter)


def solve_cr_box(
    inst: DispersionInstance, tol: float | None = None, max_iter: int | None = None
) -> RelaxationResult:
    """Certified maximization of min_i w_i (n - 2 p_i.x + ||p_i||^2) over the box."""
    return _solve_relaxation(inst, Geometry.BOX, tol, max_iter)


# ---------------------------------------------------------------------------
# lifts to the semidefinite relaxation
# ---------------------------------------------------------------------------


def _check_positive_value(result: RelaxationResult):
    if result.zeta_star <= 0.0:
        raise NonPositiveValueError(
            "relaxation value is not strictly positive "
            f"(zeta_star = {result.zeta_star:.6g}); the problem assumes a positive "
            "optimum and no feasible lifted matrix exists otherwise"
        )


def lift_ball(result: RelaxationResult, inst: DispersionInstance) -> LiftedMatrix:
    """Feasible lifted matrix for the ball geometry from a relaxation optimum.

    Z = (1/zeta) * ([x; 1][x; 1]^T + blockdiag(((1 - ||x||^2)/n) I, 0)),
    which satisfies sum_j Z_jj = Z_{n+1,n+1} = 1/zeta and every constraint
    product w_i <A_i, Z> >= 1.
    """
    _check_positive_value(result)
    if inst.geometry is not Geometry.BALL:
        raise ValueError("lift_ball requires a ball-geometry instance")
    n = inst.dim
    x = np.asarray(result.x_star, dtype=float)
    v = np.concatenate([x, [1.0]])
    Z = np.outer(v, v)
    slack = max(0.0, 1.0 - float(x @ x))
    Z[np.arange(n), np.arange(n)] += slack / n
    Z /= result.zeta_star
    Z = 0.5 * (Z + Z.T)
    return LiftedMatrix(entries=Z)


def lift_box(result: RelaxationResult, inst: DispersionInstance) -> LiftedMatrix:
    """Feasible lifted matrix for the box geometry from a relaxation optimum.

    Z = (1/zeta) * ([x; 1][x; 1]^T + Diag(1 - x_1^2, ..., 1 - x_n^2, 0)),
    which makes every diagonal entry equal to Z_{n+1,n+1} = 1/zeta.
    """
    _check_positive_value(result)
    if inst.geometry is not Geometry.BOX:
        raise ValueError("lift_box requires a box-geometry instance")
    n = inst.dim
    x = np.asarray(result.x_star, dtype=float)
    v = np.concatenate([x, [1.0]])
    Z = np.outer(v, v)
    Z[np.arange(n), np.arange(n)] += np.maximum(0.0, 1.0 - x * x)
    Z /= result.zeta_star
    Z = 0.5 * (Z + Z.T)
    return LiftedMatrix(entries=Z)


def gamma1(Z) -> float:
    """Largest diagonal entry of the top-left n x n block over its trace.

    Accepts a LiftedMatrix or a raw (n+1) x (n+1) array.  Equals exactly 1/n
    for box lifts, whose diagonal is constant.
    """
    entries = np.asarray(getattr(Z, "entries", Z), dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 2:
        raise ValueError(f"expected a square matrix of size >= 2, got {entries.shape}")
    diag = np.diag(entries)[:-1]
    total = float(diag.sum())
    if total <= 0.0:
        raise ValueError("top-left block has nonpositive trace")
    return float(diag.max() / total)
