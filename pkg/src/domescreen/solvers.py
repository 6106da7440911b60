"""Solvers for the normalized screening problem

    maximize    b @ z
    subject to  ||z|| <= 1,  N.T @ z + psi <= 0.

``solve_full`` works in the ambient dimension, ``solve_lifted`` and
``solve_reduced`` work in the coordinates of an orthonormal basis of the
normals, and ``solve_dual`` minimizes the Lagrangian dual
``||b - N lam|| - psi @ lam`` over ``lam >= 0`` by an unrelated method so the
primal solvers can be checked against it.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import NormalizedRegion, ProjectedFeature

DEFAULT_TOL = 1e-9
MAX_NEWTON = 200
DEGENERATE_RESIDUAL = 1e-10
# offset relaxation used when the feasible set has no interior
BOUNDARY_RELAX = 1e-7
FRACTION_TO_BOUNDARY = 0.9
MAX_CENTERING = 50
# a start point must clear every constraint by this much
START_MARGIN = 1e-9


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    VACUOUS = "vacuous"
    DEGENERATE = "degenerate"
    MAX_ITERATIONS = "max_iterations"


class Feasibility(str, enum.Enum):
    INTERIOR = "feasible_with_interior"
    BOUNDARY = "feasible_boundary_only"
    EMPTY = "empty"


@dataclass
class SolveResult:
    value: float
    maximizer: np.ndarray
    status: Status
    iterations: int = 0
    kkt_residual: float = 0.0
    upper_bound: float = math.nan

    def __post_init__(self):
        if math.isnan(self.upper_bound):
            self.upper_bound = self.value + self.kkt_residual

    @property
    def feasible(self) -> bool:
        return self.status is not Status.INFEASIBLE


# ---------------------------------------------------------------------------
# log-barrier Newton core


def _newton_centering(x, t, c, G, h, ball_dim, budget, eps=1e-9):
    """Minimize ``-t c@x - log(1-||x_B||^2) - sum log(-(Gx+h))`` from a strictly
    feasible ``x``. Returns ``(x, steps)``."""
    steps = 0
    dim = x.size
    for _ in range(budget):
        xb = x[:ball_dim]
        s0 = 1.0 - xb @ xb
        sig = -(G @ x + h)
        inv = 1.0 / sig
        g = -t * c + G.T @ inv
        g[:ball_dim] += (2.0 / s0) * xb
        H = (G.T * inv**2) @ G
        H[:ball_dim, :ball_dim] += (4.0 / s0**2) * np.outer(xb, xb)
        H[np.arange(ball_dim), np.arange(ball_dim)] += 2.0 / s0
        try:
            dx = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            dx = -np.linalg.lstsq(H, g, rcond=None)[0]
        decrement = -(g @ dx)
        if not decrement > 2 * eps:
            break
        steps += 1

        dxb = dx[:ball_dim]
        Gdx = G @ dx
        # largest step keeping both barriers finite
        step = 1.0
        neg = Gdx > 0
        if np.any(neg):
            step = min(step, FRACTION_TO_BOUNDARY * np.min(sig[neg] / Gdx[neg]))
        a2, a1 = dxb @ dxb, 2.0 * (xb @ dxb)
        if a2 > 0:
            root = (-a1 + math.sqrt(a1 * a1 + 4.0 * a2 * s0)) / (2.0 * a2)
            step = min(step, FRACTION_TO_BOUNDARY * root)
        # Armijo on the barrier increment, written to avoid cancellation
        slope = g @ dx
        for _ in range(60):
            s0_new = s0 - step * a1 - step * step * a2
            sig_new = sig - step * Gdx
            if s0_new > 0 and np.all(sig_new > 0):
                delta = (
                    -t * step * (c @ dx)
                    - math.log(s0_new / s0)
                    - np.sum(np.log(sig_new / sig))
                )
                if delta <= 0.25 * step * slope:
                    break
            step *= 0.5
        else:
            break
        x = x + step * dx
        if dim == 0:
            break
    return x, steps


def _dual_bound(c, G, h, u):
    return np.linalg.norm(c - G.T @ u) - h @ u


def _certified_gap(x, t, c, G, h):
    """Gap between ``c@x`` and the dual bound ``||c - G.T u|| - h@u``; an upper
    bound on the suboptimality of ``x``.

    Besides the barrier estimate ``u = 1 / (t sigma)`` this tries the exact
    stationary multiplier of the dual on the nearly active rows. Near a
    vertex the slacks are so small that the barrier estimate is spoiled by
    cancellation, while the stationary point depends on ``c``, ``G``, ``h``
    alone.
    """
    sig = -(G @ x + h)
    u = 1.0 / (t * sig)
    upper = _dual_bound(c, G, h, u)
    active = np.flatnonzero(u > 1e-6 * max(np.linalg.norm(c), 1e-300))
    if active.size:
        v = _support_stationary(c, G[active].T, h[active])
        if v is not None:
            w = np.zeros_like(u)
            w[active] = v
            upper = min(upper, _dual_bound(c, G, h, w))
    return max(upper - c @ x, 0.0)


def _barrier_max(c, G, h, x0, tol, max_iter):
    """Maximize ``c@x`` over the unit ball cut by ``Gx + h <= 0`` starting from
    a strictly feasible ``x0``. Returns ``(x, newton_steps, certified_gap)``."""
    n_con = 1 + G.shape[0]
    scale = max(np.linalg.norm(c), 1e-300)
    t = n_con / (2.0 * scale)
    x = x0
    used = 0
    gap = math.inf
    while used < max_iter:
        x, steps = _newton_centering(x, t, c, G, h, c.size, min(MAX_CENTERING, max_iter - used))
        used += steps
        gap = _certified_gap(x, t, c, G, h)
        if gap <= tol or n_con / t < 1e-3 * tol:
            break
        t *= 10.0
    return x, used, gap


def _phase_one(G, h, tol, max_iter, stop_at_interior):
    """Barrier method on ``min s`` s.t. ``||z|| <= 1, Gz + h <= s``.

    The optimum is ``min_{||z||<=1} max_k (G_k z + h_k)``. Returns
    ``(classification, z, steps)``; with ``stop_at_interior`` the loop exits
    at the first centered point with ``s < 0``.
    """
    m, dim = G.shape
    G1 = np.hstack([G, -np.ones((m, 1))])
    c1 = np.zeros(dim + 1)
    c1[-1] = -1.0
    x = np.zeros(dim + 1)
    x[-1] = np.max(h) + 1.0
    t = 1.0
    used = 0
    while used < max_iter:
        x, steps = _newton_centering(x, t, c1, G1, h, dim, max_iter - used)
        used += steps
        z = x[:dim]
        upper = np.max(G @ z + h)
        sig = -(G1 @ x + h)
        u = 1.0 / (t * sig)
        d = u / np.sum(u)
        lower = h @ d - np.linalg.norm(G.T @ d)
        if upper < -START_MARGIN and (stop_at_interior or upper < -tol):
            return Feasibility.INTERIOR, z, used
        if lower > tol:
            return Feasibility.EMPTY, z, used
        if upper - lower <= tol:
            return Feasibility.BOUNDARY, z, used
        t *= 10.0
    if upper < -START_MARGIN:
        return Feasibility.INTERIOR, z, used
    return (Feasibility.EMPTY if lower > 0 else Feasibility.BOUNDARY), z, used


def _strictly_inside(x, G, h):
    return bool(np.all(G @ x + h < -START_MARGIN) and x @ x < 1.0 - START_MARGIN)


def _solve_ball_polytope(c, G, h, tol, start=None, max_iter=MAX_NEWTON):
    """Shared driver: maximize ``c@x`` over ``||x|| <= 1, Gx + h <= 0``.

    Constraints that cannot cut the unit ball are dropped first.
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float).reshape(-1, c.size)
    h = np.asarray(h, dtype=float).ravel()
    row_norms = np.linalg.norm(G, axis=1)
    if np.any(h > row_norms + 1e-15):
        return SolveResult(-math.inf, np.full(c.size, np.nan), Status.INFEASIBLE)
    keep = h > -row_norms
    G, h = G[keep], h[keep]
    norm_c = np.linalg.norm(c)

    if norm_c > 0:
        u = c / norm_c
        if G.shape[0] == 0 or np.all(G @ u + h <= 0):
            return SolveResult(norm_c, u, Status.VACUOUS)
    elif G.shape[0] == 0:
        return SolveResult(0.0, np.zeros(c.size), Status.VACUOUS)

    status = Status.OPTIMAL
    steps = 0
    if start is not None and _strictly_inside(start, G, h):
        x0 = np.asarray(start, dtype=float)
    elif np.all(h < -START_MARGIN):
        x0 = np.zeros(c.size)
    else:
        kind, x0, steps = _phase_one(G, h, tol, max_iter, stop_at_interior=True)
        if kind is Feasibility.EMPTY:
            return SolveResult(-math.inf, x0, Status.INFEASIBLE, steps)
        if kind is Feasibility.BOUNDARY:
            # no interior: solve a slightly relaxed problem, whose value is an
            # upper bound (the safe direction for screening)
            h = h - BOUNDARY_RELAX
            kind, x0, more = _phase_one(G, h, tol, max_iter, stop_at_interior=True)
            steps += more
            status = Status.DEGENERATE
    if norm_c == 0:
        return SolveResult(0.0, x0, status, steps)
    x, newton, gap = _barrier_max(c, G, h, x0, tol, max_iter)
    steps += newton
    if status is Status.OPTIMAL and gap > tol:
        status = Status.MAX_ITERATIONS
    return SolveResult(float(c @ x), x, status, steps, float(gap))


def _barrier_max_batch(C, G, h, X, tol, max_iter, eps=1e-9):
    """Run :func:`_barrier_max` on many objectives (rows of ``C``) sharing the
    constraints ``G x + h <= 0``; every row of ``X`` must be strictly feasible.

    Returns ``(X, newton_steps, certified_gaps)`` with per-row steps and gaps.
    """
    p, k = C.shape
    n_con = 1 + G.shape[0]
    t = n_con / (2.0 * np.maximum(np.linalg.norm(C, axis=1), 1e-300))
    X = X.copy()
    steps = np.zeros(p, dtype=int)
    gaps = np.full(p, math.inf)
    running = np.ones(p, dtype=bool)
    eye = np.eye(k)
    while np.any(running):
        centering = running.copy()
        for _ in range(MAX_CENTERING):
            if not np.any(centering):
                break
            idx = np.flatnonzero(centering)
            x, c, tt = X[idx], C[idx], t[idx]
            s0 = 1.0 - np.einsum("ij,ij->i", x, x)
            sig = -(x @ G.T + h)
            inv = 1.0 / sig
            g = -tt[:, None] * c + inv @ G + (2.0 / s0)[:, None] * x
            H = np.einsum("ij,jk,jl->ikl", inv**2, G, G)
            H += (4.0 / s0**2)[:, None, None] * np.einsum("ik,il->ikl", x, x)
            H += (2.0 / s0)[:, None, None] * eye
            dx = -np.linalg.solve(H, g[:, :, None])[:, :, 0]
            dec = -np.einsum("ij,ij->i", g, dx)
            moving = dec > 2 * eps
            moving &= steps[idx] < max_iter
            centering[idx[~moving]] = False
            if not np.any(moving):
                break
            idx, x, c, tt, dx = idx[moving], x[moving], c[moving], tt[moving], dx[moving]
            s0, sig, g = s0[moving], sig[moving], g[moving]
            Gdx = dx @ G.T
            step = np.ones(idx.size)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(Gdx > 0, sig / Gdx, np.inf)
            step = np.minimum(step, FRACTION_TO_BOUNDARY * ratio.min(axis=1, initial=np.inf))
            a2 = np.einsum("ij,ij->i", dx, dx)
            a1 = 2.0 * np.einsum("ij,ij->i", x, dx)
            root = (-a1 + np.sqrt(a1 * a1 + 4.0 * a2 * s0)) / (2.0 * np.maximum(a2, 1e-300))
            step = np.minimum(step, FRACTION_TO_BOUNDARY * root)
            slope = np.einsum("ij,ij->i", g, dx)
            cdx = np.einsum("ij,ij->i", c, dx)
            pending = np.ones(idx.size, dtype=bool)
            for _ in range(60):
                s0_new = s0 - step * a1 - step * step * a2
                sig_new = sig - step[:, None] * Gdx
                ok = (s0_new > 0) & np.all(sig_new > 0, axis=1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    delta = (-tt * step * cdx - np.log(s0_new / s0)
                             - np.sum(np.log(sig_new / sig), axis=1))
                ok &= delta <= 0.25 * step * slope
                pending &= ~ok
                if not np.any(pending):
                    break
                step = np.where(pending, 0.5 * step, step)
            step = np.where(pending, 0.0, step)
            X[idx] = x + step[:, None] * dx
            steps[idx] += 1
            centering[idx[pending]] = False
        idx = np.flatnonzero(running)
        x, c = X[idx], C[idx]
        u = 1.0 / (t[idx, None] * -(x @ G.T + h))
        upper = np.linalg.norm(c - u @ G, axis=1) - u @ h
        gaps[idx] = np.maximum(upper - np.einsum("ij,ij->i", c, x), 0.0)
        # polishing only pays off once the barrier term n_con / t is small
        for j in idx[(gaps[idx] > tol) & (n_con / t[idx] <= 10.0 * tol)]:
            gaps[j] = _certified_gap(X[j], t[j], C[j], G, h)
        finished = (gaps[idx] <= tol) | (n_con / t[idx] < 1e-3 * tol) | (steps[idx] >= max_iter)
        running[idx[finished]] = False
        t[idx[~finished]] *= 10.0
    return X, steps, gaps


@dataclass
class BatchResult:
    values: np.ndarray
    upper_bounds: np.ndarray
    iterations: np.ndarray
    statuses: list
    maximizers: np.ndarray


def solve_reduced_batch(T, residuals, A, psi, tol=DEFAULT_TOL, start=None) -> BatchResult:
    """:func:`solve_reduced` for many features at once.

    ``T`` holds the projected coordinates, one column per feature, and
    ``residuals`` the norms of the orthogonal parts. Features lying in the
    span of the normals go through the scalar path.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    residuals = np.asarray(residuals, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    psi = np.asarray(psi, dtype=float)
    d, p = T.shape
    values = np.empty(p)
    uppers = np.empty(p)
    iters = np.zeros(p, dtype=int)
    statuses = [Status.OPTIMAL] * p
    maximizers = np.zeros((p, d))

    G, h = _lifted_constraints(A, psi)
    row_norms = np.linalg.norm(G, axis=1)
    if np.any(h > row_norms + 1e-15):
        values[:] = uppers[:] = -math.inf
        return BatchResult(values, uppers, iters, [Status.INFEASIBLE] * p, maximizers)
    keep = h > -row_norms
    G, h = G[keep], h[keep]

    C = np.vstack([T, residuals]).T
    norms = np.linalg.norm(C, axis=1)
    degenerate = residuals < DEGENERATE_RESIDUAL
    with np.errstate(invalid="ignore", divide="ignore"):
        U = C / norms[:, None]
    vacuous = ~degenerate & np.all(U @ G.T + h <= 0, axis=1) if G.shape[0] else ~degenerate
    values[vacuous] = uppers[vacuous] = norms[vacuous]
    maximizers[vacuous] = U[vacuous, :d]
    for i in np.flatnonzero(vacuous):
        statuses[i] = Status.VACUOUS

    for i in np.flatnonzero(degenerate):
        res = solve_reduced(ProjectedFeature(T[:, i], float(residuals[i]), float(norms[i])),
                            A, psi, tol, start)
        values[i], uppers[i], iters[i] = res.value, res.upper_bound, res.iterations
        statuses[i] = res.status
        if res.feasible:
            maximizers[i] = res.maximizer

    todo = np.flatnonzero(~vacuous & ~degenerate)
    if todo.size:
        if start is not None and start.size == d:
            start = np.append(start, 0.0)
        if start is None or not _strictly_inside(start, G, h):
            kind, z = interior_point(G, h, tol)
            if kind is not Feasibility.INTERIOR:
                for i in todo:
                    res = solve_lifted(ProjectedFeature(T[:, i], float(residuals[i]),
                                                        float(norms[i])), A, psi, tol)
                    values[i], uppers[i] = res.value, res.upper_bound
                    iters[i], statuses[i] = res.iterations, res.status
                    if res.feasible:
                        maximizers[i] = res.maximizer[:d]
                return BatchResult(values, uppers, iters, statuses, maximizers)
            start = z
        X0 = np.tile(start, (todo.size, 1))
        X, steps, gaps = _barrier_max_batch(C[todo], G, h, X0, tol, MAX_NEWTON)
        lifted = np.einsum("ij,ij->i", C[todo], X)
        t_z = X[:, :d]
        k = np.sqrt(np.maximum(0.0, 1.0 - np.einsum("ij,ij->i", t_z, t_z)))
        reduced = np.einsum("ij,ji->i", t_z, T[:, todo]) + k * residuals[todo]
        values[todo] = np.maximum(reduced, lifted)
        uppers[todo] = lifted + gaps
        iters[todo] = steps
        maximizers[todo] = t_z
        for j, i in enumerate(todo):
            if gaps[j] > tol:
                statuses[i] = Status.MAX_ITERATIONS
    return BatchResult(values, uppers, iters, statuses, maximizers)


# ---------------------------------------------------------------------------
# public formulations


def solve_full(b, nr: NormalizedRegion, tol=DEFAULT_TOL, start=None) -> SolveResult:
    """Solve in the ambient dimension ``n``."""
    return _solve_ball_polytope(np.asarray(b, dtype=float), nr.N.T, nr.psi, tol, start)


def _lifted_constraints(A, psi):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return np.hstack([A, np.zeros((A.shape[0], 1))]), np.asarray(psi, dtype=float)


def solve_lifted(pf: ProjectedFeature, A, psi, tol=DEFAULT_TOL, start=None) -> SolveResult:
    """Solve in ``d + 1`` dimensions: objective ``(t_b, ||b_perp||)``, the
    unit ball, and constraints ``[A 0] x + psi <= 0``. Maximizer is in R^(d+1)."""
    if pf.residual_norm < DEGENERATE_RESIDUAL:
        return solve_reduced(pf, A, psi, tol)
    G, h = _lifted_constraints(A, psi)
    if start is not None and start.size == G.shape[1] - 1:
        start = np.append(start, 0.0)
    return _solve_ball_polytope(pf.lifted, G, h, tol, start)


def solve_reduced(pf: ProjectedFeature, A, psi, tol=DEFAULT_TOL, start=None) -> SolveResult:
    """Optimal value of ``max t@t_b + k(t) ||b_perp||`` s.t. ``A t + psi <= 0``,
    ``k(t) = sqrt(1 - ||t||^2)``, returned with the maximizer ``t`` in R^d.

    Computed by solving the lifted problem and dropping the last coordinate.
    Features lying in the span of the normals have no ``k`` term and are
    solved directly in ``d`` dimensions (status ``degenerate``).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    d = A.shape[1]
    if pf.residual_norm < DEGENERATE_RESIDUAL:
        if start is not None and start.size == d + 1:
            start = start[:d]
        res = _solve_ball_polytope(pf.t, A, psi, tol, start)
        if res.status in (Status.OPTIMAL, Status.VACUOUS):
            res.status = Status.DEGENERATE
        return res
    res = solve_lifted(pf, A, psi, tol, start)
    if not res.feasible:
        res.maximizer = res.maximizer[:d]
        return res
    t_z = res.maximizer[:d]
    k = math.sqrt(max(0.0, 1.0 - t_z @ t_z))
    value = t_z @ pf.t + k * pf.residual_norm
    # evaluating the reduced objective at the projected maximizer can only
    # improve on the lifted value; the certified gap still bounds the error
    return SolveResult(float(max(value, res.value)), t_z, res.status,
                       res.iterations, res.kkt_residual,
                       upper_bound=res.upper_bound)


def closed_form_one_dome(t, residual, psi) -> float:
    """Value over a single dome for a unit feature with normal component ``t``
    and orthogonal component ``residual``."""
    if psi > 1:
        raise ValueError(f"dome with psi={psi} > 1 is empty")
    if t <= -psi:
        return 1.0
    return -psi * t + math.sqrt(1.0 - psi * psi) * residual


def interior_point(A, psi, tol=DEFAULT_TOL):
    """A point strictly inside ``||x|| <= 1, A x + psi <= 0`` or ``None``.

    Returns ``(Feasibility, point)``; reusable as ``start`` for every feature
    solved against the same constraints.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    psi = np.asarray(psi, dtype=float)
    keep = psi > -np.linalg.norm(A, axis=1)
    A, psi = A[keep], psi[keep]
    if psi.size == 0 or np.all(psi < -START_MARGIN):
        return Feasibility.INTERIOR, np.zeros(A.shape[1])
    kind, z, _ = _phase_one(A, psi, tol, MAX_NEWTON, stop_at_interior=True)
    return kind, (z if kind is Feasibility.INTERIOR else None)


def feasibility_check(nr: NormalizedRegion, tol=DEFAULT_TOL) -> Feasibility:
    act = nr.active()
    if act.m == 0:
        return Feasibility.INTERIOR
    if np.any(act.psi > 1):
        return Feasibility.EMPTY
    if np.all(act.psi < 0):
        return Feasibility.INTERIOR
    kind, _, _ = _phase_one(act.N.T, act.psi, tol, 10 * MAX_NEWTON, stop_at_interior=False)
    return kind


# ---------------------------------------------------------------------------
# dual oracle


def _dual_objective(lam, b, N, psi):
    return float(np.linalg.norm(b - N @ lam) - psi @ lam)


def _support_stationary(b, NS, psi_S):
    """Stationary point of ``||b - NS lam|| - psi_S @ lam`` on its support.

    When ``b`` is not in span(NS) stationarity gives
    ``lam = beta + rho G^{-1} psi_S`` with ``beta`` the least-squares
    coefficients of ``b``, ``G = NS.T NS`` and
    ``rho = ||b_perp|| / sqrt(1 - psi_S G^{-1} psi_S)``. Returns ``None`` when
    the point does not exist, is not nonnegative or ``G`` is ill conditioned.
    """
    G = NS.T @ NS
    if np.linalg.cond(G) > 1e12:
        return None
    beta = np.linalg.solve(G, NS.T @ b)
    b_perp = np.linalg.norm(b - NS @ beta)
    if b_perp <= 1e-12 * (1.0 + np.linalg.norm(b)):
        lam = beta
    else:
        Gi_psi = np.linalg.solve(G, psi_S)
        quad = psi_S @ Gi_psi
        if quad >= 1.0:
            return None
        lam = beta + b_perp / math.sqrt(1.0 - quad) * Gi_psi
    if np.any(lam < -1e-12):
        return None
    return np.maximum(lam, 0.0)


def _active_set_candidates(b, N, psi, max_size):
    """Stationary points of the dual restricted to each support set."""
    m = N.shape[1]
    for size in range(1, min(m, max_size) + 1):
        for S in itertools.combinations(range(m), size):
            S = list(S)
            lam_S = _support_stationary(b, N[:, S], psi[S])
            if lam_S is None:
                continue
            lam = np.zeros(m)
            lam[S] = lam_S
            yield lam


def solve_dual(b, nr: NormalizedRegion, tol=DEFAULT_TOL, max_sweeps=10000,
               enumerate_up_to=10) -> SolveResult:
    """Minimize ``||b - N lam|| - psi @ lam`` over ``lam >= 0``.

    Cyclic coordinate minimization (each one-dimensional problem has a closed
    form) followed by a pass over the stationary points of every support set
    of size up to ``enumerate_up_to``. Every evaluated ``lam`` gives an upper
    bound on the primal value, so the smallest one is kept.

    A dual value below ``-||b||`` certifies that the feasible set is empty,
    since every feasible ``z`` has ``b @ z >= -||b||``. Without a strictly
    feasible point strong duality may fail and the value is only an upper
    bound. ``maximizer`` holds ``lam`` (one entry per half-space).
    """
    b = np.asarray(b, dtype=float)
    N, psi = nr.N, nr.psi
    m = psi.size
    bnorm = np.linalg.norm(b)
    floor = -bnorm - 1e-9 * (1.0 + bnorm)
    lam = np.zeros(m)
    if np.any(psi > 1):
        return SolveResult(-math.inf, lam, Status.INFEASIBLE)
    live = np.flatnonzero(psi > -1)
    resid = b.copy()
    best = bnorm
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for k in live:
            nk = N[:, k]
            r_k = resid + lam[k] * nk
            a = nk @ r_k
            rho = math.sqrt(max(r_k @ r_k - a * a, 0.0))
            p = min(psi[k], 1.0 - 1e-12)
            new = max(0.0, a + p * rho / math.sqrt(1.0 - p * p))
            resid = r_k - new * nk
            lam[k] = new
        value = np.linalg.norm(resid) - psi @ lam
        if value < floor:
            return SolveResult(-math.inf, lam, Status.INFEASIBLE, sweeps)
        if best - value <= 1e-15 * (1.0 + abs(value)):
            best = min(best, value)
            break
        best = value

    value = _dual_objective(lam, b, N, psi)
    if live.size and live.size <= enumerate_up_to:
        sub_N, sub_psi = N[:, live], psi[live]
        for cand in _active_set_candidates(b, sub_N, sub_psi, live.size):
            v = _dual_objective(cand, b, sub_N, sub_psi)
            if v < value:
                value = v
                lam = np.zeros(m)
                lam[live] = cand
    if value < floor:
        return SolveResult(-math.inf, lam, Status.INFEASIBLE, sweeps)
    return SolveResult(float(value), lam, Status.OPTIMAL, sweeps,
                       _projected_gradient_norm(lam, b, N, psi), upper_bound=float(value))


def _projected_gradient_norm(lam, b, N, psi):
    r = b - N @ lam
    nr_ = np.linalg.norm(r)
    if nr_ == 0:
        return 0.0
    grad = -N.T @ (r / nr_) - psi
    pg = np.where(lam > 0, grad, np.minimum(grad, 0.0))
    return float(np.linalg.norm(pg))
