"""Safe feature screening for the lasso with a sphere-and-half-spaces bound on
the dual optimum."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import solvers
from .geometry import Region, normalize, orthonormal_basis
from .lasso import LassoInstance, kkt_violation, solve_lasso

REJECT_MARGIN = 1e-9


class ScreeningError(ValueError):
    pass


@dataclass
class ScreeningReport:
    mu_pos: np.ndarray
    mu_neg: np.ndarray
    rejected: np.ndarray
    m_used: int
    region: Region | None
    timing: dict = field(default_factory=dict)
    solver_stats: dict = field(default_factory=dict)
    status: str = "ok"
    margin: float = REJECT_MARGIN

    @property
    def rejection_fraction(self) -> float:
        return float(np.mean(self.rejected)) if self.rejected.size else 0.0

    @property
    def n_rejected(self) -> int:
        return int(np.sum(self.rejected))


def sphere_bound(inst: LassoInstance):
    """Ball around ``x / lam`` containing the dual optimum.

    The dual optimum is the projection of ``x / lam`` onto the dual feasible
    set ``{theta : |B.T theta| <= 1}``, and ``x / lambda_max`` lies in that
    set, so the optimum is no farther from ``x / lam`` than ``x / lambda_max``.
    For ``lam >= lambda_max`` the radius is zero.
    """
    q = inst.x / inst.lam
    if inst.lambda_max <= inst.lam:
        return q, 0.0
    r = (1.0 / inst.lam - 1.0 / inst.lambda_max) * float(np.linalg.norm(inst.x))
    return q, r


def greedy_halfspaces(inst: LassoInstance, m: int):
    """Dual constraints ``s_i b_i @ theta <= 1`` of the ``m`` features most
    correlated with the target, ``s_i = sign(b_i @ x)``."""
    if m >= inst.p:
        raise ScreeningError(f"m={m} must be smaller than the number of features {inst.p}")
    corr = inst.B.T @ inst.x
    order = np.argsort(-np.abs(corr), kind="stable")[:m]
    signs = np.where(corr[order] < 0, -1.0, 1.0)
    normals = inst.B[:, order] * signs
    return normals, np.ones(m), order


def _exact_ball_report(inst, q, margin, started):
    mu_pos = inst.B.T @ q
    mu_neg = -mu_pos
    rejected = (mu_pos < 1 - margin) & (mu_neg < 1 - margin)
    return ScreeningReport(mu_pos, mu_neg, rejected, 0, None,
                           timing={"region": time.perf_counter() - started,
                                   "project": 0.0, "solve": 0.0})


def screen(inst: LassoInstance, m: int, tol=solvers.DEFAULT_TOL, margin=REJECT_MARGIN,
           parallelism=1) -> ScreeningReport:
    """Screening values ``mu(+b_i)``, ``mu(-b_i)`` for every feature and the
    rejection mask ``mu(+b_i) < 1 - margin and mu(-b_i) < 1 - margin``.

    Each value is a certified upper bound on the support function of the
    region (solver value plus duality gap), so every rejection is safe.
    """
    started = time.perf_counter()
    q, r = sphere_bound(inst)
    if r == 0.0:
        return _exact_ball_report(inst, q, margin, started)

    if m == 0:
        region = Region(q, r, np.zeros((inst.n, 0)), np.zeros(0))
        proj_b = inst.B.T @ q
        mu_pos = proj_b + r
        mu_neg = -proj_b + r
        rejected = (mu_pos < 1 - margin) & (mu_neg < 1 - margin)
        return ScreeningReport(mu_pos, mu_neg, rejected, 0, region,
                               timing={"region": time.perf_counter() - started,
                                       "project": 0.0, "solve": 0.0})

    normals, offsets, _ = greedy_halfspaces(inst, m)
    region = Region(q, r, normals, offsets)
    nr = normalize(region)
    basis = orthonormal_basis(nr.N)
    kind, start = solvers.interior_point(basis.A, nr.psi, tol)
    t_region = time.perf_counter() - started

    if kind is solvers.Feasibility.EMPTY:
        # the true dual optimum always lies in the region, so this is a bug
        p = inst.p
        return ScreeningReport(np.full(p, -np.inf), np.full(p, -np.inf), np.ones(p, bool),
                               m, region, timing={"region": t_region, "project": 0.0, "solve": 0.0},
                               status="inconsistent_region")

    t0 = time.perf_counter()
    T = basis.V.T @ inst.B
    residual = np.linalg.norm(inst.B - basis.V @ T, axis=0)
    qb = inst.B.T @ q
    t_project = time.perf_counter() - t0

    t0 = time.perf_counter()
    signed_T = np.hstack([T, -T])
    signed_res = np.concatenate([residual, residual])
    if parallelism > 1:
        chunks = np.array_split(np.arange(2 * inst.p), parallelism)
        with ThreadPoolExecutor(parallelism) as pool:
            parts = list(pool.map(
                lambda idx: solvers.solve_reduced_batch(signed_T[:, idx], signed_res[idx],
                                                        basis.A, nr.psi, tol, start),
                chunks))
        upper = np.concatenate([part.upper_bounds for part in parts])
        iters = np.concatenate([part.iterations for part in parts])
        status_list = [st for part in parts for st in part.statuses]
    else:
        batch = solvers.solve_reduced_batch(signed_T, signed_res, basis.A, nr.psi, tol, start)
        upper, iters, status_list = batch.upper_bounds, batch.iterations, batch.statuses
    t_solve = time.perf_counter() - t0

    # certified upper bounds keep the rejections safe under solver tolerance
    mu_pos = qb + r * upper[: inst.p]
    mu_neg = -qb + r * upper[inst.p:]
    statuses = {}
    for st in status_list:
        statuses[st.value] = statuses.get(st.value, 0) + 1
    rejected = (mu_pos < 1 - margin) & (mu_neg < 1 - margin)
    return ScreeningReport(
        mu_pos, mu_neg, rejected, m, region,
        timing={"region": t_region, "project": t_project, "solve": t_solve},
        solver_stats={"newton_steps_total": int(iters.sum()),
                      "newton_steps_max": int(iters.max(initial=0)),
                      "rank": basis.rank,
                      "statuses": statuses},
        margin=margin,
    )


@dataclass
class VerificationOutcome:
    passed: bool
    violations: list
    full_objective: float
    reduced_objective: float
    padded_kkt: float
    full_kkt: float

    def describe(self) -> str:
        if self.passed:
            return "screening verified"
        lines = ["screening FAILED"]
        for v in self.violations:
            lines.append("  feature {index}: mu_pos={mu_pos:.12g} mu_neg={mu_neg:.12g} "
                         "w={w:.3e}".format(**v))
        lines.append(f"  objectives full={self.full_objective:.12g} "
                     f"reduced={self.reduced_objective:.12g} padded_kkt={self.padded_kkt:.3e}")
        return "\n".join(lines)


def verify_screening(inst: LassoInstance, report: ScreeningReport, lasso_tol=1e-8,
                     full=None) -> VerificationOutcome:
    """Check a report against the lasso solved with and without the rejected
    features. ``full`` may pass a precomputed solution of the full problem."""
    if full is None:
        full = solve_lasso(inst, tol=lasso_tol)
    violations = [
        {"index": int(i), "mu_pos": float(report.mu_pos[i]),
         "mu_neg": float(report.mu_neg[i]), "w": float(full.w[i])}
        for i in np.flatnonzero(report.rejected & (full.w != 0))
    ]
    keep = ~report.rejected
    if np.any(keep):
        reduced = solve_lasso(inst.restricted(keep), tol=lasso_tol)
        padded = np.zeros(inst.p)
        padded[keep] = reduced.w
        reduced_obj = reduced.objective
    else:
        padded = np.zeros(inst.p)
        reduced_obj = 0.5 * float(inst.x @ inst.x)
    padded_kkt = kkt_violation(inst, padded)
    objective_gap = abs(reduced_obj - full.objective)
    passed = (not violations and padded_kkt <= lasso_tol
              and objective_gap <= lasso_tol * max(1.0, abs(full.objective)))
    return VerificationOutcome(passed, violations, full.objective, reduced_obj,
                               padded_kkt, full.kkt_violation)
