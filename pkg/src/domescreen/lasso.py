"""Reference lasso solver, cyclic coordinate descent with KKT termination.

Solves ``min_w 0.5 ||x - B w||^2 + lam ||w||_1`` for a dictionary with unit
norm columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class LassoError(ValueError):
    pass


def compute_lambda_max(B, x):
    """``max_i |b_i @ x|`` and its index."""
    corr = np.abs(np.asarray(B).T @ np.asarray(x))
    i = int(np.argmax(corr))
    return float(corr[i]), i


@dataclass(frozen=True)
class LassoInstance:
    """Dictionary with unit-norm columns, target and regularization weight.

    ``col_norms`` keeps the norms of the columns as given, so coefficients for
    the original dictionary are ``w / col_norms``.
    """

    B: np.ndarray
    x: np.ndarray
    lam: float
    lambda_max: float
    col_norms: np.ndarray

    @classmethod
    def from_data(cls, B, x, lambda_ratio=None, lam=None):
        B = np.asarray(B, dtype=float)
        x = np.asarray(x, dtype=float).ravel()
        if B.ndim != 2 or B.shape[0] != x.size:
            raise LassoError(f"dictionary shape {B.shape} does not match target length {x.size}")
        norms = np.linalg.norm(B, axis=0)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise LassoError(f"dictionary column {zero[0]} is zero")
        Bn = B / norms
        lmax, _ = compute_lambda_max(Bn, x)
        if (lambda_ratio is None) == (lam is None):
            raise LassoError("give exactly one of lambda_ratio and lam")
        if lam is None:
            lam = lambda_ratio * lmax
        if not lam > 0:
            raise LassoError(f"lambda must be positive, got {lam}")
        return cls(B=Bn, x=x, lam=float(lam), lambda_max=lmax, col_norms=norms)

    @property
    def n(self):
        return self.B.shape[0]

    @property
    def p(self):
        return self.B.shape[1]

    def rescaled(self, alpha):
        return LassoInstance(self.B, alpha * self.x, alpha * self.lam,
                             alpha * self.lambda_max, self.col_norms)

    def restricted(self, keep):
        """Same problem on the columns in the boolean mask ``keep``."""
        keep = np.asarray(keep, dtype=bool)
        return LassoInstance(self.B[:, keep], self.x, self.lam, self.lambda_max,
                             self.col_norms[keep])


@dataclass
class LassoSolution:
    w: np.ndarray
    dual_point: np.ndarray
    objective: float
    kkt_violation: float
    iterations: int
    converged: bool
    objective_history: list = field(default_factory=list, repr=False)


def objective(inst: LassoInstance, w):
    r = inst.x - inst.B @ w
    return 0.5 * float(r @ r) + inst.lam * float(np.sum(np.abs(w)))


def kkt_violation(inst: LassoInstance, w, residual=None):
    if residual is None:
        residual = inst.x - inst.B @ w
    corr = inst.B.T @ residual / inst.lam
    zero = w == 0
    viol = np.where(zero, np.maximum(np.abs(corr) - 1.0, 0.0),
                    np.abs(corr - np.sign(w)))
    return float(np.max(viol, initial=0.0))


def soft_threshold(v, lam):
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


def _sweep(B, w, residual, idx, lam):
    biggest = 0.0
    for i in idx:
        bi = B[:, i]
        old = w[i]
        v = old + bi @ residual
        new = v - lam if v > lam else (v + lam if v < -lam else 0.0)
        if new != old:
            residual -= (new - old) * bi
            w[i] = new
            biggest = max(biggest, abs(new - old))
    return biggest


def solve_lasso(inst: LassoInstance, tol=1e-8, max_sweeps=10000, w0=None) -> LassoSolution:
    """Cyclic coordinate descent.

    Alternates a sweep over all coordinates with sweeps restricted to the
    current support until the support stops changing, and stops once the KKT
    violation (in units of ``lam``) is at most ``tol``.
    """
    B, lam = inst.B, inst.lam
    w = np.zeros(inst.p) if w0 is None else np.array(w0, dtype=float)
    residual = inst.x - B @ w
    history = [objective(inst, w)]
    everything = range(inst.p)
    sweeps = 0
    # below lambda_max a cold start always takes one full sweep, so separable
    # designs come out exact; at or above it w = 0 is exactly optimal
    if w0 is None and lam < inst.lambda_max:
        viol = np.inf
    else:
        viol = kkt_violation(inst, w, residual)
    while viol > tol and sweeps < max_sweeps:
        _sweep(B, w, residual, everything, lam)
        sweeps += 1
        history.append(objective(inst, w))
        support = np.flatnonzero(w)
        while sweeps < max_sweeps and support.size:
            change = _sweep(B, w, residual, support, lam)
            sweeps += 1
            history.append(objective(inst, w))
            if change <= 1e-3 * tol * lam:
                break
        # keep the residual from drifting over many incremental updates
        residual = inst.x - B @ w
        viol = kkt_violation(inst, w, residual)
    return LassoSolution(
        w=w,
        dual_point=residual / lam,
        objective=objective(inst, w),
        kkt_violation=viol,
        iterations=sweeps,
        converged=viol <= tol,
        objective_history=history,
    )


def solve_lasso_pgd(inst: LassoInstance, tol=1e-12, max_iter=200000) -> LassoSolution:
    """Accelerated projected gradient on the split ``w = u - v``, ``u, v >= 0``.

    An independent check on :func:`solve_lasso`; uses adaptive restarts and
    stops on the norm of the projected gradient.
    """
    B, x, lam = inst.B, inst.x, inst.lam
    p = inst.p
    L = 2.0 * np.linalg.norm(B, 2) ** 2
    z = np.zeros(2 * p)
    y = z.copy()
    theta = 1.0

    def grad(s):
        r = B @ (s[:p] - s[p:]) - x
        g = B.T @ r
        return np.concatenate([g + lam, -g + lam])

    it = 0
    for it in range(1, max_iter + 1):
        z_new = np.maximum(y - grad(y) / L, 0.0)
        theta_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
        if (y - z_new) @ (z_new - z) > 0:
            y = z_new.copy()
            theta_new = 1.0
        else:
            y = z_new + (theta - 1.0) / theta_new * (z_new - z)
        z, theta = z_new, theta_new
        if it % 50 == 0:
            g = grad(z)
            pg = np.where(z > 0, g, np.minimum(g, 0.0))
            if np.max(np.abs(pg)) <= tol:
                break
    w = z[:p] - z[p:]
    residual = x - B @ w
    viol = kkt_violation(inst, w, residual)
    return LassoSolution(w, residual / lam, objective(inst, w), viol, it, True)
