"""Region representations, projection onto the span of the half-space normals,
and the orthogonal transformations that fix that span."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.stats

UNIT_TOL = 1e-12
RANK_TOL = 1e-10


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """Sphere ``||theta - q|| <= r`` intersected with ``normals[k] @ theta <= offsets[k]``.

    ``normals`` is stored as an ``(n, m)`` array, one unit normal per column.
    """

    q: np.ndarray
    r: float
    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        normals = np.asarray(self.normals, dtype=float)
        if normals.ndim == 1:
            normals = normals.reshape(-1, 1)
        if normals.size == 0:
            normals = np.zeros((q.size, 0))
        offsets = np.asarray(self.offsets, dtype=float).ravel()
        if not self.r > 0:
            raise GeometryError(f"sphere radius must be positive, got {self.r}")
        if normals.shape[0] != q.size:
            raise GeometryError("normals and center have different dimensions")
        if normals.shape[1] != offsets.size:
            raise GeometryError("one offset is required per normal")
        norms = np.linalg.norm(normals, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise GeometryError("normals must have unit norm")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def m(self) -> int:
        return self.offsets.size

    def contains(self, theta, slack=0.0) -> bool:
        theta = np.asarray(theta, dtype=float)
        in_ball = np.linalg.norm(theta - self.q) <= self.r + slack
        return bool(in_ball and np.all(self.normals.T @ theta <= self.offsets + slack))


@dataclass(frozen=True)
class NormalizedRegion:
    """Unit-ball form: ``||z|| <= 1`` and ``N.T @ z + psi <= 0``.

    Dome ``k`` (the ball cut by half-space ``k``) is empty when ``psi[k] > 1``
    and half-space ``k`` is vacuous when ``psi[k] <= -1``.
    """

    N: np.ndarray
    psi: np.ndarray
    empty_domes: np.ndarray = field(init=False)
    vacuous: np.ndarray = field(init=False)

    def __post_init__(self):
        N = np.asarray(self.N, dtype=float)
        if N.ndim == 1:
            N = N.reshape(-1, 1)
        psi = np.asarray(self.psi, dtype=float).ravel()
        if N.shape[1] != psi.size:
            raise GeometryError("N must have one column per psi entry")
        if N.shape[1] and np.any(np.abs(np.linalg.norm(N, axis=0) - 1.0) > UNIT_TOL):
            raise GeometryError("columns of N must have unit norm")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "empty_domes", psi > 1.0)
        object.__setattr__(self, "vacuous", psi <= -1.0)

    @property
    def n(self) -> int:
        return self.N.shape[0]

    @property
    def m(self) -> int:
        return self.psi.size

    def active(self) -> "NormalizedRegion":
        """Same feasible set with the vacuous half-spaces dropped."""
        keep = ~self.vacuous
        return NormalizedRegion(self.N[:, keep], self.psi[keep])


@dataclass(frozen=True)
class ProjectionBasis:
    V: np.ndarray  # (n, d), orthonormal columns spanning the normals
    A: np.ndarray  # (m, d) == N.T @ V
    rank: int


@dataclass(frozen=True)
class ProjectedFeature:
    t: np.ndarray
    residual_norm: float
    original_norm: float

    @property
    def lifted(self) -> np.ndarray:
        """``(t, ||b - V t||)``, the feature in the lifted coordinates."""
        return np.append(self.t, self.residual_norm)


def normalize(region: Region) -> NormalizedRegion:
    psi = (region.normals.T @ region.q - region.offsets) / region.r
    return NormalizedRegion(region.normals, psi)


def denormalize_value(mu_bar, b, region: Region) -> float:
    return float(region.q @ np.asarray(b, dtype=float) + region.r * mu_bar)


def orthonormal_basis(N, tol=RANK_TOL) -> ProjectionBasis:
    """Orthonormal basis of the column span of ``N`` via pivoted QR.

    The rank is the number of diagonal entries of ``R`` above ``tol`` times
    the largest one. Columns of ``V`` are signed so that ``diag(R) > 0``.
    """
    N = np.asarray(N, dtype=float)
    if N.ndim == 1:
        N = N.reshape(-1, 1)
    if N.shape[1] == 0:
        raise GeometryError("cannot build a basis from zero normals")
    Q, R, _ = scipy.linalg.qr(N, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0:
        raise GeometryError("normals are all zero")
    d = int(np.sum(diag > tol * diag[0]))
    signs = np.sign(np.diag(R)[:d])
    signs[signs == 0] = 1.0
    V = Q[:, :d] * signs
    return ProjectionBasis(V=V, A=N.T @ V, rank=d)


def project(b, basis: ProjectionBasis) -> ProjectedFeature:
    b = np.asarray(b, dtype=float)
    t = basis.V.T @ b
    residual = b - basis.V @ t
    return ProjectedFeature(
        t=t,
        residual_norm=float(np.linalg.norm(residual)),
        original_norm=float(np.linalg.norm(b)),
    )


def _completion(M):
    """Orthonormal basis of the orthogonal complement of the columns of ``M``."""
    Q, _ = np.linalg.qr(M, mode="complete")
    return Q[:, M.shape[1]:]


def make_symmetry_rotation(z1, z2, basis: ProjectionBasis, tol=1e-10):
    """Orthogonal ``R`` fixing span(V) pointwise with ``R @ z2 == z1``.

    Returns ``(R, degenerate)``. When both residuals vanish the vectors lie in
    the span, so they are equal and the identity is returned with
    ``degenerate=True``.
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    V = basis.V
    if abs(np.linalg.norm(z1) - np.linalg.norm(z2)) > tol:
        raise GeometryError("z1 and z2 must have equal norms")
    t1, t2 = V.T @ z1, V.T @ z2
    if np.max(np.abs(t1 - t2), initial=0.0) > tol:
        raise GeometryError("z1 and z2 must have equal projections")
    r1 = z1 - V @ t1
    r2 = z2 - V @ t2
    n1, n2 = np.linalg.norm(r1), np.linalg.norm(r2)
    if n1 < tol or n2 < tol:
        return np.eye(z1.size), True
    u = r1 / n1
    v = r2 / n2
    U = np.column_stack([V, u, _completion(np.column_stack([V, u]))])
    W = np.column_stack([V, v, _completion(np.column_stack([V, v]))])
    return U @ W.T, False


def random_stabilizer(basis: ProjectionBasis, rng) -> np.ndarray:
    """Random orthogonal matrix acting as the identity on span(V)."""
    V = basis.V
    P = _completion(V)
    k = P.shape[1]
    if k == 0:
        return np.eye(V.shape[0])
    if k == 1:
        O = np.array([[rng.choice([-1.0, 1.0])]])
    else:
        O = scipy.stats.ortho_group.rvs(k, random_state=rng)
    return V @ V.T + P @ O @ P.T


def random_region(n, m, seed, feasible=True) -> Region:
    """Deterministic random test region.

    With ``feasible=True`` an interior point ``theta0`` strictly inside the
    sphere is drawn first and every offset is set a positive margin above
    ``normals[k] @ theta0``, so the intersection has nonempty interior.
    """
    if not 1 <= m < n:
        raise GeometryError("random_region needs 1 <= m < n")
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    r = float(rng.uniform(0.5, 2.0))
    normals = rng.standard_normal((n, m))
    normals /= np.linalg.norm(normals, axis=0)
    if feasible:
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        theta0 = q + r * rng.uniform(0.0, 0.8) * u
        margins = r * rng.uniform(0.02, 0.6, size=m)
        offsets = normals.T @ theta0 + margins
    else:
        offsets = normals.T @ q + r * rng.uniform(-1.5, 1.5, size=m)
    return Region(q=q, r=r, normals=normals, offsets=offsets)

