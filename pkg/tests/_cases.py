"""Random feasible instances shared by the solver and acceptance tests."""

import numpy as np

from domescreen.geometry import normalize, orthonormal_basis, random_region


def unit(v):
    return v / np.linalg.norm(v)


def feature(nr, rng, kind):
    """Unit feature of a given flavour.

    ``toward`` leans on the normals so the half-spaces bind, ``span`` lies in
    the span of the normals, ``random`` is isotropic.
    """
    n, m = nr.N.shape
    if kind == "random":
        return unit(rng.standard_normal(n))
    w = rng.uniform(0.2, 1.0, m)
    if kind == "span":
        return unit(nr.N @ w)
    return unit(nr.N @ w + rng.uniform(0.05, 1.0) * unit(rng.standard_normal(n)))


def instance(n, m, seed, kind=None):
    rng = np.random.default_rng(seed)
    region = random_region(n, m, seed)
    nr = normalize(region)
    basis = orthonormal_basis(nr.N)
    if kind is None:
        kind = rng.choice(["toward", "toward", "toward", "span", "random"])
    return nr, basis, feature(nr, rng, kind)
