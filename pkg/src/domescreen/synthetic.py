"""Seeded synthetic lasso problems.

Dictionaries are iid Gaussian. Targets come from one of three models:

``sparse``
    a unit-norm combination of ``atoms`` dictionary columns with weights of
    random sign and magnitude in [0.5, 1], plus Gaussian noise of norm about
    ``noise``. This is the default.
``iid``
    an iid Gaussian vector, unrelated to the dictionary.
``atom``
    a single column plus noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lasso import LassoInstance

TARGET_MODELS = ("sparse", "iid", "atom")


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 50
    p: int = 500
    target_model: str = "sparse"
    atoms: int = 2
    noise: float = 0.05

    def __post_init__(self):
        if self.target_model not in TARGET_MODELS:
            raise ValueError(f"unknown target model {self.target_model!r}")
        if self.n < 1 or self.p < 2:
            raise ValueError("need n >= 1 and p >= 2")


def generate(spec: SyntheticSpec, seed: int):
    """Raw dictionary ``(n, p)`` (columns not normalized) and target ``(n,)``."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((spec.n, spec.p))
    if spec.target_model == "iid":
        return B, rng.standard_normal(spec.n)
    k = 1 if spec.target_model == "atom" else spec.atoms
    Bn = B / np.linalg.norm(B, axis=0)
    idx = rng.choice(spec.p, size=k, replace=False)
    weights = rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.5, 1.0, size=k)
    x = Bn[:, idx] @ weights
    x /= np.linalg.norm(x)
    x += spec.noise * rng.standard_normal(spec.n) / np.sqrt(spec.n)
    return B, x


def instance(spec: SyntheticSpec, seed: int, lambda_ratio: float) -> LassoInstance:
    B, x = generate(spec, seed)
    return LassoInstance.from_data(B, x, lambda_ratio=lambda_ratio)
