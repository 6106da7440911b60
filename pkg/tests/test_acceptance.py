"""Acceptance gate. One test per criterion; each records a PASS/FAIL line that
is printed at the end of the run (and immediately with ``-s``)."""

import math
import time

import numpy as np
import pytest

from _cases import instance, unit
from conftest import ACCEPTANCE
from domescreen import synthetic
from domescreen.geometry import (NormalizedRegion, ProjectedFeature, make_symmetry_rotation,
                                 normalize, orthonormal_basis, project, random_region)
from domescreen.lasso import LassoInstance, soft_threshold, solve_lasso, solve_lasso_pgd
from domescreen.screening import screen, verify_screening
from domescreen.solvers import (Feasibility, closed_form_one_dome, feasibility_check, solve_dual,
                                solve_full, solve_lifted, solve_reduced)

SUITE = synthetic.SyntheticSpec(n=50, p=500)
SUITE_SEEDS = range(50)


def record(name, passed, detail):
    ACCEPTANCE.append((passed, name, detail))
    print(f"\n{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    assert passed, detail


def equivalence_suite():
    plan = [(10, 60), (100, 60), (1000, 6)]
    cases = []
    for n, per_m in plan:
        for m in (1, 2, 3, 5):
            for k in range(per_m):
                seed = 100_000 * m + 1000 * (n % 997) + k
                kind = "toward" if n == 1000 else None
                cases.append((n, m, seed, kind))
    return cases


@pytest.fixture(scope="module")
def equivalence_results():
    rows = []
    started = time.perf_counter()
    for n, m, seed, kind in equivalence_suite():
        nr, basis, b = instance(n, m, seed, kind)
        pf = project(b, basis)
        full = solve_full(b, nr).value
        rows.append((nr, b, full,
                     solve_reduced(pf, basis.A, nr.psi).value,
                     solve_lifted(pf, basis.A, nr.psi).value))
    return rows, time.perf_counter() - started


def test_equivalence(equivalence_results):
    rows, elapsed = equivalence_results
    red = max(abs(r[3] - r[2]) for r in rows)
    lif = max(abs(r[4] - r[2]) for r in rows)
    passed = len(rows) >= 500 and red <= 1e-6 and lif <= 1e-6 and elapsed < 120
    record("reduced/lifted equal full", passed,
           f"{len(rows)} instances, max|reduced-full|={red:.2e}, max|lifted-full|={lif:.2e}, "
           f"{elapsed:.1f}s")


def test_dual_oracle(equivalence_results):
    rows, _ = equivalence_results
    gaps = []
    for nr, b, full, _, _ in rows:
        if feasibility_check(nr) is Feasibility.INTERIOR:
            gaps.append(abs(solve_dual(b, nr).value - full))
    worst = max(gaps)
    record("dual oracle agrees", worst <= 1e-6 and len(gaps) > 0,
           f"{len(gaps)} Slater instances, max gap={worst:.2e}")


def test_invariance():
    worst_sym = 0.0
    for trial in range(200):
        n, m = [(6, 2), (12, 3), (30, 5), (4, 1)][trial % 4]
        nr, basis, b = instance(n, m, 7000 + trial, "toward")
        rng = np.random.default_rng(trial)
        pf = project(b, basis)
        g = rng.standard_normal(n)
        g -= basis.V @ (basis.V.T @ g)
        other = basis.V @ pf.t + pf.residual_norm * unit(g)
        R, _ = make_symmetry_rotation(other, b, basis)
        assert np.allclose(R @ nr.N, nr.N, atol=1e-9)
        worst_sym = max(worst_sym, abs(solve_full(R @ b, nr).value - solve_full(b, nr).value))
    worst_rot = 0.0
    for trial in range(50):
        n, m = [(6, 2), (12, 3), (30, 5)][trial % 3]
        nr, _, b = instance(n, m, 9000 + trial, "toward")
        Q, _ = np.linalg.qr(np.random.default_rng(trial).standard_normal((n, n)))
        rotated = NormalizedRegion(Q @ nr.N / np.linalg.norm(Q @ nr.N, axis=0), nr.psi)
        worst_rot = max(worst_rot, abs(solve_full(Q @ b, rotated).value - solve_full(b, nr).value))
    record("invariance under S_N and global rotation", max(worst_sym, worst_rot) <= 1e-6,
           f"200 symmetry trials max diff={worst_sym:.2e}, 50 rotation trials max diff={worst_rot:.2e}")


def test_closed_form():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        t = rng.uniform(-1, 1)
        residual = math.sqrt(1 - t * t)
        psi = rng.uniform(-1.2, 1.0)
        got = solve_reduced(ProjectedFeature(np.array([t]), residual, 1.0),
                            np.array([[1.0]]), np.array([psi])).value
        worst = max(worst, abs(got - closed_form_one_dome(t, residual, psi)))
    record("m=1 closed form", worst <= 1e-8, f"1000 triples, max diff={worst:.2e}")


def test_screening_safety():
    violations = 0
    screens = 0
    unverified = 0
    for seed in SUITE_SEEDS:
        for ratio in (0.3, 0.5, 0.7, 0.9):
            inst = synthetic.instance(SUITE, seed, ratio)
            full = solve_lasso(inst, tol=1e-8)
            assert full.converged
            for m in (1, 2, 3, 5):
                outcome = verify_screening(inst, screen(inst, m), lasso_tol=1e-8, full=full)
                violations += len(outcome.violations)
                unverified += not outcome.passed
                screens += 1
    record("screening safety", violations == 0 and unverified == 0,
           f"{screens} screens, {violations} rejected features with nonzero weight, "
           f"{unverified} failed verifications")


def test_rejection_trend():
    ms = (1, 2, 3, 5)
    fractions = np.zeros((len(SUITE_SEEDS), len(ms)))
    mu_ok = True
    strict = 0
    for row, seed in enumerate(SUITE_SEEDS):
        inst = synthetic.instance(SUITE, seed, 0.4)
        reports = [screen(inst, m) for m in ms]
        fractions[row] = [rep.rejection_fraction for rep in reports]
        for a, b in zip(reports, reports[1:]):
            mu_ok &= bool(np.all(b.mu_pos <= a.mu_pos + 1e-8) and np.all(b.mu_neg <= a.mu_neg + 1e-8))
        strict += reports[1].n_rejected > reports[0].n_rejected
    means = fractions.mean(axis=0)
    nondecreasing = bool(np.all(np.diff(means) >= -1e-8))
    share = strict / len(SUITE_SEEDS)
    record("rejection trend at lambda/lambda_max=0.4", nondecreasing and mu_ok and share >= 0.8,
           "mean rejection " + ", ".join(f"m={m}:{f:.3f}" for m, f in zip(ms, means))
           + f"; mu nonincreasing={mu_ok}; strict gain m=1->2 on {share:.0%} of instances")


def test_dimension_reduction_speed():
    ratios = []
    for m in (1, 2, 3, 5):
        nr = normalize(random_region(1000, m, seed=500 + m))
        basis = orthonormal_basis(nr.N)
        rng = np.random.default_rng(m)
        feats = [unit(nr.N @ rng.uniform(0.2, 1, m) + 0.3 * unit(rng.standard_normal(1000)))
                 for _ in range(5)]
        solve_full(feats[0], nr)
        solve_reduced(project(feats[0], basis), basis.A, nr.psi)
        reduced, full = [], []
        for b in feats:
            start = time.perf_counter()
            solve_reduced(project(b, basis), basis.A, nr.psi)
            reduced.append(time.perf_counter() - start)
            start = time.perf_counter()
            solve_full(b, nr)
            full.append(time.perf_counter() - start)
        ratios.append(np.median(reduced) / np.median(full))
    record("reduced solve at most 20% of full at n=1000", max(ratios) <= 0.2,
           "reduced/full median time " + ", ".join(f"m={m}:{r:.4f}"
                                                   for m, r in zip((1, 2, 3, 5), ratios)))


def test_lasso_correctness():
    rng = np.random.default_rng(77)
    x = rng.standard_normal(12)
    ident = LassoInstance.from_data(np.eye(12), x, lambda_ratio=0.4)
    exact = bool(np.array_equal(solve_lasso(ident).w, soft_threshold(x, ident.lam)))
    zero = True
    worst = 0.0
    for seed in range(20):
        r = np.random.default_rng(seed)
        B, y = r.standard_normal((20, 50)), r.standard_normal(20)
        at_max = LassoInstance.from_data(B, y, lambda_ratio=1.0)
        zero &= bool(np.all(solve_lasso(at_max).w == 0))
        inst = LassoInstance.from_data(B, y, lambda_ratio=0.2 + 0.03 * seed)
        worst = max(worst, abs(solve_lasso(inst, tol=1e-10).objective
                               - solve_lasso_pgd(inst).objective))
    record("lasso solver", exact and zero and worst <= 1e-8,
           f"identity design exact={exact}, w=0 at lambda_max={zero}, "
           f"max objective diff vs projected gradient over 20 instances={worst:.2e}")
