import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from domescreen import synthetic
from domescreen.lasso import LassoInstance, solve_lasso
from domescreen.screening import (ScreeningError, ScreeningReport, greedy_halfspaces, screen,
                                  sphere_bound, verify_screening)


def suite_instance(seed, ratio, model="sparse", n=50, p=500):
    return synthetic.instance(synthetic.SyntheticSpec(n=n, p=p, target_model=model), seed, ratio)


def test_sphere_at_lambda_max():
    inst = suite_instance(0, 1.0)
    q, r = sphere_bound(inst)
    assert r == 0.0
    np.testing.assert_allclose(q, inst.x / inst.lambda_max)


def test_sphere_half_lambda_max():
    B = np.random.default_rng(1).standard_normal((8, 20))
    x = np.random.default_rng(2).standard_normal(8)
    x /= np.linalg.norm(x)
    inst = LassoInstance.from_data(B, x, lambda_ratio=0.5)
    q, r = sphere_bound(inst)
    np.testing.assert_allclose(q, 2 * x / inst.lambda_max)
    assert r == pytest.approx(1 / inst.lambda_max, rel=1e-14)


@pytest.mark.parametrize("model", ["sparse", "iid"])
@pytest.mark.parametrize("ratio", [0.2, 0.6])
def test_dual_optimum_inside_region(model, ratio):
    inst = suite_instance(3, ratio, model)
    theta = solve_lasso(inst, tol=1e-10).dual_point
    q, r = sphere_bound(inst)
    assert np.linalg.norm(theta - q) <= r + 1e-6
    normals, offsets, _ = greedy_halfspaces(inst, 5)
    assert np.all(normals.T @ theta <= offsets + 1e-8)


def test_greedy_first_is_lambda_max_feature():
    inst = suite_instance(4, 0.5, "iid")
    normals, offsets, order = greedy_halfspaces(inst, 1)
    corr = inst.B.T @ inst.x
    i = int(np.argmax(np.abs(corr)))
    assert order[0] == i
    np.testing.assert_allclose(normals[:, 0], np.sign(corr[i]) * inst.B[:, i])
    assert offsets.tolist() == [1.0]


def test_greedy_exact_atom():
    B = np.random.default_rng(5).standard_normal((10, 30))
    B /= np.linalg.norm(B, axis=0)
    inst = LassoInstance.from_data(B, B[:, 3], lambda_ratio=0.5)
    normals, offsets, order = greedy_halfspaces(inst, 1)
    assert order[0] == 3
    np.testing.assert_allclose(normals[:, 0], B[:, 3])


def test_greedy_too_many():
    inst = suite_instance(0, 0.5, n=5, p=4)
    with pytest.raises(ScreeningError):
        greedy_halfspaces(inst, 4)


@pytest.mark.parametrize("m", [0, 1, 3])
def test_lambda_max_keeps_only_the_argmax(m):
    inst = suite_instance(6, 1.0, "iid")
    report = screen(inst, m)
    kept = np.flatnonzero(~report.rejected)
    assert kept.tolist() == [int(np.argmax(np.abs(inst.B.T @ inst.x)))]


def test_orthogonal_feature_rejected():
    rng = np.random.default_rng(7)
    B = rng.standard_normal((6, 10))
    x = B[:, 0] / np.linalg.norm(B[:, 0])
    B[:, 1] -= x * (x @ B[:, 1])
    inst = LassoInstance.from_data(B, x, lambda_ratio=0.5)
    assert abs(inst.B[:, 1] @ inst.x) <= 1e-12
    for m in (1, 2):
        report = screen(inst, m)
        assert report.rejected[1]
        assert verify_screening(inst, report).passed
    assert solve_lasso(inst).w[1] == 0


def test_high_ratio_rejects_most_and_is_safe():
    inst = suite_instance(8, 0.99, "iid")
    report = screen(inst, 2)
    assert report.rejection_fraction > 0.9
    assert verify_screening(inst, report).passed


@pytest.mark.parametrize("seed", range(3))
def test_monotone_in_m(seed):
    inst = suite_instance(seed, 0.4)
    reports = [screen(inst, m) for m in (0, 1, 2, 3, 5)]
    for a, b in zip(reports, reports[1:]):
        assert np.all(b.mu_pos <= a.mu_pos + 1e-8)
        assert np.all(b.mu_neg <= a.mu_neg + 1e-8)
        assert b.n_rejected >= a.n_rejected


def test_scale_invariance():
    inst = suite_instance(9, 0.6)
    base = screen(inst, 3)
    for alpha in (1e-3, 7.0, 1e4):
        scaled = screen(inst.rescaled(alpha), 3)
        assert np.array_equal(scaled.rejected, base.rejected)
        np.testing.assert_allclose(scaled.mu_pos, base.mu_pos, atol=1e-8)
        np.testing.assert_allclose(scaled.mu_neg, base.mu_neg, atol=1e-8)


def test_parallel_matches_serial():
    inst = suite_instance(10, 0.5)
    serial = screen(inst, 3)
    parallel = screen(inst, 3, parallelism=3)
    assert np.array_equal(serial.mu_pos, parallel.mu_pos)
    assert np.array_equal(serial.mu_neg, parallel.mu_neg)


def test_report_fields():
    report = screen(suite_instance(11, 0.5), 2)
    assert set(report.timing) == {"region", "project", "solve"}
    assert report.solver_stats["rank"] == 2
    assert report.m_used == 2
    assert report.region.m == 2
    expected = (report.mu_pos < 1 - report.margin) & (report.mu_neg < 1 - report.margin)
    assert np.array_equal(report.rejected, expected)


def test_verify_nothing_rejected():
    inst = suite_instance(12, 0.1, "iid")
    report = screen(inst, 0)
    assert report.n_rejected == 0
    assert verify_screening(inst, report).passed


def test_verify_reports_falsification():
    inst = suite_instance(13, 0.5)
    full = solve_lasso(inst)
    support = np.flatnonzero(full.w)
    p = inst.p
    rejected = np.zeros(p, bool)
    rejected[support[0]] = True
    fake = ScreeningReport(np.zeros(p), np.zeros(p), rejected, 1, None)
    outcome = verify_screening(inst, fake, full=full)
    assert not outcome.passed
    assert outcome.violations[0]["index"] == support[0]
    assert "FAILED" in outcome.describe()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.2, 0.4, 0.7, 0.95]), st.sampled_from([1, 2, 4]),
       st.sampled_from(["sparse", "iid", "atom"]))
def test_safety_small(seed, ratio, m, model):
    inst = suite_instance(seed, ratio, model, n=15, p=60)
    report = screen(inst, m)
    outcome = verify_screening(inst, report)
    assert not outcome.violations
    assert outcome.passed
