import math

import numpy as np
import pytest
from scipy.stats import chi2

from lclab.orthogonal import OrthogonalMatrix, haar, uniform_directions
from lclab.rng import RandomStream
from lclab.sampler import DistributionSpec, isotropy_report, sample
from lclab.stats import weighted_log_slope
from lclab.thicken import (
    GaussianConvolvedSpec,
    ThickenedSpec,
    deviation_curve,
    gaussian_floor_demo,
    norm_event_counts,
    onesided_sum_lower_check,
    sample_gaussian_convolved,
    sample_thickened,
    small_ball_curve,
    tail_estimate,
    transference_check,
)

STREAM = RandomStream(555, 0)


def test_thickened_gaussian_stays_gaussian():
    base = DistributionSpec("gaussian", 6)
    u = haar(6, RandomStream(555, 9))
    batch = sample_thickened(ThickenedSpec(base, u, "plus"), 10**6, STREAM)
    report = isotropy_report(batch)
    assert report.max_abs_mean < 0.01
    assert report.max_cov_deviation < 0.01


def test_thickened_cube_1d_support_and_moments():
    base = DistributionSpec("cube", 1)
    u = OrthogonalMatrix(np.array([[1.0]]))
    batch = sample_thickened(ThickenedSpec(base, u, "plus"), 10**6, STREAM)
    assert np.abs(batch.data).max() <= math.sqrt(6.0)
    assert abs(batch.data.var() - 1.0) < 0.01
    # fourth moment of (X + X')/sqrt2 for the cube marginal: 2 * 6^2 / (5 * 6)
    assert (batch.data**4).mean() == pytest.approx(2.4, abs=0.02)


def test_convolved_cube_1d_fourth_moment():
    batch = sample_gaussian_convolved(DistributionSpec("cube", 1), 10**6, STREAM)
    # (E X^4 + 6 E X^2 E G^2 + E G^4) / 4 = (1.8 + 6 + 3) / 4
    assert (batch.data**4).mean() == pytest.approx(2.7, abs=0.05)


def test_convolved_batch_is_isotropic():
    batch = sample_gaussian_convolved(DistributionSpec("cube", 8), 10**6, RandomStream(555, 1))
    report = isotropy_report(batch)
    assert report.max_abs_mean < 0.01
    assert report.max_cov_deviation < 0.01


def test_thickened_signs_differ_for_non_even_base():
    n = 8
    base = DistributionSpec("shifted_exp_product", n)
    u = haar(n, RandomStream(555, 21))  # rotation with a sizeable sum of cubed row entries
    count = 10**6
    plus = sample_thickened(ThickenedSpec(base, u, "plus"), count, RandomStream(555, 3))
    minus = sample_thickened(ThickenedSpec(base, u, "minus"), count, RandomStream(555, 4))
    e1 = np.zeros(n)
    e1[0] = 1.0
    m3_plus = (plus.data @ e1) ** 3
    m3_minus = (minus.data @ e1) ** 3
    # third moments along e1: (mu3 +/- mu3 * sum_j U_{1j}^3) / 2^{3/2} with mu3 = 2
    mu3 = 2.0
    spread = mu3 * float((u.entries[0, :] ** 3).sum())
    expected_diff = 2.0 * spread / 2.0 ** 1.5
    diff = m3_plus.mean() - m3_minus.mean()
    joint_se = math.hypot(
        m3_plus.std(ddof=1) / math.sqrt(count), m3_minus.std(ddof=1) / math.sqrt(count)
    )
    assert abs(expected_diff) > 8.0 * joint_se  # the chosen rotation separates the signs
    assert abs(diff - expected_diff) <= 4.0 * joint_se


def test_even_base_signs_agree():
    n = 8
    base = DistributionSpec("cube", n)
    u = haar(n, RandomStream(555, 5))
    count = 200_000
    plus = sample_thickened(ThickenedSpec(base, u, "plus"), count, RandomStream(555, 6))
    minus = sample_thickened(ThickenedSpec(base, u, "minus"), count, RandomStream(555, 7))
    dirs = uniform_directions(n, 20, RandomStream(555, 8))
    for theta in dirs:
        for power in (1, 3):
            a = (plus.data @ theta) ** power
            b = (minus.data @ theta) ** power
            joint = math.hypot(a.std(ddof=1), b.std(ddof=1)) / math.sqrt(count)
            assert abs(a.mean() - b.mean()) <= 4.0 * joint


def test_dimension_mismatch_rejected():
    base = DistributionSpec("cube", 3)
    u = haar(4, STREAM)
    with pytest.raises(ValueError):
        ThickenedSpec(base, u, "plus")
    with pytest.raises(ValueError):
        ThickenedSpec(base, haar(3, STREAM), "both")


def test_tail_estimate_threshold_zero():
    est = tail_estimate(DistributionSpec("gaussian", 3), 0.0, "at_least", 1000, STREAM)
    assert est.estimate == 1.0
    assert est.ci_high == 1.0


def test_tail_estimate_chi_square_oracle():
    est = tail_estimate(DistributionSpec("gaussian", 8), 2.0, "at_most", 10**6, STREAM)
    oracle = chi2(8).cdf(4.0)
    lo, hi = est.interval(0.9999)  # suite-level policy: 99.99% bounds for counts
    assert lo <= oracle <= hi


def test_tail_estimate_validation():
    with pytest.raises(ValueError):
        tail_estimate(DistributionSpec("gaussian", 2), -1.0, "at_most", 100, STREAM)
    with pytest.raises(ValueError):
        tail_estimate(DistributionSpec("gaussian", 2), 1.0, "between", 100, STREAM)


def test_counts_independent_of_thread_count():
    spec = DistributionSpec("laplace_product", 4)
    kw = dict(le_radii=[1.0, 2.0], ge_radii=[2.5], trials=300_000, stream=RandomStream(555, 10))
    a = norm_event_counts(spec, shard_size=50_000, threads=1, **kw)
    b = norm_event_counts(spec, shard_size=50_000, threads=4, **kw)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_transference_gaussian_trivially_holds():
    base = DistributionSpec("gaussian", 8)
    u = haar(8, RandomStream(555, 11))
    for side, t in (("at_least", 0.25), ("at_most", 0.5)):
        res = transference_check(base, u, t, side, 10**5, RandomStream(555, 12))
        assert res.ok_within_ci


def test_transference_cube_both_sides():
    base = DistributionSpec("cube", 16)
    u = haar(16, RandomStream(555, 13))
    for side, t in (("at_least", 0.5), ("at_most", 0.5)):
        res = transference_check(base, u, t, side, 2 * 10**5, RandomStream(555, 14))
        assert res.ok_within_ci


def test_transference_validation():
    base = DistributionSpec("cube", 4)
    u = haar(4, STREAM)
    with pytest.raises(ValueError):
        transference_check(base, u, 1.5, "at_most", 100, STREAM)
    with pytest.raises(ValueError):
        transference_check(base, u, -0.1, "at_least", 100, STREAM)


def test_deviation_curve_monotone_and_oracle():
    spec = DistributionSpec("gaussian", 16)
    curve = deviation_curve(spec, [0.0, 0.25, 0.5, 1.0], 10**6, STREAM)
    assert curve[0].estimate == 1.0
    hits = [pt.hits for pt in curve]
    assert hits == sorted(hits, reverse=True)
    oracle = chi2(16).cdf(16.0 * 0.25) + chi2(16).sf(16.0 * 2.25)
    lo, hi = curve[2].interval(0.9999)
    assert lo <= oracle <= hi


def test_deviation_curve_rejects_negative_t():
    with pytest.raises(ValueError):
        deviation_curve(DistributionSpec("gaussian", 2), [-0.5], 100, STREAM)


def test_small_ball_oracle_and_slope():
    spec = DistributionSpec("gaussian", 8)
    curve = small_ball_curve(spec, [0.4, 0.5, 0.6, 1.0], 10**6, STREAM)
    by_eps = {pt.threshold: pt for pt in curve.points}
    oracle_half = chi2(8).cdf(8.0 * 0.25)
    lo, hi = by_eps[0.5].interval(0.9999)
    assert lo <= oracle_half <= hi
    oracle_one = chi2(8).cdf(8.0)
    lo, hi = by_eps[1.0].interval(0.9999)
    assert lo <= oracle_one <= hi
    # P(|G_n| <= eps sqrt n) ~ (c eps)^n as eps -> 0; at this grid the exact
    # chi-square oracle gives the least-squares slope below
    eps_grid = [0.4, 0.5, 0.6]
    oracle_slope = weighted_log_slope(np.array(eps_grid), chi2(8).cdf(8.0 * np.array(eps_grid) ** 2))
    slope_small = small_ball_curve(spec, eps_grid, 10**6, RandomStream(555, 15)).log_slope
    assert slope_small == pytest.approx(oracle_slope, abs=0.3)
    assert abs(slope_small - 8.0) <= 2.0  # asymptotic power-law scale


def test_small_ball_zero_hits_is_not_an_error():
    curve = small_ball_curve(DistributionSpec("gaussian", 8), [0.05], 2000, STREAM)
    pt = curve.points[0]
    assert pt.hits == 0
    assert pt.ci_low == 0.0 and pt.ci_high > 0.0
    assert curve.log_slope is None


def test_small_ball_validation():
    with pytest.raises(ValueError):
        small_ball_curve(DistributionSpec("gaussian", 2), [0.0, 0.5], 100, STREAM)


def test_gaussian_floor_rows():
    rows = gaussian_floor_demo(DistributionSpec("gaussian", 8), [0.0, 0.5, 1.0], 2 * 10**5, STREAM)
    last = rows[-1]
    assert last.t == 1.0
    # the convolution bound plateaus at P(chi2_8 <= 4) while the mixing bound hits 0
    oracle = chi2(8).cdf(4.0)
    lo, hi = last.floor.interval(0.9999)
    assert lo <= oracle <= hi
    assert last.thm_bound == 0.0
    assert rows[0].thm_bound > rows[0].floor_bound  # the comparison flips only for large t


def test_onesided_sum_lower_bound_holds():
    n = 8
    for family in ("laplace_product", "shifted_exp_product"):
        base = DistributionSpec(family, n)
        u = haar(n, RandomStream(555, 16))
        mixed = sample_thickened(ThickenedSpec(base, u, "plus"), 200_000, RandomStream(555, 17))
        base_batch = sample(base, 200_000, RandomStream(555, 18))
        for theta in uniform_directions(n, 5, RandomStream(555, 19)):
            res = onesided_sum_lower_check(mixed, base_batch, u, theta, 4)
            assert res.ok_within_se
