import math

import numpy as np
import pytest

from lclab.rng import RandomStream
from lclab.sampler import (
    FAMILIES,
    DistributionSpec,
    axis_moment_oracle,
    isotropy_report,
    load_batch,
    sample,
    save_batch,
    SampleBatch,
)

STREAM = RandomStream(1234, 0)


def test_sampling_is_deterministic():
    spec = DistributionSpec("laplace_product", 5)
    a = sample(spec, 1000, STREAM)
    b = sample(spec, 1000, STREAM)
    assert np.array_equal(a.data, b.data)


def test_distinct_streams_differ():
    spec = DistributionSpec("gaussian", 3)
    a = sample(spec, 100, RandomStream(1234, 0))
    b = sample(spec, 100, RandomStream(1234, 1))
    assert not np.array_equal(a.data, b.data)


def test_cube_support_every_draw():
    batch = sample(DistributionSpec("cube", 3), 10_000, STREAM)
    assert np.abs(batch.data).max() <= math.sqrt(3.0)


def test_ball_support_every_draw():
    n = 6
    batch = sample(DistributionSpec("ball", n), 10_000, STREAM)
    assert np.linalg.norm(batch.data, axis=1).max() <= math.sqrt(n + 2)


def test_gaussian_isotropy():
    batch = sample(DistributionSpec("gaussian", 4), 10**6, STREAM)
    report = isotropy_report(batch)
    assert report.max_abs_mean < 0.01
    assert report.max_cov_deviation < 0.01


def test_laplace_isotropy():
    batch = sample(DistributionSpec("laplace_product", 8), 10**6, STREAM)
    report = isotropy_report(batch)
    assert report.max_abs_mean < 0.02
    assert report.max_cov_deviation < 0.02


@pytest.mark.parametrize("family", FAMILIES)
def test_all_families_isotropic(family):
    batch = sample(DistributionSpec(family, 8), 200_000, STREAM)
    report = isotropy_report(batch)
    bound = 5.0 * math.sqrt(24.0 / batch.count)
    assert report.max_abs_mean < bound
    assert report.max_cov_deviation < bound


def test_identical_rows_give_unit_cov_deviation():
    data = np.tile(np.array([[1.0, 2.0]]), (100, 1))
    batch = SampleBatch(data=data, spec=DistributionSpec("gaussian", 2), provenance=STREAM)
    assert isotropy_report(batch).max_cov_deviation == pytest.approx(1.0)


def test_shifted_exp_positive_mass_is_one_over_e():
    batch = sample(DistributionSpec("shifted_exp_product", 1), 10**6, STREAM)
    mass = float((batch.data >= 0.0).mean())
    assert abs(mass - math.exp(-1.0)) < 0.002


def test_axis_moment_oracle_closed_forms():
    assert axis_moment_oracle("cube", 4) == pytest.approx(9.0 / 5.0, rel=1e-12)
    for family in ("cube", "gaussian", "laplace_product", "shifted_exp_product"):
        assert axis_moment_oracle(family, 2) == pytest.approx(1.0, rel=1e-9)
    assert axis_moment_oracle("shifted_exp_product", 2, "positive") == pytest.approx(2.0 / math.e, rel=1e-12)
    assert axis_moment_oracle("laplace_product", 4) == pytest.approx(6.0, rel=1e-12)
    assert axis_moment_oracle("gaussian", 4) == pytest.approx(3.0, rel=1e-12)


@pytest.mark.parametrize("family", ["gaussian", "cube", "laplace_product", "shifted_exp_product"])
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0, 8.0])
def test_empirical_axis_moments_match_oracle(family, p):
    batch = sample(DistributionSpec(family, 2), 10**6, STREAM)
    x = batch.data[:, 0]
    values = np.abs(x) ** p
    emp = values.mean()
    se = values.std(ddof=1) / math.sqrt(batch.count)
    assert abs(emp - axis_moment_oracle(family, p)) <= 4.0 * se


def test_one_sided_oracle_splits():
    total = axis_moment_oracle("shifted_exp_product", 3, "positive") + axis_moment_oracle(
        "shifted_exp_product", 3, "negative"
    )
    assert total == pytest.approx(axis_moment_oracle("shifted_exp_product", 3), rel=1e-10)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        DistributionSpec("triangle", 3)
    with pytest.raises(ValueError):
        DistributionSpec("cube", 0)
    with pytest.raises(ValueError):
        sample(DistributionSpec("cube", 2), 0, STREAM)
    with pytest.raises(ValueError):
        axis_moment_oracle("ball", 4)
    with pytest.raises(ValueError):
        axis_moment_oracle("cube", 0.5)
    small = sample(DistributionSpec("cube", 2), 1, STREAM)
    with pytest.raises(ValueError):
        isotropy_report(small)


def test_batch_round_trip(tmp_path):
    batch = sample(DistributionSpec("ball", 4), 500, RandomStream(9, 3))
    path = tmp_path / "batch.bin"
    save_batch(batch, str(path))
    loaded = load_batch(str(path))
    assert np.array_equal(loaded.data, batch.data)
    assert loaded.spec == batch.spec
    assert loaded.provenance == batch.provenance


def test_stream_validation():
    with pytest.raises(ValueError):
        RandomStream(-1, 0)
    with pytest.raises(ValueError):
        RandomStream(0, -2)
    assert RandomStream(5, 1).substream(3) == RandomStream(5, 4)


def test_save_batch_rejects_derived_specs(tmp_path):
    from lclab.orthogonal import haar
    from lclab.thicken import ThickenedSpec, sample_thickened

    base = DistributionSpec("cube", 3)
    mixed = sample_thickened(ThickenedSpec(base, haar(3, STREAM), "plus"), 10, STREAM)
    with pytest.raises(ValueError):
        save_batch(mixed, str(tmp_path / "x.bin"))
