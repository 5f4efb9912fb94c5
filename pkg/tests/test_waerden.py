import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from test_scores import sample_strategy
from waerden_chart.errors import DegenerateSampleError, DomainError
from waerden_chart.numerics import chisq_sf
from waerden_chart.scores import GroupedSample
from waerden_chart.simlab import (DistributionSpec, SimulationSpec, empirical_moments,
                                  run_moment_study)
from waerden_chart.waerden import eg_decompose, eg_null_moments, waerden_test


def test_app1_statistic(app1):
    out = waerden_test(app1)
    assert out.W == pytest.approx(14.388, abs=0.005)
    assert out.p_chisq == pytest.approx(0.0061, abs=2e-4)
    assert out.df == 4


def test_app1_decomposition(app1):
    recs = eg_decompose(app1)
    np.testing.assert_allclose([r.e_value for r in recs], [1.12, 1.91, 7.18, 0.46, 3.72], atol=0.01)
    np.testing.assert_allclose([r.p_initial for r in recs], [0.229, 0.130, 0.003, 0.443, 0.030], atol=0.002)
    assert [r.group_label for r in recs] == list("ABCDE")
    assert recs[2].null_dist.rate == pytest.approx(66 / (2 * 54))


def test_app1_shares(app1):
    recs = eg_decompose(app1)
    shares = {r.group_label: r.share for r in recs}
    assert shares["C"] == pytest.approx(0.50, abs=0.005)
    assert shares["E"] == pytest.approx(0.26, abs=0.005)
    assert sum(shares.values()) == pytest.approx(1.0)


def test_sprays_statistic(sprays):
    out = waerden_test(sprays)
    assert out.W == pytest.approx(50.302, abs=0.01)
    assert out.df == 5
    assert out.p_chisq == pytest.approx(chisq_sf(out.W, 5))


def test_sprays_decomposition_midranks(sprays):
    # Midrank values; these are the only E_g consistent with W = 50.302.
    recs = eg_decompose(sprays)
    e = [r.e_value for r in recs]
    assert sum(e) == pytest.approx(50.302, abs=0.01)
    np.testing.assert_allclose(e, [5.429, 7.322, 18.189, 2.194, 6.378, 10.790], atol=0.001)
    order = [r.group_label for r in sorted(recs, key=lambda r: -r.e_value)]
    assert order == list("CFBEAD")


def test_mirrored_two_groups():
    a = [-3.0, -2.0, -1.5]
    s = GroupedSample.from_groups([a, [-v for v in a]])
    out = waerden_test(s)
    recs = out.records
    assert out.W > 0
    assert recs[0].e_value == pytest.approx(recs[1].e_value)
    swapped = waerden_test(GroupedSample.from_groups([[-v for v in a], a]))
    assert swapped.W == pytest.approx(out.W, rel=1e-15)


def test_zero_statistic_uniform_shares():
    s = GroupedSample.from_groups([[1.0, 4.0], [2.0, 3.0]])
    out = waerden_test(s)
    assert out.W == pytest.approx(0.0, abs=1e-15)
    assert not out.shares_defined
    assert [r.share for r in out.records] == [0.5, 0.5]
    assert out.p_chisq == pytest.approx(1.0)


def test_degenerate():
    with pytest.raises(DegenerateSampleError):
        waerden_test(GroupedSample.from_groups([[2.0, 2.0], [2.0, 2.0]]))


@given(sample_strategy(max_groups=6, max_size=15))
def test_decomposition_identity(sample):
    out = waerden_test(sample)
    assert abs(out.W - sum(out.e_values)) < 1e-9 * max(1.0, out.W)
    if out.shares_defined:
        assert sum(r.share for r in out.records) == pytest.approx(1.0)


@given(sample_strategy(max_groups=5, max_size=10))
def test_initial_p_is_scaled_chisq(sample):
    n = sample.n
    for r in waerden_test(sample).records:
        assert r.p_initial == pytest.approx(chisq_sf(r.e_value * n / (n - r.n_g), 1), abs=1e-10)


@given(sample_strategy(ties=False), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_location_scale_invariance(sample, shift, scale):
    moved = GroupedSample.from_groups([[shift + scale * v for v in g] for g in sample.groups])
    a, b = waerden_test(sample), waerden_test(moved)
    # float rounding of shift + scale*v may merge near-equal values; skip those draws
    if len(set(moved.pooled())) == len(set(sample.pooled())):
        assert a.W == pytest.approx(b.W, rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(a.e_values, b.e_values, rtol=1e-12, atol=1e-12)


class TestNullMoments:
    def test_three_equal_groups(self):
        m = eg_null_moments(30, 10)
        assert (round(m.mean, 3), round(m.variance, 3), round(m.skewness, 2), m.kurtosis) == (0.667, 0.889, 2.83, 15.0)

    def test_five_equal_groups(self):
        m = eg_null_moments(50, 10)
        assert m.mean == pytest.approx(0.80) and m.variance == pytest.approx(1.28)
        assert m.skewness == pytest.approx(2 * np.sqrt(2), abs=1e-12) and m.kurtosis == pytest.approx(15.0)

    def test_half_sample(self):
        m = eg_null_moments(40, 20)
        assert m.mean == pytest.approx(0.5) and m.variance == pytest.approx(0.5)

    @pytest.mark.parametrize("g", [2, 3, 4, 7])
    def test_equal_sizes_reduce_to_group_count(self, g):
        assert eg_null_moments(g * 9, 9).mean == pytest.approx((g - 1) / g)

    def test_domain(self):
        with pytest.raises(DomainError):
            eg_null_moments(10, 10)


@pytest.mark.slow
def test_null_calibration_mean():
    rep = run_moment_study(SimulationSpec.balanced(3, 10, DistributionSpec.normal(), replications=10000, seed=0))
    for gm in rep.groups:
        se = np.sqrt(gm.empirical.variance / 10000)
        assert abs(gm.empirical.mean - 0.667) < 4 * se + 5e-4
        assert abs(gm.empirical.skewness - 2 * np.sqrt(2)) < 0.6
        assert abs(gm.empirical.kurtosis - 15) < 5


@pytest.mark.slow
@pytest.mark.xfail(reason="finite-sample variance of E_g for n=30, n_g=10 is about 0.814, "
                          "not the asymptotic 0.889; a 4-SE band at R=10000 is too narrow",
                   strict=False)
def test_null_calibration_variance():
    rep = run_moment_study(SimulationSpec.balanced(3, 10, DistributionSpec.normal(), replications=10000, seed=0))
    for gm in rep.groups:
        e_std = gm.empirical.variance * np.sqrt((gm.empirical.kurtosis - 1) / 10000)
        assert abs(gm.empirical.variance - 0.889) < 4 * e_std


@pytest.mark.slow
def test_null_w_quantile():
    from waerden_chart.simlab import replication_rng, draw_sample
    from waerden_chart.scores import score_arrays
    from waerden_chart.waerden import statistic
    spec = SimulationSpec.balanced(3, 10, DistributionSpec.normal(), replications=10000, seed=3)
    w = [statistic(score_arrays(draw_sample(spec, replication_rng(3, 0, r)), spec.sizes))
         for r in range(spec.replications)]
    assert abs(np.quantile(w, 0.95) - 5.991) < 0.25
