import json
import math

import numpy as np
import pytest

from waerden_chart.errors import DomainError
from waerden_chart.simlab import (DistributionSpec, SimulationSpec, StudyReport, empirical_moments,
                                  format_study, preset_cells, replication_rng, run_cell,
                                  run_moment_study, run_power, run_preset, run_replications,
                                  run_type1, sample_distribution)
from waerden_chart.numerics import normal_cdf

N_DRAW = 200_000


def _rng(k=0):
    return replication_rng(123, 99, k)


class TestSamplers:
    @pytest.mark.parametrize("spec,mean,var", [
        (DistributionSpec.normal(1.5, 2.0), 1.5, 4.0),
        (DistributionSpec.chi_square(3), 3.0, 6.0),
        (DistributionSpec.student_t(5), 0.0, 5 / 3),
        (DistributionSpec.laplace(-1.0, 0.5), -1.0, 0.5),
        (DistributionSpec.lognormal(0.0, 0.5), math.exp(0.125), (math.exp(0.25) - 1) * math.exp(0.25)),
    ])
    def test_first_two_moments(self, spec, mean, var):
        x = sample_distribution(spec, N_DRAW, _rng())
        assert x.mean() == pytest.approx(mean, abs=6 * math.sqrt(var / N_DRAW))
        assert x.var() == pytest.approx(var, rel=0.05)

    def test_cauchy_quartiles(self):
        # t(1) is Cauchy: quartiles at -1 and 1
        x = sample_distribution(DistributionSpec.student_t(1), N_DRAW, _rng())
        q = np.quantile(x, [0.25, 0.5, 0.75])
        assert q == pytest.approx([-1.0, 0.0, 1.0], abs=0.03)

    def test_laplace_cdf(self):
        x = sample_distribution(DistributionSpec.laplace(0, 1), N_DRAW, _rng())
        for t in (-2.0, -0.5, 0.3, 1.7):
            cdf = 0.5 * math.exp(t) if t < 0 else 1 - 0.5 * math.exp(-t)
            assert np.mean(x <= t) == pytest.approx(cdf, abs=0.005)

    def test_normal_cdf_agrees(self):
        x = sample_distribution(DistributionSpec.normal(), N_DRAW, _rng())
        for t in (-1.0, 0.0, 2.0):
            assert np.mean(x <= t) == pytest.approx(normal_cdf(t), abs=0.005)

    def test_chi_square_positive(self):
        assert np.all(sample_distribution(DistributionSpec.chi_square(1), 1000, _rng()) > 0)

    @pytest.mark.parametrize("family,params", [("normal", (0, -1)), ("student_t", (0,)),
                                               ("weibull", (1,)), ("laplace", (0,)),
                                               ("normal", (0, float("nan")))])
    def test_bad_specs(self, family, params):
        with pytest.raises(DomainError):
            DistributionSpec(family, params)

    def test_round_trip(self):
        d = DistributionSpec.lognormal(0.2, 1.1)
        assert DistributionSpec.from_dict(json.loads(json.dumps(d.to_dict()))) == d


class TestSpec:
    def test_balanced(self):
        s = SimulationSpec.balanced(4, 7, DistributionSpec.normal())
        assert s.sizes == (7,) * 4 and s.g == 4 and len(set(s.distributions)) == 1

    def test_round_trip(self):
        s = SimulationSpec.balanced(3, 5, [DistributionSpec.chi_square(d) for d in (1, 2, 3)],
                                    replications=17, seed=4, stream=2, name="x")
        assert SimulationSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s

    def test_compact_config(self):
        s = SimulationSpec.from_dict({"sizes": [4, 6, 8], "distributions": [{"family": "normal", "params": [0, 1]}]})
        assert s.sizes == (4, 6, 8) and len(s.distributions) == 3

    @pytest.mark.parametrize("kw", [dict(sizes=(5,)), dict(sizes=(5, 0)), dict(replications=0),
                                    dict(methods=("magic",)), dict(alphas=(1.5,)), dict(seed=-1)])
    def test_invalid(self, kw):
        base = dict(sizes=(5, 5), distributions=(DistributionSpec.normal(),) * 2)
        base.update(kw)
        if len(base["sizes"]) != len(base["distributions"]):
            base["distributions"] = (DistributionSpec.normal(),) * len(base["sizes"])
        with pytest.raises(DomainError):
            SimulationSpec(**base)

    def test_type1_needs_identical(self):
        spec = SimulationSpec.balanced(3, 5, [DistributionSpec.normal(m) for m in (0, 0, 1)], replications=5)
        with pytest.raises(DomainError):
            run_type1(spec)
        with pytest.raises(DomainError):
            run_moment_study(spec)

    def test_power_needs_difference(self):
        with pytest.raises(DomainError):
            run_power(SimulationSpec.balanced(3, 5, DistributionSpec.normal(), replications=5))


class TestReplication:
    SPEC = SimulationSpec.balanced(3, 8, DistributionSpec.laplace(), replications=60, seed=5)

    def test_same_seed_same_rows(self):
        a = run_replications(self.SPEC, "decisions")
        b = run_replications(self.SPEC, "decisions")
        np.testing.assert_array_equal(a, b)

    def test_workers_do_not_change_results(self):
        a = run_replications(self.SPEC, "decisions", workers=1)
        b = run_replications(self.SPEC, "decisions", workers=3)
        np.testing.assert_array_equal(a, b)

    def test_prefix_stability(self):
        # replication k does not depend on how many replications are requested
        short = run_replications(self.SPEC.with_run(replications=20), "moments")
        full = run_replications(self.SPEC, "moments")
        np.testing.assert_array_equal(short, full[:20])

    def test_seed_and_stream_matter(self):
        a = run_replications(self.SPEC, "moments")
        b = run_replications(self.SPEC.with_run(seed=6), "moments")
        from dataclasses import replace
        c = run_replications(replace(self.SPEC, stream=1), "moments")
        assert not np.array_equal(a, b) and not np.array_equal(a, c)

    def test_decision_rows_are_p_values(self):
        rows = run_replications(self.SPEC, "decisions")
        assert rows.shape == (60, 4)
        assert np.all((rows >= 0) & (rows <= 1))

    def test_moment_rows_sum_to_w(self):
        rows = run_replications(self.SPEC, "moments")
        assert np.all(rows >= 0) and rows.shape == (60, 3)


class TestEmpiricalMoments:
    def test_known_values(self):
        x = np.array([1.0, 2.0, 3.0, 10.0])
        d = x - x.mean()
        out = empirical_moments(x)
        assert out.mean == 4.0
        assert out.variance == pytest.approx(np.sum(d * d) / 3)
        m2 = np.mean(d * d)
        assert out.skewness == pytest.approx(np.mean(d ** 3) / m2 ** 1.5)
        assert out.kurtosis == pytest.approx(np.mean(d ** 4) / m2 ** 2)

    def test_normal_sample(self):
        x = sample_distribution(DistributionSpec.normal(), N_DRAW, _rng(3))
        out = empirical_moments(x)
        assert out.skewness == pytest.approx(0, abs=0.03) and out.kurtosis == pytest.approx(3, abs=0.06)

    def test_constant(self):
        out = empirical_moments([2.0] * 5)
        assert out.degenerate and out.skewness is None and out.variance == 0.0

    def test_too_short(self):
        with pytest.raises(DomainError):
            empirical_moments([1.0, 2.0, 3.0])


class TestStudies:
    def test_rates_and_standard_errors(self):
        spec = SimulationSpec.balanced(3, 10, DistributionSpec.normal(), replications=400, seed=2)
        rep = run_type1(spec)
        assert len(rep.rates) == 4 * 2
        for est in rep.rates:
            assert est.valid == 400 and 0 <= est.rate <= 1
            assert est.se == pytest.approx(math.sqrt(est.rate * (1 - est.rate) / 400))
        # Bonferroni over the same p-values can never reject more often than BH
        for a in spec.alphas:
            assert rep.rate("eg_bonf", a) <= rep.rate("eg_bh", a)
            assert rep.rate("eg_bh", 0.01) <= rep.rate("eg_bh", 0.05)

    def test_strong_shift_has_power(self):
        spec = SimulationSpec.balanced(3, 20, [DistributionSpec.normal(m) for m in (0, 0, 3)],
                                       replications=100, seed=3)
        rep = run_power(spec)
        assert all(est.rate > 0.95 for est in rep.rates)

    def test_moment_study_theory(self):
        spec = SimulationSpec.balanced(3, 10, DistributionSpec.normal(), replications=300, alphas=())
        rep = run_moment_study(spec)
        assert [gm.group for gm in rep.groups] == [1, 2, 3]
        th = rep.groups[0].theoretical
        assert th.mean == pytest.approx(2 / 3) and th.variance == pytest.approx(8 / 9)
        assert rep.to_dict()["kind"] == "moments"

    def test_report_json_has_no_timing(self):
        spec = SimulationSpec.balanced(3, 5, DistributionSpec.normal(), replications=20)
        d = run_type1(spec).to_dict()
        assert "wall_time" not in d and "wall_time" in run_type1(spec).to_dict(include_timing=True)


class TestPresets:
    def test_table1_grid(self):
        cells = preset_cells("table1", 10)
        assert len(cells) == 12 and all(c.kind == "moments" for c in cells)
        assert {c.spec.g for c in cells} == {3, 5} and {c.spec.sizes[0] for c in cells} == {10, 25}

    def test_table2_grid(self):
        cells = preset_cells("table2", 10)
        assert len(cells) == 24 and all(c.kind == "type1" for c in cells)
        assert {c.block for c in cells} == {"N(0,1)", "chisq(1)", "t(df=1)", "LN(0,1)"}

    def test_table3_grid(self):
        cells = preset_cells("table3", 10)
        assert len(cells) == 24 and all(c.kind == "power" for c in cells)
        g3 = [c for c in cells if c.spec.g == 3 and c.block.startswith("chisq")][0]
        assert [d.params[0] for d in g3.spec.distributions] == [1.0, 2.0, 3.0]

    def test_streams_distinct(self):
        cells = preset_cells("table2", 10)
        assert len({c.spec.stream for c in cells}) == len(cells)

    def test_unknown(self):
        with pytest.raises(DomainError):
            preset_cells("table9")

    def test_small_preset_run_and_format(self):
        study = run_preset("table3", replications=5, seed=1)
        text = format_study(study)
        assert "Eg BH" in text and "Lognormal" in text
        d = study.to_dict()
        assert d["schema_version"] == 1 and len(d["cells"]) == 24
        json.dumps(d, allow_nan=False)

    def test_moments_format(self):
        cell = preset_cells("table1", 8)[0]
        study = StudyReport("table1", 0, 8, ((cell, run_cell(cell)),))
        assert "skew" in format_study(study).lower()
