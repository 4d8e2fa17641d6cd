import csv
import io
import json
import math

import numpy as np
import pytest

from robustmean.distributions import (
    NamedDistribution,
    least_favorable,
    lognormal,
    mc_moment_check,
    normal,
    pareto,
    student_t,
    two_point,
)
from robustmean.errors import ConfigError, ParameterError
from robustmean.harness import (
    CSV_COLUMNS,
    fit_loglog_slope,
    replication_rng,
    rows_to_csv,
    run_contamination_sweep,
    run_deviation_study,
    run_regime_sweep,
    run_study,
    run_ustat_agreement,
    sub_gaussian_ratio,
    validate_study_config,
)
from robustmean.univariate import EstimatorConfig


class TestDistributions:
    @pytest.mark.parametrize(
        "dist",
        [normal(1.0, 2.0), student_t(7.0, 0.5, 1.5), pareto(7.0, 0.0, 1.0), lognormal(0.0, 0.5), two_point(0.3, -1.0, 2.0)],
        ids=lambda d: d.family,
    )
    def test_moments_against_monte_carlo(self, dist):
        c = mc_moment_check(dist, 3.0, budget=10_000_000, seed=11)
        assert c.z_score <= 3, (c.analytic, c.empirical, c.stderr)
        x = dist.sample(np.random.default_rng(12), 2_000_000)
        se = dist.true_sigma / math.sqrt(x.size)
        assert abs(x.mean() - dist.true_mean) <= 3 * se

    def test_seeded(self):
        d = student_t(3.0)
        a = d.sample(np.random.default_rng(5), 10)
        np.testing.assert_array_equal(a, d.sample(np.random.default_rng(5), 10))

    def test_infinite_moments(self):
        assert math.isinf(student_t(2.0).true_sigma)
        assert not pareto(1.5).finite_variance
        assert math.isinf(student_t(3.0).abs_central_moment(3))
        assert pareto(1.5).scale_proxy == 1.0

    def test_roundtrip(self):
        d = two_point(0.2, 0.0, 5.0)
        assert NamedDistribution.from_dict(d.to_dict()) == d

    def test_bad_params(self):
        with pytest.raises(ParameterError):
            normal(0.0, -1.0)
        with pytest.raises(ParameterError):
            NamedDistribution("cauchy", {})

    def test_least_favorable(self):
        eps = 0.01
        d = least_favorable(eps)
        assert d.true_mean == pytest.approx(eps ** (2 / 3) / (1 - eps), rel=1e-12)
        assert d.abs_central_moment(3) <= 1 / (1 - eps)


class TestSeeding:
    def test_counter_streams(self):
        a = replication_rng(3, 7).random(4)
        np.testing.assert_array_equal(a, replication_rng(3, 7).random(4))
        assert not np.array_equal(a, replication_rng(3, 8).random(4))
        assert not np.array_equal(a, replication_rng(4, 7).random(4))


class TestDeviation:
    def test_normal_sanity(self):
        rep = run_deviation_study(normal(), 500, EstimatorConfig(k=10), R=200, seed=1)
        assert rep.median_error("block_huber") <= 3 * rep.median_error("sample_mean")

    def test_quantiles_monotone_and_paired(self):
        rep = run_deviation_study(student_t(3.0), 300, EstimatorConfig(k=10), R=150, seed=2)
        for name in rep.estimators:
            q = rep.quantiles(name)
            assert all(a <= b for a, b in zip(q, q[1:]))
        assert len(rep.deviations["block_huber"]) == len(rep.deviations["sample_mean"]) == 150

    def test_two_point_unbiased(self):
        d = two_point(0.5, -1.0, 1.0)
        rep = run_deviation_study(d, 400, EstimatorConfig(k=20, delta=1.0), R=400, seed=3)
        bias, se = rep.bias("block_huber")
        assert abs(bias) <= 3 * se

    def test_infinite_variance_flagged(self):
        rep = run_deviation_study(student_t(2.0), 200, EstimatorConfig(k=10), R=100, seed=4)
        assert rep.infinite_variance and rep.scale == 1.0
        assert all(np.isfinite(rep.ratios("block_huber")))

    def test_sub_gaussian_ratio(self):
        assert sub_gaussian_ratio(math.sqrt(2 * math.log(2) / 100), 0.5, 1.0, 100) == pytest.approx(1.0)

    def test_reproducible(self):
        a = run_deviation_study(lognormal(), 200, EstimatorConfig(k=8), R=100, seed=5)
        b = run_deviation_study(lognormal(), 200, EstimatorConfig(k=8), R=100, seed=5)
        np.testing.assert_array_equal(a.deviations["block_huber"], b.deviations["block_huber"])
        assert rows_to_csv(a.csv_rows()) == rows_to_csv(b.csv_rows())

    def test_multivariate_sup_deviation(self):
        rep = run_deviation_study(normal(), 400, EstimatorConfig(k=10), R=100, seed=6, d=2, m_directions=8)
        assert rep.sup_deviation.shape == (100,)
        # the true mean lies in every slab of half-width sup_deviation, so the
        # slab solution is within twice that on each basis direction
        assert np.all(rep.deviations["block_huber"] <= 2 * math.sqrt(2) * rep.sup_deviation + 1e-9)

    def test_small_R_rejected(self):
        with pytest.raises(ParameterError):
            run_deviation_study(normal(), 100, EstimatorConfig(k=5), R=10)


class TestRegimes:
    def test_linear_and_single_block_columns(self):
        sw = run_regime_sweep(student_t(3.0), 400, [1, 20], [0.5, 1.0, math.inf], R=60, seed=7)
        inf_cell = sw.cell(20, math.inf)
        np.testing.assert_allclose(
            inf_cell.quantiles("block_huber"), inf_cell.quantiles("sample_mean"), rtol=0, atol=1e-6
        )
        for m in (0.5, 1.0, math.inf):
            c = sw.cell(1, m)
            np.testing.assert_allclose(c.deviations["block_huber"], c.deviations["sample_mean"], rtol=0, atol=1e-9)

    def test_csv_rows(self):
        sw = run_regime_sweep(normal(), 100, [5], [1.0, math.inf], R=20, seed=8)
        rows = list(csv.DictReader(io.StringIO(rows_to_csv(sw.csv_rows()))))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 2 * 3 * 4
        assert {r["delta"] for r in rows} == {"1.0*sigma_hat", "inf"}


class TestContaminationSweep:
    def test_budget_enforced(self):
        with pytest.raises(ParameterError, match="k > 2\\*O"):
            run_contamination_sweep(normal(), 1000, [0.01], k_factor=2.0, R=2, d=1)

    def test_eps_range(self):
        with pytest.raises(ParameterError):
            run_contamination_sweep(normal(), 1000, [0.3], R=2, d=1)

    def test_mean_baseline_linear(self):
        sw = run_contamination_sweep(normal(), 2000, [0.01, 0.04], R=5, d=1, seed=1)
        # appended point mass L moves the mean by about L * O / (N + O)
        for e, O in zip(sw.eps_grid, sw.outliers):
            assert sw.baseline_median(e) == pytest.approx(1e6 * O / (2000 + O), rel=1e-3)
        # against eps / (1 + eps) the growth is exactly linear
        x = [e / (1 + e) for e in sw.eps_grid]
        assert fit_loglog_slope(x, [sw.baseline_median(e) for e in sw.eps_grid]) == pytest.approx(1.0, abs=1e-3)

    def test_eps_zero_matches_deviation_study(self):
        cfg = EstimatorConfig(k=20, delta=1.0)
        dev = run_deviation_study(normal(), 400, cfg, R=100, seed=3)
        sw = run_contamination_sweep(normal(), 400, [0.0, 0.01], R=100, seed=3, d=1, k_at_zero=20)
        np.testing.assert_allclose(sw.errors[0.0], np.abs(dev.deviations["block_huber"]), rtol=0, atol=1e-12)

    def test_least_favorable_small(self):
        sw = run_contamination_sweep("least_favorable", 1000, [0.01, 0.05], R=4, d=2, seed=2, m_directions=8)
        assert len(sw.worst_index[0.05]) == 4
        assert sw.baseline_ratio(0.05) > 100

    def test_menu_rejects_count(self):
        with pytest.raises(ParameterError):
            run_contamination_sweep(normal(), 1000, [0.01], menu=[{"count": 3}], R=1, d=1)


class TestUstat:
    def test_agreement(self):
        rep = run_ustat_agreement(student_t(4.0), 12, 3, 1.0, R=30, seed=4)
        assert rep.max_gap <= 1e-12
        assert rep.permutation_gap <= 1e-12
        assert rep.median_disjoint_gap <= rep.gap_threshold

    def test_size_limits(self):
        with pytest.raises(ParameterError):
            run_ustat_agreement(normal(), 20, 3, 1.0, R=1)


class TestConfigRunner:
    def test_unknown_keys(self):
        with pytest.raises(ConfigError) as exc:
            validate_study_config({"study": "ustat", "dist": {"family": "normal"}, "N": 12, "n": 3, "delta": 1, "foo": 1})
        assert exc.value.keys == ["foo"]

    def test_missing_keys(self):
        with pytest.raises(ConfigError) as exc:
            validate_study_config({"study": "regimes", "N": 10})
        assert set(exc.value.keys) == {"dist", "ks", "delta_multipliers"}

    def test_contamination_budget(self):
        cfg = {"study": "contamination", "dist": "least_favorable", "N": 1000, "eps_grid": [0.01], "k_factor": 1.5}
        with pytest.raises(ConfigError, match="k > 2\\*O"):
            validate_study_config(cfg)

    def test_bad_values(self):
        cfg = {"dist": {"family": "normal", "mu": 0, "sigma": -1}, "N": 0, "estimator": {"k": 2}}
        with pytest.raises(ConfigError) as exc:
            validate_study_config(cfg, "deviation")
        assert set(exc.value.keys) == {"dist", "N"}

    def test_defaults_echoed_and_bytes_stable(self, tmp_path):
        cfg = {
            "study": "regimes",
            "dist": {"family": "student_t", "nu": 3.0, "loc": 0.0, "scale": 1.0},
            "N": 200,
            "R": 20,
            "ks": [5, 10],
            "delta_multipliers": [1.0, "inf"],
        }
        _, c1, j1 = run_study(cfg, tmp_path / "a")
        _, c2, j2 = run_study(cfg, tmp_path / "b")
        assert c1.read_bytes() == c2.read_bytes()
        assert j1.read_bytes() == j2.read_bytes()
        summary = json.loads(j1.read_text())
        assert summary["resolved_config"]["seed"] == 0
        assert summary["resolved_config"]["partition_seed"] == 0

    def test_timing_fills_runtime(self, tmp_path):
        cfg = {"dist": {"family": "normal", "mu": 0, "sigma": 1}, "N": 12, "n": 3, "delta": 1.0, "R": 3}
        _, c, _ = run_study(cfg, tmp_path, study="ustat")
        rows = list(csv.DictReader(io.StringIO(c.read_text())))
        assert all(r["runtime_ms"] == "" for r in rows)
