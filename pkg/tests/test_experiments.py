import json
import math

import numpy as np
import pytest

from errors import ExperimentIOError, RejectedInputError
from models import ExperimentConfig, PureBellParams
from services import cglmp, experiments, states
from services.results import ResultWriter

TSIRELSON = 2 * math.sqrt(2)
PURE_HEADER = "index,theta1,theta2,theta3,gamma1,gamma2,gamma3,i4,chsh,ent_measure,alpha1,alpha2,beta1,beta2,converged"
MIXED_HEADER = "index,p1,p2,p3,p4,i4,chsh,alpha1,alpha2,beta1,beta2,converged"


def small(experiment: str, **overrides) -> ExperimentConfig:
    values = dict(experiment=experiment, samples=4, seed=5, restarts=2)
    values.update(overrides)
    return ExperimentConfig(**values)


class TestExperimentConfig:

    def test_defaults_follow_experiment(self):
        pure = ExperimentConfig(experiment="pure")
        mixed = ExperimentConfig(experiment="mixed")
        assert (pure.samples, pure.bin_width) == (1000, 0.1)
        assert (mixed.samples, mixed.bin_width) == (100, 0.002)

    def test_noise_range_must_be_increasing(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="noise", p_min=0.8, p_max=0.6)

    def test_single_rejects_two_state_kinds(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="single", theta1=0.1, noise_p=0.5)

    def test_zero_samples_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="pure", samples=0)


class TestHistogram:

    def test_bins_aligned_to_width(self):
        histogram = experiments.build_histogram([0.05, 0.15, 0.15, 0.31], 0.1)
        assert histogram.counts == [1, 2, 0, 1]
        np.testing.assert_allclose(histogram.edges, [0.0, 0.1, 0.2, 0.3])
        np.testing.assert_allclose(histogram.centers, [0.05, 0.15, 0.25, 0.35])
        assert histogram.total == 4

    def test_negative_values(self):
        histogram = experiments.build_histogram([-0.25, 0.05], 0.1)
        assert histogram.edges[0] == pytest.approx(-0.3)
        assert histogram.total == 2

    def test_rejects_empty_and_bad_width(self):
        with pytest.raises(RejectedInputError):
            experiments.build_histogram([], 0.1)
        with pytest.raises(RejectedInputError):
            experiments.build_histogram([1.0], 0.0)


class TestPowerLawFit:

    @pytest.mark.parametrize("exponent", [3.0, 3.66])
    def test_exact_power_law(self, exponent):
        centers = np.array([1.0, 1.5, 2.0, 2.5, 3.0])
        counts = 1000.0 * centers ** -exponent
        fit = experiments.fit_power_law(centers, counts)
        assert fit.exponent == pytest.approx(exponent, abs=1e-9)
        assert fit.amplitude == pytest.approx(1000.0, rel=1e-9)
        assert fit.residual == pytest.approx(0.0, abs=1e-9)
        assert fit.bins_used == 5

    def test_flat_counts(self):
        fit = experiments.fit_power_law([0.5, 1.0, 2.0, 4.0], [7, 7, 7, 7])
        assert fit.exponent == pytest.approx(0.0, abs=1e-9)

    def test_empty_and_non_positive_bins_are_skipped(self):
        fit = experiments.fit_power_law([-0.5, 0.0, 1.0, 2.0, 4.0, 8.0], [9, 9, 8, 0, 2, 1])
        assert fit.bins_used == 3
        assert fit.center_min == 1.0
        assert fit.center_max == 8.0

    def test_too_few_bins(self):
        with pytest.raises(RejectedInputError):
            experiments.fit_power_law([1.0, 2.0, 3.0], [5, 0, 1])


class TestPureExperiment:

    def test_records_and_histogram(self):
        result = experiments.run_pure_experiment(small("pure"))
        assert [r.index for r in result.records] == [0, 1, 2, 3]
        assert result.histogram.total == 4
        for record in result.records:
            assert record.chsh == pytest.approx(TSIRELSON, abs=1e-9)
            assert 0.0 <= record.entanglement_measure <= 1.0
            rho = states.state_from_params(record.params)
            assert cglmp.cglmp_value(rho, record.phases_at_max, 4) == pytest.approx(record.i4, abs=1e-9)
        assert 0.0 <= result.summary.violation_fraction <= 1.0
        assert result.summary.max_i4 >= result.summary.min_i4

    def test_same_seed_same_files(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        experiments.run_pure_experiment(small("pure", output_path=str(first)))
        experiments.run_pure_experiment(small("pure", output_path=str(second)))
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text().splitlines()[0] == PURE_HEADER
        assert len(first.read_text().splitlines()) == 5

    def test_different_seeds_sample_different_states(self):
        a = experiments.run_pure_experiment(small("pure", samples=2))
        b = experiments.run_pure_experiment(small("pure", samples=2, seed=6))
        assert a.records[0].params != b.records[0].params

    def test_process_pool_matches_serial(self):
        serial = experiments.run_pure_experiment(small("pure", samples=3, restarts=1))
        pooled = experiments.run_pure_experiment(small("pure", samples=3, restarts=1, workers=2))
        assert serial.records == pooled.records


class TestEntanglementScatter:

    def test_shares_states_with_pure_experiment(self):
        pure = experiments.run_pure_experiment(small("pure"))
        scatter = experiments.run_entanglement_scatter(small("entanglement"))
        assert [r.i4 for r in scatter.records] == [r.i4 for r in pure.records]
        assert [r.entanglement_measure for r in scatter.records] == [r.entanglement_measure for r in pure.records]
        assert scatter.summary.pearson_r is None or -1.0 <= scatter.summary.pearson_r <= 1.0

    def test_csv_uses_pure_header(self, tmp_path):
        out = tmp_path / "scatter.csv"
        experiments.run_entanglement_scatter(small("entanglement", samples=2, output_path=str(out)))
        assert out.read_text().splitlines()[0] == PURE_HEADER


class TestMixedExperiment:

    def test_records(self, tmp_path):
        out = tmp_path / "mixed.csv"
        result = experiments.run_mixed_experiment(small("mixed", output_path=str(out)))
        for record in result.records:
            assert record.chsh == pytest.approx(TSIRELSON, abs=1e-9)
            assert record.entanglement_measure is None
            assert abs(record.i4) <= TSIRELSON / 3 + 1e-6
        assert result.summary.max_abs_i4 == max(abs(r.i4) for r in result.records)
        assert result.summary.below_reference_ceiling is not None
        assert out.read_text().splitlines()[0] == MIXED_HEADER


class TestNoiseSweep:

    def test_thresholds(self):
        cfg = ExperimentConfig(experiment="noise")
        result = experiments.run_noise_sweep(0.0, 1.0, 101, cfg)
        assert len(result.noise_rows) == 101
        assert result.summary.i4_threshold == pytest.approx(2 / 2.8962, abs=1e-3)
        assert result.summary.chsh_threshold == pytest.approx(1 / math.sqrt(2), abs=1e-9)
        low, high = result.summary.window
        assert low < high
        for row in result.noise_rows:
            assert row.chsh == pytest.approx(row.p * TSIRELSON, abs=1e-12)

    def test_no_crossing_inside_range(self):
        result = experiments.run_noise_sweep(0.0, 0.5, 11, ExperimentConfig(experiment="noise", p_max=0.5))
        assert result.summary.i4_threshold is None
        assert result.summary.window is None

    @pytest.mark.parametrize("p_min,p_max,steps", [(0.5, 0.5, 10), (-0.1, 1.0, 10), (0.0, 1.0, 1)])
    def test_rejects_bad_grid(self, p_min, p_max, steps):
        with pytest.raises(RejectedInputError):
            experiments.run_noise_sweep(p_min, p_max, steps, ExperimentConfig(experiment="noise"))

    def test_threshold_crossing(self):
        ps = np.array([0.0, 0.5, 1.0])
        assert experiments.threshold_crossing(ps, np.array([0.0, 1.0, 3.0]), 2.0) == pytest.approx(0.75)
        assert experiments.threshold_crossing(ps, np.array([0.0, 1.0, 1.5]), 2.0) is None

    def test_csv(self, tmp_path):
        out = tmp_path / "noise.csv"
        cfg = ExperimentConfig(experiment="noise", steps=3, output_path=str(out))
        experiments.run_experiment(cfg)
        lines = out.read_text().splitlines()
        assert lines[0] == "p,i4,chsh"
        assert len(lines) == 4


class TestSingle:

    def test_defaults_to_maximally_entangled_state(self):
        result = experiments.run_single(ExperimentConfig(experiment="single"))
        record = result.records[0]
        assert 2.8957 <= record.i4 <= 2.8967
        assert record.entanglement_measure == pytest.approx(1.0, abs=1e-12)
        assert record.phases_at_max == cglmp.optimal_phases(4)

    def test_forced_eta1_mixture(self):
        result = experiments.run_single(ExperimentConfig(experiment="single", p1=1.0, p2=0.0, p3=0.0, p4=0.0))
        record = result.records[0]
        assert record.chsh == pytest.approx(TSIRELSON, abs=1e-9)
        assert record.i4 == pytest.approx(TSIRELSON / 3, abs=1e-9)

    def test_noisy_state(self):
        result = experiments.run_single(ExperimentConfig(experiment="single", noise_p=0.5))
        assert result.records[0].chsh == pytest.approx(TSIRELSON / 2, abs=1e-12)

    def test_phase_override(self):
        cfg = ExperimentConfig(experiment="single", alpha2=0.0)
        record = experiments.run_single(cfg).records[0]
        assert record.phases_at_max.alpha2 == 0.0
        assert record.phases_at_max.beta1 == 0.25

    def test_optimize(self):
        cfg = ExperimentConfig(experiment="single", optimize=True, seed=2)
        assert 2.8957 <= experiments.run_single(cfg).records[0].i4 <= 2.8967

    def test_theta1_alone_selects_eta1(self):
        record = experiments.run_single(ExperimentConfig(experiment="single", theta1=0.0)).records[0]
        assert record.params == PureBellParams(theta1=0.0, theta2=0.0, theta3=0.0)
        assert record.chsh == pytest.approx(TSIRELSON, abs=1e-9)
        assert record.entanglement_measure == pytest.approx(0.0, abs=1e-12)


class TestResultWriter:

    def test_json_envelope(self, tmp_path):
        out = tmp_path / "nested" / "single.json"
        experiments.run_experiment(ExperimentConfig(experiment="single", format="json", output_path=str(out)))
        payload = json.loads(out.read_text())
        assert set(payload) >= {"config", "seed", "version", "summary", "records"}
        assert payload["seed"] == payload["config"]["seed"]
        assert len(payload["records"]) == 1

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = experiments.run_single(ExperimentConfig(experiment="single"))
        with pytest.raises(ExperimentIOError):
            ResultWriter(str(blocker / "out.csv")).write(result)


@pytest.mark.slow
def test_pure_ensemble_statistics():
    result = experiments.run_pure_experiment(ExperimentConfig(experiment="pure", workers=4))
    summary = result.summary
    assert result.histogram.total == 1000
    assert 0.05 <= summary.violation_fraction <= 0.14
    assert summary.above_tsirelson_fraction <= 0.01
    assert summary.fit_exponent is not None
    assert 2.5 <= summary.fit_exponent <= 5.0


@pytest.mark.slow
def test_mixed_ensemble_maxima_are_reported():
    result = experiments.run_mixed_experiment(ExperimentConfig(experiment="mixed", workers=4))
    assert result.summary.samples == 100
    assert result.summary.max_abs_i4 <= 2 * math.sqrt(2) / 3 + 1e-3
