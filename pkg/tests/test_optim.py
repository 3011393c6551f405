import math

import numpy as np
import pytest

from errors import NonFiniteObjectiveError, RejectedInputError
from models import DensityMatrix, NelderMeadConfig, StateVector
from services import cglmp, optim, scenario, states

TIGHT = NelderMeadConfig(error_tolerance=1e-10)


def bowl(x):
    return -float(np.sum((np.asarray(x) - 0.3) ** 2))


class TestNelderMead:

    def test_quadratic_maximum(self):
        def objective(x):
            return 3.0 - (x[0] - 1.0) ** 2 - 2.0 * (x[1] + 0.5) ** 2

        result = optim.nelder_mead_maximize(objective, [0.0, 0.0], TIGHT)
        assert result.converged
        assert result.value == pytest.approx(3.0, abs=1e-8)
        np.testing.assert_allclose(result.point, [1.0, -0.5], atol=1e-3)
        assert result.evaluations > result.iterations

    def test_bowl_from_unit_start(self):
        assert optim.nelder_mead_maximize(bowl, [1.0] * 4, NelderMeadConfig()).value == pytest.approx(0.0, abs=1e-3)
        result = optim.nelder_mead_maximize(bowl, [1.0] * 4, TIGHT)
        np.testing.assert_allclose(result.point, [0.3] * 4, atol=1e-3)

    def test_bowl_converges_quickly_from_random_starts(self, rng):
        for start in rng.uniform(-2.0, 2.0, size=(100, 4)):
            result = optim.nelder_mead_maximize(bowl, start, NelderMeadConfig())
            assert result.converged
            assert result.iterations < 500

    def test_constant_objective_converges_immediately(self):
        result = optim.nelder_mead_maximize(lambda x: 1.5, [0.2, 0.4, 0.6, 0.8], NelderMeadConfig())
        assert result.converged
        assert result.iterations == 0
        assert result.value == 1.5

    def test_reinitialization_never_loses_ground(self, psi_e):
        rho = DensityMatrix.from_state(psi_e).matrix

        def objective(x):
            return cglmp.cglmp_from_array(rho, x, 4)

        start = [0.9, 2.1, 3.3, 0.4]
        single = optim.nelder_mead_maximize(objective, start, NelderMeadConfig(reinitializations=0))
        rebuilt = optim.nelder_mead_maximize(objective, start, NelderMeadConfig())
        assert rebuilt.value >= single.value
        assert rebuilt.evaluations > single.evaluations

    def test_iteration_limit(self):
        config = NelderMeadConfig(error_tolerance=1e-300, max_iterations=5)
        result = optim.nelder_mead_maximize(lambda x: -float(np.sum(x ** 2)), [1.0, 1.0, 1.0], config)
        assert not result.converged
        assert result.iterations == 5

    def test_non_finite_objective(self):
        with pytest.raises(NonFiniteObjectiveError):
            optim.nelder_mead_maximize(lambda x: float("nan"), [0.0], TIGHT)

    def test_initial_simplex(self):
        simplex = optim.initial_simplex([1.0, 2.0], 0.5)
        np.testing.assert_allclose(simplex, [[1.0, 2.0], [1.5, 2.0], [1.0, 2.5]])

    def test_standard_error(self):
        assert optim.standard_error(np.array([1.0, 1.0, 1.0])) == 0.0
        assert optim.standard_error(np.array([0.0, 2.0])) == pytest.approx(1.0)

    def test_expansion_must_exceed_reflection(self):
        with pytest.raises(ValueError):
            NelderMeadConfig(reflection=1.0, expansion=0.9)


class TestScreenedStart:

    def test_picks_highest_candidate(self):
        candidates = np.array([[0.0, 0.0], [0.3, 0.3], [2.0, 2.0]])
        np.testing.assert_array_equal(optim.screened_start(bowl, candidates), [0.3, 0.3])

    def test_skips_non_finite_candidates(self):
        candidates = np.array([[0.0], [1.0], [2.0]])
        values = {0.0: -1.0, 1.0: float("nan"), 2.0: -0.5}
        np.testing.assert_array_equal(optim.screened_start(lambda x: values[float(x[0])], candidates), [2.0])


class TestMaximizeCglmp:

    @pytest.mark.parametrize("seed", range(10))
    def test_maximally_entangled_qudits(self, psi_e, seed):
        report = optim.maximize_cglmp(DensityMatrix.from_state(psi_e), 4, 20, seed=seed)
        assert 2.8957 <= report.best_value <= 2.8967
        assert len(report.restart_values) == 20
        assert report.failed_restarts == 0

    def test_eta1_optimum_is_seed_independent(self):
        rho = DensityMatrix.from_state(StateVector(amplitudes=scenario.eta_basis()[0]))
        first = optim.maximize_cglmp(rho, 4, 20, seed=101)
        second = optim.maximize_cglmp(rho, 4, 20, seed=202)
        assert first.best_value == pytest.approx(second.best_value, abs=1e-3)

    def test_qubits_reach_tsirelson(self):
        rho = DensityMatrix.from_state(states.maximally_entangled_state(2))
        report = optim.maximize_cglmp(rho, 2, 5, seed=3, config=TIGHT)
        assert report.best_value == pytest.approx(2 * math.sqrt(2), abs=1e-6)

    def test_best_phases_reproduce_value(self, psi_e):
        rho = DensityMatrix.from_state(psi_e)
        report = optim.maximize_cglmp(rho, 4, 3, seed=5)
        assert report.best_value == pytest.approx(cglmp.cglmp_value(rho, report.best_phases, 4), abs=1e-9)
        assert all(0.0 <= x < 4.0 for x in report.best_phases.as_array())
        assert report.best_value == max(report.restart_values)

    def test_screening_counts_as_evaluations(self, psi_e):
        report = optim.maximize_cglmp(DensityMatrix.from_state(psi_e), 4, 2, seed=5, candidates=10)
        assert report.evaluations > 2 * 10

    def test_deterministic(self, psi_e):
        rho = DensityMatrix.from_state(psi_e)
        first = optim.maximize_cglmp(rho, 4, 3, seed=21)
        second = optim.maximize_cglmp(rho, 4, 3, seed=21)
        assert first == second

    def test_never_exceeds_classical_bound_for_noise(self):
        report = optim.maximize_cglmp(states.noisy_state(0.0), 4, 2, seed=1)
        assert report.best_value == pytest.approx(0.0, abs=1e-12)

    def test_rejects_zero_restarts(self, psi_e):
        with pytest.raises(RejectedInputError):
            optim.maximize_cglmp(DensityMatrix.from_state(psi_e), 4, 0, seed=1)

    def test_rejects_zero_candidates(self, psi_e):
        with pytest.raises(RejectedInputError):
            optim.maximize_cglmp(DensityMatrix.from_state(psi_e), 4, 2, seed=1, candidates=0)

    def test_rejects_dimension_mismatch(self, psi_e):
        with pytest.raises(RejectedInputError):
            optim.maximize_cglmp(DensityMatrix.from_state(psi_e), 3, 2, seed=1)
