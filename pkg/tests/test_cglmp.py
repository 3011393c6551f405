import math

import numpy as np
import pytest

from errors import NegativeProbabilityError, RejectedInputError
from models import DensityMatrix, MeasurementSetting, MixedBellParams, PhaseConfiguration, StateVector
from services import cglmp, qmath, scenario, states

I4_MAXIMALLY_ENTANGLED = 2.8962
ETA_MIXTURE_VALUE = 2 * math.sqrt(2) / 3


def coincidence_oracle(n: int, m: int, phase_sum: float) -> float:
    """P(A - B = m mod n) for the maximally entangled state."""
    x = math.pi * (m + phase_sum)
    return math.sin(x) ** 2 / math.sin(x / n) ** 2 / n ** 2


def settings(alpha: float, beta: float, n: int = 4):
    return (
        MeasurementSetting(party="A", setting_index=1, phase=alpha, dim=n),
        MeasurementSetting(party="B", setting_index=1, phase=beta, dim=n),
    )


class TestMeasurementBasis:

    def test_bases_are_orthonormal(self):
        for party in ("A", "B"):
            setting = MeasurementSetting(party=party, setting_index=1, phase=0.37, dim=4)
            basis = np.column_stack([cglmp.measurement_basis(setting, k).amplitudes for k in range(4)])
            np.testing.assert_allclose(basis.conj().T @ basis, np.eye(4), atol=1e-14)

    def test_outcome_out_of_range(self):
        setting = MeasurementSetting(party="A", setting_index=1, phase=0.0, dim=4)
        with pytest.raises(RejectedInputError):
            cglmp.measurement_basis(setting, 4)


class TestJointDistribution:

    @pytest.mark.parametrize("alpha,beta", [(0.0, 0.25), (0.5, -0.25), (0.13, 0.41)])
    def test_coincidences_match_closed_form(self, psi_e, alpha, beta):
        d = cglmp.joint_distribution(psi_e, *settings(alpha, beta))
        for m in range(4):
            expected = coincidence_oracle(4, m, alpha + beta)
            assert cglmp.coincidence_probability(d, "A_eq_B_plus_k", m) == pytest.approx(expected, abs=1e-12)

    def test_normalized_for_random_states(self, rng):
        for _ in range(5):
            rho = states.random_density_matrix(rng, 16)
            d = cglmp.joint_distribution(rho, *settings(*rng.uniform(0, 4, size=2)))
            assert d.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
            assert d.probabilities.min() >= 0.0

    def test_party_order_enforced(self, psi_e):
        a, b = settings(0.0, 0.0)
        with pytest.raises(RejectedInputError):
            cglmp.joint_distribution(psi_e, b, a)

    def test_dimension_mismatch(self, psi_e):
        with pytest.raises(RejectedInputError):
            cglmp.joint_distribution(psi_e, *settings(0.0, 0.0, n=3))

    def test_negative_probability_is_rejected(self):
        rho = np.zeros((16, 16), dtype=complex)
        rho[0, 0] = -1.0
        with pytest.raises(NegativeProbabilityError):
            cglmp.cglmp_from_array(rho, [0.0, 0.5, 0.25, -0.25], 4)


class TestCglmpValue:

    def test_maximally_entangled_at_optimal_phases(self, psi_e):
        value = cglmp.cglmp_value(psi_e, cglmp.optimal_phases(4), 4)
        assert value == pytest.approx(I4_MAXIMALLY_ENTANGLED, abs=5e-4)
        assert value > cglmp.cglmp_bound_reference()

    def test_qubits_reduce_to_chsh(self):
        psi = states.maximally_entangled_state(2)
        assert cglmp.cglmp_value(psi, cglmp.optimal_phases(2), 2) == pytest.approx(2 * math.sqrt(2), abs=1e-12)

    def test_maximally_mixed_state_is_zero(self):
        rho = DensityMatrix(matrix=np.eye(16) / 16)
        assert cglmp.cglmp_value(rho, cglmp.optimal_phases(4), 4) == pytest.approx(0.0, abs=1e-12)

    def test_noisy_state_is_linear_in_p(self, psi_e):
        optimum = cglmp.cglmp_value(psi_e, cglmp.optimal_phases(4), 4)
        for p in (0.2, 0.69, 0.9):
            value = cglmp.cglmp_value(states.noisy_state(p), cglmp.optimal_phases(4), 4)
            assert value == pytest.approx(p * optimum, abs=1e-12)

    def test_linear_in_the_state(self, rng):
        rho1 = states.random_density_matrix(rng, 16).matrix
        rho2 = states.random_density_matrix(rng, 16).matrix
        point = rng.uniform(0, 4, size=4)
        mixed = cglmp.cglmp_from_array(0.3 * rho1 + 0.7 * rho2, point, 4)
        separate = 0.3 * cglmp.cglmp_from_array(rho1, point, 4) + 0.7 * cglmp.cglmp_from_array(rho2, point, 4)
        assert mixed == pytest.approx(separate, abs=1e-12)

    def test_phases_are_periodic(self, rng):
        rho = states.random_density_matrix(rng, 16).matrix
        point = rng.uniform(0, 4, size=4)
        for axis in range(4):
            shifted = point.copy()
            shifted[axis] += 4.0
            assert cglmp.cglmp_from_array(rho, shifted, 4) == pytest.approx(
                cglmp.cglmp_from_array(rho, point, 4), abs=1e-10
            )

    def test_phase_configuration_reduces_mod_n(self):
        phases = cglmp.optimal_phases(4)
        assert phases.beta2 == pytest.approx(3.75)
        assert PhaseConfiguration(alpha1=-4.0, alpha2=9.5, beta1=0.25, beta2=4.0).as_array().tolist() == [0.0, 1.5, 0.25, 0.0]

    def test_non_finite_phase_rejected(self):
        with pytest.raises(ValueError):
            PhaseConfiguration(alpha1=float("nan"), alpha2=0.0, beta1=0.0, beta2=0.0)

    def test_state_dimension_mismatch(self, psi_e):
        with pytest.raises(RejectedInputError):
            cglmp.cglmp_value(psi_e, cglmp.optimal_phases(3), 3)

    def test_product_states_respect_classical_bound(self, rng):
        for _ in range(5):
            rho = states.random_product_state(rng, 4)
            value = cglmp.cglmp_value(rho, PhaseConfiguration.from_array(rng.uniform(0, 4, size=4), 4), 4)
            assert abs(value) <= 2.0 + 1e-9


class TestEtaStates:

    def test_every_eta_gives_the_same_value(self, rng):
        point = rng.uniform(0, 4, size=4)
        values = [
            cglmp.cglmp_from_array(qmath.projector(eta), point, 4)
            for eta in scenario.eta_basis()
        ]
        np.testing.assert_allclose(values, values[0], atol=1e-12)

    def test_mixture_at_optimal_phases(self):
        params = MixedBellParams(p1=0.1, p2=0.2, p3=0.3, p4=0.4)
        value = cglmp.cglmp_value(states.mixed_bell_state(params), cglmp.optimal_phases(4), 4)
        assert value == pytest.approx(ETA_MIXTURE_VALUE, abs=1e-9)

    def test_settings_for(self):
        alice, bob = cglmp.settings_for(cglmp.optimal_phases(4))
        assert [s.phase for s in alice] == [0.0, 0.5]
        assert [s.party for s in bob] == ["B", "B"]
        assert isinstance(cglmp.measurement_basis(bob[1], 0), StateVector)
