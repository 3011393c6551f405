"""
Phase-parametrized measurement bases, joint outcome distributions and the
CGLMP functional I_N.
"""
import math
from typing import List, Literal, Tuple, Union

import numpy as np

import config
from errors import NegativeProbabilityError, RejectedInputError
from models import (
    PROBABILITY_ATOL,
    DensityMatrix,
    JointDistribution,
    MeasurementSetting,
    PhaseConfiguration,
    StateVector,
)

Relation = Literal["A_eq_B_plus_k", "B_eq_A_plus_k"]
State = Union[DensityMatrix, StateVector]

# (alice setting, bob setting, relation, offset(k)) for the plus and minus brackets
PLUS_TERMS = (
    (1, 1, "A_eq_B_plus_k", lambda k: k),
    (2, 1, "B_eq_A_plus_k", lambda k: k + 1),
    (2, 2, "A_eq_B_plus_k", lambda k: k),
    (1, 2, "B_eq_A_plus_k", lambda k: k),
)
MINUS_TERMS = (
    (1, 1, "A_eq_B_plus_k", lambda k: -k - 1),
    (2, 1, "B_eq_A_plus_k", lambda k: -k),
    (2, 2, "A_eq_B_plus_k", lambda k: -k - 1),
    (1, 2, "B_eq_A_plus_k", lambda k: -k - 1),
)


def cglmp_bound_reference() -> float:
    """Classical reference line |I_N| <= 2 (reported, not enforced)."""
    return config.CLASSICAL_BOUND


def optimal_phases(n: int = 4) -> PhaseConfiguration:
    """(alpha1, alpha2, beta1, beta2) = (0, 1/2, 1/4, -1/4)."""
    return PhaseConfiguration(alpha1=0.0, alpha2=0.5, beta1=0.25, beta2=-0.25, n=n)


def _basis_matrix(party: str, phase: float, n: int) -> np.ndarray:
    """Columns are the basis vectors for outcomes 0..n-1."""
    j = np.arange(n)[:, None]
    outcome = np.arange(n)[None, :]
    sign = 1.0 if party == "A" else -1.0
    return np.exp(2j * np.pi / n * j * (sign * outcome + phase)) / math.sqrt(n)


def measurement_basis(setting: MeasurementSetting, outcome: int) -> StateVector:
    """
    Basis vector for one outcome of a local measurement.

    Party A: (1/sqrt N) sum_j exp(i 2pi/N j (K + alpha)) |j>
    Party B: (1/sqrt N) sum_j exp(i 2pi/N j (-L + beta)) |j>

    Raises:
        RejectedInputError: If outcome is not in 0..N-1
    """
    if not 0 <= outcome < setting.dim:
        raise RejectedInputError(f"outcome {outcome} out of range for dimension {setting.dim}")
    column = _basis_matrix(setting.party, setting.phase, setting.dim)[:, outcome]
    return StateVector(amplitudes=column)


def _density(state: State) -> np.ndarray:
    return state.projector() if isinstance(state, StateVector) else state.matrix


def _probabilities(rho: np.ndarray, basis_a: np.ndarray, basis_b: np.ndarray) -> np.ndarray:
    n = basis_a.shape[0]
    w = np.kron(basis_a, basis_b)
    p = np.real(np.sum(w.conj() * (rho @ w), axis=0)).reshape(n, n)
    low = float(p.min())
    if low < -PROBABILITY_ATOL:
        raise NegativeProbabilityError(f"joint probability {low:.3g} is below -{PROBABILITY_ATOL}")
    return np.clip(p, 0.0, None)


def joint_distribution(state: State, a: MeasurementSetting, b: MeasurementSetting) -> JointDistribution:
    """
    P[K][L] = Tr(rho Pi_K^A (x) Pi_L^B).

    Raises:
        RejectedInputError: On dimension or party mismatch
        NegativeProbabilityError: If a probability falls below -1e-12
    """
    if a.party != "A" or b.party != "B":
        raise RejectedInputError("joint_distribution expects an A setting followed by a B setting")
    if a.dim != b.dim:
        raise RejectedInputError(f"setting dimensions differ: {a.dim} vs {b.dim}")
    rho = _density(state)
    n = a.dim
    if rho.shape[0] != n * n:
        raise RejectedInputError(f"state dimension {rho.shape[0]} does not match {n} x {n}")
    p = _probabilities(rho, _basis_matrix("A", a.phase, n), _basis_matrix("B", b.phase, n))
    return JointDistribution(dim=n, probabilities=p)


def _coincidence(p: np.ndarray, relation: str, k: int) -> float:
    n = p.shape[0]
    idx = np.arange(n)
    shifted = (idx + k) % n
    if relation == "A_eq_B_plus_k":
        return float(p[shifted, idx].sum())
    if relation == "B_eq_A_plus_k":
        return float(p[idx, shifted].sum())
    raise RejectedInputError(f"unknown relation {relation!r}")


def coincidence_probability(d: JointDistribution, relation: Relation, k: int) -> float:
    """
    Probability of a modular outcome relation.

    A_eq_B_plus_k: sum_L P[(L + k) mod N][L]
    B_eq_A_plus_k: sum_K P[K][(K + k) mod N]
    """
    return _coincidence(d.probabilities, relation, k)


def _functional(distributions, n: int) -> float:
    """I_N from the four distributions keyed by (alice setting, bob setting)."""
    total = 0.0
    for k in range(n // 2):
        weight = 1.0 - 2.0 * k / (n - 1)
        bracket = 0.0
        for a, b, relation, offset in PLUS_TERMS:
            bracket += _coincidence(distributions[(a, b)], relation, offset(k))
        for a, b, relation, offset in MINUS_TERMS:
            bracket -= _coincidence(distributions[(a, b)], relation, offset(k))
        total += weight * bracket
    return total


def cglmp_from_array(rho: np.ndarray, point, n: int) -> float:
    """
    I_N for a raw density matrix and phase vector (alpha1, alpha2, beta1, beta2).

    Used as the optimizer objective; performs no validation.
    """
    alpha1, alpha2, beta1, beta2 = point
    bases_a = {1: _basis_matrix("A", alpha1, n), 2: _basis_matrix("A", alpha2, n)}
    bases_b = {1: _basis_matrix("B", beta1, n), 2: _basis_matrix("B", beta2, n)}
    distributions = {
        (a, b): _probabilities(rho, bases_a[a], bases_b[b])
        for a in (1, 2) for b in (1, 2)
    }
    return _functional(distributions, n)


def cglmp_value(state: State, phases: PhaseConfiguration, n: int) -> float:
    """
    Evaluate the CGLMP functional I_N.

    Args:
        state: Bipartite state of dimension n^2 (pure states are used via their projector)
        phases: Measurement phases
        n: Local dimension

    Returns:
        I_N

    Raises:
        RejectedInputError: If the state dimension is not n^2
    """
    rho = _density(state)
    if rho.shape[0] != n * n:
        raise RejectedInputError(f"state dimension {rho.shape[0]} does not match {n} x {n}")
    return cglmp_from_array(rho, phases.as_array(), n)


def settings_for(phases: PhaseConfiguration) -> Tuple[List[MeasurementSetting], List[MeasurementSetting]]:
    """Alice's and Bob's MeasurementSettings for a phase configuration."""
    n = phases.n
    alice = [
        MeasurementSetting(party="A", setting_index=1, phase=phases.alpha1, dim=n),
        MeasurementSetting(party="A", setting_index=2, phase=phases.alpha2, dim=n),
    ]
    bob = [
        MeasurementSetting(party="B", setting_index=1, phase=phases.beta1, dim=n),
        MeasurementSetting(party="B", setting_index=2, phase=phases.beta2, dim=n),
    ]
    return alice, bob
