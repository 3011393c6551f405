"""
State families: pure and mixed Bell states of the +2*sqrt(2) sector, the
noisy maximally entangled state, random states for property checks, and the
reduced-spectrum entanglement parameter.
"""
import math
from typing import Optional, Tuple

import numpy as np

from errors import RejectedInputError
from models import (
    DensityMatrix,
    EntanglementReport,
    MixedBellParams,
    NoisyStateParams,
    PureBellParams,
    StateInput,
    StateVector,
)
from services import qmath, scenario

SECTOR_ATOL = 1e-9


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Independent generator for the sub-stream identified by `keys`.

    The same (seed, keys) always yields the same stream, regardless of the
    order in which sub-streams are created.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """Integer seed for the sub-stream identified by `keys`."""
    return int(np.random.SeedSequence(seed, spawn_key=tuple(keys)).generate_state(1, dtype=np.uint32)[0])


def maximally_entangled_state(n: int = 4) -> StateVector:
    """(1/sqrt N) sum_j |jj>."""
    if n < 2:
        raise RejectedInputError(f"dimension must be >= 2, got {n}")
    amplitudes = np.zeros(n * n, dtype=np.complex128)
    amplitudes[np.arange(n) * (n + 1)] = 1.0 / math.sqrt(n)
    return StateVector(amplitudes=amplitudes)


def pure_bell_state(params: PureBellParams) -> StateVector:
    """sum_i c_i |eta_i> with the hyperspherical coefficients of `params`."""
    coefficients = params.coefficients()
    amplitudes = sum(c * eta for c, eta in zip(coefficients, scenario.eta_basis()))
    return StateVector(amplitudes=amplitudes)


def sample_pure(rng: np.random.Generator) -> Tuple[PureBellParams, StateVector]:
    """
    Draw a pure Bell state with independent uniform coordinates.

    theta_i ~ U[0, pi/2], gamma_i ~ U[0, 2pi).
    """
    thetas = rng.uniform(0.0, math.pi / 2, size=3)
    gammas = rng.uniform(0.0, 2 * math.pi, size=3)
    params = PureBellParams(
        theta1=thetas[0], theta2=thetas[1], theta3=thetas[2],
        gamma1=gammas[0], gamma2=gammas[1], gamma3=gammas[2],
    )
    return params, pure_bell_state(params)


def mixed_bell_state(params: MixedBellParams) -> DensityMatrix:
    """sum_i p_i |eta_i><eta_i|."""
    rho = sum(p * qmath.projector(eta) for p, eta in zip(params.as_array(), scenario.eta_basis()))
    return DensityMatrix(matrix=rho)


def sample_mixed(rng: np.random.Generator) -> Tuple[MixedBellParams, DensityMatrix]:
    """Mixed Bell state with weights drawn uniformly from the 3-simplex (sorted spacings)."""
    cuts = np.sort(rng.uniform(0.0, 1.0, size=3))
    weights = np.diff(np.concatenate(([0.0], cuts, [1.0])))
    params = MixedBellParams(p1=weights[0], p2=weights[1], p3=weights[2], p4=weights[3])
    return params, mixed_bell_state(params)


def noisy_state(p: float, n: int = 4) -> DensityMatrix:
    """
    p |Psi_E><Psi_E| + (1 - p) I / N^2.

    Raises:
        RejectedInputError: If p is outside [0, 1]
    """
    if not 0.0 <= p <= 1.0:
        raise RejectedInputError(f"visibility p must lie in [0, 1], got {p}")
    psi = maximally_entangled_state(n)
    rho = p * psi.projector() + (1.0 - p) * qmath.identity(n * n) / (n * n)
    return DensityMatrix(matrix=rho)


def state_from_params(params) -> DensityMatrix:
    """Density matrix for pure, mixed or noisy parameters."""
    if isinstance(params, PureBellParams):
        return DensityMatrix.from_state(pure_bell_state(params))
    if isinstance(params, MixedBellParams):
        return mixed_bell_state(params)
    if isinstance(params, NoisyStateParams):
        return noisy_state(params.p, params.n)
    raise RejectedInputError(f"unsupported state parameters {type(params).__name__}")


def state_from_input(selection: StateInput) -> DensityMatrix:
    """Density matrix selected by an API state input."""
    if selection.pure is not None:
        return state_from_params(selection.pure)
    if selection.mixed is not None:
        return state_from_params(selection.mixed)
    return noisy_state(selection.noise_p, selection.n)


def random_density_matrix(rng: np.random.Generator, dim: int, rank: Optional[int] = None) -> DensityMatrix:
    """Random state G G^dag / Tr with a complex Gaussian dim x rank matrix G."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(matrix=rho / np.trace(rho).real)


def random_product_state(rng: np.random.Generator, n: int = 4) -> DensityMatrix:
    """rho_A (x) rho_B with independent random local states."""
    rho_a = random_density_matrix(rng, n).matrix
    rho_b = random_density_matrix(rng, n).matrix
    return DensityMatrix(matrix=qmath.kron(rho_a, rho_b))


def entanglement_parameter(state: StateVector) -> EntanglementReport:
    """
    Entanglement parameter P of a pure Bell state.

    The reduced state has the twofold-degenerate spectrum (1 +- P)/4; the
    measure 1 - |P| is 1 for the maximally entangled state and 0 for eta_1.

    Raises:
        RejectedInputError: If the state does not lie in the +2*sqrt(2) sector
    """
    if state.dim != 16:
        raise RejectedInputError(f"expected a 16-dimensional state, got {state.dim}")
    plus, _ = scenario.bell_sectors()
    leakage = float(np.max(np.abs(plus.projector @ state.amplitudes - state.amplitudes)))
    if leakage > SECTOR_ATOL:
        raise RejectedInputError(f"state is not supported on the +2*sqrt(2) sector (leakage {leakage:.3g})")

    reduced = qmath.partial_trace(DensityMatrix.from_state(state), "B", (4, 4))
    eigenvalues, _ = qmath.hermitian_eig(reduced.matrix)
    # Descending order puts the (1 + P)/4 pair first
    p = float(np.clip(eigenvalues[0] + eigenvalues[1] - eigenvalues[2] - eigenvalues[3], 0.0, 1.0))
    return EntanglementReport(P=p, measure=1.0 - abs(p), reduced_eigenvalues=[float(x) for x in eigenvalues])


def reduced_entropy(report: EntanglementReport) -> float:
    """Von Neumann entropy (nats) of the reduced state described by `report`."""
    entropy = 0.0
    for mu in ((1 + report.P) / 4, (1 - report.P) / 4):
        if mu > 0:
            entropy -= 2 * mu * math.log(mu)
    return entropy
