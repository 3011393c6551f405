"""
Observables, Bell operator and its +-2*sqrt(2) eigensectors for two 4-level systems.
"""
import math
from functools import lru_cache
from typing import List, Optional, Tuple, Union

import numpy as np

from errors import RejectedInputError
from models import BellSector, ChshScenario, CliffordReport, DensityMatrix, Observable, StateVector
from services import qmath

TSIRELSON = 2.0 * math.sqrt(2.0)
CLIFFORD_ATOL = 1e-9
SECTOR_ATOL = 1e-9

State = Union[DensityMatrix, StateVector]


def gell_mann(n: int, index: int) -> np.ndarray:
    """
    Generalized Gell-Mann matrix lambda_index of SU(n).

    Standard ordering: for each k = 1..n-1, the symmetric and antisymmetric
    pairs (j, k) for j = 0..k-1, followed by the k-th diagonal generator.
    For n = 3 this reproduces lambda_1..lambda_8.

    Generators are normalized by Tr(l_a l_b) = 2 delta_ab, so the diagonal
    ones have spectral norm above 1; they are returned as plain Hermitian
    matrices rather than Observables.

    Args:
        n: Dimension (>= 2)
        index: Generator index, 1..n^2 - 1

    Returns:
        The generator as an n x n complex matrix

    Raises:
        RejectedInputError: If n < 2 or index is out of range
    """
    if n < 2:
        raise RejectedInputError(f"Gell-Mann matrices need n >= 2, got {n}")
    if not 1 <= index <= n * n - 1:
        raise RejectedInputError(f"Gell-Mann index must be in 1..{n * n - 1}, got {index}")

    m = np.zeros((n, n), dtype=np.complex128)
    counter = 0
    for k in range(1, n):
        for j in range(k):
            counter += 1
            if counter == index:
                m[j, k] = m[k, j] = 1.0
                return m
            counter += 1
            if counter == index:
                m[j, k] = -1j
                m[k, j] = 1j
                return m
        counter += 1
        if counter == index:
            m[np.arange(k), np.arange(k)] = 1.0
            m[k, k] = -k
            return m * math.sqrt(2.0 / (k * (k + 1)))
    raise AssertionError("unreachable: index validated above")


def su4_observables() -> ChshScenario:
    """
    A1 = (2/sqrt3) l8 + (sqrt6/3) l15, A2 = l4 + l11, B1 = (A1 + A2)/sqrt2, B2 = (A2 - A1)/sqrt2.

    A1 evaluates to diag(1, 1, -1, -1) up to rounding.
    """
    a1 = (2 / math.sqrt(3)) * gell_mann(4, 8) + (math.sqrt(6) / 3) * gell_mann(4, 15)
    a2 = gell_mann(4, 4) + gell_mann(4, 11)
    return ChshScenario(
        a1=Observable(matrix=a1),
        a2=Observable(matrix=a2),
        b1=Observable(matrix=(a1 + a2) / math.sqrt(2)),
        b2=Observable(matrix=(a2 - a1) / math.sqrt(2)),
    )


def qubit_scenario() -> ChshScenario:
    """Textbook qubit CHSH settings A1 = Z, A2 = X, B1 = (Z + X)/sqrt2, B2 = (X - Z)/sqrt2."""
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    return ChshScenario(
        a1=Observable(matrix=z),
        a2=Observable(matrix=x),
        b1=Observable(matrix=(z + x) / math.sqrt(2)),
        b2=Observable(matrix=(x - z) / math.sqrt(2)),
    )


def bell_operator(s: ChshScenario) -> np.ndarray:
    """A1 B1 - A1 B2 + A2 B1 + A2 B2 on the bipartite space."""
    a1, a2, b1, b2 = s.a1.matrix, s.a2.matrix, s.b1.matrix, s.b2.matrix
    return qmath.kron(a1, b1) - qmath.kron(a1, b2) + qmath.kron(a2, b1) + qmath.kron(a2, b2)


def _density(state: State, dim: int) -> np.ndarray:
    rho = state.projector() if isinstance(state, StateVector) else state.matrix
    if rho.shape[0] != dim:
        raise RejectedInputError(f"state dimension {rho.shape[0]} does not match operator dimension {dim}")
    return rho


def _expectation(rho: np.ndarray, operator: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ operator)))


def chsh_expectation(state: State, s: ChshScenario) -> float:
    """
    Tr(rho B) for the scenario's Bell operator.

    Raises:
        RejectedInputError: If the state dimension is not N^2
    """
    rho = _density(state, s.dim ** 2)
    return _expectation(rho, bell_operator(s))


def check_clifford_conditions(s: ChshScenario, state: State) -> CliffordReport:
    """
    Expectations of A_i^2, B_i^2 and the two anticommutators in `state`.

    The report is flagged maximal when every square has expectation 1 and at
    least one anticommutator expectation vanishes (both within 1e-9).
    """
    n = s.dim
    rho = _density(state, n * n)
    eye = qmath.identity(n)

    def on_a(op):
        return _expectation(rho, qmath.kron(op, eye))

    def on_b(op):
        return _expectation(rho, qmath.kron(eye, op))

    a1, a2, b1, b2 = s.a1.matrix, s.a2.matrix, s.b1.matrix, s.b2.matrix
    squares = (on_a(a1 @ a1), on_a(a2 @ a2), on_b(b1 @ b1), on_b(b2 @ b2))
    anti_a = on_a(a1 @ a2 + a2 @ a1)
    anti_b = on_b(b1 @ b2 + b2 @ b1)
    maximal = (
        all(abs(x - 1.0) <= CLIFFORD_ATOL for x in squares)
        and (abs(anti_a) <= CLIFFORD_ATOL or abs(anti_b) <= CLIFFORD_ATOL)
    )
    return CliffordReport(
        a1_squared=squares[0],
        a2_squared=squares[1],
        b1_squared=squares[2],
        b2_squared=squares[3],
        anticommutator_a=anti_a,
        anticommutator_b=anti_b,
        maximal=maximal,
    )


def _pair(first: Tuple[int, int], second: Tuple[int, int], sign: int) -> np.ndarray:
    return (qmath.basis_ket(first, 4) + sign * qmath.basis_ket(second, 4)) / math.sqrt(2)


def eta_basis() -> List[np.ndarray]:
    """Basis of the +2*sqrt(2) sector: eta_1..eta_4."""
    return [
        _pair((1, 1), (3, 3), 1),
        _pair((1, 0), (3, 2), 1),
        _pair((0, 1), (2, 3), 1),
        _pair((0, 0), (2, 2), 1),
    ]


def phi_basis() -> List[np.ndarray]:
    """Basis of the -2*sqrt(2) sector: phi_1..phi_4."""
    return [
        _pair((3, 1), (1, 3), -1),
        _pair((3, 0), (1, 2), -1),
        _pair((2, 1), (0, 3), -1),
        _pair((2, 0), (0, 2), -1),
    ]


def _build_sector(sign: int, vectors: List[np.ndarray], operator: np.ndarray) -> BellSector:
    for i, v in enumerate(vectors):
        residual = np.max(np.abs(operator @ v - sign * TSIRELSON * v))
        if residual > SECTOR_ATOL:
            raise AssertionError(f"basis vector {i} is not in the {sign:+d} sector (residual {residual:.3g})")
    return BellSector(
        sign=sign,
        basis=[StateVector(amplitudes=v) for v in vectors],
        projector=sum(qmath.projector(v) for v in vectors),
    )


@lru_cache(maxsize=1)
def bell_sectors() -> Tuple[BellSector, BellSector]:
    """
    The two 4-dimensional sectors H+ and H- of the SU(4) Bell operator.

    Bases are the analytic eta/phi vectors; each is checked to be an
    eigenvector of the Bell operator with eigenvalue +-2*sqrt(2).
    """
    operator = bell_operator(su4_observables())
    return _build_sector(1, eta_basis(), operator), _build_sector(-1, phi_basis(), operator)


def sector_of(state: State) -> Optional[int]:
    """+1 or -1 if the state lies entirely in H+ or H-, otherwise None."""
    rho = _density(state, 16)
    for sector in bell_sectors():
        projected = sector.projector @ rho @ sector.projector
        if np.max(np.abs(projected - rho)) <= SECTOR_ATOL:
            return sector.sign
    return None
