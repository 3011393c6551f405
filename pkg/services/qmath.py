"""Dense complex linear algebra for small bipartite systems."""
import logging
from typing import Literal, Sequence, Tuple

import numpy as np

from errors import RejectedInputError
from models import HERMITIAN_ATOL, DensityMatrix, StateVector

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray

JACOBI_THRESHOLD = 1e-13
JACOBI_MAX_SWEEPS = 100


def as_matrix(m) -> ComplexMatrix:
    """Coerce input to a 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise RejectedInputError(f"expected a matrix, got array of shape {arr.shape}")
    return arr


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=np.complex128)


def is_hermitian(m, atol: float = HERMITIAN_ATOL) -> bool:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        return False
    return bool(np.max(np.abs(arr - arr.conj().T), initial=0.0) <= atol)


def matmul(a, b) -> ComplexMatrix:
    """
    Matrix product a @ b.

    Raises:
        RejectedInputError: If a.cols != b.rows
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise RejectedInputError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(a, b) -> ComplexMatrix:
    """Kronecker product with `a` as the slow (most significant) factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def projector(v) -> ComplexMatrix:
    """|v><v| for a vector or StateVector."""
    amplitudes = v.amplitudes if isinstance(v, StateVector) else np.asarray(v, dtype=np.complex128)
    return np.outer(amplitudes, amplitudes.conj())


def basis_ket(labels: Sequence[int], n: int) -> np.ndarray:
    """
    Computational basis vector |j k ...> of len(labels) n-level systems.

    The first label is the most significant digit, so |jk> sits at j*n + k.
    """
    index = 0
    for label in labels:
        if not 0 <= label < n:
            raise RejectedInputError(f"basis label {label} out of range for dimension {n}")
        index = index * n + label
    ket = np.zeros(n ** len(labels), dtype=np.complex128)
    ket[index] = 1.0
    return ket


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a complex Jacobi rotation, updating a and v in place."""
    apq = a[p, q]
    magnitude = abs(apq)
    if magnitude == 0.0:
        return
    # Phase that makes the (p, q) entry real and positive
    phase = np.conj(apq) / magnitude
    app, aqq = a[p, p].real, a[q, q].real
    theta = (aqq - app) / (2.0 * magnitude)
    t = 1.0 / (abs(theta) + np.hypot(theta, 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    g = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
    cols = [p, q]
    a[:, cols] = a[:, cols] @ g
    a[cols, :] = g.conj().T @ a[cols, :]
    v[:, cols] = v[:, cols] @ g
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def hermitian_eig(m) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvectors inside a degenerate cluster come back in an arbitrary
    orthonormal basis; only the projector onto the cluster is meaningful.

    Args:
        m: Hermitian matrix

    Returns:
        (eigenvalues in descending order, matrix whose columns are the eigenvectors)

    Raises:
        RejectedInputError: If m is not Hermitian within 1e-12
    """
    a = as_matrix(m).copy()
    if a.shape[0] != a.shape[1]:
        raise RejectedInputError(f"eigenproblem needs a square matrix, got {a.shape}")
    if not is_hermitian(a):
        raise RejectedInputError("hermitian_eig requires a Hermitian matrix")
    n = a.shape[0]
    v = identity(n)
    threshold = JACOBI_THRESHOLD * max(1.0, float(np.linalg.norm(a)))

    sweeps = 0
    while _off_diagonal_norm(a) > threshold:
        if sweeps >= JACOBI_MAX_SWEEPS:
            logger.warning(
                "Jacobi eigensolver stopped after %d sweeps with off-diagonal norm %.3g",
                sweeps, _off_diagonal_norm(a),
            )
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
        sweeps += 1

    eigenvalues = np.real(np.diag(a))
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def partial_trace(
    rho: DensityMatrix,
    subsystem: Literal["A", "B"],
    dims: Tuple[int, int],
) -> DensityMatrix:
    """
    Trace out one subsystem of a bipartite state.

    Args:
        rho: State on the dims[0] x dims[1] space
        subsystem: Subsystem to trace out ("A" or "B")
        dims: (dim A, dim B)

    Returns:
        Reduced state of the remaining subsystem

    Raises:
        RejectedInputError: If rho.dim != dims[0] * dims[1] or subsystem is unknown
    """
    dim_a, dim_b = dims
    if rho.dim != dim_a * dim_b:
        raise RejectedInputError(f"state dimension {rho.dim} does not factor as {dim_a} x {dim_b}")
    tensor = rho.matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    if subsystem == "B":
        reduced = np.einsum("ijkj->ik", tensor)
    elif subsystem == "A":
        reduced = np.einsum("ijil->jl", tensor)
    else:
        raise RejectedInputError(f"unknown subsystem {subsystem!r}, expected 'A' or 'B'")
    # Summation order can leave rounding-level anti-Hermitian residue
    return DensityMatrix(matrix=(reduced + reduced.conj().T) / 2)
