"""
Derivative-free maximization of I_N over the four measurement phases.

Nelder-Mead simplex search stopped by the standard error of the vertex
values, run from several screened random starting points.
"""
import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from errors import NonFiniteObjectiveError, RejectedInputError
from models import DensityMatrix, NelderMeadConfig, NelderMeadResult, OptimizationReport, PhaseConfiguration
from services import cglmp
from services.states import derive_rng

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]

# Uniform draws screened per restart; the search starts from the best one
START_CANDIDATES = 64


def initial_simplex(start: Sequence[float], scale: float) -> np.ndarray:
    """
    Start point plus one vertex offset by `scale` along each axis.

    Raises:
        RejectedInputError: If the vertices are affinely dependent
    """
    x0 = np.asarray(start, dtype=float)
    simplex = np.vstack([x0, x0 + scale * np.eye(x0.size)])
    edges = simplex[1:] - simplex[0]
    if abs(np.linalg.det(edges)) <= 0.0:
        raise RejectedInputError("initial simplex is degenerate")
    return simplex


def standard_error(values: np.ndarray) -> float:
    """sqrt(1/(n+1) sum_i (f(x_i) - mean f)^2) over the n+1 vertex values."""
    return float(np.sqrt(np.mean((values - values.mean()) ** 2)))


def nelder_mead_maximize(objective: Objective, start: Sequence[float], config: NelderMeadConfig) -> NelderMeadResult:
    """
    Maximize `objective` with the Nelder-Mead simplex method.

    After each converged descent the simplex is rebuilt around the best
    vertex at the initial scale, up to `config.reinitializations` times,
    until a descent improves the value by less than the error tolerance.

    Args:
        objective: Real function of a point
        start: Initial point
        config: Simplex coefficients and stopping rule

    Returns:
        Best vertex, its value, whether the standard-error criterion was met,
        and evaluation/iteration counts

    Raises:
        NonFiniteObjectiveError: If the objective returns NaN or infinity
    """
    evaluations = 0
    iterations = 0
    rho, chi = config.reflection, config.expansion
    gamma, sigma = config.contraction, config.shrink

    # The search minimizes the negated objective
    def f(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        value = float(objective(x))
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(f"objective returned {value} at {x.tolist()}")
        return -value

    def descend(simplex: np.ndarray, values: np.ndarray):
        nonlocal iterations
        while True:
            order = np.argsort(values, kind="stable")
            simplex, values = simplex[order], values[order]
            if standard_error(values) < config.error_tolerance:
                return simplex, values, True
            if iterations >= config.max_iterations:
                return simplex, values, False
            iterations += 1

            centroid = simplex[:-1].mean(axis=0)
            worst = simplex[-1]

            reflected = centroid + rho * (centroid - worst)
            f_reflected = f(reflected)
            if f_reflected < values[0]:
                expanded = centroid + chi * (reflected - centroid)
                f_expanded = f(expanded)
                if f_expanded < f_reflected:
                    simplex[-1], values[-1] = expanded, f_expanded
                else:
                    simplex[-1], values[-1] = reflected, f_reflected
                continue
            if f_reflected < values[-2]:
                simplex[-1], values[-1] = reflected, f_reflected
                continue

            if f_reflected < values[-1]:
                # Outside contraction
                contracted = centroid + gamma * (reflected - centroid)
                f_contracted = f(contracted)
                if f_contracted <= f_reflected:
                    simplex[-1], values[-1] = contracted, f_contracted
                    continue
            else:
                # Inside contraction
                contracted = centroid + gamma * (worst - centroid)
                f_contracted = f(contracted)
                if f_contracted < values[-1]:
                    simplex[-1], values[-1] = contracted, f_contracted
                    continue

            best = simplex[0]
            for i in range(1, len(simplex)):
                simplex[i] = best + sigma * (simplex[i] - best)
                values[i] = f(simplex[i])

    simplex = initial_simplex(start, config.initial_simplex_scale)
    values = np.array([f(x) for x in simplex])
    simplex, values, converged = descend(simplex, values)

    for _ in range(config.reinitializations):
        if not converged:
            break
        previous = values[0]
        simplex = initial_simplex(simplex[0], config.initial_simplex_scale)
        values = np.concatenate(([previous], [f(x) for x in simplex[1:]]))
        simplex, values, converged = descend(simplex, values)
        if previous - values[0] < config.error_tolerance:
            break

    return NelderMeadResult(
        value=-float(values[0]),
        point=[float(x) for x in simplex[0]],
        converged=converged,
        evaluations=evaluations,
        iterations=iterations,
    )


def screened_start(objective: Objective, candidates: np.ndarray) -> np.ndarray:
    """Candidate with the highest finite objective value (the first one if none is finite)."""
    scores = np.array([float(objective(x)) for x in candidates])
    scores[~np.isfinite(scores)] = -np.inf
    return candidates[int(np.argmax(scores))]


def maximize_cglmp(
    state: DensityMatrix,
    n: int,
    restarts: int,
    seed: int,
    config: Optional[NelderMeadConfig] = None,
    candidates: int = START_CANDIDATES,
) -> OptimizationReport:
    """
    Multistart maximization of I_N over (alpha1, alpha2, beta1, beta2).

    Each restart draws `candidates` points uniformly from [0, n)^4 with a
    generator seeded by `seed` and starts the simplex search from the best of
    them; the best restart wins, ties going to the lowest index.

    Args:
        state: State of dimension n^2
        n: Local dimension
        restarts: Number of Nelder-Mead searches (>= 1)
        seed: Seed of the starting-point stream
        config: Simplex configuration (defaults to NelderMeadConfig())
        candidates: Uniform draws screened per restart (>= 1)

    Returns:
        OptimizationReport with the best value and phases reduced mod n

    Raises:
        RejectedInputError: If restarts or candidates < 1, the state dimension is wrong,
            or every restart failed
    """
    if restarts < 1:
        raise RejectedInputError(f"restarts must be >= 1, got {restarts}")
    if candidates < 1:
        raise RejectedInputError(f"candidates must be >= 1, got {candidates}")
    if state.dim != n * n:
        raise RejectedInputError(f"state dimension {state.dim} does not match {n} x {n}")
    config = config or NelderMeadConfig()
    rho = state.matrix
    draws = derive_rng(seed).uniform(0.0, n, size=(restarts, candidates, 4))

    def objective(point: np.ndarray) -> float:
        return cglmp.cglmp_from_array(rho, point, n)

    best: Optional[NelderMeadResult] = None
    restart_values = []
    evaluations = 0
    converged_restarts = 0
    failed_restarts = 0
    for index, group in enumerate(draws):
        evaluations += candidates
        try:
            result = nelder_mead_maximize(objective, screened_start(objective, group), config)
        except NonFiniteObjectiveError as e:
            logger.warning("Restart %d aborted: %s", index, e)
            failed_restarts += 1
            restart_values.append(None)
            continue
        evaluations += result.evaluations
        converged_restarts += int(result.converged)
        restart_values.append(result.value)
        if best is None or result.value > best.value:
            best = result

    if best is None:
        raise RejectedInputError("every restart failed with a non-finite objective")

    phases = PhaseConfiguration.from_array(best.point, n)
    return OptimizationReport(
        best_value=best.value,
        best_phases=phases,
        restarts=restarts,
        evaluations=evaluations,
        converged_restarts=converged_restarts,
        best_converged=best.converged,
        failed_restarts=failed_restarts,
        seed=seed,
        restart_values=restart_values,
    )
