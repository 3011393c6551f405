"""
Experiment harness: pure and mixed Bell-state ensembles, the entanglement
scatter, the white-noise sweep, single-state spot checks, histogramming and
power-law fitting.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

import config
from errors import RejectedInputError
from models import (
    ExperimentConfig,
    ExperimentResult,
    ExperimentSummary,
    Histogram,
    MixedBellParams,
    NelderMeadConfig,
    NoiseRow,
    NoisyStateParams,
    PhaseConfiguration,
    PowerLawFit,
    PureBellParams,
    StateRecord,
)
from services import cglmp, optim, scenario, states
from services.results import ResultWriter

logger = logging.getLogger(__name__)

DIMENSION = 4

# Sub-stream keys under (seed, state index)
SAMPLER_STREAM = 0
OPTIMIZER_STREAM = 1

MAXIMALLY_ENTANGLED_PARAMS = dict(theta1=math.pi / 4, theta2=math.pi / 2, theta3=math.pi / 2)


def evaluate_params(
    index: int,
    params,
    seed: int,
    restarts: int,
    tolerance: float,
    phases: Optional[PhaseConfiguration] = None,
) -> StateRecord:
    """
    I_4, CHSH value and (for pure states) entanglement measure of one state.

    I_4 is maximized over the phases unless `phases` is given, in which case
    it is evaluated there directly.
    """
    rho = states.state_from_params(params)
    if rho.dim != DIMENSION * DIMENSION:
        raise RejectedInputError(f"experiments run on {DIMENSION} x {DIMENSION} systems, got dimension {rho.dim}")
    if phases is None:
        report = optim.maximize_cglmp(
            rho, DIMENSION, restarts,
            states.derive_seed(seed, index, OPTIMIZER_STREAM),
            NelderMeadConfig(error_tolerance=tolerance),
        )
        i4, best_phases, converged = report.best_value, report.best_phases, report.best_converged
    else:
        i4, best_phases, converged = cglmp.cglmp_value(rho, phases, DIMENSION), phases, True

    measure = None
    if isinstance(params, PureBellParams):
        measure = states.entanglement_parameter(states.pure_bell_state(params)).measure

    return StateRecord(
        index=index,
        params=params,
        i4=i4,
        chsh=scenario.chsh_expectation(rho, scenario.su4_observables()),
        entanglement_measure=measure,
        phases_at_max=best_phases,
        converged=converged,
    )


def _pure_job(args: Tuple[int, int, int, float]) -> StateRecord:
    index, seed, restarts, tolerance = args
    params, _ = states.sample_pure(states.derive_rng(seed, index, SAMPLER_STREAM))
    return evaluate_params(index, params, seed, restarts, tolerance)


def _mixed_job(args: Tuple[int, int, int, float]) -> StateRecord:
    index, seed, restarts, tolerance = args
    params, _ = states.sample_mixed(states.derive_rng(seed, index, SAMPLER_STREAM))
    return evaluate_params(index, params, seed, restarts, tolerance)


def run_ensemble(job: Callable[[Tuple[int, int, int, float]], StateRecord], cfg: ExperimentConfig) -> List[StateRecord]:
    """Run `job` for every state index, in a process pool when cfg.workers > 1."""
    jobs = [(index, cfg.seed, cfg.restarts, cfg.tolerance) for index in range(cfg.samples)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(job, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        records = [job(args) for args in jobs]
    return sorted(records, key=lambda record: record.index)


def build_histogram(values: Sequence[float], bin_width: float) -> Histogram:
    """
    Count values in bins [m*w, (m+1)*w) spanning the data range.

    Raises:
        RejectedInputError: If values is empty or bin_width <= 0
    """
    if bin_width <= 0:
        raise RejectedInputError(f"bin width must be positive, got {bin_width}")
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise RejectedInputError("cannot histogram an empty sample")
    slots = np.floor(data / bin_width).astype(np.int64)
    low, high = int(slots.min()), int(slots.max())
    counts = np.bincount(slots - low, minlength=high - low + 1)
    edges = np.arange(low, high + 1) * bin_width
    return Histogram(
        bin_width=bin_width,
        edges=edges.tolist(),
        centers=(edges + bin_width / 2).tolist(),
        counts=[int(c) for c in counts],
    )


def fit_power_law(centers: Sequence[float], counts: Sequence[float]) -> PowerLawFit:
    """
    Least-squares line through (log center, log count).

    Only bins with count >= 1 and center > 0 take part.

    Returns:
        PowerLawFit with exponent = -slope and the RMS log-space residual

    Raises:
        RejectedInputError: If fewer than 3 bins are usable
    """
    x = np.asarray(centers, dtype=float)
    y = np.asarray(counts, dtype=float)
    usable = (y >= 1) & (x > 0)
    if int(usable.sum()) < 3:
        raise RejectedInputError(f"power-law fit needs at least 3 non-empty bins, got {int(usable.sum())}")
    log_x, log_y = np.log(x[usable]), np.log(y[usable])
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = float(np.sqrt(np.mean((log_y - (slope * log_x + intercept)) ** 2)))
    return PowerLawFit(
        exponent=float(-slope),
        amplitude=float(np.exp(intercept)),
        bins_used=int(usable.sum()),
        residual=residual,
        center_min=float(x[usable].min()),
        center_max=float(x[usable].max()),
    )


def fit_decay_tail(histogram: Histogram) -> Optional[PowerLawFit]:
    """Power law over the modal bin and everything above it, or None if too few bins."""
    peak = int(np.argmax(histogram.counts))
    try:
        return fit_power_law(histogram.centers[peak:], histogram.counts[peak:])
    except RejectedInputError as e:
        logger.warning("Power-law fit skipped: %s", e)
        return None


def _i4_summary(records: List[StateRecord]) -> dict:
    i4 = np.array([record.i4 for record in records])
    return dict(
        samples=len(records),
        min_i4=float(i4.min()),
        max_i4=float(i4.max()),
        max_abs_i4=float(np.abs(i4).max()),
        violation_fraction=float(np.mean(i4 > config.CLASSICAL_BOUND)),
        above_tsirelson_fraction=float(np.mean(i4 > scenario.TSIRELSON)),
        converged_fraction=float(np.mean([record.converged for record in records])),
    )


def _write(result: ExperimentResult) -> ExperimentResult:
    if result.config.output_path:
        ResultWriter(result.config.output_path, result.config.format).write(result)
    return result


def run_pure_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Sample pure Bell states, maximize I_4 for each, histogram and fit the decay.

    Raises:
        ExperimentIOError: If the output file cannot be written
    """
    logger.info("Pure experiment: %d samples, %d restarts, seed %d", cfg.samples, cfg.restarts, cfg.seed)
    records = run_ensemble(_pure_job, cfg)
    histogram = build_histogram([record.i4 for record in records], cfg.bin_width)
    fit = fit_decay_tail(histogram)
    summary = ExperimentSummary(
        **_i4_summary(records),
        fit=fit,
        fit_exponent=fit.exponent if fit else None,
    )
    logger.info(
        "Pure experiment done: %.1f%% above 2, %.1f%% above 2*sqrt(2), fit exponent %s",
        100 * summary.violation_fraction, 100 * summary.above_tsirelson_fraction,
        f"{fit.exponent:.3f}" if fit else "n/a",
    )
    return _write(ExperimentResult(config=cfg, records=records, histogram=histogram, fit=fit, summary=summary))


def run_mixed_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Sample mixed Bell states (diagonal in the eta basis) and maximize I_4 for each.

    The observed maximum |I_4| is compared against the 0.1 reference ceiling
    and reported; it is not enforced.
    """
    logger.info("Mixed experiment: %d samples, %d restarts, seed %d", cfg.samples, cfg.restarts, cfg.seed)
    records = run_ensemble(_mixed_job, cfg)
    histogram = build_histogram([record.i4 for record in records], cfg.bin_width)
    summary = ExperimentSummary(**_i4_summary(records))
    summary.below_reference_ceiling = summary.max_abs_i4 <= config.MIXED_REFERENCE_CEILING
    if not summary.below_reference_ceiling:
        logger.warning(
            "Mixed experiment: max |I_4| = %.4f exceeds the %.2f reference ceiling",
            summary.max_abs_i4, config.MIXED_REFERENCE_CEILING,
        )
    return _write(ExperimentResult(config=cfg, records=records, histogram=histogram, summary=summary))


def run_entanglement_scatter(cfg: ExperimentConfig) -> ExperimentResult:
    """
    (1 - |P|, I_4) for the pure ensemble; the same seed reuses the same states.

    The Pearson correlation is reported in the summary.
    """
    logger.info("Entanglement scatter: %d samples, seed %d", cfg.samples, cfg.seed)
    records = run_ensemble(_pure_job, cfg)
    measures = np.array([record.entanglement_measure for record in records])
    i4 = np.array([record.i4 for record in records])
    pearson = None
    if len(records) >= 2 and measures.std() > 0 and i4.std() > 0:
        pearson = float(np.corrcoef(measures, i4)[0, 1])
    summary = ExperimentSummary(**_i4_summary(records), pearson_r=pearson)
    return _write(ExperimentResult(config=cfg, records=records, summary=summary))


def threshold_crossing(ps: np.ndarray, values: np.ndarray, level: float) -> Optional[float]:
    """First p where `values` reaches `level`, linearly interpolated between grid points."""
    for k in range(len(ps) - 1):
        lo, hi = values[k] - level, values[k + 1] - level
        if lo == 0.0:
            return float(ps[k])
        if lo * hi < 0.0 or hi == 0.0:
            return float(ps[k] + (level - values[k]) * (ps[k + 1] - ps[k]) / (values[k + 1] - values[k]))
    return None


def run_noise_sweep(p_min: float, p_max: float, steps: int, cfg: ExperimentConfig) -> ExperimentResult:
    """
    I_4 at the fixed optimal phases and the CHSH value of the noisy state over a p grid.

    Reports where each quantity crosses 2 and the window in between, where
    the state violates CGLMP while satisfying the Bell inequality.

    Raises:
        RejectedInputError: If the range is not 0 <= p_min < p_max <= 1 or steps < 2
    """
    if not 0.0 <= p_min < p_max <= 1.0:
        raise RejectedInputError(f"need 0 <= p_min < p_max <= 1, got p_min={p_min}, p_max={p_max}")
    if steps < 2:
        raise RejectedInputError(f"steps must be >= 2, got {steps}")
    phases = cglmp.optimal_phases(DIMENSION)
    operators = scenario.su4_observables()
    rows = []
    for p in np.linspace(p_min, p_max, steps):
        rho = states.noisy_state(float(p), DIMENSION)
        rows.append(NoiseRow(
            p=float(p),
            i4=cglmp.cglmp_value(rho, phases, DIMENSION),
            chsh=scenario.chsh_expectation(rho, operators),
        ))
    ps = np.array([row.p for row in rows])
    i4_threshold = threshold_crossing(ps, np.array([row.i4 for row in rows]), config.CLASSICAL_BOUND)
    chsh_threshold = threshold_crossing(ps, np.array([row.chsh for row in rows]), config.CLASSICAL_BOUND)
    window = None
    if i4_threshold is not None and chsh_threshold is not None and i4_threshold < chsh_threshold:
        window = [i4_threshold, chsh_threshold]
    logger.info("Noise sweep: I_4 crosses 2 at p=%s, CHSH at p=%s", i4_threshold, chsh_threshold)
    summary = ExperimentSummary(
        samples=len(rows),
        i4_threshold=i4_threshold,
        chsh_threshold=chsh_threshold,
        window=window,
    )
    return _write(ExperimentResult(config=cfg, noise_rows=rows, summary=summary))


def single_params(cfg: ExperimentConfig):
    """State parameters selected by a single-mode config; defaults to the maximally entangled state."""
    if cfg.has_mixed_params():
        return MixedBellParams(p1=cfg.p1, p2=cfg.p2, p3=cfg.p3, p4=cfg.p4)
    if cfg.noise_p is not None:
        return NoisyStateParams(p=cfg.noise_p, n=DIMENSION)
    if cfg.has_pure_params():
        given = {
            key: getattr(cfg, key)
            for key in ("theta1", "theta2", "theta3", "gamma1", "gamma2", "gamma3")
            if getattr(cfg, key) is not None
        }
        return PureBellParams(**given)
    return PureBellParams(**MAXIMALLY_ENTANGLED_PARAMS)


def single_phases(cfg: ExperimentConfig) -> Optional[PhaseConfiguration]:
    """Phases to evaluate at, or None when single mode should optimize."""
    if cfg.optimize:
        return None
    defaults = cglmp.optimal_phases(DIMENSION)
    explicit = cfg.explicit_phases() or [None] * 4
    values = [
        default if value is None else value
        for value, default in zip(explicit, (defaults.alpha1, defaults.alpha2, defaults.beta1, defaults.beta2))
    ]
    return PhaseConfiguration.from_array(values, DIMENSION)


def run_single(cfg: ExperimentConfig) -> ExperimentResult:
    """Spot evaluation of one explicitly parametrized state."""
    record = evaluate_params(0, single_params(cfg), cfg.seed, cfg.restarts, cfg.tolerance, single_phases(cfg))
    logger.info("Single state: I_4 = %.6f, CHSH = %.6f", record.i4, record.chsh)
    summary = ExperimentSummary(**_i4_summary([record]))
    return _write(ExperimentResult(config=cfg, records=[record], summary=summary))


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Dispatch on cfg.experiment."""
    if cfg.experiment == "pure":
        return run_pure_experiment(cfg)
    if cfg.experiment == "mixed":
        return run_mixed_experiment(cfg)
    if cfg.experiment == "entanglement":
        return run_entanglement_scatter(cfg)
    if cfg.experiment == "noise":
        return run_noise_sweep(cfg.p_min, cfg.p_max, cfg.steps, cfg)
    return run_single(cfg)
