"""
Pydantic models for states, observables, measurement settings, optimizer
configuration, experiment records and API request/response schemas.
"""
import math
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

import config

HERMITIAN_ATOL = 1e-12
NORM_ATOL = 1e-10
PSD_ATOL = 1e-10
PROBABILITY_ATOL = 1e-12
PHASE_FIELDS = ("alpha1", "alpha2", "beta1", "beta2")


def frozen_array(value: Any, dtype=np.complex128) -> np.ndarray:
    """Copy value into a read-only numpy array."""
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _square(arr: np.ndarray, what: str) -> np.ndarray:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{what} must be a non-empty square matrix, got shape {arr.shape}")
    return arr


def _hermitian(arr: np.ndarray, what: str) -> np.ndarray:
    deviation = float(np.max(np.abs(arr - arr.conj().T)))
    if deviation > HERMITIAN_ATOL:
        raise ValueError(f"{what} is not Hermitian (max deviation {deviation:.3g})")
    return arr


class ArrayModel(BaseModel):
    """Base for immutable models carrying numpy arrays."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ---------------------------------------------------------------------------
# qmath
# ---------------------------------------------------------------------------

class StateVector(ArrayModel):
    """Normalized pure state of dimension `dim`."""
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def parse_amplitudes(cls, v):
        arr = frozen_array(v)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"amplitudes must be a non-empty vector, got shape {arr.shape}")
        norm = float(np.vdot(arr, arr).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized: sum |a|^2 = {norm:.12g}")
        return arr

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def projector(self) -> np.ndarray:
        """Rank-1 projector |psi><psi|."""
        return np.outer(self.amplitudes, self.amplitudes.conj())


class DensityMatrix(ArrayModel):
    """Hermitian, unit-trace, positive semidefinite operator."""
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def parse_matrix(cls, v):
        arr = _hermitian(_square(frozen_array(v), "density matrix"), "density matrix")
        trace = float(np.trace(arr).real)
        if abs(trace - 1.0) > NORM_ATOL:
            raise ValueError(f"density matrix trace is {trace:.12g}, expected 1")
        min_eigenvalue = float(np.linalg.eigvalsh(arr)[0])
        if min_eigenvalue < -PSD_ATOL:
            raise ValueError(f"density matrix has negative eigenvalue {min_eigenvalue:.3g}")
        return arr

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return cls(matrix=state.projector())


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

class Observable(ArrayModel):
    """Hermitian observable whose expectation is bounded by 1 in magnitude."""
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def parse_matrix(cls, v):
        arr = _hermitian(_square(frozen_array(v), "observable"), "observable")
        spectral_norm = float(np.linalg.norm(arr, 2))
        if spectral_norm > 1.0 + NORM_ATOL:
            raise ValueError(f"observable spectral norm {spectral_norm:.12g} exceeds 1")
        return arr

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


class ChshScenario(ArrayModel):
    """The observable quadruple (A1, A2, B1, B2) entering the Bell operator."""
    a1: Observable
    a2: Observable
    b1: Observable
    b2: Observable

    @model_validator(mode="after")
    def check_dimensions(self):
        dims = {self.a1.dim, self.a2.dim, self.b1.dim, self.b2.dim}
        if len(dims) != 1:
            raise ValueError(f"all observables must share one dimension, got {sorted(dims)}")
        return self

    @property
    def dim(self) -> int:
        return self.a1.dim


class BellSector(ArrayModel):
    """A +-2*sqrt(2) eigensector of the Bell operator with an explicit basis."""
    sign: Literal[1, -1]
    basis: List[StateVector]
    projector: np.ndarray

    @field_validator("projector", mode="before")
    @classmethod
    def parse_projector(cls, v):
        arr = _square(frozen_array(v), "projector")
        if np.max(np.abs(arr @ arr - arr)) > NORM_ATOL:
            raise ValueError("projector is not idempotent")
        return arr


class CliffordReport(BaseModel):
    """Expectations entering the maximal-violation (Clifford) conditions."""
    a1_squared: float
    a2_squared: float
    b1_squared: float
    b2_squared: float
    anticommutator_a: float
    anticommutator_b: float
    maximal: bool


# ---------------------------------------------------------------------------
# cglmp
# ---------------------------------------------------------------------------

class PhaseConfiguration(BaseModel):
    """Measurement phases (alpha1, alpha2, beta1, beta2), stored reduced mod n."""
    model_config = ConfigDict(frozen=True)

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    n: int = Field(4, ge=2, description="Local dimension; phases are periodic with period n")

    @model_validator(mode="before")
    @classmethod
    def reduce_mod_n(cls, data):
        if not isinstance(data, dict):
            return data
        try:
            n = int(data.get("n", 4))
        except (TypeError, ValueError):
            return data
        if n < 2:
            return data
        reduced = dict(data)
        for key in PHASE_FIELDS:
            if key not in reduced:
                continue
            value = float(reduced[key])
            if not math.isfinite(value):
                raise ValueError(f"{key} must be finite, got {value}")
            value = value % n
            # -1e-17 % n rounds up to n
            reduced[key] = 0.0 if value >= n else value
        return reduced

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2, self.beta1, self.beta2], dtype=float)

    @classmethod
    def from_array(cls, point, n: int) -> "PhaseConfiguration":
        values = [float(x) for x in point]
        if len(values) != 4:
            raise ValueError(f"expected 4 phases, got {len(values)}")
        return cls(n=n, **dict(zip(PHASE_FIELDS, values)))


class MeasurementSetting(BaseModel):
    """One local measurement: party, setting index and its phase."""
    model_config = ConfigDict(frozen=True)

    party: Literal["A", "B"]
    setting_index: Literal[1, 2]
    phase: float
    dim: int = Field(..., ge=2)

    @field_validator("phase")
    @classmethod
    def finite_phase(cls, v):
        if not math.isfinite(v):
            raise ValueError(f"phase must be finite, got {v}")
        return v


class JointDistribution(ArrayModel):
    """P[K][L] = P(A_a = K, B_b = L)."""
    dim: int = Field(..., ge=2)
    probabilities: np.ndarray

    @field_validator("probabilities", mode="before")
    @classmethod
    def parse_probabilities(cls, v):
        arr = frozen_array(v, dtype=np.float64)
        if arr.size and float(arr.min()) < -PROBABILITY_ATOL:
            raise ValueError(f"negative probability {float(arr.min()):.3g}")
        total = float(arr.sum())
        if abs(total - 1.0) > NORM_ATOL:
            raise ValueError(f"probabilities sum to {total:.12g}, expected 1")
        return arr

    @model_validator(mode="after")
    def check_shape(self):
        if self.probabilities.shape != (self.dim, self.dim):
            raise ValueError(f"probabilities must have shape ({self.dim}, {self.dim})")
        return self


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

class PureBellParams(BaseModel):
    """Hyperspherical coordinates of a pure state in the +2*sqrt(2) sector."""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "theta1": 0.7853981633974483,
                "theta2": 1.5707963267948966,
                "theta3": 1.5707963267948966,
                "gamma1": 0.0,
                "gamma2": 0.0,
                "gamma3": 0.0
            }
        },
    )

    theta1: float = Field(..., ge=0.0, le=math.pi / 2)
    theta2: float = Field(0.0, ge=0.0, le=math.pi / 2)
    theta3: float = Field(0.0, ge=0.0, le=math.pi / 2)
    gamma1: float = Field(0.0, ge=0.0, lt=2 * math.pi)
    gamma2: float = Field(0.0, ge=0.0, lt=2 * math.pi)
    gamma3: float = Field(0.0, ge=0.0, lt=2 * math.pi)

    def coefficients(self) -> np.ndarray:
        """Expansion coefficients c_1..c_4 over the eta basis."""
        s1, s2, s3 = math.sin(self.theta1), math.sin(self.theta2), math.sin(self.theta3)
        return np.array([
            math.cos(self.theta1),
            np.exp(1j * self.gamma1) * s1 * math.cos(self.theta2),
            np.exp(1j * self.gamma2) * s1 * s2 * math.cos(self.theta3),
            np.exp(1j * self.gamma3) * s1 * s2 * s3,
        ], dtype=np.complex128)


class MixedBellParams(BaseModel):
    """Mixture weights over the eta basis."""
    model_config = ConfigDict(frozen=True)

    p1: float = Field(..., ge=0.0)
    p2: float = Field(..., ge=0.0)
    p3: float = Field(..., ge=0.0)
    p4: float = Field(..., ge=0.0)

    @model_validator(mode="after")
    def check_normalized(self):
        total = self.p1 + self.p2 + self.p3 + self.p4
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total:.15g}, expected 1")
        return self

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.p4], dtype=float)


class NoisyStateParams(BaseModel):
    """Visibility of the maximally entangled state mixed with white noise."""
    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=0.0, le=1.0)
    n: int = Field(4, ge=2)


class EntanglementReport(BaseModel):
    """Reduced-spectrum entanglement parameter of a pure Bell state."""
    P: float = Field(..., ge=-1.0, le=1.0)
    measure: float
    reduced_eigenvalues: List[float]

    @model_validator(mode="after")
    def check_spectrum(self):
        expected = sorted([(1 + self.P) / 4] * 2 + [(1 - self.P) / 4] * 2, reverse=True)
        observed = sorted(self.reduced_eigenvalues, reverse=True)
        if len(observed) != 4 or max(abs(a - b) for a, b in zip(expected, observed)) > 1e-8:
            raise ValueError(f"reduced spectrum {observed} does not match (1 +- P)/4 with P={self.P}")
        return self


# ---------------------------------------------------------------------------
# optim
# ---------------------------------------------------------------------------

class NelderMeadConfig(BaseModel):
    """Simplex coefficients and the standard-error stopping rule."""
    model_config = ConfigDict(frozen=True)

    reflection: float = Field(1.0, gt=0.0)
    expansion: float = Field(2.0, gt=0.0)
    contraction: float = Field(0.5, gt=0.0, lt=1.0)
    shrink: float = Field(0.5, gt=0.0, lt=1.0)
    error_tolerance: float = Field(config.DEFAULT_TOLERANCE, gt=0.0)
    max_iterations: int = Field(5000, ge=1)
    initial_simplex_scale: float = Field(0.5, gt=0.0)
    reinitializations: int = Field(3, ge=0, description="Simplex rebuilds around the best vertex after convergence")

    @model_validator(mode="after")
    def check_expansion(self):
        if self.expansion <= self.reflection:
            raise ValueError("expansion coefficient must exceed the reflection coefficient")
        return self


class NelderMeadResult(BaseModel):
    """Outcome of a single simplex search."""
    value: float
    point: List[float]
    converged: bool
    evaluations: int
    iterations: int


class OptimizationReport(BaseModel):
    """Best I_N over a multistart search."""
    best_value: float
    best_phases: PhaseConfiguration
    restarts: int
    evaluations: int
    converged_restarts: int
    best_converged: bool = False
    failed_restarts: int = 0
    seed: int
    restart_values: List[Optional[float]] = []


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

class Histogram(BaseModel):
    """Fixed-width histogram with bins aligned to multiples of bin_width."""
    bin_width: float = Field(..., gt=0.0)
    edges: List[float]
    centers: List[float]
    counts: List[int]

    @property
    def total(self) -> int:
        return sum(self.counts)


class PowerLawFit(BaseModel):
    """count ~ amplitude * center ** (-exponent), fitted in log-log space."""
    exponent: float
    amplitude: float
    bins_used: int
    residual: float
    center_min: float
    center_max: float


class StateRecord(BaseModel):
    """One sampled state with its optimized I_4."""
    index: int = Field(..., ge=0)
    params: Union[PureBellParams, MixedBellParams, NoisyStateParams]
    i4: float
    chsh: float
    entanglement_measure: Optional[float] = None
    phases_at_max: PhaseConfiguration
    converged: bool


class NoiseRow(BaseModel):
    """I_4 and CHSH value of the noisy maximally entangled state at visibility p."""
    p: float
    i4: float
    chsh: float


class ExperimentConfig(BaseModel):
    """Configuration shared by every experiment; unused fields are ignored."""
    experiment: Literal["pure", "mixed", "entanglement", "noise", "single"]
    samples: Optional[int] = Field(None, ge=1)
    seed: int = config.DEFAULT_SEED
    restarts: int = Field(config.DEFAULT_RESTARTS, ge=1)
    tolerance: float = Field(config.DEFAULT_TOLERANCE, gt=0.0)
    bin_width: Optional[float] = Field(None, gt=0.0)
    output_path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: int = Field(config.DEFAULT_WORKERS, ge=1)

    # noise sweep
    p_min: float = Field(0.0, ge=0.0, le=1.0)
    p_max: float = Field(1.0, ge=0.0, le=1.0)
    steps: int = Field(101, ge=2)

    # single-state mode
    theta1: Optional[float] = None
    theta2: Optional[float] = None
    theta3: Optional[float] = None
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    gamma3: Optional[float] = None
    p1: Optional[float] = None
    p2: Optional[float] = None
    p3: Optional[float] = None
    p4: Optional[float] = None
    noise_p: Optional[float] = Field(None, ge=0.0, le=1.0)
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    optimize: bool = False

    @model_validator(mode="before")
    @classmethod
    def fill_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        mixed = data.get("experiment") == "mixed"
        if data.get("samples") is None:
            data["samples"] = config.MIXED_SAMPLES if mixed else config.PURE_SAMPLES
        if data.get("bin_width") is None:
            data["bin_width"] = config.MIXED_BIN_WIDTH if mixed else config.PURE_BIN_WIDTH
        return data

    @model_validator(mode="after")
    def check_modes(self):
        if self.experiment == "noise" and not self.p_min < self.p_max:
            raise ValueError(f"p_min ({self.p_min}) must be below p_max ({self.p_max})")
        if self.experiment == "single":
            kinds = [self.has_pure_params(), self.has_mixed_params(), self.noise_p is not None]
            if sum(kinds) > 1:
                raise ValueError("single mode takes theta/gamma, p1..p4 or noise_p, not a combination")
        return self

    def has_pure_params(self) -> bool:
        return any(getattr(self, k) is not None for k in
                   ("theta1", "theta2", "theta3", "gamma1", "gamma2", "gamma3"))

    def has_mixed_params(self) -> bool:
        return any(getattr(self, k) is not None for k in ("p1", "p2", "p3", "p4"))

    def explicit_phases(self) -> Optional[List[float]]:
        values = [getattr(self, k) for k in PHASE_FIELDS]
        if all(v is None for v in values):
            return None
        return values


class ExperimentSummary(BaseModel):
    """Aggregate statistics written alongside experiment records."""
    samples: int
    min_i4: Optional[float] = None
    max_i4: Optional[float] = None
    max_abs_i4: Optional[float] = None
    violation_fraction: Optional[float] = None
    above_tsirelson_fraction: Optional[float] = None
    converged_fraction: Optional[float] = None
    fit_exponent: Optional[float] = None
    fit: Optional[PowerLawFit] = None
    pearson_r: Optional[float] = None
    below_reference_ceiling: Optional[bool] = None
    i4_threshold: Optional[float] = None
    chsh_threshold: Optional[float] = None
    window: Optional[List[float]] = None


class ExperimentResult(BaseModel):
    """Everything an experiment run produces."""
    config: ExperimentConfig
    records: List[StateRecord] = []
    noise_rows: List[NoiseRow] = []
    histogram: Optional[Histogram] = None
    fit: Optional[PowerLawFit] = None
    summary: ExperimentSummary


class ExperimentEnvelope(BaseModel):
    """JSON export: configuration, seed, library version, summary and records."""
    config: Dict[str, Any]
    seed: int
    version: str
    summary: ExperimentSummary
    records: List[Union[StateRecord, NoiseRow]]


# ---------------------------------------------------------------------------
# API
# ---------------------------------------------------------------------------

class StateInput(BaseModel):
    """Selects exactly one state: a pure Bell state, a mixed Bell state or a noisy state."""
    model_config = ConfigDict(json_schema_extra={
        "example": {
            "noise_p": 0.7,
            "n": 4
        }
    })

    pure: Optional[PureBellParams] = None
    mixed: Optional[MixedBellParams] = None
    noise_p: Optional[float] = Field(None, ge=0.0, le=1.0, description="Visibility of the noisy state")
    n: int = Field(4, ge=2, le=8, description="Local dimension (pure and mixed Bell states require 4)")

    @model_validator(mode="after")
    def check_one_kind(self):
        kinds = [self.pure is not None, self.mixed is not None, self.noise_p is not None]
        if sum(kinds) != 1:
            raise ValueError("exactly one of pure, mixed or noise_p must be given")
        if (self.pure is not None or self.mixed is not None) and self.n != 4:
            raise ValueError("pure and mixed Bell states are defined for n = 4 only")
        return self


class ChshRequest(BaseModel):
    """Request model for the CHSH expectation."""
    state: StateInput


class ChshResponse(BaseModel):
    """CHSH expectation with the Clifford-condition report."""
    chsh: float
    sector: Optional[int] = None
    clifford: CliffordReport


class CglmpValueRequest(BaseModel):
    """Request model for I_N at explicit phases."""
    model_config = ConfigDict(json_schema_extra={
        "example": {
            "state": {"noise_p": 1.0, "n": 4},
            "phases": [0.0, 0.5, 0.25, -0.25]
        }
    })

    state: StateInput
    phases: Optional[List[float]] = Field(
        None, min_length=4, max_length=4,
        description="(alpha1, alpha2, beta1, beta2); defaults to (0, 1/2, 1/4, -1/4)"
    )


class CglmpValueResponse(BaseModel):
    """I_N value at the requested phases."""
    value: float
    n: int
    phases: PhaseConfiguration
    violates_classical_bound: bool


class OptimizeRequest(BaseModel):
    """Request model for multistart maximization of I_N."""
    state: StateInput
    restarts: int = Field(config.DEFAULT_RESTARTS, ge=1, le=100)
    seed: int = config.DEFAULT_SEED
    tolerance: float = Field(config.DEFAULT_TOLERANCE, gt=0.0)


class SpectrumResponse(BaseModel):
    """Bell operator spectrum and sector verification."""
    eigenvalues: List[float]
    spectral_norm: float
    sector_plus_verified: bool
    sector_minus_verified: bool


class NoiseSweepRequest(BaseModel):
    """Request model for the visibility sweep."""
    p_min: float = Field(0.0, ge=0.0, le=1.0)
    p_max: float = Field(1.0, ge=0.0, le=1.0)
    steps: int = Field(101, ge=2, le=10001)


class ExperimentRunRequest(BaseModel):
    """Request model for a small ensemble run over HTTP."""
    model_config = ConfigDict(json_schema_extra={
        "example": {
            "experiment": "pure",
            "samples": 10,
            "seed": 7,
            "restarts": 5
        }
    })

    experiment: Literal["pure", "mixed", "entanglement"]
    samples: int = Field(10, ge=1)
    seed: int = config.DEFAULT_SEED
    restarts: int = Field(5, ge=1, le=50)
    tolerance: float = Field(config.DEFAULT_TOLERANCE, gt=0.0)
