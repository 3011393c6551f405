"""
Bell-operator endpoints: spectrum and CHSH expectation.
"""
import logging

import numpy as np
from fastapi import APIRouter, HTTPException

from models import ChshRequest, ChshResponse, SpectrumResponse
from services import qmath, scenario, states

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api/operators", tags=["operators"])


@router.get("/spectrum", response_model=SpectrumResponse)
async def get_spectrum():
    """
    Eigenvalues of the 16 x 16 Bell operator built from the SU(4) observables.

    The spectrum is {+2*sqrt(2) (x4), -2*sqrt(2) (x4), 0 (x8)}; the two sector
    flags report whether the analytic eta and phi bases are eigenvectors.

    Example curl request:
    ```bash
    curl "http://localhost:8000/api/operators/spectrum"
    ```
    """
    try:
        operator = scenario.bell_operator(scenario.su4_observables())
        eigenvalues, _ = qmath.hermitian_eig(operator)
        try:
            plus, minus = scenario.bell_sectors()
            plus_ok, minus_ok = plus.sign == 1, minus.sign == -1
        except AssertionError as e:
            logger.error("Bell sector check failed: %s", e)
            plus_ok = minus_ok = False
        return SpectrumResponse(
            eigenvalues=[float(x) for x in eigenvalues],
            spectral_norm=float(np.max(np.abs(eigenvalues))),
            sector_plus_verified=plus_ok,
            sector_minus_verified=minus_ok,
        )
    except HTTPException:
        raise
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error computing spectrum: {str(e)}")


@router.post("/chsh", response_model=ChshResponse)
async def compute_chsh(request: ChshRequest):
    """
    CHSH expectation Tr(rho B) and the Clifford-condition report of a state.

    Args:
        request: Pure Bell state, mixed Bell state or noisy state

    Returns:
        Expectation value, sector (+1, -1 or null) and Clifford report

    Example curl request:
    ```bash
    curl -X POST "http://localhost:8000/api/operators/chsh" \\
      -H "Content-Type: application/json" \\
      -d '{"state": {"noise_p": 0.7, "n": 4}}'
    ```
    """
    try:
        rho = states.state_from_input(request.state)
        observables = scenario.su4_observables()
        return ChshResponse(
            chsh=scenario.chsh_expectation(rho, observables),
            sector=scenario.sector_of(rho),
            clifford=scenario.check_clifford_conditions(observables, rho),
        )
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error computing CHSH expectation: {str(e)}")
