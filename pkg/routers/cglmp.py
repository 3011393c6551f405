"""
CGLMP endpoints: I_N at given phases and its multistart maximization.
"""
from fastapi import APIRouter, HTTPException

import config
from models import (
    CglmpValueRequest,
    CglmpValueResponse,
    NelderMeadConfig,
    OptimizationReport,
    OptimizeRequest,
    PhaseConfiguration,
)
from services import cglmp, optim, states

router = APIRouter(prefix="/api/cglmp", tags=["cglmp"])


@router.post("/value", response_model=CglmpValueResponse)
async def compute_value(request: CglmpValueRequest):
    """
    Evaluate I_N for a state at explicit phases.

    Phases default to (0, 1/2, 1/4, -1/4), the optimum for the maximally
    entangled state.

    Example curl request:
    ```bash
    curl -X POST "http://localhost:8000/api/cglmp/value" \\
      -H "Content-Type: application/json" \\
      -d '{"state": {"noise_p": 1.0, "n": 4}, "phases": [0.0, 0.5, 0.25, -0.25]}'
    ```
    """
    try:
        n = request.state.n
        rho = states.state_from_input(request.state)
        if request.phases is None:
            phases = cglmp.optimal_phases(n)
        else:
            phases = PhaseConfiguration.from_array(request.phases, n)
        value = cglmp.cglmp_value(rho, phases, n)
        return CglmpValueResponse(
            value=value,
            n=n,
            phases=phases,
            violates_classical_bound=value > config.CLASSICAL_BOUND,
        )
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error evaluating I_N: {str(e)}")


@router.post("/optimize", response_model=OptimizationReport)
def optimize(request: OptimizeRequest):
    """
    Maximize I_N over the four phases with seeded Nelder-Mead restarts.

    Example curl request:
    ```bash
    curl -X POST "http://localhost:8000/api/cglmp/optimize" \\
      -H "Content-Type: application/json" \\
      -d '{"state": {"noise_p": 1.0, "n": 3}, "restarts": 5, "seed": 1}'
    ```
    """
    try:
        rho = states.state_from_input(request.state)
        return optim.maximize_cglmp(
            rho,
            request.state.n,
            request.restarts,
            request.seed,
            NelderMeadConfig(error_tolerance=request.tolerance),
        )
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error optimizing I_N: {str(e)}")
