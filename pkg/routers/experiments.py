"""
Experiment endpoints: noise sweep and small ensembles, returned as JSON envelopes.
"""
from fastapi import APIRouter, HTTPException

import config
from models import ExperimentConfig, ExperimentEnvelope, ExperimentRunRequest, NoiseSweepRequest
from services import experiments
from services.results import envelope

router = APIRouter(prefix="/api/experiments", tags=["experiments"])


@router.post("/noise-sweep", response_model=ExperimentEnvelope)
def noise_sweep(request: NoiseSweepRequest):
    """
    I_4 and CHSH value of p |Psi_E><Psi_E| + (1 - p) I/16 over a grid of p.

    Example curl request:
    ```bash
    curl -X POST "http://localhost:8000/api/experiments/noise-sweep" \\
      -H "Content-Type: application/json" \\
      -d '{"p_min": 0.6, "p_max": 0.8, "steps": 201}'
    ```
    """
    try:
        cfg = ExperimentConfig(experiment="noise", p_min=request.p_min, p_max=request.p_max, steps=request.steps)
        result = experiments.run_noise_sweep(request.p_min, request.p_max, request.steps, cfg)
        return envelope(result)
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error running noise sweep: {str(e)}")


@router.post("/run", response_model=ExperimentEnvelope)
def run(request: ExperimentRunRequest):
    """
    Run a pure, mixed or entanglement ensemble in-process.

    Ensembles are capped at NONLOCALITY_API_MAX_SAMPLES states; larger runs
    belong on the command line.

    Example curl request:
    ```bash
    curl -X POST "http://localhost:8000/api/experiments/run" \\
      -H "Content-Type: application/json" \\
      -d '{"experiment": "pure", "samples": 10, "seed": 7, "restarts": 5}'
    ```
    """
    try:
        if request.samples > config.API_MAX_SAMPLES:
            raise HTTPException(
                status_code=400,
                detail=f"At most {config.API_MAX_SAMPLES} samples per request, got {request.samples}",
            )
        cfg = ExperimentConfig(
            experiment=request.experiment,
            samples=request.samples,
            seed=request.seed,
            restarts=request.restarts,
            tolerance=request.tolerance,
        )
        return envelope(experiments.run_experiment(cfg))
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error running experiment: {str(e)}")
