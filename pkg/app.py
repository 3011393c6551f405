"""
Main FastAPI application.
"""
import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

import config
from routers.cglmp import router as cglmp_router
from routers.experiments import router as experiments_router
from routers.operators import router as operators_router

logging.basicConfig(level=config.LOG_LEVEL.upper(), format="[%(name)s:%(funcName)s:%(lineno)s] %(levelname)s: %(message)s")

app = FastAPI(
    title="Nonlocality API",
    description="CHSH and CGLMP non-locality measures for bipartite qudit states",
    version=config.VERSION
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(operators_router)
app.include_router(cglmp_router)
app.include_router(experiments_router)


@app.get("/")
async def root():
    """Root endpoint."""
    return {
        "message": "Welcome to the Nonlocality API",
        "version": config.VERSION,
        "endpoints": {
            "bell_spectrum": "GET /api/operators/spectrum",
            "chsh_expectation": "POST /api/operators/chsh",
            "cglmp_value": "POST /api/cglmp/value",
            "cglmp_optimize": "POST /api/cglmp/optimize",
            "noise_sweep": "POST /api/experiments/noise-sweep",
            "run_experiment": "POST /api/experiments/run"
        }
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy"}
