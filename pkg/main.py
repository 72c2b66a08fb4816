"""
FastAPI application exposing the PPT witness lab workflows.
"""
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ValidationError
from typing import List, Optional
import logging
import sys
from pathlib import Path

# Add app directory to path
sys.path.insert(0, str(Path(__file__).parent))

from app.core.config import ensure_directories, get_settings
from app.core.errors import InvalidArgumentError, NumericalError
from app.core.lab_orchestrator import (
    NOISELESS,
    TABLE_B_VALUES,
    LabOrchestrator,
    PrepareReport,
    RunConfig,
    TomoReport,
)
from app.services.circuits import NoiseSpec
from app.services.entanglement import PptReport
from app.services.export import ResultRow

# Get settings
settings = get_settings()

logging.basicConfig(level=getattr(logging, settings.log_level.upper(), logging.INFO))
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="PPT Witness Lab API",
    description="Simulation and detection of qubit-ququart PPT entangled states",
    version="1.0.0"
)

# Initialize orchestrator
orchestrator = LabOrchestrator(settings)


# Request models
class TableRequest(BaseModel):
    b_values: List[float] = list(TABLE_B_VALUES)
    shots: Optional[int] = None
    noise: Optional[NoiseSpec] = None
    seed: int = settings.seed
    repetitions: int = settings.monte_carlo_repetitions


class ScanRequest(BaseModel):
    b_min: float = 0.0
    b_max: float = 1.0
    steps: int = 101


class TomoRequest(BaseModel):
    b: float
    shots: Optional[int] = None
    seed: Optional[int] = None


class PrepareRequest(BaseModel):
    b: float
    noise: Optional[NoiseSpec] = None


class PptRequest(BaseModel):
    b: float
    cut: str = "2|4"


def _guarded(func, *args, **kwargs):
    """Run a workflow and translate lab errors into HTTP errors."""
    try:
        return func(*args, **kwargs)
    except (InvalidArgumentError, ValidationError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    except NumericalError as e:
        logger.error(f"Numerical failure: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/")
async def root():
    """Root endpoint."""
    return {
        "message": "PPT Witness Lab API",
        "version": "1.0.0",
        "status": "online"
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "monte_carlo_repetitions": settings.monte_carlo_repetitions,
    }


@app.post("/api/table", response_model=List[ResultRow])
def table(request: TableRequest):
    def build_and_run():
        config = RunConfig(
            b_values=request.b_values,
            shots=request.shots,
            noise=request.noise or NOISELESS,
            seed=request.seed,
            repetitions=request.repetitions,
            verdict_k=settings.verdict_sigma_k,
        )
        return orchestrator.cmd_table(config)
    return _guarded(build_and_run)


@app.post("/api/scan", response_model=List[ResultRow])
def scan(request: ScanRequest):
    return _guarded(orchestrator.cmd_scan, request.b_min, request.b_max, request.steps)


@app.post("/api/tomo", response_model=TomoReport)
def tomo(request: TomoRequest):
    return _guarded(orchestrator.cmd_tomo, request.b, request.shots, request.seed)


@app.post("/api/prepare", response_model=PrepareReport)
def prepare(request: PrepareRequest):
    return _guarded(orchestrator.cmd_prepare, request.b, request.noise)


@app.post("/api/ppt", response_model=List[PptReport])
def ppt(request: PptRequest):
    return _guarded(orchestrator.cmd_ppt, request.b, request.cut)


if __name__ == "__main__":
    import uvicorn
    ensure_directories()
    print(f"🚀 Starting PPT Witness Lab API on {settings.host}:{settings.port}")
    uvicorn.run(app, host=settings.host, port=settings.port)
