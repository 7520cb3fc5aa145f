"""
SIC Equalizer Rates - rate sweep service
Main FastAPI application entry point
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

import uvicorn
from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException
from loguru import logger
from pydantic import BaseModel

# Load environment variables
load_dotenv()

from src.runner.config import ExperimentConfig, RunnerSettings, configure_logging
from src.runner.pipeline import SweepRunner

settings = RunnerSettings.from_env()
configure_logging(settings.log_level)

# FastAPI app initialization
app = FastAPI(
    title="SIC Equalizer Rates",
    description="Achievable-rate sweeps for SIC receivers with FBA, Gibbs and RNN equalizers",
    version="1.0.0"
)

# Global instances
sweep_runner = SweepRunner(settings)


class SweepResponse(BaseModel):
    """Sweep job response model"""
    job_id: str
    status: str
    message: str
    rows: List[Dict[str, Any]]
    output_path: Optional[str] = None
    created_at: datetime


@app.get("/")
async def root():
    """Root endpoint with API information"""
    return {
        "name": "SIC Equalizer Rates",
        "version": "1.0.0",
        "status": "running",
        "timestamp": datetime.utcnow().isoformat(),
        "endpoints": {
            "health": "/health",
            "default_config": "/config/default",
            "sweep": "/sweep",
            "jobs": "/jobs",
            "stats": "/stats"
        }
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "timestamp": datetime.utcnow().isoformat(),
        "components": {
            "sweep_runner": "active"
        }
    }


@app.get("/config/default")
async def get_default_config():
    """Default experiment configuration"""
    return ExperimentConfig().model_dump()


@app.post("/sweep", response_model=SweepResponse)
async def run_sweep_job(config: ExperimentConfig):
    """Run a rate sweep and return its rows"""
    result = await sweep_runner.run_async(config, label=f"{config.modulation.M}-{config.modulation.family} {config.equalizer}")
    if result["status"] == "failed":
        status = 400 if result.get("client_error") else 500
        raise HTTPException(status_code=status, detail=result["message"])
    return SweepResponse(
        job_id=result["job_id"],
        status=result["status"],
        message=result["message"],
        rows=result["rows"],
        output_path=result["output_path"],
        created_at=sweep_runner.jobs[result["job_id"]].created_at,
    )


@app.get("/jobs")
async def list_jobs(limit: int = 10):
    """List recent sweep jobs"""
    return {"jobs": sweep_runner.list_jobs(limit)}


@app.get("/jobs/{job_id}")
async def get_job(job_id: str):
    """Status of one sweep job"""
    status = sweep_runner.get_job_status(job_id)
    if status is None:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")
    return status


@app.get("/stats")
async def get_stats():
    """Sweep statistics"""
    try:
        return sweep_runner.get_statistics()
    except Exception as e:
        logger.error(f"Failed to get statistics: {e}")
        raise HTTPException(status_code=500, detail=f"Failed to get statistics: {str(e)}")


if __name__ == "__main__":
    logger.info("Starting SIC equalizer rate service...")
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        reload=False,
        log_level=settings.log_level.lower()
    )
