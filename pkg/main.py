"""
Quantum dot ground-state optimizer - FastAPI application
"""

import logging
from contextlib import asynccontextmanager

import uvicorn
from dotenv import load_dotenv
from fastapi import FastAPI

from app.api.routes import router as api_router
from app.core.config import get_settings
from app.core.logging_config import configure_logging

# Load environment variables
load_dotenv()

settings = get_settings()
configure_logging(settings)
logger = logging.getLogger(__name__)

VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan management"""
    logger.info(f"Starting quantum dot optimizer API (gamma={settings.gamma} eV*nm^2)")
    yield
    logger.info("Shutting down quantum dot optimizer API...")


app = FastAPI(
    title="Quantum Dot Optimizer API",
    description="Ground-state energy minimization over rearrangement classes of quantum dot potentials",
    version=VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)

app.include_router(api_router, prefix="/api/v1", tags=["api"])


@app.get("/health", tags=["health"])
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "version": VERSION}


@app.get("/", tags=["root"])
async def read_root():
    """Root endpoint with API information"""
    return {
        "message": "Quantum Dot Optimizer API",
        "version": VERSION,
        "docs": "/docs",
        "health": "/health",
    }


if __name__ == "__main__":
    uvicorn.run("main:app", host=settings.host, port=settings.port, log_level="info")
