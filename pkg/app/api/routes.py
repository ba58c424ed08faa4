"""
API Routes for the ground-state solver
"""

import logging
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, status
from pydantic import BaseModel

from app.core.config import Settings, get_settings
from app.core.exceptions import ArgumentError, ConfigError, SolverError
from app.models.schemas import (
    AdmissibilitySummary,
    GroundStateSummary,
    OptimizationSummary,
    ProblemConfig,
)
from app.services.admissibility import assess, confinement_mask
from app.services.nlep import solve_nonlinear
from app.services.optimize import minimize_ground_state
from app.services.problem import Problem, build_problem

logger = logging.getLogger(__name__)

# Create router
router = APIRouter()


class SolveResponse(BaseModel):
    ground_state: GroundStateSummary
    u: List[float]
    admissibility: Optional[AdmissibilitySummary] = None


class CheckResponse(BaseModel):
    admissibility: AdmissibilitySummary
    ok: bool
    psi: List[float]
    confined_measure: Optional[float] = None


class OptimizeResponse(BaseModel):
    report: OptimizationSummary
    p_final: List[float]
    q_final: List[float]
    u_final: List[float]


def _build(config: ProblemConfig, settings: Settings) -> Problem:
    try:
        return build_problem(config, settings)
    except (ConfigError, ArgumentError) as e:
        logger.error(f"Invalid problem config: {e}")
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))


def _solver_failure(e: SolverError) -> HTTPException:
    logger.error(f"Solver failed: {e} (last residual {e.last_residual})")
    return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=f"solver error: {e}")


@router.post("/solve", response_model=SolveResponse, response_model_by_alias=True)
def solve(config: ProblemConfig, settings: Settings = Depends(get_settings)):
    """Ground state (λ, u) for fixed potentials"""
    problem = _build(config, settings)
    try:
        gs = solve_nonlinear(problem.mesh, problem.p, problem.q, problem.opts)
        admissibility = None
        if problem.q_dist.is_two_level:
            admissibility = assess(
                problem.mesh, problem.p_dist, problem.q_dist, problem.gamma, problem.opts.eig_tol
            ).summary()
    except SolverError as e:
        raise _solver_failure(e)
    return SolveResponse(ground_state=gs.summary(), u=gs.u.tolist(), admissibility=admissibility)


@router.post("/check", response_model=CheckResponse)
def check(config: ProblemConfig, settings: Settings = Depends(get_settings)):
    """Admissibility conditions on p₀ and q₀ with the confined-region measure"""
    problem = _build(config, settings)
    if not problem.q_dist.is_two_level:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail="q: the condition on q0 needs a characteristic (two-level) q0",
        )
    try:
        report = assess(problem.mesh, problem.p_dist, problem.q_dist, problem.gamma, problem.opts.eig_tol)
    except SolverError as e:
        raise _solver_failure(e)

    confined = None
    try:
        gs = solve_nonlinear(problem.mesh, problem.p, problem.q, problem.opts)
        confined = confinement_mask(problem.mesh, problem.p, problem.q, gs).measure
    except SolverError as e:
        logger.warning(f"Skipping confinement measure: {e}")
    return CheckResponse(admissibility=report.summary(), ok=report.ok, psi=report.psi.tolist(), confined_measure=confined)


@router.post("/optimize", response_model=OptimizeResponse, response_model_by_alias=True)
def optimize(config: ProblemConfig, settings: Settings = Depends(get_settings)):
    """Alternating minimization from the configured start placement"""
    problem = _build(config, settings)
    opt_cfg = config.optimize
    if opt_cfg.start == "custom" or opt_cfg.start.startswith("csv:"):
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail="custom starts are only available from the command line",
        )
    try:
        report = minimize_ground_state(
            problem.mesh,
            problem.p_dist,
            problem.q_dist,
            problem.opts,
            max_iters=opt_cfg.max_iters or settings.max_iters,
            tol=opt_cfg.tol or settings.fixed_point_tol,
            start=opt_cfg.start,
            seed=opt_cfg.seed,
        )
    except ArgumentError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except SolverError as e:
        raise _solver_failure(e)
    return OptimizeResponse(
        report=report.summary(),
        p_final=report.p_final.tolist(),
        q_final=report.q_final.tolist(),
        u_final=report.u_final.tolist(),
    )
