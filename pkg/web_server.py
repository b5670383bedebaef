#!/usr/bin/env python3
"""
FastAPI Web Server for Rootkit
HTTP endpoints over the same solve, sweep, boundary and reproduction
operations as the command line, returning the same JSON records.
"""

import logging
from typing import List, Optional

import uvicorn
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

import analysis
import config
import experiments
import problems
from expr_parser import ExprParseError, expression_problem
from kernels import Method, MultiplierOverflowError
from models import (
    BoundaryRecord,
    BoundaryRequest,
    ProblemRecord,
    ReproduceRecord,
    SolveRecord,
    SolveRequest,
    SweepRecord,
    SweepRequest,
    SweepResult,
)
from solver import DomainExitError, SolverConfig, solve

logging.basicConfig(
    level=logging.DEBUG if config.DEBUG else logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Rootkit API",
    description="Newton, Halley, HNR1 and HNR2 root finding over HTTP",
    version=config.SCHEMA_VERSION,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


def _problem(name: Optional[str], expr: Optional[str], params: List[float]) -> problems.ProblemSpec:
    """Resolve the problem of a request body, as 400 errors on bad input."""
    if (name is None) == (expr is None):
        raise HTTPException(status_code=400, detail="Give exactly one of 'problem' or 'expr'")
    if expr is not None:
        try:
            return expression_problem(expr)
        except ExprParseError as e:
            raise HTTPException(status_code=400, detail=str(e))
    try:
        return problems.get_problem(name, params)
    except problems.UnknownProblemError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))


def _config(method: str, max_iter: int, f_tol: Optional[float] = None) -> SolverConfig:
    try:
        return SolverConfig(method=Method.parse(method), f_tol=f_tol, max_iter=max_iter)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))


@app.get("/api/health")
def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "message": "Rootkit API is running", "schema_version": config.SCHEMA_VERSION}


@app.get("/api/problems", response_model=List[ProblemRecord])
def list_problems():
    """The built-in problem catalog"""
    return [
        ProblemRecord.from_spec(spec, problems.parameter_names(spec.name))
        for spec in problems.catalog()
    ]


@app.post("/api/solve")
def solve_problem(request: SolveRequest):
    """Run one solve; non-convergence is a normal 200 response with its status"""
    problem = _problem(request.problem, request.expr, request.params)
    cfg = _config(request.method, request.max_iter, request.f_tol)
    if not problem.domain.contains(request.x0):
        raise HTTPException(status_code=400, detail=f"x0={request.x0!r} is outside the domain {problem.domain}")
    try:
        report = solve(problem, request.x0, cfg)
        return SolveRecord.from_report(report).model_dump(mode="json")
    except HTTPException:
        raise
    except MultiplierOverflowError as e:
        logger.warning(f"Multiplier overflow for {problem.name} from {request.x0!r}: {e}")
        raise HTTPException(status_code=422, detail=f"Multiplier overflow at q = {e.q!r}")
    except DomainExitError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.error(f"Error solving {problem.name}: {e}")
        raise HTTPException(status_code=500, detail="Failed to solve")


@app.post("/api/sweep")
def sweep_problem(request: SweepRequest):
    """Solve from evenly spaced starting points"""
    problem = _problem(request.problem, request.expr, request.params)
    cfg = _config(request.method, request.max_iter)
    try:
        grid = analysis.linspace_grid(request.start, request.stop, request.points)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    rows = analysis.sweep(problem, cfg.method, grid, cfg)
    result = SweepResult(
        problem=problem.name,
        method=cfg.method.value,
        rows=[SweepRecord.from_row(row) for row in rows],
    )
    return result.model_dump(mode="json")


@app.post("/api/boundary")
def find_boundary(request: BoundaryRequest):
    """Bisect the basin boundary inside [lo, hi]"""
    problem = _problem(request.problem, request.expr, request.params)
    cfg = _config(request.method, request.max_iter)
    try:
        boundary = analysis.find_boundary(problem, cfg.method, request.lo, request.hi, request.resolution, cfg)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return BoundaryRecord.from_boundary(boundary).model_dump(mode="json")


@app.get("/api/reproduce/{experiment}")
def reproduce(experiment: str):
    """Run one reference experiment and return its checks"""
    try:
        checks = experiments.run_experiment(experiment)
    except experiments.UnknownExperimentError as e:
        raise HTTPException(status_code=404, detail=str(e))
    return ReproduceRecord.from_checks(experiment, checks).model_dump(mode="json")


if __name__ == "__main__":
    uvicorn.run(app, host=config.HOST, port=config.PORT)
