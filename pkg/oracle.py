"""
Reference Oracle
Direct-transcription convex QP used to validate the analytic solutions.

Control is piecewise constant on a uniform grid, so trapezoidal position
updates integrate the double integrator exactly between nodes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import cvxpy as cp
import numpy as np

from config import Config
from core import cost, sample
from models import (
    BoundaryConditions,
    ConstraintKind,
    InfeasibleProblemError,
    InvalidProblemError,
    Limits,
    OracleError,
    Trajectory,
)

logger = logging.getLogger(__name__)

MIN_GRID = 100
ACTIVE_TOL = 1e-4


@dataclass(frozen=True)
class GridSolution:
    """Minimizer of the discretized problem"""
    N: int
    dt: float
    t0: float
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    cost: float
    limits: Limits
    status: str = "optimal"
    solve_time: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.N + 1)

    def dynamics_residual(self) -> float:
        """Largest per-step violation of the discrete dynamics"""
        dv = self.v[1:] - self.v[:-1] - self.dt * self.u
        dp = self.p[1:] - self.p[:-1] - 0.5 * self.dt * (self.v[:-1] + self.v[1:])
        return float(max(np.abs(dv).max(), np.abs(dp).max()))

    def active_set(self, tol: float = ACTIVE_TOL) -> frozenset:
        """Bounds met within tol somewhere on the grid"""
        lim = self.limits
        found = set()
        if math.isfinite(lim.v_max) and self.v.max() >= lim.v_max - tol:
            found.add(ConstraintKind.STATE_MAX)
        if self.v.min() <= lim.v_min + tol:
            found.add(ConstraintKind.STATE_MIN)
        if math.isfinite(lim.u_max) and self.u.max() >= lim.u_max - tol:
            found.add(ConstraintKind.CONTROL_MAX)
        if math.isfinite(lim.u_min) and self.u.min() <= lim.u_min + tol:
            found.add(ConstraintKind.CONTROL_MIN)
        return frozenset(found)


def collocation_solve(bc: BoundaryConditions, limits: Limits, N: Optional[int] = None,
                      solver: Optional[str] = None) -> GridSolution:
    """
    Minimize sum(u_k^2/2 * dt) subject to the discretized dynamics,
    p/v at t0, p at tm (speed at tm free) and the finite box bounds

    Args:
        bc: Boundary conditions
        limits: Box bounds; infinite bounds are dropped
        N: Number of control intervals (>= 100)
        solver: cvxpy solver name, defaults to Config.QP_SOLVER

    Returns:
        GridSolution
    """
    N = N or Config.GRID
    if N < MIN_GRID:
        raise InvalidProblemError(f"grid size must be at least {MIN_GRID}, got {N}")
    dt = bc.horizon / N

    u = cp.Variable(N)
    v = cp.Variable(N + 1)
    p = cp.Variable(N + 1)

    constraints = [
        v[0] == bc.v0,
        p[0] == bc.p0,
        p[N] == bc.pm,
        v[1:] == v[:-1] + dt * u,
        p[1:] == p[:-1] + 0.5 * dt * (v[:-1] + v[1:]),
        v >= limits.v_min,
    ]
    if math.isfinite(limits.v_max):
        constraints.append(v <= limits.v_max)
    if math.isfinite(limits.u_max):
        constraints.append(u <= limits.u_max)
    if math.isfinite(limits.u_min):
        constraints.append(u >= limits.u_min)

    problem = cp.Problem(cp.Minimize(0.5 * dt * cp.sum_squares(u)), constraints)
    solver = solver or Config.QP_SOLVER
    try:
        problem.solve(solver=solver)
    except cp.error.SolverError as e:
        raise OracleError(f"QP solver {solver} failed: {e}") from e

    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise InfeasibleProblemError(f"discretized problem is infeasible (N={N})")
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise OracleError(f"QP ended with status {problem.status}")
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning("oracle solution flagged inaccurate (N=%d)", N)

    stats = problem.solver_stats
    solve_time = float(stats.solve_time) if stats is not None and stats.solve_time is not None else 0.0
    logger.debug("oracle N=%d status=%s cost=%.9g", N, problem.status, problem.value)

    return GridSolution(
        N=N,
        dt=dt,
        t0=bc.t0,
        u=np.asarray(u.value, dtype=float),
        v=np.asarray(v.value, dtype=float),
        p=np.asarray(p.value, dtype=float),
        cost=float(problem.value),
        limits=limits,
        status=str(problem.status),
        solve_time=solve_time,
    )


# ==================== COMPARISON ====================

# acceptance tolerances for analytic vs grid solutions
COST_GAP_TOL = 5e-3
SPEED_GAP_TOL = 2e-2


@dataclass(frozen=True)
class ComparisonReport:
    """Pointwise and cost agreement between a trajectory and a grid solution"""
    max_speed_gap: float
    max_position_gap: float
    cost_analytic: float
    cost_grid: float
    relative_cost_gap: float
    analytic_active: frozenset
    grid_active: frozenset

    @property
    def active_set_agrees(self) -> bool:
        return self.analytic_active == self.grid_active

    def within(self, cost_tol: float = COST_GAP_TOL, speed_tol: float = SPEED_GAP_TOL) -> bool:
        return (
            self.relative_cost_gap <= cost_tol
            and self.max_speed_gap <= speed_tol
            and self.active_set_agrees
        )


def compare(traj: Trajectory, sol: GridSolution) -> ComparisonReport:
    """Sample the trajectory on the grid nodes and compare"""
    times = np.clip(sol.times, traj.bc.t0, traj.bc.tm)
    p, v, _, _ = sample(traj, times)
    c_traj = cost(traj)
    scale = max(abs(sol.cost), 1e-9)
    return ComparisonReport(
        max_speed_gap=float(np.abs(v - sol.v).max()),
        max_position_gap=float(np.abs(p - sol.p).max()),
        cost_analytic=c_traj,
        cost_grid=sol.cost,
        relative_cost_gap=abs(c_traj - sol.cost) / scale,
        analytic_active=_analytic_active(traj),
        grid_active=sol.active_set(),
    )


def _analytic_active(traj: Trajectory, tol: float = ACTIVE_TOL) -> frozenset:
    """Bounds the trajectory reaches within tol, sampled like the grid"""
    lim = traj.limits
    times = np.linspace(traj.bc.t0, traj.bc.tm, 2001)
    _, v, u, _ = sample(traj, times)
    found = set()
    if math.isfinite(lim.v_max) and v.max() >= lim.v_max - tol:
        found.add(ConstraintKind.STATE_MAX)
    if v.min() <= lim.v_min + tol:
        found.add(ConstraintKind.STATE_MIN)
    if math.isfinite(lim.u_max) and u.max() >= lim.u_max - tol:
        found.add(ConstraintKind.CONTROL_MAX)
    if math.isfinite(lim.u_min) and u.min() <= lim.u_min + tol:
        found.add(ConstraintKind.CONTROL_MIN)
    return frozenset(found | set(traj.active_kinds()))
