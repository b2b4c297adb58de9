"""
Trajectory Evaluation
Pointwise/vectorized evaluation, energy cost, verification and
costate reconstruction for piecewise-polynomial trajectories
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from models import ArcKind, DomainError, PolyArc, Trajectory

logger = logging.getLogger(__name__)


def _arc_index(traj: Trajectory, t: float) -> int:
    if not traj.bc.t0 <= t <= traj.bc.tm:
        raise DomainError(f"t={t} is outside the horizon [{traj.bc.t0}, {traj.bc.tm}]")
    starts = [arc.t_start for arc in traj.arcs]
    # junction times belong to the arc that starts there
    return min(bisect.bisect_right(starts, t) - 1, len(traj.arcs) - 1)


def evaluate(traj: Trajectory, t: float) -> Tuple[float, float, float]:
    """
    Evaluate position, speed and control at time t

    Args:
        traj: Trajectory to evaluate
        t: Absolute time within [t0, tm]

    Returns:
        (p, v, u)
    """
    return traj.arcs[_arc_index(traj, t)].state_at(t)


def arc_at(traj: Trajectory, t: float) -> PolyArc:
    """Arc that owns time t"""
    return traj.arcs[_arc_index(traj, t)]


def _evaluate_arrays(traj: Trajectory, t: np.ndarray):
    if t.size and (t.min() < traj.bc.t0 or t.max() > traj.bc.tm):
        raise DomainError(f"sample times leave the horizon [{traj.bc.t0}, {traj.bc.tm}]")

    starts = np.array([arc.t_start for arc in traj.arcs])
    idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(traj.arcs) - 1)

    coef = np.array([[arc.a, arc.b, arc.c, arc.d] for arc in traj.arcs])
    a, b, c, d = coef[idx].T
    s = t - starts[idx]

    u = a * s + b
    v = 0.5 * a * s ** 2 + b * s + c
    p = a * s ** 3 / 6.0 + 0.5 * b * s ** 2 + c * s + d
    return idx, p, v, u


def sample(traj: Trajectory, times: Sequence[float]):
    """
    Vectorized evaluation on an array of times.

    Returns:
        (p, v, u, kinds) numpy arrays; kinds holds ArcKind values
    """
    idx, p, v, u = _evaluate_arrays(traj, np.asarray(times, dtype=float))
    kinds = np.array([arc.kind for arc in traj.arcs], dtype=object)[idx]
    return p, v, u, kinds


def arc_cost(arc: PolyArc) -> float:
    """Exact integral of u^2/2 over one arc"""
    L = arc.duration
    if arc.kind.is_speed_pinned:
        return 0.0
    return 0.5 * (arc.a ** 2 * L ** 3 / 3.0 + arc.a * arc.b * L ** 2 + arc.b ** 2 * L)


def cost(traj: Trajectory) -> float:
    """Energy functional: sum of the per-arc closed-form integrals"""
    return float(sum(arc_cost(arc) for arc in traj.arcs))


# ==================== VERIFICATION ====================

@dataclass(frozen=True)
class VerificationReport:
    """Continuity, constraint and boundary-condition residuals of a trajectory"""
    junction_jump_p: float
    junction_jump_v: float
    junction_jump_u: float
    speed_violation: float
    control_violation: float
    residual_p0: float
    residual_v0: float
    residual_pm: float
    terminal_control: float
    tol: float
    violations: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "junction_jump_p": self.junction_jump_p,
            "junction_jump_v": self.junction_jump_v,
            "junction_jump_u": self.junction_jump_u,
            "speed_violation": self.speed_violation,
            "control_violation": self.control_violation,
            "residual_p0": self.residual_p0,
            "residual_v0": self.residual_v0,
            "residual_pm": self.residual_pm,
            "terminal_control": self.terminal_control,
        }


def verify(traj: Trajectory, tol: float = 1e-6, samples: Optional[int] = None) -> VerificationReport:
    """
    Check a trajectory against its own boundary data and limits.

    Constraint violations are positive amounts by which a bound is exceeded
    (0 when satisfied). Never raises for findings.
    """
    bc, limits = traj.bc, traj.limits
    samples = samples or Config.VERIFY_GRID

    jump_p = jump_v = jump_u = 0.0
    for left, right in zip(traj.arcs, traj.arcs[1:]):
        pl, vl, ul = left.end_state()
        pr, vr, ur = right.state_at(right.t_start)
        jump_p = max(jump_p, abs(pl - pr))
        jump_v = max(jump_v, abs(vl - vr))
        jump_u = max(jump_u, abs(ul - ur))

    grid = np.linspace(bc.t0, bc.tm, samples)
    junctions = [arc.t_start for arc in traj.arcs[1:]]
    # grid already holds t0 and tm; only extrema matter, so no sort
    _, _, v, u = _evaluate_arrays(traj, np.concatenate([grid, junctions]))
    # the left limit at each junction is covered by the arc end states
    ends = np.array([arc.end_state() for arc in traj.arcs])
    v_all = np.concatenate([v, ends[:, 1]])
    u_all = np.concatenate([u, ends[:, 2]])

    speed_violation = float(max(0.0, v_all.max() - limits.v_max, limits.v_min - v_all.min()))
    control_violation = float(max(0.0, u_all.max() - limits.u_max, limits.u_min - u_all.min()))

    p0, v0, _ = traj.arcs[0].state_at(bc.t0)
    pm, _, um = traj.arcs[-1].end_state()
    residual_p0 = abs(p0 - bc.p0)
    residual_v0 = abs(v0 - bc.v0)
    residual_pm = abs(pm - bc.pm)
    terminal_control = abs(um) if traj.arcs[-1].kind is ArcKind.UNCONSTRAINED else 0.0

    checks = {
        "position jump": jump_p,
        "speed jump": jump_v,
        "control jump": jump_u,
        "speed bound": speed_violation,
        "control bound": control_violation,
        "initial position": residual_p0,
        "initial speed": residual_v0,
        "final position": residual_pm,
        "terminal control": terminal_control,
    }
    violations = tuple(f"{name}: {value:.6g} > {tol:g}" for name, value in checks.items() if value > tol)
    if violations:
        logger.debug("verification flagged %s", "; ".join(violations))

    return VerificationReport(
        junction_jump_p=jump_p,
        junction_jump_v=jump_v,
        junction_jump_u=jump_u,
        speed_violation=speed_violation,
        control_violation=control_violation,
        residual_p0=residual_p0,
        residual_v0=residual_v0,
        residual_pm=residual_pm,
        terminal_control=terminal_control,
        tol=tol,
        violations=violations,
    )


# ==================== COSTATES ====================

def position_costate(traj: Trajectory) -> float:
    """lambda_p: constant, equal to the control slope of the unconstrained arc"""
    for arc in traj.arcs:
        if arc.kind is ArcKind.UNCONSTRAINED:
            return arc.a
    return 0.0


def costates(traj: Trajectory, t: float) -> Tuple[float, float]:
    """
    Reconstruct (lambda_p, lambda_v) at time t.

    lambda_v = -u wherever the control is free or zero; on an
    acceleration-pinned arc it is integrated backwards from the exit,
    where it is continuous.
    """
    lam_p = position_costate(traj)
    idx = _arc_index(traj, t)
    arc = traj.arcs[idx]
    if not arc.kind.is_accel_pinned:
        _, _, u = arc.state_at(t)
        return lam_p, -u
    # d(lambda_v)/dt = -lambda_p on the pinned arc
    lam_v_exit = -arc.b
    return lam_p, lam_v_exit + lam_p * (arc.t_end - t)


def hamiltonian(traj: Trajectory, t: float) -> float:
    """H = u^2/2 + lambda_p*v + lambda_v*u"""
    _, v, u = evaluate(traj, t)
    lam_p, lam_v = costates(traj, t)
    return 0.5 * u * u + lam_p * v + lam_v * u


def junction_states(traj: Trajectory) -> List[Tuple[float, Tuple[float, float, float], Tuple[float, float, float]]]:
    """(time, left state, right state) for every interior junction"""
    return [
        (right.t_start, left.end_state(), right.state_at(right.t_start))
        for left, right in zip(traj.arcs, traj.arcs[1:])
    ]
