"""
Constrained Solutions
Arc stitching for speed-pinned, acceleration-pinned and combined cases.

All closed forms below work in the shifted frame t0 = 0 with
T = tm - t0, D = pm - p0, V the speed bound and U the control bound of the
active side; switch times are shifted back before arcs are built.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from config import Config
from core import costates, verify
from models import (
    ArcKind,
    BoundaryConditions,
    CaseKind,
    DegenerateProblemError,
    InfeasibleProblemError,
    Limits,
    PolyArc,
    Side,
    Trajectory,
    VerificationError,
)
from unconstrained import solve_unconstrained

logger = logging.getLogger(__name__)

# relative slack (in units of the horizon) for switch times at the ends
SWITCH_EPS = 1e-9


def _check_initial_speed(bc: BoundaryConditions, limits: Limits) -> None:
    if not limits.v_min <= bc.v0 <= limits.v_max:
        raise InfeasibleProblemError(
            f"initial speed {bc.v0} is outside [{limits.v_min}, {limits.v_max}]"
        )


# ==================== SWITCH TIMES ====================

def state_switch_time(bc: BoundaryConditions, limits: Limits, side: Side) -> float:
    """
    Entry time of the speed-pinned arc when only the speed bound is active.

    Follows from u(tau)=0, v(tau)=V on the first arc and p(tm)=pm with the
    pinned arc running to tm. The result is not range-checked.
    """
    V = limits.speed_bound(side)
    if not math.isfinite(V):
        raise DegenerateProblemError(f"speed bound on the {side.value} side is relaxed")
    if V == bc.v0:
        raise DegenerateProblemError(f"initial speed equals the speed bound {V}")
    tau = 3.0 * (V * bc.horizon - bc.distance) / (V - bc.v0)
    return bc.t0 + tau


def control_switch_time(bc: BoundaryConditions, limits: Limits, side: Side) -> float:
    """
    Exit time of the acceleration-pinned arc when only the control bound is active.

    Eliminating the second-arc coefficients leaves
        tau^2 - 2*T*tau - 2*T^2 + 6*(D - v0*T)/U = 0,
    whose only root below tm is T - sqrt(3*T^2 - 6*(D - v0*T)/U).
    The result is not range-checked.
    """
    U = limits.control_bound(side)
    T = bc.horizon
    disc = 3.0 * T * T - 6.0 * (bc.distance - bc.v0 * T) / U
    if disc < 0:
        raise InfeasibleProblemError(
            f"holding u={U} over the whole horizon still misses pm={bc.pm}"
        )
    return bc.t0 + T - math.sqrt(disc)


def both_switch_times(bc: BoundaryConditions, limits: Limits, side: Side) -> Tuple[float, float]:
    """
    (tau_c, tau_s) for the pinned-control / free / pinned-speed structure.

    With K = (V - v0)/U the stitching conditions give tau_c = K - R and
    tau_s = K + R, R^2 = 6*(V*T - D)/U - 3*K^2. R^2 < 0 means even the
    saturated profile cannot meet pm.
    """
    U = limits.control_bound(side)
    V = limits.speed_bound(side)
    if not (math.isfinite(U) and math.isfinite(V)):
        raise DegenerateProblemError("both bounds must be finite for the three-arc structure")
    K = (V - bc.v0) / U
    r2 = 6.0 * (V * bc.horizon - bc.distance) / U - 3.0 * K * K
    if r2 < 0:
        raise InfeasibleProblemError(
            f"the saturated profile (u={U} then v={V}) cannot meet pm={bc.pm} by tm={bc.tm}"
        )
    R = math.sqrt(r2)
    return bc.t0 + K - R, bc.t0 + K + R


def control_stitch_residual(tau_c: float, bc: BoundaryConditions, limits: Limits, side: Side) -> float:
    """p(tm) - pm for the two-arc control structure switched at tau_c"""
    U = limits.control_bound(side)
    tau = tau_c - bc.t0
    R = bc.horizon - tau
    v_c = bc.v0 + U * tau
    p_c = bc.p0 + bc.v0 * tau + 0.5 * U * tau * tau
    return p_c + v_c * R + U * R * R / 3.0 - bc.pm


# ==================== SOLVERS ====================

def solve_state_constrained(bc: BoundaryConditions, limits: Limits, side: Side) -> Trajectory:
    """
    Unconstrained arc entering the speed bound with zero control, then a
    speed-pinned arc up to tm
    """
    _check_initial_speed(bc, limits)
    V = limits.speed_bound(side)
    tau_abs = state_switch_time(bc, limits, side)
    tau = tau_abs - bc.t0
    T = bc.horizon

    if tau <= SWITCH_EPS * T:
        raise InfeasibleProblemError(
            f"cannot cover {bc.distance} m in {T} s without crossing v={V} (switch at {tau_abs:.6g})"
        )
    if tau >= T * (1.0 - SWITCH_EPS):
        raise InfeasibleProblemError(
            f"speed bound v={V} is never reached (switch at {tau_abs:.6g} >= tm={bc.tm})"
        )

    a = 2.0 * (bc.v0 - V) / (tau * tau)
    first = PolyArc(ArcKind.UNCONSTRAINED, a, -a * tau, bc.v0, bc.p0, bc.t0, tau_abs)
    p_s, _, _ = first.end_state()
    pinned = PolyArc.speed_pinned(side, V, p_s, tau_abs, bc.tm)

    logger.debug("state-constrained (%s): tau_s=%.9g a=%.9g", side.value, tau_abs, a)
    return Trajectory((first, pinned), bc, limits, switch_times=(tau_abs,))


def solve_control_constrained(bc: BoundaryConditions, limits: Limits, side: Side) -> Trajectory:
    """
    Acceleration-pinned arc from t0, then an unconstrained arc leaving the
    bound continuously and reaching zero control at tm
    """
    _check_initial_speed(bc, limits)
    U = limits.control_bound(side)
    T = bc.horizon
    tau_abs = control_switch_time(bc, limits, side)
    tau = tau_abs - bc.t0

    if tau < -SWITCH_EPS * T:
        raise InfeasibleProblemError(
            f"control bound u={U} is never reached (switch at {tau_abs:.6g} < t0={bc.t0})"
        )
    if tau <= SWITCH_EPS * T:
        # boundary of activation: the unconstrained arc starts exactly at the bound
        arc = solve_unconstrained(bc)
        return Trajectory((arc,), bc, limits).with_diagnostics("control switch at t0; unconstrained arc")

    pinned_end = bc.tm if tau >= T * (1.0 - SWITCH_EPS) else tau_abs
    pinned = PolyArc.accel_pinned(side, U, bc.v0, bc.p0, bc.t0, pinned_end)
    if pinned_end == bc.tm:
        return Trajectory((pinned,), bc, limits).with_diagnostics("control bound held over the whole horizon")

    p_c, v_c, _ = pinned.end_state()
    R = bc.tm - tau_abs
    free = PolyArc(ArcKind.UNCONSTRAINED, -U / R, U, v_c, p_c, tau_abs, bc.tm)

    logger.debug(
        "control-constrained (%s): tau_c=%.9g stitch residual=%.3g",
        side.value, tau_abs, control_stitch_residual(tau_abs, bc, limits, side),
    )
    return Trajectory((pinned, free), bc, limits, switch_times=(tau_abs,)).with_diagnostics(
        "single admissible switch root below tm"
    )


def solve_both_constrained(bc: BoundaryConditions, limits: Limits, side: Side) -> Trajectory:
    """
    Acceleration-pinned, unconstrained and speed-pinned arcs in that order.

    When the switch pair collapses onto an end of the horizon the problem
    is demoted once to the matching single-constraint case.
    """
    _check_initial_speed(bc, limits)
    U = limits.control_bound(side)
    V = limits.speed_bound(side)
    T = bc.horizon
    tau_c_abs, tau_s_abs = both_switch_times(bc, limits, side)
    tau_c, tau_s = tau_c_abs - bc.t0, tau_s_abs - bc.t0

    if tau_c <= SWITCH_EPS * T:
        logger.warning("control arc vanishes (tau_c=%.6g); demoting to state-only", tau_c_abs)
        return solve_state_constrained(bc, limits, side).with_diagnostics(
            f"demoted from Both: tau_c={tau_c_abs:.6g} <= t0"
        )
    if tau_s >= T * (1.0 - SWITCH_EPS):
        logger.warning("speed arc vanishes (tau_s=%.6g); demoting to control-only", tau_s_abs)
        return solve_control_constrained(bc, limits, side).with_diagnostics(
            f"demoted from Both: tau_s={tau_s_abs:.6g} >= tm"
        )
    if tau_s - tau_c <= SWITCH_EPS * T:
        # the free arc vanishes and u would have to drop from U to 0 at once
        raise InfeasibleProblemError(
            f"only the saturated profile (u={U} until {tau_c_abs:.6g}, then v={V}) meets pm={bc.pm}"
        )

    pinned_u = PolyArc.accel_pinned(side, U, bc.v0, bc.p0, bc.t0, tau_c_abs)
    p_c, v_c, _ = pinned_u.end_state()
    free = PolyArc(ArcKind.UNCONSTRAINED, -U / (tau_s - tau_c), U, v_c, p_c, tau_c_abs, tau_s_abs)
    p_s, _, _ = free.end_state()
    pinned_v = PolyArc.speed_pinned(side, V, p_s, tau_s_abs, bc.tm)

    logger.debug("both-constrained (%s): tau_c=%.9g tau_s=%.9g", side.value, tau_c_abs, tau_s_abs)
    return Trajectory((pinned_u, free, pinned_v), bc, limits, switch_times=(tau_c_abs, tau_s_abs))


def solve(bc: BoundaryConditions, limits: Limits) -> Trajectory:
    """
    Full pipeline: decide the case, stitch the arcs, verify.

    Returns:
        Trajectory with its CasePlan attached

    Raises:
        InfeasibleProblemError, DegenerateProblemError, VerificationError
    """
    from activation import plan  # local import: activation needs our switch times

    _check_initial_speed(bc, limits)
    case_plan = plan(bc, limits)
    side = case_plan.side

    if case_plan.case is CaseKind.UNCONSTRAINED:
        traj = Trajectory((solve_unconstrained(bc),), bc, limits)
    elif case_plan.case is CaseKind.STATE_ONLY:
        traj = solve_state_constrained(bc, limits, side)
    elif case_plan.case is CaseKind.CONTROL_ONLY:
        traj = solve_control_constrained(bc, limits, side)
    else:
        traj = solve_both_constrained(bc, limits, side)

    traj = replace(traj, case_plan=case_plan)
    report = verify(traj, tol=Config.VERIFY_TOL)
    if not report.ok:
        logger.warning("solution failed verification: %s", "; ".join(report.violations))
        raise VerificationError("solution failed verification: " + "; ".join(report.violations))
    return traj


# ==================== MULTIPLIERS ====================

@dataclass(frozen=True)
class MultiplierCheck:
    """Reconstructed path multiplier on one pinned arc"""
    arc_index: int
    kind: ArcKind
    name: str
    min_value: float

    @property
    def ok(self) -> bool:
        return self.min_value >= -1e-9


def _multiplier(kind: ArcKind, lam_p: float, lam_v: float, u: float) -> Tuple[str, float]:
    if kind is ArcKind.SPEED_PINNED_MAX:
        return "mu_c", -lam_p
    if kind is ArcKind.SPEED_PINNED_MIN:
        return "mu_d", lam_p
    if kind is ArcKind.ACCEL_PINNED_MAX:
        return "mu_a", -u - lam_v
    return "mu_b", u + lam_v


def multipliers(traj: Trajectory, points: int = 50) -> List[MultiplierCheck]:
    """
    Path multipliers implied by the costates on every pinned arc.

    Each must be non-negative for the stitched solution to satisfy the
    first-order conditions.
    """
    checks = []
    for index, arc in enumerate(traj.arcs):
        if arc.kind is ArcKind.UNCONSTRAINED:
            continue
        values = []
        name = ""
        for t in np.linspace(arc.t_start, arc.t_end, points, endpoint=False):
            lam_p, lam_v = costates(traj, float(t))
            _, _, u = arc.state_at(float(t))
            name, value = _multiplier(arc.kind, lam_p, lam_v, u)
            values.append(value)
        checks.append(MultiplierCheck(index, arc.kind, name, float(min(values))))
    return checks
