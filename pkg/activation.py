"""
Constraint Activation
Decide, before any constrained solve, which bounds the optimal
trajectory rides.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional

import constrained
from models import (
    ActivationPlan,
    BoundaryConditions,
    CasePlan,
    ConstraintKind,
    DegenerateProblemError,
    Direction,
    InfeasibleProblemError,
    Limits,
    PolyArc,
    Side,
)
from unconstrained import classify, solve_unconstrained

logger = logging.getLogger(__name__)

_ALL_KINDS = frozenset(ConstraintKind)


def _side(direction: Direction) -> Optional[Side]:
    if direction is Direction.DECREASING:
        return Side.MAX
    if direction is Direction.INCREASING:
        return Side.MIN
    return None


def excluded_side(direction: Direction) -> frozenset:
    """Bounds that can never become active for this profile direction"""
    if direction is Direction.DECREASING:
        return frozenset({ConstraintKind.STATE_MIN, ConstraintKind.CONTROL_MIN})
    if direction is Direction.INCREASING:
        return frozenset({ConstraintKind.STATE_MAX, ConstraintKind.CONTROL_MAX})
    return _ALL_KINDS


# ==================== PRIMARY CHECKS ====================

def state_threshold(bc: BoundaryConditions, limits: Limits) -> Optional[float]:
    """Horizon length 3*D/(v0 + 2*V) separating active from inactive speed bounds"""
    side = _side(classify(bc))
    if side is None:
        return None
    denom = bc.v0 + 2.0 * limits.speed_bound(side)
    if denom <= 0:
        return math.inf
    return 3.0 * bc.distance / denom


def state_active(bc: BoundaryConditions, limits: Limits) -> bool:
    """
    True when the unconstrained arc crosses the speed bound of its side.

    Decreasing profiles peak in speed at tm, increasing ones bottom out
    there, so comparing the horizon with the threshold is exact.
    """
    direction = classify(bc)
    threshold = state_threshold(bc, limits)
    if threshold is None:
        return False
    if direction is Direction.DECREASING:
        return bc.horizon < threshold
    return bc.horizon > threshold


def control_threshold(bc: BoundaryConditions, limits: Limits) -> Optional[float]:
    """Horizon below which the upper control bound activates (upper side only)"""
    if classify(bc) is not Direction.DECREASING or not math.isfinite(limits.u_max):
        return None
    U = limits.u_max
    return (-3.0 * bc.v0 + math.sqrt(9.0 * bc.v0 ** 2 + 12.0 * U * bc.distance)) / (2.0 * U)


def control_active(bc: BoundaryConditions, limits: Limits) -> bool:
    """Control peaks in magnitude at t0, so compare u(t0) = b with the bound"""
    direction = classify(bc)
    if direction is Direction.CRUISE:
        return False
    b = solve_unconstrained(bc).b
    if direction is Direction.DECREASING:
        return b > limits.u_max
    return b < limits.u_min


def unconstrained_crossing_time(arc: PolyArc, v_bound: float) -> float:
    """
    First time the unconstrained arc reaches v_bound (absolute time).

    Raises:
        DegenerateProblemError: cruise arc, or no crossing inside the horizon
    """
    if arc.a == 0.0:
        raise DegenerateProblemError("a cruise arc has constant speed and never crosses a bound")
    T = arc.duration
    disc = 4.0 * arc.b ** 2 - 8.0 * arc.a * (arc.c - v_bound)
    if disc < 0:
        # tangency at the vertex lands here through round-off
        if disc > -1e-12 * max(4.0 * arc.b ** 2, 1.0):
            disc = 0.0
        else:
            raise DegenerateProblemError(f"speed {v_bound} is never reached by the unconstrained arc")
    tau = T - math.sqrt(disc / (4.0 * arc.a ** 2))
    if tau < 0:
        raise DegenerateProblemError(f"speed {v_bound} is crossed before t0")
    return arc.t_start + tau


# ==================== SECONDARY CHECKS ====================

def secondary_control_after_state(bc: BoundaryConditions, limits: Limits, tau_s: float) -> bool:
    """
    Whether the speed-constrained solution needs the control bound as well.

    Its first arc starts at u(t0) = 2*(V - v0)/(tau_s - t0) and decays
    linearly to zero, so the control bound is crossed iff u(t0) is beyond it.
    """
    side = _side(classify(bc))
    if side is None:
        return False
    V = limits.speed_bound(side)
    U = limits.control_bound(side)
    tau = tau_s - bc.t0
    if tau <= 0:
        return True
    u0 = 2.0 * (V - bc.v0) / tau
    return u0 > U if side is Side.MAX else u0 < U


def secondary_control_threshold(bc: BoundaryConditions, limits: Limits, tau_s: float) -> Optional[float]:
    """Switch time below which the upper control bound activates (absolute time)"""
    if _side(classify(bc)) is not Side.MAX or not math.isfinite(limits.u_max):
        return None
    U = limits.u_max
    tau = tau_s - bc.t0
    reach = tau * (bc.v0 + 2.0 * limits.v_max) / 3.0
    return bc.t0 + (-3.0 * bc.v0 + math.sqrt(9.0 * bc.v0 ** 2 + 12.0 * U * reach)) / (2.0 * U)


def _pinned_exit_state(bc: BoundaryConditions, U: float, tau_c: float):
    tau = tau_c - bc.t0
    return bc.p0 + bc.v0 * tau + 0.5 * U * tau * tau, bc.v0 + U * tau


def secondary_state_threshold(bc: BoundaryConditions, limits: Limits, tau_c: float) -> Optional[float]:
    """Merging time threshold for the speed bound after the control arc (absolute time)"""
    side = _side(classify(bc))
    if side is None:
        return None
    V = limits.speed_bound(side)
    p_c, v_c = _pinned_exit_state(bc, limits.control_bound(side), tau_c)
    denom = v_c + 2.0 * V
    if not math.isfinite(denom):
        return tau_c
    if denom <= 0:
        return math.inf
    return tau_c + 3.0 * (bc.pm - p_c) / denom


def secondary_state_after_control(bc: BoundaryConditions, limits: Limits, tau_c: float) -> bool:
    """
    Whether the control-constrained solution needs the speed bound as well.

    The free arc after tau_c is the unconstrained solution of the reduced
    horizon, so the primary speed check applies to it.
    """
    side = _side(classify(bc))
    if side is None:
        return False
    V = limits.speed_bound(side)
    _, v_c = _pinned_exit_state(bc, limits.control_bound(side), tau_c)
    if side is Side.MAX:
        if v_c > V:
            return True
        return bc.tm < secondary_state_threshold(bc, limits, tau_c)
    if v_c < V:
        return True
    return bc.tm > secondary_state_threshold(bc, limits, tau_c)


# ==================== DECISION ====================

def plan(bc: BoundaryConditions, limits: Limits) -> CasePlan:
    """
    Run the activation checks in order:
    direction -> exclusion -> primary speed/control checks -> secondary
    check for the single-constraint case -> case.
    """
    direction = classify(bc)
    excluded = excluded_side(direction)
    rationale: List[str] = [
        f"{direction.value} profile excludes {', '.join(sorted(k.value for k in excluded))}"
    ]
    side = _side(direction)
    if side is None:
        return CasePlan(ActivationPlan.build(direction, False, False), rationale=tuple(rationale))

    state = state_active(bc, limits)
    control = control_active(bc, limits)
    rationale.append(f"speed bound {'active' if state else 'inactive'} "
                     f"(tm-t0={bc.horizon:.6g}, threshold={state_threshold(bc, limits):.6g})")
    rationale.append(f"control bound {'active' if control else 'inactive'} "
                     f"(u(t0)={solve_unconstrained(bc).b:.6g}, bound={limits.control_bound(side):.6g})")
    if state:
        V = limits.speed_bound(side)
        try:
            crossing = unconstrained_crossing_time(solve_unconstrained(bc), V)
            rationale.append(f"unconstrained arc crosses v={V:.6g} at t={crossing:.6g}")
        except DegenerateProblemError as e:
            rationale.append(f"unconstrained crossing undefined: {e}")

    tau_s = tau_c = None
    if state and not control:
        try:
            tau_s = constrained.state_switch_time(bc, limits, side)
            control = secondary_control_after_state(bc, limits, tau_s)
            rationale.append(f"control after speed pinning {'active' if control else 'inactive'} "
                             f"(tau_s={tau_s:.6g})")
        except DegenerateProblemError as e:
            rationale.append(f"speed-pinned switch undefined: {e}")
    elif control and not state:
        try:
            tau_c = constrained.control_switch_time(bc, limits, side)
            state = secondary_state_after_control(bc, limits, tau_c)
            rationale.append(f"speed after control pinning {'active' if state else 'inactive'} "
                             f"(tau_c={tau_c:.6g})")
        except InfeasibleProblemError as e:
            rationale.append(f"control-pinned switch undefined: {e}")

    if state and control:
        try:
            tau_c, tau_s = constrained.both_switch_times(bc, limits, side)
        except (InfeasibleProblemError, DegenerateProblemError) as e:
            rationale.append(f"three-arc switch pair undefined: {e}")

    activation = ActivationPlan.build(direction, state, control)
    logger.debug("plan %s: %s", activation.case.value, " | ".join(rationale))
    return CasePlan(activation, tau_s_estimate=tau_s, tau_c_estimate=tau_c, rationale=tuple(rationale))
