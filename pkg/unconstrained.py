"""
Unconstrained Solution
Closed-form minimum-energy arc with free terminal speed and the
profile-direction classifier
"""

from typing import Optional

from models import ArcKind, BoundaryConditions, Direction, PolyArc

CRUISE_RTOL = 1e-12


def _is_cruise(bc: BoundaryConditions) -> bool:
    travel = bc.v0 * bc.horizon
    return abs(travel - bc.distance) <= CRUISE_RTOL * max(abs(travel), bc.distance)


def classify(bc: BoundaryConditions) -> Direction:
    """
    Classify the unconstrained control profile.

    Decreasing when the vehicle must speed up on average (v0 below the
    average speed), Increasing when it must slow down, Cruise otherwise.
    """
    if _is_cruise(bc):
        return Direction.CRUISE
    if bc.v0 < bc.average_speed:
        return Direction.DECREASING
    return Direction.INCREASING


def solve_unconstrained(bc: BoundaryConditions) -> PolyArc:
    """
    Single-arc solution meeting p(t0), v(t0), p(tm) and u(tm) = 0

    Args:
        bc: Boundary conditions

    Returns:
        Unconstrained PolyArc over [t0, tm] in the t0-shifted frame
    """
    T = bc.horizon
    if _is_cruise(bc):
        a = 0.0
    else:
        a = 3.0 * (bc.v0 * T - bc.distance) / T ** 3
    b = -a * T
    return PolyArc(ArcKind.UNCONSTRAINED, a, b, bc.v0, bc.p0, bc.t0, bc.tm)


def opposite_signs_check(arc: PolyArc) -> Optional[bool]:
    """True when a and b have opposite signs; None for a cruise arc"""
    if arc.a == 0.0:
        return None
    return arc.a * arc.b < 0


def terminal_speed(bc: BoundaryConditions) -> float:
    """Speed at tm of the unconstrained arc, its extreme speed on the horizon"""
    arc = solve_unconstrained(bc)
    return arc.c + 0.5 * arc.b * bc.horizon
