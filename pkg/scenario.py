"""
Intersection Scenario
Plan every vehicle of an intersection crossing with its assigned merging
time, then check rear-end and lateral safety after the fact.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from constrained import solve
from core import evaluate, sample
from models import (
    BoundaryConditions,
    DegenerateProblemError,
    InvalidProblemError,
    Limits,
    Trajectory,
    TrajectoryError,
)

logger = logging.getLogger(__name__)

REAR_END_SAMPLES = 1000

ASSUMPTIONS = (
    "merging-zone traversal at constant speed v(tm)",
    "rear-end gap threshold = standstill + headway * follower speed",
)


class Approach(enum.Enum):
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"

    @property
    def opposite(self) -> "Approach":
        return _OPPOSITE[self]


_OPPOSITE = {
    Approach.NORTH: Approach.SOUTH,
    Approach.SOUTH: Approach.NORTH,
    Approach.EAST: Approach.WEST,
    Approach.WEST: Approach.EAST,
}


class Movement(enum.Enum):
    STRAIGHT = "straight"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Geometry:
    """Control-zone length L and merging-zone side S (m)"""
    L: float
    S: float

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidProblemError(f"control-zone length must be positive, got {self.L}")
        if not (math.isfinite(self.S) and self.S > 0):
            raise InvalidProblemError(f"merging-zone side must be positive, got {self.S}")


@dataclass(frozen=True)
class VehicleSpec:
    """One vehicle entering the control zone at t0 with assigned merging time tm"""
    id: int
    approach: Approach
    movement: Movement
    t0: float
    v0: float
    tm: float

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id <= 0:
            raise InvalidProblemError(f"vehicle id must be a positive integer, got {self.id!r}")
        if not self.tm > self.t0:
            raise InvalidProblemError(f"vehicle {self.id}: tm ({self.tm}) must be greater than t0 ({self.t0})")

    def boundary(self, geometry: Geometry) -> BoundaryConditions:
        """Traverse the control zone: p0 = 0, pm = L"""
        return BoundaryConditions(t0=self.t0, tm=self.tm, p0=0.0, pm=geometry.L, v0=self.v0)


@dataclass(frozen=True)
class VehiclePlan:
    spec: VehicleSpec
    trajectory: Optional[Trajectory] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.trajectory is not None


@dataclass(frozen=True)
class RearEndViolation:
    leader_id: int
    follower_id: int
    start: float
    end: float
    min_gap: float
    min_margin: float


@dataclass(frozen=True)
class LateralConflict:
    first_id: int
    second_id: int
    start: float
    end: float


@dataclass(frozen=True)
class SafetyReport:
    rear_end_violations: Tuple[RearEndViolation, ...] = ()
    lateral_conflicts: Tuple[LateralConflict, ...] = ()
    assumptions: Tuple[str, ...] = ASSUMPTIONS
    unchecked: Tuple[str, ...] = field(default=())

    @property
    def is_safe(self) -> bool:
        return not (self.rear_end_violations or self.lateral_conflicts or self.unchecked)


# ==================== PLANNING ====================

def plan_all(specs: Sequence[VehicleSpec], geometry: Geometry, limits: Limits) -> List[VehiclePlan]:
    """
    Solve every vehicle independently, in input order.

    Per-vehicle solver failures are recorded on the plan, never raised.

    Raises:
        InvalidProblemError: duplicate vehicle ids
    """
    seen = set()
    for spec in specs:
        if spec.id in seen:
            raise InvalidProblemError(f"duplicate vehicle id {spec.id}")
        seen.add(spec.id)

    plans = []
    for spec in specs:
        try:
            traj = solve(spec.boundary(geometry), limits)
            plans.append(VehiclePlan(spec, trajectory=traj))
            logger.debug("vehicle %d planned: %r", spec.id, traj)
        except TrajectoryError as e:
            logger.warning("vehicle %d could not be planned: %s", spec.id, e)
            plans.append(VehiclePlan(spec, error=f"{type(e).__name__}: {e}"))
    return plans


# ==================== REAR-END ====================

def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Index ranges [i, j] of consecutive True entries"""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def check_rear_end(leader: Trajectory, follower: Trajectory,
                   standstill: Optional[float] = None, headway: Optional[float] = None,
                   samples: int = REAR_END_SAMPLES,
                   leader_id: int = 0, follower_id: int = 0) -> List[RearEndViolation]:
    """
    Gap p_leader - p_follower against standstill + headway * v_follower,
    sampled on the overlap of both horizons.

    Returns:
        One violation per contiguous run of grid points with gap below
        the threshold; empty when the horizons do not overlap
    """
    standstill = Config.STANDSTILL if standstill is None else standstill
    headway = Config.HEADWAY if headway is None else headway
    start = max(leader.bc.t0, follower.bc.t0)
    end = min(leader.bc.tm, follower.bc.tm)
    if end <= start:
        return []

    times = np.linspace(start, end, samples)
    p_lead, _, _, _ = sample(leader, times)
    p_follow, v_follow, _, _ = sample(follower, times)
    gap = p_lead - p_follow
    margin = gap - (standstill + headway * v_follow)

    violations = []
    for i, j in _runs(margin < 0):
        k = i + int(np.argmin(margin[i:j + 1]))
        violations.append(RearEndViolation(
            leader_id=leader_id,
            follower_id=follower_id,
            start=float(times[i]),
            end=float(times[j]),
            min_gap=float(gap[i:j + 1].min()),
            min_margin=float(margin[k]),
        ))
    return violations


# ==================== LATERAL ====================

def paths_conflict(a: VehicleSpec, b: VehicleSpec) -> bool:
    """
    Vehicles from different approaches cross inside the merging zone,
    except straight or right-turning vehicles from opposite approaches.
    Vehicles sharing an approach are handled by the rear-end check.
    """
    if a.approach is b.approach:
        return False
    if a.approach.opposite is b.approach:
        parallel = {Movement.STRAIGHT, Movement.RIGHT}
        return not (a.movement in parallel and b.movement in parallel)
    return True


def occupancy(spec: VehicleSpec, traj: Trajectory, geometry: Geometry) -> Tuple[float, float]:
    """Merging-zone interval [tm, tm + S / v(tm)]"""
    _, v_m, _ = evaluate(traj, traj.bc.tm)
    if v_m <= 0:
        raise DegenerateProblemError(
            f"vehicle {spec.id} reaches the merging zone at speed {v_m:.6g}; occupancy is unbounded"
        )
    return spec.tm, spec.tm + geometry.S / v_m


def check_lateral(specs: Sequence[VehicleSpec], trajectories: Sequence[Trajectory],
                  geometry: Geometry) -> List[LateralConflict]:
    """
    Pairwise occupancy overlap for vehicles on conflicting paths.

    Intervals are treated as open, so touching endpoints do not conflict.
    """
    if len(specs) != len(trajectories):
        raise InvalidProblemError(f"{len(specs)} specs but {len(trajectories)} trajectories")
    windows = [occupancy(spec, traj, geometry) for spec, traj in zip(specs, trajectories)]

    conflicts = []
    for (i, a), (j, b) in combinations(enumerate(specs), 2):
        if not paths_conflict(a, b):
            continue
        start = max(windows[i][0], windows[j][0])
        end = min(windows[i][1], windows[j][1])
        if start < end:
            first, second = sorted((a.id, b.id))
            conflicts.append(LateralConflict(first, second, start, end))
    return conflicts


# ==================== FULL CHECK ====================

def check_scenario(plans: Sequence[VehiclePlan], geometry: Geometry,
                   standstill: Optional[float] = None, headway: Optional[float] = None,
                   samples: int = REAR_END_SAMPLES) -> SafetyReport:
    """
    Safety report over all successfully planned vehicles.

    Same-approach vehicles are paired in order of entry time for the
    rear-end check; every conflicting pair gets the lateral check.
    Vehicles whose occupancy is undefined are listed as unchecked.
    """
    planned = [plan for plan in plans if plan.ok]
    unchecked = [f"vehicle {plan.spec.id}: not planned ({plan.error})" for plan in plans if not plan.ok]

    lanes: Dict[Approach, List[VehiclePlan]] = {}
    for plan in planned:
        lanes.setdefault(plan.spec.approach, []).append(plan)

    rear_end: List[RearEndViolation] = []
    for lane in lanes.values():
        lane.sort(key=lambda plan: (plan.spec.t0, plan.spec.id))
        for leader, follower in zip(lane, lane[1:]):
            rear_end.extend(check_rear_end(
                leader.trajectory, follower.trajectory, standstill, headway, samples,
                leader_id=leader.spec.id, follower_id=follower.spec.id,
            ))

    checkable = []
    for plan in planned:
        try:
            occupancy(plan.spec, plan.trajectory, geometry)
            checkable.append(plan)
        except DegenerateProblemError as e:
            unchecked.append(str(e))

    lateral = check_lateral(
        [plan.spec for plan in checkable],
        [plan.trajectory for plan in checkable],
        geometry,
    )

    report = SafetyReport(
        rear_end_violations=tuple(rear_end),
        lateral_conflicts=tuple(lateral),
        unchecked=tuple(unchecked),
    )
    if not report.is_safe:
        logger.warning("scenario unsafe: %d rear-end, %d lateral, %d unchecked",
                       len(rear_end), len(lateral), len(unchecked))
    return report
