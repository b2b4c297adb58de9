#!/usr/bin/env python3
"""
Tests for intersection scenario planning and safety checks
"""

import pytest

from core import evaluate
from models import (
    BoundaryConditions,
    DegenerateProblemError,
    InvalidProblemError,
    Limits,
    PolyArc,
    Side,
    Trajectory,
)
from scenario import (
    Approach,
    Geometry,
    Movement,
    VehicleSpec,
    check_lateral,
    check_rear_end,
    check_scenario,
    occupancy,
    paths_conflict,
    plan_all,
)
from unconstrained import solve_unconstrained

WIDE = Limits(u_min=-6.0, u_max=3.0, v_min=0.0, v_max=30.0)
PINNED = Limits(u_min=-6.0, u_max=5.0, v_min=0.0, v_max=21.0)
GEOMETRY = Geometry(L=200.0, S=30.0)


def free_trajectory(t0, tm, p0, pm, v0=13.4):
    bc = BoundaryConditions(t0=t0, tm=tm, p0=p0, pm=pm, v0=v0)
    return Trajectory((solve_unconstrained(bc),), bc, WIDE)


def vehicle(id, approach="north", movement="straight", t0=0.0, tm=10.0, v0=13.4):
    return VehicleSpec(id, Approach(approach), Movement(movement), t0, v0, tm)


def test_geometry_and_vehicle_validation():
    with pytest.raises(InvalidProblemError):
        Geometry(L=0.0, S=30.0)
    with pytest.raises(InvalidProblemError):
        Geometry(L=200.0, S=-1.0)
    with pytest.raises(InvalidProblemError):
        vehicle(0)
    with pytest.raises(InvalidProblemError):
        vehicle(1, t0=10.0, tm=10.0)


# ==================== PLANNING ====================

def test_plan_all_single_vehicle_matches_direct_solve():
    plans = plan_all([vehicle(1)], GEOMETRY, WIDE)
    assert len(plans) == 1 and plans[0].ok
    assert evaluate(plans[0].trajectory, 10.0)[:2] == pytest.approx((200.0, 23.3))


def test_plan_all_records_failures():
    plans = plan_all([vehicle(1), vehicle(2, t0=1.0, tm=3.0)], GEOMETRY, WIDE)
    assert plans[0].ok
    assert not plans[1].ok
    assert "InfeasibleProblemError" in plans[1].error


def test_plan_all_rejects_duplicate_ids():
    with pytest.raises(InvalidProblemError):
        plan_all([vehicle(1), vehicle(1, approach="east")], GEOMETRY, WIDE)


def test_plan_all_order_independent():
    specs = [vehicle(1), vehicle(2, approach="east", t0=2.0, tm=12.0), vehicle(3, t0=4.0, tm=15.0)]
    forward = plan_all(specs, GEOMETRY, WIDE)
    backward = plan_all(list(reversed(specs)), GEOMETRY, WIDE)
    assert [p.trajectory for p in forward] == [p.trajectory for p in reversed(backward)]


# ==================== REAR-END ====================

def test_constant_offset_has_no_rear_end_violation():
    leader = free_trajectory(0.0, 10.0, 50.0, 250.0)
    follower = free_trajectory(0.0, 10.0, 0.0, 200.0)
    assert check_rear_end(leader, follower, standstill=5.0, headway=0.5) == []


def test_overtake_reported():
    leader = free_trajectory(0.0, 10.0, 10.0, 160.0)
    follower = free_trajectory(0.0, 10.0, 0.0, 200.0)
    violations = check_rear_end(leader, follower, standstill=5.0, headway=0.5, leader_id=1, follower_id=2)
    assert len(violations) == 1
    violation = violations[0]
    assert (violation.leader_id, violation.follower_id) == (1, 2)
    assert violation.start == 0.0
    assert violation.end == pytest.approx(10.0)
    assert violation.min_gap == pytest.approx(-40.0)
    assert violation.min_margin < violation.min_gap


def test_rear_end_consistent_on_finer_grid():
    leader = free_trajectory(0.0, 10.0, 10.0, 160.0)
    follower = free_trajectory(0.0, 10.0, 0.0, 200.0)
    coarse = check_rear_end(leader, follower, 5.0, 0.5, samples=1000)
    fine = check_rear_end(leader, follower, 5.0, 0.5, samples=10000)
    assert len(coarse) == len(fine)
    assert coarse[0].min_gap == pytest.approx(fine[0].min_gap, abs=1e-6)


def test_disjoint_horizons_are_not_checked():
    leader = free_trajectory(0.0, 10.0, 0.0, 200.0)
    follower = free_trajectory(10.0, 20.0, 0.0, 200.0)
    assert check_rear_end(leader, follower, 5.0, 0.5) == []


def test_same_lane_three_second_spacing_is_safe():
    plans = plan_all([vehicle(1), vehicle(2, t0=3.0, tm=13.0)], GEOMETRY, WIDE)
    report = check_scenario(plans, GEOMETRY, standstill=5.0, headway=0.5)
    assert report.rear_end_violations == ()
    assert report.lateral_conflicts == ()
    assert report.is_safe


# ==================== LATERAL ====================

@pytest.mark.parametrize("a, b, expected", [
    (("north", "straight"), ("east", "straight"), True),
    (("north", "straight"), ("south", "straight"), False),
    (("north", "right"), ("south", "straight"), False),
    (("north", "left"), ("south", "straight"), True),
    (("west", "right"), ("north", "left"), True),
    (("north", "left"), ("north", "straight"), False),
])
def test_paths_conflict(a, b, expected):
    first = vehicle(1, *a)
    second = vehicle(2, *b)
    assert paths_conflict(first, second) is expected
    assert paths_conflict(second, first) is expected


def test_occupancy_at_bound_speed():
    spec = vehicle(1)
    plans = plan_all([spec], GEOMETRY, PINNED)
    start, end = occupancy(spec, plans[0].trajectory, GEOMETRY)
    assert start == 10.0
    assert end - start == pytest.approx(30.0 / 21.0)


def test_occupancy_degenerate_at_zero_speed():
    bc = BoundaryConditions(t0=0.0, tm=10.0, p0=0.0, pm=1.0, v0=0.0)
    stopped = Trajectory((PolyArc.speed_pinned(Side.MIN, 0.0, 0.0, 0.0, 10.0),), bc, WIDE)
    with pytest.raises(DegenerateProblemError):
        occupancy(vehicle(1, v0=0.0), stopped, GEOMETRY)


def test_crossing_vehicles_with_equal_merging_time_conflict():
    specs = [vehicle(1), vehicle(2, approach="east")]
    plans = plan_all(specs, GEOMETRY, WIDE)
    conflicts = check_lateral(specs, [p.trajectory for p in plans], GEOMETRY)
    assert len(conflicts) == 1
    conflict = conflicts[0]
    assert (conflict.first_id, conflict.second_id) == (1, 2)
    assert conflict.start == 10.0
    assert conflict.end == pytest.approx(10.0 + 30.0 / 23.3)

    report = check_scenario(plans, GEOMETRY)
    assert not report.is_safe
    assert report.lateral_conflicts == tuple(conflicts)


def test_lateral_check_is_symmetric():
    specs = [vehicle(1), vehicle(2, approach="east"), vehicle(3, approach="west", movement="left", t0=0.5, tm=10.5)]
    trajectories = [p.trajectory for p in plan_all(specs, GEOMETRY, WIDE)]
    forward = check_lateral(specs, trajectories, GEOMETRY)
    backward = check_lateral(specs[::-1], trajectories[::-1], GEOMETRY)
    key = lambda c: (c.first_id, c.second_id)
    assert sorted(forward, key=key) == sorted(backward, key=key)


@pytest.mark.parametrize("tm_second, conflict", [(11.5, False), (11.4, True)])
def test_lateral_overlap_follows_occupancy_length(tm_second, conflict):
    specs = [vehicle(1), vehicle(2, approach="east", t0=tm_second - 10.0, tm=tm_second)]
    trajectories = [p.trajectory for p in plan_all(specs, GEOMETRY, PINNED)]
    assert bool(check_lateral(specs, trajectories, GEOMETRY)) is conflict


def test_scenario_lists_unplanned_vehicles_as_unchecked():
    plans = plan_all([vehicle(1), vehicle(2, approach="east", t0=1.0, tm=3.0)], GEOMETRY, WIDE)
    report = check_scenario(plans, GEOMETRY)
    assert report.rear_end_violations == () and report.lateral_conflicts == ()
    assert len(report.unchecked) == 1
    assert not report.is_safe
    assert any("constant speed" in text for text in report.assumptions)
