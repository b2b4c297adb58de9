#!/usr/bin/env python3
"""
Tests for trajectory types, evaluation, cost and verification
"""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from core import (
    arc_at,
    costates,
    cost,
    evaluate,
    hamiltonian,
    junction_states,
    sample,
    verify,
)
from models import (
    ActivationPlan,
    ArcKind,
    BoundaryConditions,
    CaseKind,
    ConstraintKind,
    Direction,
    DomainError,
    InvalidProblemError,
    Limits,
    PolyArc,
    Side,
    Trajectory,
)
from unconstrained import solve_unconstrained

WIDE = Limits(u_min=-6.0, u_max=3.0, v_min=0.0, v_max=30.0)


def two_arc_trajectory():
    """Accelerate at 1 m/s^2 for 2 s, then cruise at 12 m/s"""
    bc = BoundaryConditions(t0=0.0, tm=5.0, p0=0.0, pm=58.0, v0=10.0)
    first = PolyArc.accel_pinned(Side.MAX, 1.0, 10.0, 0.0, 0.0, 2.0)
    second = PolyArc.speed_pinned(Side.MAX, 12.0, 22.0, 2.0, 5.0)
    limits = Limits(u_min=-6.0, u_max=1.0, v_min=0.0, v_max=12.0)
    return Trajectory((first, second), bc, limits, switch_times=(2.0,))


# ==================== TYPES ====================

@pytest.mark.parametrize("kwargs", [
    dict(t0=0.0, tm=0.0, p0=0.0, pm=100.0, v0=10.0),
    dict(t0=0.0, tm=10.0, p0=100.0, pm=100.0, v0=10.0),
    dict(t0=0.0, tm=10.0, p0=0.0, pm=100.0, v0=-1.0),
    dict(t0=0.0, tm=math.inf, p0=0.0, pm=100.0, v0=10.0),
])
def test_boundary_conditions_reject_invalid(kwargs):
    with pytest.raises(InvalidProblemError):
        BoundaryConditions(**kwargs)


@pytest.mark.parametrize("kwargs", [
    dict(u_min=1.0, u_max=2.0, v_min=0.0, v_max=21.0),
    dict(u_min=-6.0, u_max=1.4, v_min=21.0, v_max=21.0),
    dict(u_min=-6.0, u_max=1.4, v_min=-1.0, v_max=21.0),
    dict(u_min=-6.0, u_max=math.nan, v_min=0.0, v_max=21.0),
])
def test_limits_reject_invalid(kwargs):
    with pytest.raises(InvalidProblemError):
        Limits(**kwargs)


def test_limits_accept_infinite_bounds_and_relax():
    limits = Limits(u_min=-math.inf, u_max=math.inf, v_min=0.0, v_max=math.inf)
    assert limits.speed_bound(Side.MAX) == math.inf

    relaxed = WIDE.relaxed(ConstraintKind.STATE_MAX, ConstraintKind.CONTROL_MIN)
    assert relaxed.v_max == math.inf
    assert relaxed.u_min == -math.inf
    assert relaxed.u_max == WIDE.u_max


def test_pinned_arcs_carry_no_slope():
    with pytest.raises(InvalidProblemError):
        PolyArc(ArcKind.SPEED_PINNED_MAX, 0.0, 0.5, 21.0, 0.0, 0.0, 1.0)
    with pytest.raises(InvalidProblemError):
        PolyArc(ArcKind.ACCEL_PINNED_MIN, 0.1, -1.0, 21.0, 0.0, 0.0, 1.0)
    with pytest.raises(InvalidProblemError):
        PolyArc(ArcKind.UNCONSTRAINED, 0.0, 0.0, 21.0, 0.0, 1.0, 1.0)


def test_trajectory_must_tile_horizon():
    bc = BoundaryConditions(t0=0.0, tm=5.0, p0=0.0, pm=58.0, v0=10.0)
    first = PolyArc.accel_pinned(Side.MAX, 1.0, 10.0, 0.0, 0.0, 2.0)
    gap = PolyArc.speed_pinned(Side.MAX, 12.0, 22.0, 2.5, 5.0)
    with pytest.raises(InvalidProblemError):
        Trajectory((first, gap), bc, WIDE)
    with pytest.raises(InvalidProblemError):
        Trajectory((first,), bc, WIDE)
    with pytest.raises(InvalidProblemError):
        Trajectory((), bc, WIDE)


def test_activation_plan_mutual_exclusion():
    with pytest.raises(InvalidProblemError):
        ActivationPlan(Direction.DECREASING, True, True, False, False, CaseKind.STATE_ONLY)
    with pytest.raises(InvalidProblemError):
        ActivationPlan(Direction.DECREASING, False, True, False, False, CaseKind.STATE_ONLY)
    with pytest.raises(InvalidProblemError):
        ActivationPlan(Direction.DECREASING, True, False, False, False, CaseKind.BOTH)

    plan = ActivationPlan.build(Direction.INCREASING, True, True)
    assert plan.case is CaseKind.BOTH
    assert plan.active_kinds() == {ConstraintKind.STATE_MIN, ConstraintKind.CONTROL_MIN}


# ==================== EVALUATION ====================

def test_evaluate_at_junction_uses_later_arc():
    traj = two_arc_trajectory()
    p, v, u = evaluate(traj, 2.0)
    assert (p, v, u) == pytest.approx((22.0, 12.0, 0.0))
    assert arc_at(traj, 2.0).kind is ArcKind.SPEED_PINNED_MAX
    assert arc_at(traj, 1.999).kind is ArcKind.ACCEL_PINNED_MAX


def test_evaluate_endpoints_and_outside_horizon():
    traj = two_arc_trajectory()
    assert evaluate(traj, 0.0) == pytest.approx((0.0, 10.0, 1.0))
    assert evaluate(traj, 5.0) == pytest.approx((58.0, 12.0, 0.0))
    with pytest.raises(DomainError):
        evaluate(traj, 5.0 + 1e-6)
    with pytest.raises(DomainError):
        sample(traj, [-0.1, 1.0])


def test_sample_matches_pointwise_evaluation():
    bc = BoundaryConditions(t0=2.0, tm=12.0, p0=5.0, pm=205.0, v0=13.4)
    traj = Trajectory((solve_unconstrained(bc),), bc, WIDE)
    times = np.linspace(bc.t0, bc.tm, 37)
    p, v, u, kinds = sample(traj, times)
    for k, t in enumerate(times):
        assert (p[k], v[k], u[k]) == pytest.approx(evaluate(traj, t), abs=1e-12)
    assert all(kind is ArcKind.UNCONSTRAINED for kind in kinds)


def test_cost_matches_numerical_quadrature():
    bc = BoundaryConditions(t0=0.0, tm=10.0, p0=0.0, pm=200.0, v0=13.4)
    traj = Trajectory((solve_unconstrained(bc),), bc, WIDE)
    assert cost(traj) == pytest.approx(6.534, rel=1e-12)

    times = np.linspace(0.0, 10.0, 2001)
    _, _, u, _ = sample(traj, times)
    assert simpson(0.5 * u ** 2, x=times) == pytest.approx(cost(traj), rel=1e-9)


def test_cost_of_pinned_arcs():
    traj = two_arc_trajectory()
    assert cost(traj) == pytest.approx(1.0)


# ==================== VERIFICATION ====================

def test_verify_clean_trajectory():
    report = verify(two_arc_trajectory(), samples=500)
    assert report.ok
    assert report.junction_jump_v == pytest.approx(0.0, abs=1e-12)
    assert report.terminal_control == 0.0


def test_verify_reports_speed_violation_without_raising():
    bc = BoundaryConditions(t0=0.0, tm=10.0, p0=0.0, pm=200.0, v0=13.4)
    tight = Limits(u_min=-6.0, u_max=3.0, v_min=0.0, v_max=21.0)
    traj = Trajectory((solve_unconstrained(bc),), bc, tight)
    report = verify(traj, samples=500)
    assert not report.ok
    assert report.speed_violation == pytest.approx(2.3, abs=1e-9)
    assert any(line.startswith("speed bound") for line in report.violations)


def test_verify_flags_discontinuity_and_boundary_mismatch():
    bc = BoundaryConditions(t0=0.0, tm=5.0, p0=0.0, pm=60.0, v0=10.0)
    first = PolyArc.accel_pinned(Side.MAX, 1.0, 10.0, 0.0, 0.0, 2.0)
    second = PolyArc.speed_pinned(Side.MAX, 12.5, 22.0, 2.0, 5.0)
    limits = Limits(u_min=-6.0, u_max=1.0, v_min=0.0, v_max=13.0)
    report = verify(Trajectory((first, second), bc, limits), samples=200)
    assert report.junction_jump_v == pytest.approx(0.5)
    assert report.residual_pm == pytest.approx(0.5)
    assert not report.ok


# ==================== COSTATES ====================

def test_unconstrained_costates_and_constant_hamiltonian():
    bc = BoundaryConditions(t0=0.0, tm=10.0, p0=0.0, pm=200.0, v0=13.4)
    arc = solve_unconstrained(bc)
    traj = Trajectory((arc,), bc, WIDE)
    lam_p, lam_v = costates(traj, 3.0)
    assert lam_p == pytest.approx(arc.a)
    assert lam_v == pytest.approx(-arc.state_at(3.0)[2])
    values = [hamiltonian(traj, t) for t in np.linspace(0.0, 10.0, 21)]
    np.testing.assert_allclose(values, values[0], atol=1e-10)


def test_junction_states_listing():
    traj = two_arc_trajectory()
    junctions = junction_states(traj)
    assert len(junctions) == 1
    t, left, right = junctions[0]
    assert t == 2.0
    assert left == pytest.approx(right)
