"""
Trajectory Planner Domain Models
Immutable value types shared by every solver module
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple


# ==================== ERRORS ====================

class TrajectoryError(Exception):
    """Base class for every error raised by the planner"""


class InvalidProblemError(TrajectoryError, ValueError):
    """Input data violates a type invariant"""


class DomainError(TrajectoryError, ValueError):
    """Evaluation requested outside the planning horizon"""


class InfeasibleProblemError(TrajectoryError):
    """No admissible trajectory exists for the planned arc structure"""


class DegenerateProblemError(TrajectoryError):
    """A closed form hit a zero denominator or has no real root"""


class OracleError(TrajectoryError):
    """The reference QP failed for a reason other than infeasibility"""


class VerificationError(TrajectoryError):
    """A solver produced a trajectory that fails its own checks"""


# ==================== ENUMS ====================

class ArcKind(enum.Enum):
    """Which bound (if any) an arc rides"""
    UNCONSTRAINED = "Unconstrained"
    SPEED_PINNED_MAX = "SpeedPinnedMax"
    SPEED_PINNED_MIN = "SpeedPinnedMin"
    ACCEL_PINNED_MAX = "AccelPinnedMax"
    ACCEL_PINNED_MIN = "AccelPinnedMin"

    @property
    def is_speed_pinned(self) -> bool:
        return self in (ArcKind.SPEED_PINNED_MAX, ArcKind.SPEED_PINNED_MIN)

    @property
    def is_accel_pinned(self) -> bool:
        return self in (ArcKind.ACCEL_PINNED_MAX, ArcKind.ACCEL_PINNED_MIN)


class Direction(enum.Enum):
    """Slope sign of the unconstrained control profile"""
    DECREASING = "Decreasing"
    INCREASING = "Increasing"
    CRUISE = "Cruise"


class Side(enum.Enum):
    """Upper or lower side of the box constraints"""
    MAX = "max"
    MIN = "min"


class ConstraintKind(enum.Enum):
    """One of the four box constraints"""
    STATE_MAX = "state_max"
    STATE_MIN = "state_min"
    CONTROL_MAX = "control_max"
    CONTROL_MIN = "control_min"


class CaseKind(enum.Enum):
    """Arc structure of the optimal solution"""
    UNCONSTRAINED = "Unconstrained"
    STATE_ONLY = "StateOnly"
    CONTROL_ONLY = "ControlOnly"
    BOTH = "Both"


# ==================== PROBLEM DATA ====================

@dataclass(frozen=True)
class BoundaryConditions:
    """Entry/exit data of one vehicle's planning problem (terminal speed is free)"""
    t0: float
    tm: float
    p0: float
    pm: float
    v0: float

    def __post_init__(self):
        for name in ("t0", "tm", "p0", "pm", "v0"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidProblemError(f"{name} must be finite, got {getattr(self, name)}")
        if not self.tm > self.t0:
            raise InvalidProblemError(f"tm ({self.tm}) must be greater than t0 ({self.t0})")
        if not self.pm > self.p0:
            raise InvalidProblemError(f"pm ({self.pm}) must be greater than p0 ({self.p0})")
        if self.v0 < 0:
            raise InvalidProblemError(f"v0 must be non-negative, got {self.v0}")

    @property
    def horizon(self) -> float:
        return self.tm - self.t0

    @property
    def distance(self) -> float:
        return self.pm - self.p0

    @property
    def average_speed(self) -> float:
        return self.distance / self.horizon


@dataclass(frozen=True)
class Limits:
    """Acceleration and speed box bounds; infinite values mean 'no bound'"""
    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if any(math.isnan(x) for x in (self.u_min, self.u_max, self.v_min, self.v_max)):
            raise InvalidProblemError("limits must not be NaN")
        if not self.u_min < 0 < self.u_max:
            raise InvalidProblemError(
                f"need u_min < 0 < u_max, got u_min={self.u_min}, u_max={self.u_max}"
            )
        if not (math.isfinite(self.v_min) and 0 <= self.v_min < self.v_max):
            raise InvalidProblemError(
                f"need 0 <= v_min < v_max, got v_min={self.v_min}, v_max={self.v_max}"
            )

    def speed_bound(self, side: Side) -> float:
        return self.v_max if side is Side.MAX else self.v_min

    def control_bound(self, side: Side) -> float:
        return self.u_max if side is Side.MAX else self.u_min

    def relaxed(self, *kinds: ConstraintKind) -> "Limits":
        """Copy with the named bounds removed (v_min relaxes to 0)"""
        changes = {}
        for kind in kinds:
            if kind is ConstraintKind.STATE_MAX:
                changes["v_max"] = math.inf
            elif kind is ConstraintKind.STATE_MIN:
                changes["v_min"] = 0.0
            elif kind is ConstraintKind.CONTROL_MAX:
                changes["u_max"] = math.inf
            elif kind is ConstraintKind.CONTROL_MIN:
                changes["u_min"] = -math.inf
        return replace(self, **changes)


# ==================== TRAJECTORY PIECES ====================

@dataclass(frozen=True)
class PolyArc:
    """
    One polynomial segment of a trajectory.

    Coefficients live in arc-local time s = t - t_start:
        u = a*s + b
        v = a*s^2/2 + b*s + c
        p = a*s^3/6 + b*s^2/2 + c*s + d
    so c and d are the speed and position at t_start.
    """
    kind: ArcKind
    a: float
    b: float
    c: float
    d: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise InvalidProblemError(
                f"arc needs t_start < t_end, got [{self.t_start}, {self.t_end}]"
            )
        if self.kind.is_speed_pinned and (self.a != 0.0 or self.b != 0.0):
            raise InvalidProblemError("speed-pinned arcs carry zero control")
        if self.kind.is_accel_pinned and self.a != 0.0:
            raise InvalidProblemError("acceleration-pinned arcs carry constant control")

    @classmethod
    def speed_pinned(cls, side: Side, speed: float, position: float,
                     t_start: float, t_end: float) -> "PolyArc":
        kind = ArcKind.SPEED_PINNED_MAX if side is Side.MAX else ArcKind.SPEED_PINNED_MIN
        return cls(kind, 0.0, 0.0, speed, position, t_start, t_end)

    @classmethod
    def accel_pinned(cls, side: Side, control: float, speed: float, position: float,
                     t_start: float, t_end: float) -> "PolyArc":
        kind = ArcKind.ACCEL_PINNED_MAX if side is Side.MAX else ArcKind.ACCEL_PINNED_MIN
        return cls(kind, 0.0, control, speed, position, t_start, t_end)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def state_at(self, t: float) -> Tuple[float, float, float]:
        """(p, v, u) at absolute time t; no range check"""
        s = t - self.t_start
        u = self.a * s + self.b
        v = 0.5 * self.a * s * s + self.b * s + self.c
        p = self.a * s ** 3 / 6.0 + 0.5 * self.b * s * s + self.c * s + self.d
        return p, v, u

    def end_state(self) -> Tuple[float, float, float]:
        return self.state_at(self.t_end)


@dataclass(frozen=True)
class ActivationPlan:
    """Which bounds the activation checks declared active"""
    direction: Direction
    state_max_active: bool
    state_min_active: bool
    control_max_active: bool
    control_min_active: bool
    case: CaseKind

    def __post_init__(self):
        max_side = self.state_max_active or self.control_max_active
        min_side = self.state_min_active or self.control_min_active
        if max_side and min_side:
            raise InvalidProblemError("max-side and min-side bounds cannot both be active")
        if self.direction is Direction.DECREASING and min_side:
            raise InvalidProblemError("a decreasing profile cannot activate min-side bounds")
        if self.direction is Direction.INCREASING and max_side:
            raise InvalidProblemError("an increasing profile cannot activate max-side bounds")
        if self.direction is Direction.CRUISE and (max_side or min_side):
            raise InvalidProblemError("a cruise profile activates no bound")
        state = self.state_max_active or self.state_min_active
        control = self.control_max_active or self.control_min_active
        expected = {
            (False, False): CaseKind.UNCONSTRAINED,
            (True, False): CaseKind.STATE_ONLY,
            (False, True): CaseKind.CONTROL_ONLY,
            (True, True): CaseKind.BOTH,
        }[(state, control)]
        if expected is not self.case:
            raise InvalidProblemError(f"flags imply {expected.value}, got {self.case.value}")

    @classmethod
    def build(cls, direction: Direction, state: bool, control: bool) -> "ActivationPlan":
        """Place the state/control flags on the side the direction allows"""
        upper = direction is Direction.DECREASING
        lower = direction is Direction.INCREASING
        case = {
            (False, False): CaseKind.UNCONSTRAINED,
            (True, False): CaseKind.STATE_ONLY,
            (False, True): CaseKind.CONTROL_ONLY,
            (True, True): CaseKind.BOTH,
        }[(state, control)]
        return cls(
            direction=direction,
            state_max_active=state and upper,
            state_min_active=state and lower,
            control_max_active=control and upper,
            control_min_active=control and lower,
            case=case,
        )

    @property
    def side(self) -> Optional[Side]:
        if self.direction is Direction.DECREASING:
            return Side.MAX
        if self.direction is Direction.INCREASING:
            return Side.MIN
        return None

    def active_kinds(self) -> frozenset:
        flags = {
            ConstraintKind.STATE_MAX: self.state_max_active,
            ConstraintKind.STATE_MIN: self.state_min_active,
            ConstraintKind.CONTROL_MAX: self.control_max_active,
            ConstraintKind.CONTROL_MIN: self.control_min_active,
        }
        return frozenset(kind for kind, on in flags.items() if on)


@dataclass(frozen=True)
class CasePlan:
    """Activation decision plus the switch-time estimates behind it"""
    plan: ActivationPlan
    tau_s_estimate: Optional[float] = None
    tau_c_estimate: Optional[float] = None
    rationale: Tuple[str, ...] = ()

    @property
    def case(self) -> CaseKind:
        return self.plan.case

    @property
    def side(self) -> Optional[Side]:
        return self.plan.side


@dataclass(frozen=True)
class Trajectory:
    """Contiguous sequence of arcs covering [t0, tm]"""
    arcs: Tuple[PolyArc, ...]
    bc: BoundaryConditions
    limits: Limits
    switch_times: Tuple[float, ...] = ()
    case_plan: Optional[CasePlan] = None
    diagnostics: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        arcs = tuple(self.arcs)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "switch_times", tuple(self.switch_times))
        if not arcs:
            raise InvalidProblemError("a trajectory needs at least one arc")
        if arcs[0].t_start != self.bc.t0 or arcs[-1].t_end != self.bc.tm:
            raise InvalidProblemError(
                f"arcs cover [{arcs[0].t_start}, {arcs[-1].t_end}], "
                f"horizon is [{self.bc.t0}, {self.bc.tm}]"
            )
        for left, right in zip(arcs, arcs[1:]):
            if left.t_end != right.t_start:
                raise InvalidProblemError(
                    f"gap or overlap between arcs at {left.t_end} / {right.t_start}"
                )

    @property
    def kinds(self) -> Tuple[ArcKind, ...]:
        return tuple(arc.kind for arc in self.arcs)

    def active_kinds(self) -> frozenset:
        """Bounds ridden by at least one arc"""
        mapping = {
            ArcKind.SPEED_PINNED_MAX: ConstraintKind.STATE_MAX,
            ArcKind.SPEED_PINNED_MIN: ConstraintKind.STATE_MIN,
            ArcKind.ACCEL_PINNED_MAX: ConstraintKind.CONTROL_MAX,
            ArcKind.ACCEL_PINNED_MIN: ConstraintKind.CONTROL_MIN,
        }
        return frozenset(mapping[k] for k in self.kinds if k in mapping)

    def with_diagnostics(self, *notes: str) -> "Trajectory":
        return replace(self, diagnostics=self.diagnostics + tuple(notes))

    def __repr__(self):
        kinds = ",".join(k.value for k in self.kinds)
        return f"<Trajectory(arcs=[{kinds}], t=[{self.bc.t0}, {self.bc.tm}])>"
