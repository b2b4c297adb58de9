#!/usr/bin/env python3
"""
Trajectory Planner CLI
Solve, analyze and cross-check single-vehicle instances and verify
intersection scenarios from config files.

Exit codes: 0 ok, 1 config error, 2 infeasible, 3 tolerance exceeded,
4 safety violation.
"""

import argparse
import csv
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from activation import (
    control_active,
    control_threshold,
    excluded_side,
    plan,
    secondary_control_after_state,
    secondary_control_threshold,
    secondary_state_after_control,
    secondary_state_threshold,
    state_active,
    state_threshold,
)
from config import Config
from constrained import control_switch_time, solve as solve_instance, state_switch_time
from core import cost, sample, verify
from instance_config import ConfigError, load_instance, load_scenario
from models import (
    DegenerateProblemError,
    InfeasibleProblemError,
    InvalidProblemError,
    OracleError,
    Trajectory,
    VerificationError,
)
from oracle import collocation_solve, compare as compare_with_grid
from scenario import check_scenario, plan_all
from unconstrained import classify, solve_unconstrained

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_TOLERANCE = 3
EXIT_SAFETY = 4

CSV_HEADER = ("t", "p", "v", "u", "arc_kind")


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _short(x: Optional[float]) -> str:
    return "none" if x is None else format(x, ".6g")


def _flag(x: bool) -> str:
    return "true" if x else "false"


def write_csv(traj: Trajectory, path: Path, samples: int) -> None:
    """Sample a trajectory uniformly and write t,p,v,u,arc_kind rows"""
    times = np.linspace(traj.bc.t0, traj.bc.tm, samples)
    p, v, u, kinds = sample(traj, times)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in zip(times, p, v, u, kinds):
            writer.writerow([_num(row[0]), _num(row[1]), _num(row[2]), _num(row[3]), row[4].value])


class TrajectoryCLI:
    """Command dispatcher; every command returns an exit code"""

    def __init__(self, out_dir: Optional[str] = None, samples: Optional[int] = None, stream=None):
        self.out_dir = Path(out_dir or Config.OUT_DIR)
        self.samples = samples
        self.stream = stream or sys.stdout

    def emit(self, *lines: str) -> None:
        for line in lines:
            print(line, file=self.stream)

    def _output_path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    # ==================== SOLVE ====================

    def solve(self, cfg_path: str) -> int:
        """Write trajectory CSV and summary for one instance"""
        cfg = load_instance(cfg_path)
        started = time.perf_counter()
        traj = solve_instance(cfg.bc, cfg.limits)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        report = verify(traj, tol=Config.VERIFY_TOL)

        lines = [
            f"case={traj.case_plan.case.value}",
            f"direction={traj.case_plan.plan.direction.value}",
            f"arcs={','.join(k.value for k in traj.kinds)}",
            f"switch_times={','.join(_num(t) for t in traj.switch_times) or 'none'}",
            f"cost={_num(cost(traj))}",
        ]
        lines += [f"{key}={_num(value)}" for key, value in report.as_dict().items()]
        lines.append(f"violations={len(report.violations)}")
        lines += [f"diagnostic={note}" for note in traj.diagnostics]
        lines.append(f"elapsed_ms={elapsed_ms:.3f}")

        samples = self.samples or cfg.samples
        write_csv(traj, self._output_path(cfg.csv_name), samples)
        self._output_path(cfg.summary_name).write_text("\n".join(lines) + "\n")
        self.emit(*lines)
        return EXIT_OK

    # ==================== ANALYZE ====================

    def analyze(self, cfg_path: str) -> int:
        """Activation report: predicates, thresholds and the decided case"""
        cfg = load_instance(cfg_path)
        bc, limits = cfg.bc, cfg.limits
        case_plan = plan(bc, limits)
        direction = classify(bc)

        self.emit(f"direction={direction.value} case={case_plan.case.value}")
        excluded = ",".join(sorted(k.value for k in excluded_side(direction)))
        self.emit(f"exclusion: excluded={excluded}")
        if case_plan.side is None:
            return EXIT_OK

        state = state_active(bc, limits)
        control = control_active(bc, limits)
        self.emit(
            f"state_bound: threshold={_short(state_threshold(bc, limits))} active={_flag(state)}",
            f"control_bound: threshold={_short(control_threshold(bc, limits))} "
            f"u0={_short(solve_unconstrained(bc).b)} active={_flag(control)}",
        )
        side = case_plan.side
        if state and not control:
            try:
                tau_s = state_switch_time(bc, limits, side)
            except DegenerateProblemError as e:
                self.emit(f"control_after_state: undefined ({e})")
            else:
                self.emit(
                    f"control_after_state: tau_s={_short(tau_s)} "
                    f"threshold={_short(secondary_control_threshold(bc, limits, tau_s))} "
                    f"active={_flag(secondary_control_after_state(bc, limits, tau_s))}"
                )
        if control and not state:
            try:
                tau_c = control_switch_time(bc, limits, side)
            except InfeasibleProblemError as e:
                self.emit(f"state_after_control: undefined ({e})")
            else:
                self.emit(
                    f"state_after_control: tau_c={_short(tau_c)} "
                    f"threshold={_short(secondary_state_threshold(bc, limits, tau_c))} "
                    f"active={_flag(secondary_state_after_control(bc, limits, tau_c))}"
                )
        self.emit(
            f"estimates: tau_c={_short(case_plan.tau_c_estimate)} tau_s={_short(case_plan.tau_s_estimate)}",
            *(f"rationale: {line}" for line in case_plan.rationale),
        )
        return EXIT_OK

    # ==================== COMPARE ====================

    def compare(self, cfg_path: str, grid: Optional[int] = None) -> int:
        """Analytic solution against the collocation QP"""
        cfg = load_instance(cfg_path)
        N = grid or cfg.grid
        try:
            traj = solve_instance(cfg.bc, cfg.limits)
        except InfeasibleProblemError as e:
            self.emit(f"analytic=infeasible ({e})")
            try:
                collocation_solve(cfg.bc, cfg.limits, N, cfg.solver)
            except InfeasibleProblemError:
                self.emit("oracle=infeasible", "agreement=true")
                return EXIT_INFEASIBLE
            self.emit("oracle=feasible", "agreement=false")
            return EXIT_TOLERANCE

        sol = collocation_solve(cfg.bc, cfg.limits, N, cfg.solver)
        report = compare_with_grid(traj, sol)
        self.emit(
            f"case={traj.case_plan.case.value}",
            f"grid={N}",
            f"cost_analytic={_num(report.cost_analytic)}",
            f"cost_oracle={_num(report.cost_grid)}",
            f"relative_cost_gap={report.relative_cost_gap:.6e}",
            f"max_speed_gap={report.max_speed_gap:.6e}",
            f"max_position_gap={report.max_position_gap:.6e}",
            f"active_analytic={','.join(sorted(k.value for k in report.analytic_active)) or 'none'}",
            f"active_oracle={','.join(sorted(k.value for k in report.grid_active)) or 'none'}",
            f"active_set_agrees={_flag(report.active_set_agrees)}",
            f"oracle_solve_time={sol.solve_time:.4f}",
            f"within_tolerance={_flag(report.within())}",
        )
        return EXIT_OK if report.within() else EXIT_TOLERANCE

    # ==================== SCENARIO ====================

    def scenario(self, cfg_path: str) -> int:
        """Plan all vehicles, write their CSVs and a safety report"""
        cfg = load_scenario(cfg_path)
        plans = plan_all(cfg.vehicles, cfg.geometry, cfg.limits)
        samples = self.samples or cfg.samples
        for vp in plans:
            if vp.ok:
                write_csv(vp.trajectory, self._output_path(f"{cfg.prefix}_vehicle{vp.spec.id}.csv"), samples)

        report = check_scenario(plans, cfg.geometry, cfg.standstill, cfg.headway, cfg.check_samples)
        lines = [f"vehicles={len(plans)} planned={sum(vp.ok for vp in plans)}"]
        lines += [f"assumption: {text}" for text in report.assumptions]
        for vp in plans:
            if not vp.ok:
                lines.append(f"plan_error id={vp.spec.id} {vp.error}")
        for r in report.rear_end_violations:
            lines.append(
                f"rear_end leader={r.leader_id} follower={r.follower_id} start={r.start:.6g} "
                f"end={r.end:.6g} min_gap={r.min_gap:.6g} min_margin={r.min_margin:.6g}"
            )
        for c in report.lateral_conflicts:
            lines.append(f"lateral ids={c.first_id},{c.second_id} start={c.start:.6g} end={c.end:.6g}")
        for note in report.unchecked:
            lines.append(f"unchecked: {note}")
        lines.append(f"safe={_flag(report.is_safe)}")

        self._output_path(cfg.report_name).write_text("\n".join(lines) + "\n")
        self.emit(*lines)

        if report.rear_end_violations or report.lateral_conflicts:
            return EXIT_SAFETY
        if any(not vp.ok for vp in plans):
            return EXIT_INFEASIBLE
        return EXIT_OK if report.is_safe else EXIT_SAFETY


def _global_options(parser: argparse.ArgumentParser, default=None) -> None:
    parser.add_argument("--out-dir", default=default, help="directory for CSV/summary output")
    parser.add_argument("--samples", type=int, default=default, help="CSV samples per trajectory")
    parser.add_argument("--verbose", "-v", action="store_true",
                        default=False if default is None else default, help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cav-ocp",
        description="Closed-form minimum-energy trajectories with speed and acceleration bounds",
    )
    _global_options(parser)
    # same options after the command; suppressed defaults keep the values given before it
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "solve one instance and write CSV + summary"),
        ("analyze", "report activation checks without solving"),
        ("compare", "compare the analytic solution with the collocation QP"),
        ("scenario", "plan an intersection scenario and check safety"),
    ):
        cmd = sub.add_parser(name, help=text, parents=[common])
        cmd.add_argument("config", help="config file")
        if name == "compare":
            cmd.add_argument("--grid", type=int, default=None, help="QP grid size N (>= 100)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run CLI application"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else Config.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.samples is not None and args.samples < 2:
        print("⚠ Error: --samples must be at least 2", file=sys.stderr)
        return EXIT_CONFIG

    logger.debug("%s %s", args.command, args.config)
    cli = TrajectoryCLI(out_dir=args.out_dir, samples=args.samples)
    try:
        if args.command == "solve":
            return cli.solve(args.config)
        if args.command == "analyze":
            return cli.analyze(args.config)
        if args.command == "compare":
            return cli.compare(args.config, args.grid)
        return cli.scenario(args.config)
    except (ConfigError, InvalidProblemError) as e:
        print(f"⚠ Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleProblemError, DegenerateProblemError) as e:
        print(f"⚠ Infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (VerificationError, OracleError) as e:
        print(f"⚠ Error: {e}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as e:
        print(f"⚠ Error: cannot write output: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
