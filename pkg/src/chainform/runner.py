"""Schedule execution shared by the CLI and the session service.

A SimRun owns the live chain states for one scenario and advances them
move by move: each move expands from the driven point's current position,
every frame is recorded, and (when the schedule says so) the chain is
settled to quiescence with the move's point still pinned. Both the batch
CLI and the interactive service drive this one code path, which is what
keeps their frame streams identical for identical command sequences.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .actuation import ActuationSchedule, WaypointMove, expand_move, nearest_point_id
from .chain import (
    ChainState,
    ComplianceRate,
    advance_frame,
    compliance_rate,
    run_until_quiescent,
)
from .errors import NonConvergenceError, ScheduleError
from .geometry import Point2, dist
from .metrics import (
    decay_profile,
    displacements,
    lateral_deviations,
    length_audit,
    segment_active_passive,
    shape_error,
    wave_report,
)
from .scenario import (
    FrameRecord,
    ScenarioFile,
    chain_offsets,
    global_point_id,
    snapshot_chains,
    split_global_id,
)

FrameCallback = Callable[[FrameRecord], None]


@dataclass
class Episode:
    """One executed move: snapshots around it plus bookkeeping."""

    move_index: int
    chain_index: int
    local_point: int
    global_point: int
    drive_frames: int
    settle_sweeps: int | None
    before: list[ChainState]
    after: list[ChainState]


class SimRun:
    """Live execution state for one scenario."""

    def __init__(self, scenario: ScenarioFile, on_frame: FrameCallback | None = None):
        self.scenario = scenario
        self.chains: list[ChainState] = scenario.build_chains()
        self.initial_chains: list[ChainState] = [c.copy() for c in self.chains]
        self.sizes = [len(c.points) for c in self.chains]
        self.offsets = chain_offsets(self.sizes)
        self.compliance: ComplianceRate = compliance_rate(
            scenario.material, scenario.solver.rest_length, scenario.solver
        )
        self.frames: list[FrameRecord] = []
        self.episodes: list[Episode] = []
        self.on_frame = on_frame
        self._record(driven=None)

    # -- recording ---------------------------------------------------------

    def _record(self, driven: int | None) -> FrameRecord:
        rec = snapshot_chains(len(self.frames), self.chains, driven)
        self.frames.append(rec)
        if self.on_frame is not None:
            self.on_frame(rec)
        return rec

    # -- execution ---------------------------------------------------------

    def execute_move(self, chain_index: int, move: WaypointMove,
                     settle: bool | None = None) -> Episode:
        """Drag one point through its waypoints, then optionally settle.

        Expansion starts from the point's current position, so a point
        displaced by earlier episodes is dragged from where it actually
        is; every leg still ends bit-exactly on its waypoint.
        """
        if not (0 <= chain_index < len(self.chains)):
            raise ScheduleError(f"chain index {chain_index} out of range")
        chain = self.chains[chain_index]
        if not (0 <= move.point_id < len(chain.points)):
            raise ScheduleError(
                f"move references point {move.point_id} on chain {chain_index} "
                f"({len(chain.points)} points)"
            )
        if settle is None:
            settle = self.scenario.schedule.settle_between
        before = [c.copy() for c in self.chains]
        gid = self.offsets[chain_index] + move.point_id
        params = self.scenario.solver
        targets = expand_move(move, chain.points[move.point_id])
        for target in targets:
            self.chains[chain_index] = advance_frame(
                self.chains[chain_index], {move.point_id: target}, self.compliance, params
            )
            self._record(driven=gid)
        sweeps: int | None = None
        if settle:
            settled, sweeps = run_until_quiescent(
                self.chains[chain_index], self.compliance, params, {move.point_id}
            )
            self.chains[chain_index] = settled
            self._record(driven=None)
        episode = Episode(
            move_index=len(self.episodes),
            chain_index=chain_index,
            local_point=move.point_id,
            global_point=gid,
            drive_frames=len(targets),
            settle_sweeps=sweeps,
            before=before,
            after=[c.copy() for c in self.chains],
        )
        self.episodes.append(episode)
        return episode

    def step(self) -> FrameRecord:
        """Advance one free frame (no pinned points)."""
        for i, chain in enumerate(self.chains):
            self.chains[i] = advance_frame(chain, {}, self.compliance, self.scenario.solver)
        return self._record(driven=None)

    def run_schedule(self) -> None:
        for move, ci in zip(self.scenario.schedule.moves, self.scenario.move_chains):
            self.execute_move(ci, move)

    # -- reporting -----------------------------------------------------------

    def driven_global_ids(self) -> list[int]:
        seen: list[int] = []
        for ep in self.episodes:
            if ep.global_point not in seen:
                seen.append(ep.global_point)
        return seen

    def displacement_cap_ok(self, tol: float = 1e-9) -> bool:
        """Every never-driven point moved no farther than its nearest driven point."""
        driven = self.driven_global_ids()
        for ci, (before, after) in enumerate(zip(self.initial_chains, self.chains)):
            local_driven = [
                split_global_id(self.sizes, g)[1]
                for g in driven
                if split_global_id(self.sizes, g)[0] == ci
            ]
            disp = displacements(before, after)
            if not local_driven:
                if any(d > tol for d in disp):
                    return False
                continue
            for i, d in enumerate(disp):
                if i in local_driven:
                    continue
                nearest = min(local_driven, key=lambda g: abs(g - i))
                if d > disp[nearest] + tol:
                    return False
        return True

    def wave_reports(self, chains: Sequence[ChainState] | None = None) -> list[dict]:
        """Wave geometry for every driven point, vs the initial chains."""
        chains = list(chains) if chains is not None else self.chains
        reports = []
        for gid in self.driven_global_ids():
            ci, local = split_global_id(self.sizes, gid)
            w = wave_report(
                self.initial_chains[ci], chains[ci], local,
                self.scenario.solver.threshold, self.scenario.solver.rest_length,
            )
            signed_peak = lateral_deviations(self.initial_chains[ci], chains[ci])[w.peak_point_id]
            reports.append({
                "stress_point": gid,
                "extent_um": w.extent,
                "amplitude_um": w.amplitude,
                "peak_deviation_um": signed_peak,
                "support_um": [w.support[0], w.support[1]],
                "center_um": [w.center.x, w.center.y],
                "peak_point": self.offsets[ci] + w.peak_point_id,
            })
        return reports

    def metrics_report(self) -> dict:
        s = self.scenario
        episodes = []
        for ep in self.episodes:
            seg = segment_active_passive(
                ep.before[ep.chain_index], ep.after[ep.chain_index],
                s.solver.threshold, s.solver.rest_length,
            )
            decay = decay_profile(
                ep.before[ep.chain_index], ep.after[ep.chain_index], ep.local_point
            )
            episodes.append({
                "move_index": ep.move_index,
                "chain": ep.chain_index,
                "driven_point": ep.global_point,
                "drive_frames": ep.drive_frames,
                "settle_sweeps": ep.settle_sweeps,
                "segmentation": {
                    "active_count": len(seg.active_point_ids),
                    "active_points": sorted(self.offsets[ep.chain_index] + i
                                            for i in seg.active_point_ids),
                    "threshold_point": (None if seg.threshold_point_id is None
                                        else self.offsets[ep.chain_index] + seg.threshold_point_id),
                    "stress_point": (None if seg.stress_point_id is None
                                     else self.offsets[ep.chain_index] + seg.stress_point_id),
                },
                "decay_fit": (None if decay.fit_slope is None else {
                    "slope_per_um": decay.fit_slope,
                    "intercept": decay.fit_intercept,
                    "r2": decay.fit_r2,
                }),
                "waves": self.wave_reports(ep.after),
            })

        audits = []
        for chain in self.chains:
            total, max_elong, min_sep = length_audit(
                chain, s.solver.rest_length, s.solver.threshold
            )
            audits.append({
                "total_um": total,
                "max_elongation_um": max_elong,
                "min_separation_um": min_sep,
            })

        driven = set(self.driven_global_ids())
        max_dev = 0.0
        for ci, chain in enumerate(self.chains):
            dev = lateral_deviations(self.initial_chains[ci], chain)
            for i, d in enumerate(dev):
                if self.offsets[ci] + i in driven:
                    continue
                max_dev = max(max_dev, abs(d))

        waves = self.wave_reports()
        gaps = wave_gaps(waves)

        report: dict = {
            "scenario": s.name,
            "quiescent": all(
                c.is_quiescent(s.solver.threshold) for c in self.chains
            ),
            "episodes": episodes,
            "waves": waves,
            "wave_gaps": gaps,
            "final": {
                "length_audit": audits,
                "max_lateral_deviation_um": max_dev,
                "displacement_cap_ok": self.displacement_cap_ok(),
                "driven_final_positions": {
                    str(g): [self._point(g).x, self._point(g).y]
                    for g in self.driven_global_ids()
                },
            },
        }
        if s.outputs.target_polyline is not None:
            err = shape_error(self._merged_chain(), s.outputs.target_polyline)
            report["final"]["shape_error"] = {"rms_um": err.rms, "hausdorff_um": err.hausdorff}
        else:
            report["final"]["shape_error"] = None
        return report

    def _point(self, gid: int) -> Point2:
        ci, local = split_global_id(self.sizes, gid)
        return self.chains[ci].points[local]

    def _merged_chain(self) -> ChainState:
        # Shape scoring treats all points together; for multi-chain
        # scenarios the chain polyline distance is still computed per the
        # driven chain's geometry, so merge only when there is one chain.
        if len(self.chains) == 1:
            return self.chains[0]
        # Score the chain that was actuated most recently, falling back
        # to the first.
        ci = self.episodes[-1].chain_index if self.episodes else 0
        return self.chains[ci]


def wave_gaps(waves: Sequence[dict]) -> list[dict]:
    """Gap measurements between adjacent wave supports along the baseline.

    support_gap_um is the edge-to-edge clearance between consecutive
    supports; center_gap_um is the distance from each wave's peak center
    to the nearest edge of the adjacent wave's support, the reading that
    matches spacing = half extent + interval for touching waves.
    """
    if len(waves) < 2:
        return []
    ordered = sorted(waves, key=lambda w: (w["support_um"][0] + w["support_um"][1]) / 2.0)
    out = []
    for a, b in zip(ordered, ordered[1:]):
        a_mid = (a["support_um"][0] + a["support_um"][1]) / 2.0
        b_mid = (b["support_um"][0] + b["support_um"][1]) / 2.0
        out.append({
            "between": [a["stress_point"], b["stress_point"]],
            "support_gap_um": b["support_um"][0] - a["support_um"][1],
            "center_gap_um": min(b["support_um"][0] - a_mid, b_mid - a["support_um"][1]),
        })
    return out


def run_scenario(scenario: ScenarioFile, on_frame: FrameCallback | None = None) -> SimRun:
    """Execute the full schedule; raises NonConvergenceError on failed settles."""
    run = SimRun(scenario, on_frame=on_frame)
    run.run_schedule()
    return run


# --------------------------------------------------------------------------
# Parameter sweeps
# --------------------------------------------------------------------------

def apply_sweep_value(scenario: ScenarioFile, param: str, value: float) -> ScenarioFile:
    """Scenario copy with one swept parameter replaced.

    k swaps the explicit spring coefficient (Pa); theta swaps the motion
    threshold; l re-discretizes at a new rest length and remaps each
    move's point id to the nearest point of the new chain, since point
    ids are meaningful only at a fixed discretization.
    """
    if param == "k":
        if value <= 0:
            raise ScheduleError(f"swept k must be positive, got {value}")
        return replace(scenario, material=replace(scenario.material, explicit_k=value))
    if param == "theta":
        return replace(scenario, solver=replace(scenario.solver, threshold=value))
    if param == "l":
        new_solver = replace(scenario.solver, rest_length=value)
        old_chains = scenario.build_chains()
        new_scenario = replace(scenario, solver=new_solver)
        new_chains = new_scenario.build_chains()
        moves = []
        for move, ci in zip(scenario.schedule.moves, scenario.move_chains):
            anchor = old_chains[ci].points[move.point_id]
            moves.append(replace(move, point_id=nearest_point_id(new_chains[ci], anchor)))
        return replace(new_scenario,
                       schedule=replace(scenario.schedule, moves=tuple(moves)))
    raise ScheduleError(f"unknown sweep parameter {param!r}")


def run_sweep(scenario: ScenarioFile, param: str, values: Sequence[float],
              parallel: bool = True) -> list[tuple[float, SimRun | Exception]]:
    """One independent run per value; failures are returned, not raised."""
    variants = [(v, apply_sweep_value(scenario, param, v)) for v in values]

    def _one(item):
        value, variant = item
        try:
            return value, run_scenario(variant)
        except Exception as exc:  # noqa: BLE001 - reported per value
            return value, exc

    if parallel and len(variants) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(variants))) as pool:
            return list(pool.map(_one, variants))
    return [_one(item) for item in variants]


def sweep_report(scenario: ScenarioFile, param: str,
                 results: Sequence[tuple[float, SimRun | Exception]]) -> dict:
    """Comparison report with the sweep's monotonicity ordering check."""
    rows = []
    for value, res in results:
        if isinstance(res, Exception):
            rows.append({"value": value, "status": "error", "error": str(res)})
            continue
        m = res.metrics_report()
        active_total = sum(ep["segmentation"]["active_count"] for ep in m["episodes"])
        rows.append({
            "value": value,
            "status": "ok",
            "max_lateral_deviation_um": m["final"]["max_lateral_deviation_um"],
            "active_count": active_total,
            "quiescent": m["quiescent"],
            "driven_final_positions": m["final"]["driven_final_positions"],
        })
    ok_rows = [r for r in rows if r["status"] == "ok"]
    ordering: dict = {"checked": False}
    if len(ok_rows) >= 2 and len(ok_rows) == len(rows):
        ordered = sorted(ok_rows, key=lambda r: r["value"])
        if param == "theta":
            seq = [r["active_count"] for r in ordered]
            holds = all(a > b for a, b in zip(seq, seq[1:]))
            ordering = {"checked": True, "metric": "active_count",
                        "expected": "strictly-decreasing", "holds": holds, "sequence": seq}
        elif param == "k":
            seq = [r["max_lateral_deviation_um"] for r in ordered]
            holds = all(a >= b for a, b in zip(seq, seq[1:]))
            ordering = {"checked": True, "metric": "max_lateral_deviation_um",
                        "expected": "non-increasing", "holds": holds, "sequence": seq}
        elif param == "l":
            seq = [r["max_lateral_deviation_um"] for r in ordered]
            holds = all(a <= b for a, b in zip(seq, seq[1:]))
            ordering = {"checked": True, "metric": "max_lateral_deviation_um",
                        "expected": "non-decreasing", "holds": holds, "sequence": seq}
    return {
        "scenario": scenario.name,
        "param": param,
        "values": list(values_of(results)),
        "runs": rows,
        "ordering": ordering,
    }


def values_of(results: Sequence[tuple[float, SimRun | Exception]]) -> list[float]:
    return [v for v, _ in results]
