"""Small 2-D geometry helpers: polyline arc length, sampling, distances.

All coordinates are micrometres. Points are (x, y) tuples or Point2
named tuples; functions accept either.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence


class Point2(NamedTuple):
    x: float
    y: float


def is_finite(p: Sequence[float]) -> bool:
    return math.isfinite(p[0]) and math.isfinite(p[1])


def dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def cumulative_lengths(vertices: Sequence[Sequence[float]]) -> list[float]:
    """Cumulative arc length at each vertex, starting at 0."""
    cum = [0.0]
    for i in range(1, len(vertices)):
        cum.append(cum[-1] + dist(vertices[i - 1], vertices[i]))
    return cum


def polyline_length(vertices: Sequence[Sequence[float]]) -> float:
    return cumulative_lengths(vertices)[-1]


def point_at_arc_length(
    vertices: Sequence[Sequence[float]], cum: Sequence[float], s: float
) -> Point2:
    """Point at arc-length position ``s`` along the polyline.

    ``cum`` must be the cumulative_lengths of ``vertices``. Positions past
    the end clamp to the final vertex.
    """
    if s <= 0.0:
        return Point2(float(vertices[0][0]), float(vertices[0][1]))
    if s >= cum[-1]:
        return Point2(float(vertices[-1][0]), float(vertices[-1][1]))
    # Binary search for the segment containing s.
    lo, hi = 0, len(cum) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cum[mid] <= s:
            lo = mid
        else:
            hi = mid
    seg_len = cum[hi] - cum[lo]
    t = 0.0 if seg_len == 0.0 else (s - cum[lo]) / seg_len
    ax, ay = vertices[lo]
    bx, by = vertices[hi]
    return Point2(ax + t * (bx - ax), ay + t * (by - ay))


def resample_polyline(vertices: Sequence[Sequence[float]], spacing: float) -> list[Point2]:
    """Points along the polyline at the given arc-length spacing.

    Includes both endpoints; the caller is responsible for checking that
    the total length divides evenly if that matters.
    """
    cum = cumulative_lengths(vertices)
    total = cum[-1]
    n = max(1, int(round(total / spacing)))
    out = [point_at_arc_length(vertices, cum, k * spacing) for k in range(n)]
    out.append(Point2(float(vertices[-1][0]), float(vertices[-1][1])))
    return out


def point_segment_distance(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    """Distance from point p to the closed segment ab."""
    ax, ay = a[0], a[1]
    bx, by = b[0], b[1]
    px, py = p[0], p[1]
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_polyline_distance(p: Sequence[float], vertices: Sequence[Sequence[float]]) -> float:
    """Distance from point p to the nearest segment of the polyline."""
    if len(vertices) == 1:
        return dist(p, vertices[0])
    best = math.inf
    for i in range(len(vertices) - 1):
        d = point_segment_distance(p, vertices[i], vertices[i + 1])
        if d < best:
            best = d
    return best
