"""Quantitative analysis of runs.

Covers the active/passive point split after an actuation episode, wave
geometry around a stress point, displacement-decay profiles with a
log-linear fit, target-shape scoring, and chain length audits. All
functions are pure over chain snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import ChainState
from .errors import ParameterError
from .geometry import Point2, dist, point_polyline_distance

# Displacement below which a point counts as unmoved. Motion only happens
# through gated pulls, so any real move is orders of magnitude larger.
_MOVE_TOL = 1e-9


@dataclass(frozen=True)
class SegmentationReport:
    """Partition of points into active (moved) and passive (unmoved)."""

    active_point_ids: frozenset[int]
    passive_point_ids: frozenset[int]
    threshold_point_id: int | None
    stress_point_id: int | None


@dataclass(frozen=True)
class WaveReport:
    """Geometry of one deformation wave around a stress point.

    extent is the along-baseline width of the contiguous region around
    the stress point whose lateral deviation exceeds theta * l, with the
    crossing positions linearly interpolated. gap measurements between
    adjacent waves are computed by the caller from support edges.
    """

    center: Point2
    extent: float
    amplitude: float
    support: tuple[float, float]  # along-baseline interval, (lo, hi)
    peak_point_id: int


@dataclass(frozen=True)
class ShapeError:
    rms: float
    hausdorff: float


@dataclass(frozen=True)
class DecayProfile:
    distances: tuple[float, ...]       # chain distance (um) per point, ordered
    displacements: tuple[float, ...]   # displacement magnitude per point
    fit_slope: float | None            # d ln(displacement) / d distance
    fit_intercept: float | None
    fit_r2: float | None


def displacements(before: ChainState, after: ChainState) -> list[float]:
    if len(before.points) != len(after.points):
        raise ParameterError("chains have different point counts")
    return [dist(a, b) for a, b in zip(before.points, after.points)]


def segment_active_passive(
    before: ChainState, after: ChainState, threshold: float, rest_length: float
) -> SegmentationReport:
    """Split points by whether they moved during the episode.

    The solver only displaces a point when an adjacent elongation exceeds
    the gate, so having moved is equivalent to some adjacent segment
    having crossed theta * l at some frame in between. The stress point
    is inferred as the point of largest displacement; the threshold point
    is the active point farthest from it along the chain.
    """
    del threshold, rest_length  # part of the call contract, not needed here
    disp = displacements(before, after)
    active = frozenset(i for i, d in enumerate(disp) if d > _MOVE_TOL)
    passive = frozenset(range(len(disp))) - active
    if not active:
        return SegmentationReport(active, passive, None, None)
    stress = max(range(len(disp)), key=lambda i: (disp[i], -i))
    threshold_pt = max(active, key=lambda i: (abs(i - stress), -i))
    return SegmentationReport(active, passive, threshold_pt, stress)


def _baseline_axis(baseline: ChainState) -> tuple[Point2, Point2]:
    """Origin and unit axis of a straight baseline chain."""
    a = baseline.points[0]
    b = baseline.points[-1]
    d = dist(a, b)
    if d == 0:
        raise ParameterError("degenerate baseline chain")
    return a, Point2((b.x - a.x) / d, (b.y - a.y) / d)


def lateral_deviations(baseline: ChainState, chain: ChainState) -> list[float]:
    """Signed lateral offset of each point from the straight baseline."""
    if len(baseline.points) != len(chain.points):
        raise ParameterError("chains have different point counts")
    origin, axis = _baseline_axis(baseline)
    out = []
    for p in chain.points:
        rx, ry = p.x - origin.x, p.y - origin.y
        out.append(rx * (-axis.y) + ry * axis.x)
    return out


def max_lateral_deviation(baseline: ChainState, chain: ChainState,
                          exclude: Sequence[int] = ()) -> float:
    dev = lateral_deviations(baseline, chain)
    skip = set(exclude)
    return max(abs(d) for i, d in enumerate(dev) if i not in skip)


def wave_report(
    baseline: ChainState,
    final: ChainState,
    stress_point: int,
    threshold: float,
    rest_length: float,
) -> WaveReport:
    """Measure the deformation wave around one stress point.

    The support is the contiguous run of points around the stress point
    whose |lateral deviation| exceeds theta * l, with edges interpolated
    to the exact crossing along the baseline axis. A stress point that
    never left the band yields a degenerate report (extent 0).
    """
    if not (0 <= stress_point < len(final.points)):
        raise ParameterError(f"stress point {stress_point} out of range")
    gate = threshold * rest_length
    origin, axis = _baseline_axis(baseline)
    dev = lateral_deviations(baseline, final)
    proj = [
        (p.x - origin.x) * axis.x + (p.y - origin.y) * axis.y for p in final.points
    ]
    n = len(dev)

    if abs(dev[stress_point]) <= gate:
        c = final.points[stress_point]
        return WaveReport(center=c, extent=0.0, amplitude=abs(dev[stress_point]),
                          support=(proj[stress_point], proj[stress_point]),
                          peak_point_id=stress_point)

    lo = stress_point
    while lo > 0 and abs(dev[lo - 1]) > gate:
        lo -= 1
    hi = stress_point
    while hi < n - 1 and abs(dev[hi + 1]) > gate:
        hi += 1

    def crossing(inside: int, outside: int) -> float:
        a, b = abs(dev[inside]), abs(dev[outside])
        t = (a - gate) / (a - b) if a != b else 0.0
        return proj[inside] + t * (proj[outside] - proj[inside])

    left = crossing(lo, lo - 1) if lo > 0 else proj[lo]
    right = crossing(hi, hi + 1) if hi < n - 1 else proj[hi]
    peak = max(range(lo, hi + 1), key=lambda i: (abs(dev[i]), -i))
    return WaveReport(
        center=final.points[peak],
        extent=right - left,
        amplitude=abs(dev[peak]),
        support=(left, right),
        peak_point_id=peak,
    )


def decay_profile(before: ChainState, after: ChainState, stress_point: int) -> DecayProfile:
    """Displacement magnitude versus chain distance from the stress point.

    The log-linear fit runs over the moved (active) points only and is
    omitted when fewer than 3 points moved. Points are ordered by chain
    distance; the stress point itself is included at distance 0.
    """
    if not (0 <= stress_point < len(before.points)):
        raise ParameterError(f"stress point {stress_point} out of range")
    disp = displacements(before, after)
    rest = before.rest_length
    order = sorted(range(len(disp)), key=lambda i: (abs(i - stress_point), i))
    distances = tuple(abs(i - stress_point) * rest for i in order)
    magnitudes = tuple(disp[i] for i in order)

    xs = [d for d, m in zip(distances, magnitudes) if m > _MOVE_TOL]
    ys = [math.log(m) for d, m in zip(distances, magnitudes) if m > _MOVE_TOL]
    if len(xs) < 3:
        return DecayProfile(distances, magnitudes, None, None, None)
    slope, intercept = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    pred = slope * np.asarray(xs) + intercept
    resid = np.asarray(ys) - pred
    total = np.asarray(ys) - np.mean(ys)
    ss_tot = float(np.dot(total, total))
    r2 = 1.0 - float(np.dot(resid, resid)) / ss_tot if ss_tot > 0 else 1.0
    return DecayProfile(distances, magnitudes, float(slope), float(intercept), r2)


def _sample_polyline(vertices: Sequence[Sequence[float]], spacing: float) -> list[Point2]:
    out = [Point2(float(vertices[0][0]), float(vertices[0][1]))]
    for i in range(len(vertices) - 1):
        ax, ay = vertices[i]
        bx, by = vertices[i + 1]
        seg = math.hypot(bx - ax, by - ay)
        if seg == 0:
            continue
        n = max(1, math.ceil(seg / spacing))
        for k in range(1, n + 1):
            t = k / n
            out.append(Point2(ax + t * (bx - ax), ay + t * (by - ay)))
    return out


def shape_error(chain: ChainState, target: Sequence[Sequence[float]]) -> ShapeError:
    """Distance of the chain from a target polyline.

    rms is over per-point distances to the target; hausdorff is the
    symmetric max with the target sampled at rest_length / 4 spacing and
    measured against the chain treated as a polyline.
    """
    if len(target) < 2:
        raise ParameterError("target polyline needs at least 2 vertices")
    chain_to_target = [point_polyline_distance(p, target) for p in chain.points]
    rms = math.sqrt(sum(d * d for d in chain_to_target) / len(chain_to_target))
    samples = _sample_polyline(target, chain.rest_length / 4.0)
    target_to_chain = max(point_polyline_distance(s, chain.points) for s in samples)
    hausdorff = max(max(chain_to_target), target_to_chain)
    return ShapeError(rms=rms, hausdorff=hausdorff)


def length_audit(chain: ChainState, rest_length: float, threshold: float
                 ) -> tuple[float, float, float]:
    """(total length, max elongation, min pairwise separation).

    Compression is never constrained by the solver, so the minimum
    separation may fall below the rest length; this audit is the place
    that reports it. The minimum is over all distinct point pairs.
    """
    del threshold
    lengths = chain.segment_lengths()
    total = sum(lengths)
    max_elong = max(L - rest_length for L in lengths)
    pts = chain.points
    min_sep = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = dist(pts[i], pts[j])
            if d < min_sep:
                min_sep = d
    return total, max_elong, min_sep
