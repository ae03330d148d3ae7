"""Discretized tensile chain model and its sub-stepped relaxation solver.

A filament is represented by an ordered list of mass points joined by
tensile-only elastic constraints of common rest length ``l`` (micrometres).
Deformation is driven purely kinematically: selected "driven" points are
pinned to prescribed per-frame targets and the remaining points relax
toward them in ordered Gauss-Seidel passes.

Update rule per visited point and substep: each adjacent constraint whose
elongation exceeds the motion gate ``theta * l`` pulls the point toward
that neighbor by

    min(c * elongation * dt^2 / 2,  clamp_fraction * elongation)

where ``c`` is the folded compliance rate. The pull toward the driven
side is evaluated against the neighbor's already-updated position; the
away-side pull is then applied from the point's intermediate position
against the not-yet-updated outer neighbor, but is gated on the outer
segment's elongation at pass start (the stale positions both pulls'
gating indices reference). Gating the away pull on the intermediate
position instead admits exact pull-balance fixed points (a geometric
elongation ladder with ratio 1 - c*dt^2/2) that pin residual stretch
above the threshold forever and make the stationary state unreachable
from taut configurations. Chain ends receive a single one-sided pull.
Compressed or rest-length constraints exert nothing, so points may
bunch; a quiescent chain (all elongations <= theta * l) is a fixed
point of every pass.

Key numerical guarantees:
  - the clamp bounds every single pull strictly below the current
    elongation, so a pull can neither overshoot rest separation nor
    collapse a constraint to zero length;
  - pinned points are never displaced by the solver;
  - passes visit points in order of increasing chain distance from the
    nearest driven point (two outward fronts for mid-chain drivers), so
    a fixed (state, params, driven) triple always produces the same
    output, bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    ConfigurationError,
    DegenerateGeometryError,
    DiscretizationError,
    NonConvergenceError,
    ParameterError,
)
from .geometry import Point2, cumulative_lengths, is_finite, point_at_arc_length

_COINCIDENCE_EPS = 1e-12
_REST_REL_TOL = 1e-9


@dataclass(frozen=True)
class MaterialParams:
    """Material description of the filament.

    youngs_modulus and explicit_k are in Pa, cross_section_area in um^2,
    density in kg/m^3. When explicit_k is given it overrides the
    E / (2 (1 + poisson)) constitutive estimate.
    """

    youngs_modulus: float
    poisson_ratio: float
    cross_section_area: float
    density: float
    explicit_k: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.youngs_modulus) and self.youngs_modulus > 0):
            raise ParameterError(f"youngs_modulus must be positive, got {self.youngs_modulus}")
        if not (-1.0 < self.poisson_ratio <= 0.5):
            raise ParameterError(f"poisson_ratio must lie in (-1, 0.5], got {self.poisson_ratio}")
        if not (math.isfinite(self.cross_section_area) and self.cross_section_area > 0):
            raise ParameterError(
                f"cross_section_area must be positive, got {self.cross_section_area}"
            )
        if not (math.isfinite(self.density) and self.density > 0):
            raise ParameterError(f"density must be positive, got {self.density}")
        if self.explicit_k is not None and not (
            math.isfinite(self.explicit_k) and self.explicit_k > 0
        ):
            raise ParameterError(f"explicit_k must be positive when set, got {self.explicit_k}")


@dataclass(frozen=True)
class SolverParams:
    """Numerical knobs of the relaxation solver.

    dt is the frame step (s), substeps the number of relaxation passes
    per frame, rest_length the constraint rest length (um), threshold the
    motion gate and quiescence bound as a fraction of rest_length,
    clamp_fraction the per-pull cap as a fraction of current elongation.
    """

    dt: float
    substeps: int
    rest_length: float
    threshold: float
    max_sweeps: int
    clamp_fraction: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.substeps < 1:
            raise ParameterError(f"substeps must be >= 1, got {self.substeps}")
        if not (math.isfinite(self.rest_length) and self.rest_length > 0):
            raise ParameterError(f"rest_length must be positive, got {self.rest_length}")
        if not (0.0 < self.threshold < 1.0):
            raise ParameterError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.max_sweeps < 1:
            raise ParameterError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if not (0.0 < self.clamp_fraction <= 1.0):
            raise ParameterError(f"clamp_fraction must lie in (0, 1], got {self.clamp_fraction}")

    @property
    def gate(self) -> float:
        """Elongation below or at which a constraint exerts nothing (um)."""
        return self.threshold * self.rest_length


@dataclass(frozen=True)
class ComplianceRate:
    """Folded rate converting elongation (um) to substep displacement (um).

    The substep pull magnitude is c * elongation * dt^2 / 2 before
    clamping. Validated against the stability bound: a just-above-gate
    stretch must displace a point by less than one rest length.
    """

    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ParameterError(f"compliance rate must be positive, got {self.c}")


def effective_spring_k(m: MaterialParams) -> float:
    """Elastic coefficient in Pa: explicit override or E / (2 (1 + poisson))."""
    k = m.explicit_k if m.explicit_k is not None else m.youngs_modulus / (2.0 * (1.0 + m.poisson_ratio))
    if not (math.isfinite(k) and k > 0):
        raise ParameterError(f"effective spring coefficient must be positive, got {k}")
    return k


def compliance_rate(m: MaterialParams, local_length: float, s: SolverParams) -> ComplianceRate:
    """Fold material constants into the working compliance rate.

    Working convention: the quotient k / (A * L * rho) is taken with each
    quantity expressed in its bench unit (k in GPa, A in um^2, L in um,
    rho in g/cm^3), which makes c * elongation_um * dt^2 / 2 come out in
    micrometres. Equivalent to the SI quotient scaled by 1e-24; the unit
    audit lives in the test suite.
    """
    if not (math.isfinite(local_length) and local_length > 0):
        raise ParameterError(f"local length must be positive, got {local_length}")
    k_gpa = effective_spring_k(m) / 1e9
    rho_gcc = m.density / 1e3
    c = k_gpa / (m.cross_section_area * local_length * rho_gcc)
    rate = ComplianceRate(c)
    # Stability: a barely-gated stretch must not fling a point a full rest
    # length in one substep.
    bound = c * (s.threshold * s.rest_length) * s.dt * s.dt / 2.0
    if not bound < s.rest_length:
        raise ConfigurationError(
            "unstable compliance: c*theta*l*dt^2/2 = "
            f"{bound:g} um is not below the rest length {s.rest_length:g} um; "
            "reduce dt or the compliance rate"
        )
    return rate


@dataclass
class ChainState:
    """Ordered positions of the chain points plus previous-frame positions.

    points and prev_points always have equal length >= 2. rest_length is
    the common constraint rest length; frame_index counts completed
    frames. States coming out of the solver generally carry stretched or
    bunched segments; only discretization guarantees rest spacing.
    """

    points: list[Point2]
    prev_points: list[Point2]
    rest_length: float
    frame_index: int = 0

    def __post_init__(self):
        if len(self.points) < 2:
            raise ParameterError("a chain needs at least 2 points")
        if len(self.points) != len(self.prev_points):
            raise ParameterError("points and prev_points must have equal length")
        if not (math.isfinite(self.rest_length) and self.rest_length > 0):
            raise ParameterError(f"rest_length must be positive, got {self.rest_length}")
        for p in self.points:
            if not is_finite(p):
                raise ParameterError(f"non-finite point {p}")

    @property
    def segment_count(self) -> int:
        return len(self.points) - 1

    def segment_length(self, i: int) -> float:
        a = self.points[i]
        b = self.points[i + 1]
        return math.hypot(b.x - a.x, b.y - a.y)

    def segment_lengths(self) -> list[float]:
        return [self.segment_length(i) for i in range(self.segment_count)]

    def max_elongation(self) -> float:
        return max(s - self.rest_length for s in self.segment_lengths())

    def is_quiescent(self, threshold: float) -> bool:
        return self.max_elongation() <= threshold * self.rest_length

    def copy(self) -> "ChainState":
        return ChainState(
            points=list(self.points),
            prev_points=list(self.prev_points),
            rest_length=self.rest_length,
            frame_index=self.frame_index,
        )


@dataclass(frozen=True)
class Stretch:
    """Elongation state of one segment and the pull direction it exerts."""

    segment_index: int
    elongation: float
    unit_direction: Point2


def discretize_polyline(vertices: Sequence[Sequence[float]], rest_length: float) -> ChainState:
    """Place chain points along a polyline at exact rest-length spacing.

    The polyline's total arc length must be an integer multiple of
    rest_length (relative tolerance 1e-9), so every constructed segment
    starts at rest; otherwise a DiscretizationError asks the caller for
    compatible geometry. The final point lands exactly on the last
    vertex. Corners sharp enough to shorten a chord below the rest
    tolerance are rejected for the same reason.
    """
    if not (math.isfinite(rest_length) and rest_length > 0):
        raise ParameterError(f"rest_length must be positive, got {rest_length}")
    if len(vertices) < 2:
        raise DiscretizationError("polyline needs at least 2 vertices")
    for v in vertices:
        if not is_finite(v):
            raise DiscretizationError(f"non-finite vertex {v}")
    cum = cumulative_lengths(vertices)
    total = cum[-1]
    if total < rest_length:
        raise DiscretizationError(
            f"polyline length {total:g} um is shorter than one rest length {rest_length:g} um"
        )
    segments = round(total / rest_length)
    if abs(total - segments * rest_length) > _REST_REL_TOL * rest_length or segments < 1:
        raise DiscretizationError(
            f"polyline length {total:g} um is not an integer multiple of "
            f"rest length {rest_length:g} um; adjust the geometry so all "
            "segments start at rest"
        )
    pts = [point_at_arc_length(vertices, cum, k * rest_length) for k in range(segments)]
    last = vertices[-1]
    pts.append(Point2(float(last[0]), float(last[1])))
    chain = ChainState(points=pts, prev_points=list(pts), rest_length=rest_length)
    for i in range(chain.segment_count):
        d = chain.segment_length(i)
        if abs(d - rest_length) > _REST_REL_TOL * rest_length:
            raise DiscretizationError(
                f"segment {i} has chord {d:g} um instead of {rest_length:g} um; "
                "the polyline bends too sharply to discretize at rest"
            )
    return chain


def segment_stretch(chain: ChainState, i: int) -> Stretch:
    """Elongation of segment i and the pull direction on its far point."""
    if not (0 <= i < chain.segment_count):
        raise ParameterError(f"segment index {i} out of range")
    a = chain.points[i]
    b = chain.points[i + 1]
    d = math.hypot(b.x - a.x, b.y - a.y)
    if d <= _COINCIDENCE_EPS:
        raise DegenerateGeometryError(f"points {i} and {i + 1} coincide; direction undefined")
    return Stretch(
        segment_index=i,
        elongation=d - chain.rest_length,
        unit_direction=Point2((a.x - b.x) / d, (a.y - b.y) / d),
    )


def substep_pull(
    self_pos: Point2,
    neighbor_pos: Point2,
    rest_length: float,
    c: ComplianceRate,
    dt: float,
    clamp_fraction: float,
) -> Point2:
    """Displacement of a point toward one over-stretched neighbor.

    Magnitude min(c * elongation * dt^2 / 2, clamp_fraction * elongation);
    zero when the constraint is at or below rest length. The gate check
    (elongation > theta * l) belongs to the caller.
    """
    dx = neighbor_pos[0] - self_pos[0]
    dy = neighbor_pos[1] - self_pos[1]
    d = math.hypot(dx, dy)
    if d <= _COINCIDENCE_EPS:
        raise DegenerateGeometryError("coincident points; pull direction undefined")
    elong = d - rest_length
    if elong <= 0.0:
        return Point2(0.0, 0.0)
    mag = min(c.c * elong * dt * dt / 2.0, clamp_fraction * elong)
    s = mag / d
    return Point2(dx * s, dy * s)


def _visit_plan(n_points: int, driven: frozenset[int]) -> list[tuple[int, int, int]]:
    """Visit order for one pass: (point, inner neighbor, outer neighbor).

    Points are ordered by increasing chain distance from the nearest
    driven point (ties toward the lower index), which makes the inner
    neighbor the already-updated one and the outer neighbor the stale
    one under in-place updates. outer is -1 for chain ends. Without any
    driven point the pass anchors at point 0 and runs up the chain.
    """
    last = n_points - 1
    entries: list[tuple[int, int, int]] = []
    if driven:
        anchors = sorted(driven)
        for i in range(n_points):
            if i in driven:
                continue
            dist_, anchor = min((abs(i - d), d) for d in anchors)
            inner = i - 1 if anchor < i else i + 1
            if i == 0:
                inner, outer = 1, -1
            elif i == last:
                inner, outer = last - 1, -1
            else:
                outer = i + 1 if inner == i - 1 else i - 1
            entries.append((dist_, i, inner, outer))
        entries.sort()
        return [(i, inner, outer) for _, i, inner, outer in entries]
    plan: list[tuple[int, int, int]] = [(0, 1, -1)]
    for i in range(1, n_points):
        plan.append((i, i - 1, i + 1 if i < last else -1))
    return plan


def _pull_into(
    xs: list[float],
    ys: list[float],
    px: float,
    py: float,
    nx: float,
    ny: float,
    rest: float,
    gate: float,
    cdt2_half: float,
    clamp: float,
) -> tuple[float, float]:
    """One gated pull of (px, py) toward (nx, ny); returns the displacement."""
    dx = nx - px
    dy = ny - py
    d = math.hypot(dx, dy)
    if d <= _COINCIDENCE_EPS:
        raise DegenerateGeometryError("coincident points encountered during sweep")
    elong = d - rest
    if elong <= gate:
        return 0.0, 0.0
    mag = cdt2_half * elong
    cap = clamp * elong
    if mag > cap:
        mag = cap
    s = mag / d
    return dx * s, dy * s


def _sweep_in_place(
    xs: list[float],
    ys: list[float],
    plan: Sequence[tuple[int, int, int]],
    rest: float,
    gate: float,
    cdt2_half: float,
    clamp: float,
) -> float:
    """One ordered pass over the chain; returns the pass's max pull length."""
    moved = 0.0
    for i, inner, outer in plan:
        px, py = xs[i], ys[i]
        ddx, ddy = _pull_into(xs, ys, px, py, xs[inner], ys[inner], rest, gate, cdt2_half, clamp)
        qx = px + ddx
        qy = py + ddy
        if outer >= 0:
            ox, oy = xs[outer], ys[outer]
            # Away-side gate on the pass-start elongation; magnitude and
            # direction from the intermediate position, so a pull can
            # never overshoot rest separation.
            stale = math.hypot(ox - px, oy - py)
            if stale <= _COINCIDENCE_EPS:
                raise DegenerateGeometryError("coincident points encountered during sweep")
            if stale - rest > gate:
                ddx2, ddy2 = _pull_into(xs, ys, qx, qy, ox, oy, rest, 0.0, cdt2_half, clamp)
                qx += ddx2
                qy += ddy2
        step = math.hypot(qx - px, qy - py)
        if step > moved:
            moved = step
        xs[i] = qx
        ys[i] = qy
    return moved


def sweep_substep(
    chain: ChainState,
    driven: Iterable[int],
    c: ComplianceRate,
    params: SolverParams,
    n: int,
) -> ChainState:
    """One relaxation pass (substep n of params.substeps).

    Driven points are assumed to already hold their prescribed positions
    and are never displaced. A pass over a quiescent chain is the
    identity.
    """
    if not (1 <= n <= params.substeps):
        raise ParameterError(f"substep index {n} outside [1, {params.substeps}]")
    driven_set = frozenset(driven)
    for d in driven_set:
        if not (0 <= d < len(chain.points)):
            raise ParameterError(f"driven point {d} out of range")
    xs = [p.x for p in chain.points]
    ys = [p.y for p in chain.points]
    plan = _visit_plan(len(xs), driven_set)
    _sweep_in_place(
        xs,
        ys,
        plan,
        chain.rest_length,
        params.gate,
        c.c * params.dt * params.dt / 2.0,
        params.clamp_fraction,
    )
    return ChainState(
        points=[Point2(x, y) for x, y in zip(xs, ys)],
        prev_points=list(chain.prev_points),
        rest_length=chain.rest_length,
        frame_index=chain.frame_index,
    )


def advance_frame(
    chain: ChainState,
    driven_targets: Mapping[int, Sequence[float]],
    c: ComplianceRate,
    params: SolverParams,
) -> ChainState:
    """Advance one frame: pin driven points, run the substep passes.

    Driven points jump to their targets before the first pass (their
    full-frame position is what the neighboring pulls see, matching the
    end-point update rule). prev_points rolls to the pre-frame positions
    and frame_index increments.
    """
    xs = [p.x for p in chain.points]
    ys = [p.y for p in chain.points]
    for pid in sorted(driven_targets):
        if not (0 <= pid < len(xs)):
            raise ParameterError(f"driven point {pid} out of range")
        tx, ty = driven_targets[pid]
        if not (math.isfinite(tx) and math.isfinite(ty)):
            raise ParameterError(f"non-finite target for point {pid}")
        xs[pid] = float(tx)
        ys[pid] = float(ty)
    plan = _visit_plan(len(xs), frozenset(driven_targets))
    cdt2_half = c.c * params.dt * params.dt / 2.0
    for _ in range(params.substeps):
        _sweep_in_place(
            xs, ys, plan, chain.rest_length, params.gate, cdt2_half, params.clamp_fraction
        )
    return ChainState(
        points=[Point2(x, y) for x, y in zip(xs, ys)],
        prev_points=list(chain.points),
        rest_length=chain.rest_length,
        frame_index=chain.frame_index + 1,
    )


def run_until_quiescent(
    chain: ChainState,
    c: ComplianceRate,
    params: SolverParams,
    driven: Iterable[int] = (),
) -> tuple[ChainState, int]:
    """Sweep until every elongation is at or below the gate.

    Driven points must already sit at their final prescribed positions;
    they stay pinned throughout. Returns the settled chain and the
    number of sweeps used. Raises NonConvergenceError with the residual
    when max_sweeps runs out. An already-quiescent chain is returned
    unchanged with a count of 0.
    """
    driven_set = frozenset(driven)
    gate = params.gate
    rest = chain.rest_length
    xs = [p.x for p in chain.points]
    ys = [p.y for p in chain.points]

    def residual() -> float:
        worst = -math.inf
        for i in range(len(xs) - 1):
            d = math.hypot(xs[i + 1] - xs[i], ys[i + 1] - ys[i]) - rest
            if d > worst:
                worst = d
        return worst

    if residual() <= gate:
        return chain, 0
    plan = _visit_plan(len(xs), driven_set)
    cdt2_half = c.c * params.dt * params.dt / 2.0
    sweeps = 0
    while True:
        if sweeps >= params.max_sweeps:
            raise NonConvergenceError(
                f"chain still stretched after {sweeps} sweeps "
                f"(max residual {residual():g} um > gate {gate:g} um)",
                max_residual=residual(),
                sweeps=sweeps,
            )
        _sweep_in_place(xs, ys, plan, rest, gate, cdt2_half, params.clamp_fraction)
        sweeps += 1
        if residual() <= gate:
            break
    pts = [Point2(x, y) for x, y in zip(xs, ys)]
    settled = ChainState(
        points=pts,
        prev_points=list(pts),
        rest_length=chain.rest_length,
        frame_index=chain.frame_index,
    )
    return settled, sweeps
