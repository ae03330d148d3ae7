"""Scenario files, trajectory CSV, and SVG frame rendering.

Scenario documents are strict JSON: every key is checked, unknown keys
are rejected with a dotted field path, and loading validates the full
cross-reference graph (chains discretize, move point ids resolve). This
keeps the golden regression files stable against silent schema drift.

Trajectory CSV is the long format

    frame,point_id,x_um,y_um,elongation_next_um,driven

with one row per (frame, point), 9-significant-digit decimal formatting,
and byte-deterministic output. Multi-chain scenarios concatenate their
points into one global id space; the elongation cell is empty on each
chain's last point, which also lets readers recover chain boundaries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .actuation import ActuationSchedule, WaypointMove
from .chain import ChainState, MaterialParams, SolverParams, discretize_polyline
from .errors import ScenarioError
from .geometry import Point2

SCHEMA_VERSION = 1
_FLOAT_FMT = "%.9g"

_SWEEP_PARAMS = ("k", "l", "theta")
_OUTPUT_FLAGS = ("csv", "svg", "metrics", "figures")


def fmt_num(x: float) -> str:
    """Deterministic 9-significant-digit decimal rendering."""
    return _FLOAT_FMT % x


@dataclass(frozen=True)
class OutputSpec:
    csv: bool = True
    svg: bool = False
    metrics: bool = True
    figures: bool = False
    target_polyline: tuple[Point2, ...] | None = None


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ScenarioFile:
    """Validated scenario document plus derived chain geometry helpers."""

    name: str
    initial_geometry: tuple[tuple[Point2, ...], ...]
    material: MaterialParams
    solver: SolverParams
    schedule: ActuationSchedule
    move_chains: tuple[int, ...]  # chain index per move, parallel to schedule.moves
    outputs: OutputSpec = OutputSpec()
    sweep: SweepSpec | None = None
    comment: str | None = None

    def build_chains(self) -> list[ChainState]:
        return [discretize_polyline(poly, self.solver.rest_length) for poly in self.initial_geometry]

    def chain_sizes(self) -> list[int]:
        return [len(c.points) for c in self.build_chains()]


def chain_offsets(chain_sizes: Sequence[int]) -> list[int]:
    """Global id of each chain's first point."""
    offsets = [0]
    for n in chain_sizes[:-1]:
        offsets.append(offsets[-1] + n)
    return offsets


def global_point_id(chain_sizes: Sequence[int], chain_idx: int, local_id: int) -> int:
    return chain_offsets(chain_sizes)[chain_idx] + local_id


def split_global_id(chain_sizes: Sequence[int], gid: int) -> tuple[int, int]:
    """(chain index, local id) for a global point id."""
    off = 0
    for ci, n in enumerate(chain_sizes):
        if gid < off + n:
            return ci, gid - off
        off += n
    raise ScenarioError(f"global point id {gid} out of range")


# --------------------------------------------------------------------------
# Strict schema loading
# --------------------------------------------------------------------------

def _require_keys(obj: dict, path: str, required: Sequence[str], optional: Sequence[str] = ()):
    for key in obj:
        if key not in required and key not in optional:
            raise ScenarioError("unknown key", field=f"{path}.{key}" if path else key)
    for key in required:
        if key not in obj:
            raise ScenarioError(f"missing required key '{key}'", field=path or "<root>")


def _num(obj: dict, path: str, key: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError("expected a number", field=f"{path}.{key}")
    if not math.isfinite(v):
        raise ScenarioError("must be finite", field=f"{path}.{key}")
    return float(v)


def _int(obj: dict, path: str, key: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError("expected an integer", field=f"{path}.{key}")
    return v


def _bool(obj: dict, path: str, key: str) -> bool:
    v = obj[key]
    if not isinstance(v, bool):
        raise ScenarioError("expected a boolean", field=f"{path}.{key}")
    return v


def _polyline(raw: Any, path: str) -> tuple[Point2, ...]:
    if not isinstance(raw, list) or len(raw) < 2:
        raise ScenarioError("expected a list of at least 2 [x, y] vertices", field=path)
    pts = []
    for i, v in enumerate(raw):
        if (not isinstance(v, list)) or len(v) != 2 or any(
            isinstance(c, bool) or not isinstance(c, (int, float)) for c in v
        ):
            raise ScenarioError("expected [x, y] numbers", field=f"{path}[{i}]")
        if not (math.isfinite(v[0]) and math.isfinite(v[1])):
            raise ScenarioError("coordinates must be finite", field=f"{path}[{i}]")
        pts.append(Point2(float(v[0]), float(v[1])))
    return tuple(pts)


def parse_scenario(doc: Any, source: str = "<memory>") -> ScenarioFile:
    """Validate a parsed JSON document into a ScenarioFile."""
    if not isinstance(doc, dict):
        raise ScenarioError(f"{source}: top level must be an object")
    _require_keys(doc, "", ("version", "name", "initial_geometry", "material", "solver",
                           "schedule", "outputs"), ("comment", "sweep"))
    if doc["version"] != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported version {doc['version']!r}", field="version")
    if not isinstance(doc["name"], str) or not doc["name"]:
        raise ScenarioError("expected a non-empty string", field="name")
    comment = doc.get("comment")
    if comment is not None and not isinstance(comment, str):
        raise ScenarioError("expected a string", field="comment")

    geo_raw = doc["initial_geometry"]
    if not isinstance(geo_raw, list) or not geo_raw:
        raise ScenarioError("expected a non-empty list of polylines", field="initial_geometry")
    geometry = tuple(
        _polyline(poly, f"initial_geometry[{i}]") for i, poly in enumerate(geo_raw)
    )

    mat_raw = doc["material"]
    if not isinstance(mat_raw, dict):
        raise ScenarioError("expected an object", field="material")
    _require_keys(mat_raw, "material",
                  ("youngs_modulus_pa", "poisson_ratio", "cross_section_area_um2",
                   "density_kg_m3"), ("explicit_k_pa",))
    try:
        material = MaterialParams(
            youngs_modulus=_num(mat_raw, "material", "youngs_modulus_pa"),
            poisson_ratio=_num(mat_raw, "material", "poisson_ratio"),
            cross_section_area=_num(mat_raw, "material", "cross_section_area_um2"),
            density=_num(mat_raw, "material", "density_kg_m3"),
            explicit_k=(_num(mat_raw, "material", "explicit_k_pa")
                        if "explicit_k_pa" in mat_raw else None),
        )
    except Exception as exc:
        raise ScenarioError(str(exc), field="material") from exc

    sol_raw = doc["solver"]
    if not isinstance(sol_raw, dict):
        raise ScenarioError("expected an object", field="solver")
    _require_keys(sol_raw, "solver",
                  ("dt_s", "substeps", "rest_length_um", "threshold", "max_sweeps"),
                  ("clamp_fraction",))
    try:
        solver = SolverParams(
            dt=_num(sol_raw, "solver", "dt_s"),
            substeps=_int(sol_raw, "solver", "substeps"),
            rest_length=_num(sol_raw, "solver", "rest_length_um"),
            threshold=_num(sol_raw, "solver", "threshold"),
            max_sweeps=_int(sol_raw, "solver", "max_sweeps"),
            clamp_fraction=(_num(sol_raw, "solver", "clamp_fraction")
                            if "clamp_fraction" in sol_raw else 0.5),
        )
    except Exception as exc:
        raise ScenarioError(str(exc), field="solver") from exc

    sched_raw = doc["schedule"]
    if not isinstance(sched_raw, dict):
        raise ScenarioError("expected an object", field="schedule")
    _require_keys(sched_raw, "schedule", ("moves",), ("settle_between",))
    moves_raw = sched_raw["moves"]
    if not isinstance(moves_raw, list):
        raise ScenarioError("expected a list", field="schedule.moves")
    moves = []
    move_chains = []
    for i, mv in enumerate(moves_raw):
        mpath = f"schedule.moves[{i}]"
        if not isinstance(mv, dict):
            raise ScenarioError("expected an object", field=mpath)
        _require_keys(mv, mpath, ("chain", "point_id", "waypoints", "step_um"))
        ci = _int(mv, mpath, "chain")
        if not (0 <= ci < len(geometry)):
            raise ScenarioError(f"chain index {ci} out of range", field=f"{mpath}.chain")
        wraw = mv["waypoints"]
        if not isinstance(wraw, list) or not wraw:
            raise ScenarioError("expected a non-empty list of [x, y]", field=f"{mpath}.waypoints")
        waypoints = []
        for j, w in enumerate(wraw):
            if (not isinstance(w, list)) or len(w) != 2 or any(
                isinstance(c, bool) or not isinstance(c, (int, float)) for c in w
            ) or not all(math.isfinite(c) for c in w):
                raise ScenarioError("expected finite [x, y]", field=f"{mpath}.waypoints[{j}]")
            waypoints.append(Point2(float(w[0]), float(w[1])))
        try:
            move = WaypointMove(
                point_id=_int(mv, mpath, "point_id"),
                waypoints=tuple(waypoints),
                step_size=_num(mv, mpath, "step_um"),
            )
        except Exception as exc:
            raise ScenarioError(str(exc), field=mpath) from exc
        moves.append(move)
        move_chains.append(ci)
    schedule = ActuationSchedule(
        moves=tuple(moves),
        settle_between=(_bool(sched_raw, "schedule", "settle_between")
                        if "settle_between" in sched_raw else True),
    )

    out_raw = doc["outputs"]
    if not isinstance(out_raw, dict):
        raise ScenarioError("expected an object", field="outputs")
    _require_keys(out_raw, "outputs", (), _OUTPUT_FLAGS + ("target_polyline",))
    out_kwargs: dict[str, Any] = {}
    for flag in _OUTPUT_FLAGS:
        if flag in out_raw:
            out_kwargs[flag] = _bool(out_raw, "outputs", flag)
    if "target_polyline" in out_raw and out_raw["target_polyline"] is not None:
        out_kwargs["target_polyline"] = _polyline(out_raw["target_polyline"],
                                                  "outputs.target_polyline")
    outputs = OutputSpec(**out_kwargs)

    sweep = None
    if "sweep" in doc and doc["sweep"] is not None:
        sw_raw = doc["sweep"]
        if not isinstance(sw_raw, dict):
            raise ScenarioError("expected an object", field="sweep")
        _require_keys(sw_raw, "sweep", ("param", "values"))
        if sw_raw["param"] not in _SWEEP_PARAMS:
            raise ScenarioError(f"param must be one of {_SWEEP_PARAMS}", field="sweep.param")
        vals = sw_raw["values"]
        if not isinstance(vals, list) or not vals or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v)
            for v in vals
        ):
            raise ScenarioError("expected a non-empty list of finite numbers",
                                field="sweep.values")
        sweep = SweepSpec(param=sw_raw["param"], values=tuple(float(v) for v in vals))

    scenario = ScenarioFile(
        name=doc["name"],
        initial_geometry=geometry,
        material=material,
        solver=solver,
        schedule=schedule,
        move_chains=tuple(move_chains),
        outputs=outputs,
        sweep=sweep,
        comment=comment,
    )

    # Cross-reference validation: chains must discretize and every move's
    # point id must resolve on its chain.
    try:
        chains = scenario.build_chains()
    except Exception as exc:
        raise ScenarioError(str(exc), field="initial_geometry") from exc
    for i, (move, ci) in enumerate(zip(schedule.moves, move_chains)):
        if not (0 <= move.point_id < len(chains[ci].points)):
            raise ScenarioError(
                f"point_id {move.point_id} does not resolve on chain {ci} "
                f"({len(chains[ci].points)} points)",
                field=f"schedule.moves[{i}].point_id",
            )
    return scenario


def load_scenario(path: str | Path) -> ScenarioFile:
    """Load and validate a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario(doc, source=str(path))


def scenario_to_doc(s: ScenarioFile) -> dict:
    """Canonical JSON document for a scenario (fixed field order)."""
    doc: dict[str, Any] = {"version": SCHEMA_VERSION, "name": s.name}
    if s.comment is not None:
        doc["comment"] = s.comment
    doc["initial_geometry"] = [[[p.x, p.y] for p in poly] for poly in s.initial_geometry]
    mat: dict[str, Any] = {
        "youngs_modulus_pa": s.material.youngs_modulus,
        "poisson_ratio": s.material.poisson_ratio,
    }
    if s.material.explicit_k is not None:
        mat["explicit_k_pa"] = s.material.explicit_k
    mat["cross_section_area_um2"] = s.material.cross_section_area
    mat["density_kg_m3"] = s.material.density
    doc["material"] = mat
    doc["solver"] = {
        "dt_s": s.solver.dt,
        "substeps": s.solver.substeps,
        "rest_length_um": s.solver.rest_length,
        "threshold": s.solver.threshold,
        "max_sweeps": s.solver.max_sweeps,
        "clamp_fraction": s.solver.clamp_fraction,
    }
    doc["schedule"] = {
        "settle_between": s.schedule.settle_between,
        "moves": [
            {
                "chain": ci,
                "point_id": mv.point_id,
                "waypoints": [[w.x, w.y] for w in mv.waypoints],
                "step_um": mv.step_size,
            }
            for mv, ci in zip(s.schedule.moves, s.move_chains)
        ],
    }
    outputs: dict[str, Any] = {
        "csv": s.outputs.csv,
        "svg": s.outputs.svg,
        "metrics": s.outputs.metrics,
        "figures": s.outputs.figures,
    }
    if s.outputs.target_polyline is not None:
        outputs["target_polyline"] = [[p.x, p.y] for p in s.outputs.target_polyline]
    doc["outputs"] = outputs
    if s.sweep is not None:
        doc["sweep"] = {"param": s.sweep.param, "values": list(s.sweep.values)}
    return doc


def save_scenario(s: ScenarioFile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_doc(s), indent=2) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# Trajectory records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameRecord:
    """Snapshot of all points at one recorded frame.

    elongations holds one entry per point: the elongation of the segment
    leaving that point within its chain, or None on each chain's last
    point. driven is the global id of the pinned point, or None.
    """

    frame: int
    points: tuple[Point2, ...]
    elongations: tuple[float | None, ...]
    driven: int | None

    def __post_init__(self):
        if len(self.points) != len(self.elongations):
            raise ScenarioError("points and elongations must align")


def snapshot_chains(frame: int, chains: Sequence[ChainState], driven: int | None) -> FrameRecord:
    points: list[Point2] = []
    elong: list[float | None] = []
    for chain in chains:
        points.extend(chain.points)
        for i in range(chain.segment_count):
            elong.append(chain.segment_length(i) - chain.rest_length)
        elong.append(None)
    return FrameRecord(frame=frame, points=tuple(points), elongations=tuple(elong),
                       driven=driven)


TRAJECTORY_HEADER = "frame,point_id,x_um,y_um,elongation_next_um,driven"


def trajectory_lines(frames: Sequence[FrameRecord]):
    yield TRAJECTORY_HEADER
    for rec in frames:
        driven = "" if rec.driven is None else str(rec.driven)
        for pid, (p, e) in enumerate(zip(rec.points, rec.elongations)):
            cell = "" if e is None else fmt_num(e)
            yield f"{rec.frame},{pid},{fmt_num(p.x)},{fmt_num(p.y)},{cell},{driven}"


def write_trajectory(frames: Sequence[FrameRecord], path: str | Path) -> None:
    """Write the long-format trajectory CSV; byte-deterministic."""
    if not frames:
        raise ScenarioError("refusing to write an empty trajectory")
    width = len(frames[0].points)
    for rec in frames:
        if len(rec.points) != width:
            raise ScenarioError("inconsistent point counts across frames")
    Path(path).write_text("\n".join(trajectory_lines(frames)) + "\n", encoding="utf-8")


def read_trajectory(path: str | Path) -> list[FrameRecord]:
    """Parse a trajectory CSV back into FrameRecords."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TRAJECTORY_HEADER:
        raise ScenarioError(f"{path}: not a trajectory CSV (bad header)")
    by_frame: dict[int, list[tuple[int, Point2, float | None, int | None]]] = {}
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ScenarioError(f"{path}:{ln}: expected 6 columns")
        frame = int(parts[0])
        pid = int(parts[1])
        p = Point2(float(parts[2]), float(parts[3]))
        e = None if parts[4] == "" else float(parts[4])
        driven = None if parts[5] == "" else int(parts[5])
        by_frame.setdefault(frame, []).append((pid, p, e, driven))
    records = []
    for frame in sorted(by_frame):
        rows = sorted(by_frame[frame])
        records.append(FrameRecord(
            frame=frame,
            points=tuple(r[1] for r in rows),
            elongations=tuple(r[2] for r in rows),
            driven=rows[0][3],
        ))
    return records


def chain_sizes_from_record(rec: FrameRecord) -> list[int]:
    """Recover per-chain point counts from the None elongation sentinels."""
    sizes = []
    count = 0
    for e in rec.elongations:
        count += 1
        if e is None:
            sizes.append(count)
            count = 0
    if count:
        sizes.append(count)
    return sizes


# --------------------------------------------------------------------------
# SVG rendering
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SvgStyle:
    stroke: str = "#1f6feb"
    stroke_width: float = 1.0
    driven_fill: str = "#d1242f"
    point_radius: float = 1.2
    margin_fraction: float = 0.05


def render_svg(rec: FrameRecord, style: SvgStyle = SvgStyle()) -> str:
    """Render one frame as a standalone SVG document.

    Coordinates are written exactly as recorded (1 um = 1 user unit); the
    drawing group is mirrored so y grows upward like the trajectory data.
    The viewBox fits the points with a proportional margin.
    """
    xs = [p.x for p in rec.points]
    ys = [p.y for p in rec.points]
    min_x, max_x = min(xs), max(xs)
    min_y, max_y = min(ys), max(ys)
    span = max(max_x - min_x, max_y - min_y, 1.0)
    pad = style.margin_fraction * span
    vb = (min_x - pad, min_y - pad, (max_x - min_x) + 2 * pad, (max_y - min_y) + 2 * pad)
    # Mirror vertically about the viewBox midline; point coordinates stay verbatim.
    flip = f"matrix(1 0 0 -1 0 {fmt_num(min_y + max_y)})"

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{fmt_num(vb[0])} {fmt_num(vb[1])} {fmt_num(vb[2])} {fmt_num(vb[3])}">',
        f'<g transform="{flip}" fill="none">',
    ]
    sizes = chain_sizes_from_record(rec)
    start = 0
    for n in sizes:
        pts = " ".join(f"{fmt_num(p.x)},{fmt_num(p.y)}" for p in rec.points[start:start + n])
        parts.append(
            f'<polyline points="{pts}" stroke="{style.stroke}" '
            f'stroke-width="{fmt_num(style.stroke_width)}" stroke-linejoin="round"/>'
        )
        start += n
    if rec.driven is not None:
        d = rec.points[rec.driven]
        parts.append(
            f'<circle cx="{fmt_num(d.x)}" cy="{fmt_num(d.y)}" '
            f'r="{fmt_num(style.point_radius)}" fill="{style.driven_fill}"/>'
        )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
