"""Study environments: wall maps, target sequences, hallway exits, and
obstacle-point sampling.

Walls are pure zero-thickness segments used as risk/collision geometry
only; they never constrain the robot's position. Four maps ship with the
package (see ``telerate/maps``); their hallway dimensions approximate the
original study layouts, which were never published exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .geometry import GEOM_EPS, Segment, Vec2

# Sanity box for map coordinates, meters. Scenes are room-scale.
COORD_BOUND = 1000.0

_MAP_KEYS = {"name", "walls", "start", "targets", "hallway_exit", "hallway_width", "route"}

SHIPPED_MAPS = ("env1", "env2", "env3", "env4")


class MapFormatError(ValueError):
    """Malformed or invalid map document; message names the offending field."""


@dataclass(frozen=True, slots=True)
class WallMap:
    name: str
    walls: tuple[Segment, ...]


@dataclass(frozen=True, slots=True)
class TargetSpec:
    position: Vec2
    radius: float


@dataclass(frozen=True, slots=True)
class EnvironmentSpec:
    map: WallMap
    start: Vec2
    targets: tuple[TargetSpec, ...]  # exactly 4, in visiting order
    exit_point: Vec2
    exit_dir: Vec2  # unit, pointing out of the hallway
    hallway_width: float
    # Optional interior waypoints for scripted operators: route[i] is the
    # list of points to pass before heading to targets[i].
    route: tuple[tuple[Vec2, ...], ...] = field(default=((), (), (), ()))

    @property
    def name(self) -> str:
        return self.map.name


@dataclass(frozen=True)
class ObstacleCloud:
    """Discrete occupied points sampled along the walls.

    `points` is an (N, 2) float64 array ordered by wall index then
    arclength, so identical inputs always produce identical clouds.
    """

    points: np.ndarray
    resolution: float

    def __len__(self) -> int:
        return int(self.points.shape[0])


def _vec(value, field_name: str) -> Vec2:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise MapFormatError(f"{field_name}: expected [x, y] numbers, got {value!r}")
    x, y = float(value[0]), float(value[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise MapFormatError(f"{field_name}: coordinates must be finite")
    if abs(x) > COORD_BOUND or abs(y) > COORD_BOUND:
        raise MapFormatError(f"{field_name}: coordinates exceed the {COORD_BOUND} m bound")
    return Vec2(x, y)


def load_environment(source) -> EnvironmentSpec:
    """Parse and validate a map document (bytes, str, or file-like).

    Raises MapFormatError naming the offending field on any violation.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"map document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MapFormatError("map document must be a JSON object")

    unknown = set(doc) - _MAP_KEYS
    if unknown:
        raise MapFormatError(f"unknown keys: {sorted(unknown)}")
    missing = (_MAP_KEYS - {"route"}) - set(doc)
    if missing:
        raise MapFormatError(f"missing keys: {sorted(missing)}")

    name = doc["name"]
    if not isinstance(name, str) or not name:
        raise MapFormatError("name: must be a non-empty string")

    if not isinstance(doc["walls"], list) or len(doc["walls"]) == 0:
        raise MapFormatError("walls: must be a non-empty array of segments")
    walls = []
    for i, seg in enumerate(doc["walls"]):
        if not isinstance(seg, (list, tuple)) or len(seg) != 2:
            raise MapFormatError(f"walls[{i}]: expected [[x1,y1],[x2,y2]]")
        walls.append(Segment(_vec(seg[0], f"walls[{i}][0]"), _vec(seg[1], f"walls[{i}][1]")))

    start = _vec(doc["start"], "start")

    if not isinstance(doc["targets"], list) or len(doc["targets"]) != 4:
        raise MapFormatError("targets: exactly 4 targets are required")
    targets = []
    for i, t in enumerate(doc["targets"]):
        if not isinstance(t, dict) or set(t) != {"pos", "radius"}:
            raise MapFormatError(f'targets[{i}]: expected {{"pos": [x,y], "radius": r}}')
        radius = t["radius"]
        if not isinstance(radius, (int, float)) or isinstance(radius, bool) or not radius > 0:
            raise MapFormatError(f"targets[{i}].radius: must be positive")
        targets.append(TargetSpec(_vec(t["pos"], f"targets[{i}].pos"), float(radius)))

    he = doc["hallway_exit"]
    if not isinstance(he, dict) or set(he) != {"point", "dir"}:
        raise MapFormatError('hallway_exit: expected {"point": [x,y], "dir": [x,y]}')
    exit_point = _vec(he["point"], "hallway_exit.point")
    exit_dir = _vec(he["dir"], "hallway_exit.dir")
    if abs(exit_dir.norm() - 1.0) > GEOM_EPS:
        raise MapFormatError("hallway_exit.dir: must be a unit vector")

    width = doc["hallway_width"]
    if not isinstance(width, (int, float)) or isinstance(width, bool) or not width > 0:
        raise MapFormatError("hallway_width: must be positive")

    route: list[tuple[Vec2, ...]] = [(), (), (), ()]
    if "route" in doc:
        if not isinstance(doc["route"], list) or len(doc["route"]) != 4:
            raise MapFormatError("route: expected 4 waypoint lists (one per target)")
        for i, leg in enumerate(doc["route"]):
            if not isinstance(leg, list):
                raise MapFormatError(f"route[{i}]: expected a list of [x,y] points")
            route[i] = tuple(_vec(w, f"route[{i}][{j}]") for j, w in enumerate(leg))

    return EnvironmentSpec(
        map=WallMap(name=name, walls=tuple(walls)),
        start=start,
        targets=tuple(targets),
        exit_point=exit_point,
        exit_dir=exit_dir,
        hallway_width=float(width),
        route=tuple(route),
    )


def environment_to_dict(env: EnvironmentSpec) -> dict:
    """Inverse of load_environment, for embedding maps in log headers."""
    return {
        "name": env.map.name,
        "walls": [[[s.a.x, s.a.y], [s.b.x, s.b.y]] for s in env.map.walls],
        "start": [env.start.x, env.start.y],
        "targets": [{"pos": [t.position.x, t.position.y], "radius": t.radius} for t in env.targets],
        "hallway_exit": {
            "point": [env.exit_point.x, env.exit_point.y],
            "dir": [env.exit_dir.x, env.exit_dir.y],
        },
        "hallway_width": env.hallway_width,
        "route": [[[w.x, w.y] for w in leg] for leg in env.route],
    }


def load_shipped_environment(name: str) -> EnvironmentSpec:
    """Load one of the four packaged maps by name ("env1".."env4")."""
    if name not in SHIPPED_MAPS:
        raise MapFormatError(f"unknown shipped map {name!r}; available: {list(SHIPPED_MAPS)}")
    data = resources.files("telerate").joinpath(f"maps/{name}.json").read_bytes()
    return load_environment(data)


def sample_obstacles(wall_map: WallMap, resolution: float) -> ObstacleCloud:
    """Sample every wall segment end-to-end at most `resolution` apart.

    Per segment of length L this yields ceil(L/resolution)+1 evenly spaced
    points including both endpoints (a single point for L == 0). Ordering
    is by wall index then arclength.
    """
    if not resolution > 0:
        raise ValueError(f"resolution must be positive, got {resolution!r}")
    chunks = []
    for seg in wall_map.walls:
        length = seg.length()
        n = math.ceil(length / resolution) if length > 0 else 0
        ts = np.linspace(0.0, 1.0, n + 1)
        ax, ay, bx, by = seg.a.x, seg.a.y, seg.b.x, seg.b.y
        chunk = np.empty((n + 1, 2))
        chunk[:, 0] = ax + ts * (bx - ax)
        chunk[:, 1] = ay + ts * (by - ay)
        chunks.append(chunk)
    points = np.concatenate(chunks, axis=0)
    points.setflags(write=False)
    return ObstacleCloud(points=points, resolution=resolution)


# Keyed by id with the map kept alive alongside: maps are immutable and
# few, and hashing the segment tuple per tick would dominate the query.
_wall_seg_cache: dict[int, tuple[WallMap, list[tuple[float, float, float, float, float]]]] = {}


def _wall_segments(wall_map: WallMap) -> list[tuple[float, float, float, float, float]]:
    """Per-segment (ax, ay, abx, aby, |ab|^2) scalars, cached: the wall
    query runs every simulation tick and maps have few walls, so plain
    scalar math beats array dispatch here."""
    cached = _wall_seg_cache.get(id(wall_map))
    if cached is not None and cached[0] is wall_map:
        return cached[1]
    segs = []
    for s in wall_map.walls:
        abx = s.b.x - s.a.x
        aby = s.b.y - s.a.y
        segs.append((s.a.x, s.a.y, abx, aby, abx * abx + aby * aby))
    if len(_wall_seg_cache) > 64:
        _wall_seg_cache.clear()
    _wall_seg_cache[id(wall_map)] = (wall_map, segs)
    return segs


def nearest_wall_point(pos: Vec2, wall_map: WallMap) -> tuple[Vec2, float, int]:
    """Closest point on any wall: (point, distance, wall index).

    Ties break to the lowest wall index, keeping callers deterministic.
    """
    px, py = pos.x, pos.y
    best_d2 = math.inf
    best = (0.0, 0.0, 0)
    for i, (ax, ay, abx, aby, denom) in enumerate(_wall_segments(wall_map)):
        if denom > 0.0:
            t = ((px - ax) * abx + (py - ay) * aby) / denom
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            cx = ax + t * abx
            cy = ay + t * aby
        else:
            cx, cy = ax, ay
        dx = px - cx
        dy = py - cy
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best_d2 = d2
            best = (cx, cy, i)
    return Vec2(best[0], best[1]), math.sqrt(best_d2), best[2]


def robot_wall_contact(pos: Vec2, robot_radius: float, wall_map: WallMap) -> bool:
    """True iff the robot disk (center pos) touches or overlaps any wall."""
    if not robot_radius > 0:
        raise ValueError(f"robot_radius must be positive, got {robot_radius!r}")
    _, dist, _ = nearest_wall_point(pos, wall_map)
    return dist <= robot_radius
