"""Planar domains: an ambient disk minus a finite union of obstacles.

Obstacles are disks, segments, circular arcs and polygons (optionally
filled).  Every obstacle is compiled to a flat record table (disk / segment /
arc rows; polygons contribute one segment row per edge) so that distance
queries vectorize over query points and the walk kernels can scan the same
table.  Derived record constants (edge vectors, arc endpoint coordinates) are
computed once here, which keeps the compiled and numpy walk backends reading
identical floating-point inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import PointOutsideDomain

KIND_DISK = 0
KIND_SEGMENT = 1
KIND_ARC = 2

PARAM_WIDTH = 12


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=np.float64).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"point coordinates must be finite, got {p!r}")
    return a


@dataclass(frozen=True)
class Disk:
    """Closed disk obstacle (or the ambient disk when used as Domain.ambient)."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        c = _as_point(self.center)
        object.__setattr__(self, "center", (float(c[0]), float(c[1])))
        object.__setattr__(self, "radius", float(self.radius))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"disk radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Segment:
    """Closed line segment obstacle with distinct endpoints."""

    a: tuple[float, float]
    b: tuple[float, float]

    def __post_init__(self):
        a = _as_point(self.a)
        b = _as_point(self.b)
        object.__setattr__(self, "a", (float(a[0]), float(a[1])))
        object.__setattr__(self, "b", (float(b[0]), float(b[1])))
        if self.a == self.b:
            raise ValueError("segment endpoints must be distinct")


@dataclass(frozen=True)
class Arc:
    """Circular arc {center + radius * e^{i theta}, theta_min <= theta <= theta_max}.

    The angular span must be positive and strictly less than a full turn.
    """

    center: tuple[float, float]
    radius: float
    theta_min: float
    theta_max: float

    def __post_init__(self):
        c = _as_point(self.center)
        object.__setattr__(self, "center", (float(c[0]), float(c[1])))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "theta_min", float(self.theta_min))
        object.__setattr__(self, "theta_max", float(self.theta_max))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"arc radius must be positive, got {self.radius}")
        span = self.theta_max - self.theta_min
        if not (0.0 < span < 2.0 * np.pi):
            raise ValueError(f"arc span must lie in (0, 2*pi), got {span}")


@dataclass(frozen=True)
class Polygon:
    """Simple polygon obstacle; `filled` removes the enclosed region too."""

    vertices: tuple[tuple[float, float], ...]
    filled: bool = False

    def __post_init__(self):
        vs = tuple((float(v[0]), float(v[1])) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "filled", bool(self.filled))
        if len(vs) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        pts = np.asarray(vs, dtype=np.float64)
        if not np.all(np.isfinite(pts)):
            raise ValueError("polygon vertices must be finite")
        # non-collinearity: some triple spans area
        d = pts[1] - pts[0]
        off = pts[2:] - pts[0]
        if np.all(np.abs(d[0] * off[:, 1] - d[1] * off[:, 0]) < 1e-15):
            raise ValueError("polygon vertices are collinear")
        if _polygon_self_intersects(pts):
            raise ValueError("polygon edges self-intersect")


def _polygon_self_intersects(pts: np.ndarray) -> bool:
    n = len(pts)
    segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j == (i + 1) % n) or ((j + 1) % n == i):
                continue  # adjacent edges share a vertex by construction
            if _segments_cross(*segs[i], *segs[j]):
                return True
    return False


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


Obstacle = Disk | Segment | Arc | Polygon


@dataclass(frozen=True)
class Domain:
    """Bounded planar domain: open ambient disk minus the obstacle union."""

    ambient: Disk
    obstacles: tuple[Obstacle, ...] = ()
    label: str = ""
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        cx, cy = self.ambient.center
        for k, ob in enumerate(self.obstacles):
            d = _obstacle_set_distance(ob, cx, cy)
            if d > self.ambient.radius:
                raise ValueError(
                    f"obstacle {k} does not intersect the closed ambient disk "
                    f"(distance {d:.6g} > radius {self.ambient.radius:.6g})"
                )

    # --- compiled record table -------------------------------------------------

    def records(self):
        """(kinds int8[n], params float64[n,12], rec_obs int32[n], ambient float64[3])."""
        tab = self._tables.get("records")
        if tab is None:
            tab = _compile_records(self)
            self._tables["records"] = tab
        return tab

    # --- vectorized queries ----------------------------------------------------

    def boundary_scan(self, points: np.ndarray):
        """Unsigned distance to the nearest boundary record for each point.

        Returns (dist, rec) where rec indexes the record table and -1 means the
        ambient circle.  Ties go to the earliest record, ambient last, matching
        the walk kernels.
        """
        kinds, params, _, amb = self.records()
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        d = _record_distances(kinds, params, pts)
        dxa = pts[:, 0] - amb[0]
        dya = pts[:, 1] - amb[1]
        damb = np.abs(amb[2] - np.sqrt(dxa * dxa + dya * dya))
        alld = np.concatenate([d, damb[:, None]], axis=1)
        rec = np.argmin(alld, axis=1).astype(np.int64)
        dist = alld[np.arange(len(pts)), rec]
        rec[rec == len(kinds)] = -1
        return dist, rec

    def clearance(self, points: np.ndarray) -> np.ndarray:
        """Signed clearance: distance to the boundary, negative outside the domain.

        Positive exactly on the open domain; grid builders threshold this.
        """
        kinds, params, _, amb = self.records()
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        dxa = pts[:, 0] - amb[0]
        dya = pts[:, 1] - amb[1]
        out = amb[2] - np.sqrt(dxa * dxa + dya * dya)
        if len(kinds):
            d = _record_distances(kinds, params, pts, signed_disks=True)
            out = np.minimum(out, d.min(axis=1))
        for ob in self.obstacles:
            if isinstance(ob, Polygon) and ob.filled:
                inside = _polygon_inside(np.asarray(ob.vertices), pts)
                edge = _polygon_edge_distance(np.asarray(ob.vertices), pts)
                out = np.where(inside, np.minimum(out, -edge), out)
        return out

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        return self.clearance(points) > 0.0


def _obstacle_set_distance(ob: Obstacle, px: float, py: float) -> float:
    """Distance from a point to the obstacle as a set (0 if inside a solid)."""
    p = np.array([[px, py]])
    if isinstance(ob, Disk):
        d = np.hypot(px - ob.center[0], py - ob.center[1]) - ob.radius
        return max(float(d), 0.0)
    if isinstance(ob, Polygon):
        edge = float(_polygon_edge_distance(np.asarray(ob.vertices), p)[0])
        if ob.filled and bool(_polygon_inside(np.asarray(ob.vertices), p)[0]):
            return 0.0
        return edge
    kinds, params = _compile_obstacle(ob)
    return float(_record_distances(kinds, params, p)[0].min())


# --- record compilation ---------------------------------------------------------


def _compile_obstacle(ob: Obstacle):
    rows = []
    if isinstance(ob, Disk):
        r = np.zeros(PARAM_WIDTH)
        r[:3] = (ob.center[0], ob.center[1], ob.radius)
        rows.append((KIND_DISK, r))
    elif isinstance(ob, Segment):
        rows.append((KIND_SEGMENT, _segment_row(ob.a, ob.b)))
    elif isinstance(ob, Arc):
        r = np.zeros(PARAM_WIDTH)
        cx, cy = ob.center
        u1x, u1y = np.cos(ob.theta_min), np.sin(ob.theta_min)
        u2x, u2y = np.cos(ob.theta_max), np.sin(ob.theta_max)
        r[:8] = (cx, cy, ob.radius, u1x, u1y, u2x, u2y,
                 1.0 if (ob.theta_max - ob.theta_min) > np.pi else 0.0)
        r[8:12] = (cx + ob.radius * u1x, cy + ob.radius * u1y,
                   cx + ob.radius * u2x, cy + ob.radius * u2y)
        rows.append((KIND_ARC, r))
    elif isinstance(ob, Polygon):
        vs = ob.vertices
        for i in range(len(vs)):
            rows.append((KIND_SEGMENT, _segment_row(vs[i], vs[(i + 1) % len(vs)])))
    else:
        raise TypeError(f"unknown obstacle type {type(ob)!r}")
    kinds = np.array([k for k, _ in rows], dtype=np.int8)
    params = np.array([p for _, p in rows], dtype=np.float64)
    return kinds, params


def _segment_row(a, b):
    r = np.zeros(PARAM_WIDTH)
    dxs, dys = b[0] - a[0], b[1] - a[1]
    r[:5] = (a[0], a[1], dxs, dys, dxs * dxs + dys * dys)
    return r


def _compile_records(dom: Domain):
    kinds_list, params_list, obs_list = [], [], []
    for k, ob in enumerate(dom.obstacles):
        kk, pp = _compile_obstacle(ob)
        kinds_list.append(kk)
        params_list.append(pp)
        obs_list.append(np.full(len(kk), k, dtype=np.int32))
    if kinds_list:
        kinds = np.concatenate(kinds_list)
        params = np.concatenate(params_list)
        rec_obs = np.concatenate(obs_list)
    else:
        kinds = np.zeros(0, dtype=np.int8)
        params = np.zeros((0, PARAM_WIDTH), dtype=np.float64)
        rec_obs = np.zeros(0, dtype=np.int32)
    amb = np.array([dom.ambient.center[0], dom.ambient.center[1],
                    dom.ambient.radius], dtype=np.float64)
    return kinds, np.ascontiguousarray(params), rec_obs, amb


def _record_distances(kinds, params, pts, signed_disks=False):
    """Distance from each point to each record; op order mirrors the walk kernels."""
    n, m = len(pts), len(kinds)
    out = np.empty((n, m), dtype=np.float64)
    px, py = pts[:, 0], pts[:, 1]
    for j in range(m):
        p = params[j]
        if kinds[j] == KIND_DISK:
            dx = px - p[0]
            dy = py - p[1]
            d = np.sqrt(dx * dx + dy * dy) - p[2]
            out[:, j] = d if signed_disks else np.abs(d)
        elif kinds[j] == KIND_SEGMENT:
            wx = px - p[0]
            wy = py - p[1]
            t = (wx * p[2] + wy * p[3]) / p[4]
            t = np.minimum(np.maximum(t, 0.0), 1.0)
            ex = wx - t * p[2]
            ey = wy - t * p[3]
            out[:, j] = np.sqrt(ex * ex + ey * ey)
        else:
            dx = px - p[0]
            dy = py - p[1]
            c1 = p[3] * dy - p[4] * dx
            c2 = dx * p[6] - dy * p[5]
            insec = (c1 >= 0.0) | (c2 >= 0.0) if p[7] != 0.0 else (c1 >= 0.0) & (c2 >= 0.0)
            norm = np.sqrt(dx * dx + dy * dy)
            w1x = px - p[8]
            w1y = py - p[9]
            d1 = w1x * w1x + w1y * w1y
            w2x = px - p[10]
            w2y = py - p[11]
            d2 = w2x * w2x + w2y * w2y
            out[:, j] = np.where(insec, np.abs(norm - p[2]),
                                 np.sqrt(np.minimum(d1, d2)))
    return out


def project_to_record(kinds, params, amb, px, py, rec):
    """Nearest point of record `rec` (-1 = ambient circle) to (px, py)."""
    if rec < 0:
        dx = px - amb[0]
        dy = py - amb[1]
        norm = np.sqrt(dx * dx + dy * dy)
        if norm == 0.0:
            return np.array([amb[0] + amb[2], amb[1]])
        s = amb[2] / norm
        return np.array([amb[0] + dx * s, amb[1] + dy * s])
    p = params[rec]
    k = kinds[rec]
    if k == KIND_DISK:
        dx = px - p[0]
        dy = py - p[1]
        norm = np.sqrt(dx * dx + dy * dy)
        if norm == 0.0:
            return np.array([p[0] + p[2], p[1]])
        s = p[2] / norm
        return np.array([p[0] + dx * s, p[1] + dy * s])
    if k == KIND_SEGMENT:
        wx = px - p[0]
        wy = py - p[1]
        t = (wx * p[2] + wy * p[3]) / p[4]
        t = min(max(t, 0.0), 1.0)
        return np.array([p[0] + t * p[2], p[1] + t * p[3]])
    dx = px - p[0]
    dy = py - p[1]
    c1 = p[3] * dy - p[4] * dx
    c2 = dx * p[6] - dy * p[5]
    insec = (c1 >= 0.0 or c2 >= 0.0) if p[7] != 0.0 else (c1 >= 0.0 and c2 >= 0.0)
    if insec:
        norm = np.sqrt(dx * dx + dy * dy)
        if norm == 0.0:
            return np.array([p[8], p[9]])
        s = p[2] / norm
        return np.array([p[0] + dx * s, p[1] + dy * s])
    w1x = px - p[8]
    w1y = py - p[9]
    d1 = w1x * w1x + w1y * w1y
    w2x = px - p[10]
    w2y = py - p[11]
    d2 = w2x * w2x + w2y * w2y
    if d2 < d1:
        return np.array([p[10], p[11]])
    return np.array([p[8], p[9]])


def _polygon_edge_distance(vs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    best = np.full(len(pts), np.inf)
    n = len(vs)
    px, py = pts[:, 0], pts[:, 1]
    for i in range(n):
        ax, ay = vs[i]
        bx, by = vs[(i + 1) % n]
        dxs, dys = bx - ax, by - ay
        len2 = dxs * dxs + dys * dys
        wx = px - ax
        wy = py - ay
        t = np.minimum(np.maximum((wx * dxs + wy * dys) / len2, 0.0), 1.0)
        ex = wx - t * dxs
        ey = wy - t * dys
        best = np.minimum(best, np.sqrt(ex * ex + ey * ey))
    return best


def _polygon_inside(vs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    # even-odd crossing number; boundary-exact behavior is irrelevant because
    # boundary points already have edge distance 0
    inside = np.zeros(len(pts), dtype=bool)
    n = len(vs)
    px, py = pts[:, 0], pts[:, 1]
    for i in range(n):
        ax, ay = vs[i]
        bx, by = vs[(i + 1) % n]
        cond = (ay > py) != (by > py)
        with np.errstate(invalid="ignore", divide="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        hit = cond & (px < xint)
        inside ^= hit
    return inside


# --- scalar public API -----------------------------------------------------------


def contains(dom: Domain, p) -> bool:
    """True iff p lies in the open domain (inside ambient, clear of obstacles)."""
    q = _as_point(p)
    return bool(dom.contains_points(q[None, :])[0])


def dist_to_boundary(dom: Domain, p) -> float:
    """Distance from an interior point to the domain boundary.

    Raises PointOutsideDomain if p is outside the open ambient disk or inside a
    removed solid region.  Returns 0.0 when p sits exactly on an obstacle curve.
    """
    q = _as_point(p)
    _check_inside_solids(dom, q)
    dist, _ = dom.boundary_scan(q[None, :])
    return float(dist[0])


def nearest_boundary_point(dom: Domain, p) -> np.ndarray:
    """Closest boundary point to p; ties go to the earliest obstacle, ambient last."""
    q = _as_point(p)
    _check_inside_solids(dom, q)
    kinds, params, _, amb = dom.records()
    _, rec = dom.boundary_scan(q[None, :])
    return project_to_record(kinds, params, amb, q[0], q[1], int(rec[0]))


def _check_inside_solids(dom: Domain, q: np.ndarray):
    cx, cy = dom.ambient.center
    if np.hypot(q[0] - cx, q[1] - cy) >= dom.ambient.radius:
        raise PointOutsideDomain(f"point {tuple(q)} is outside the open ambient disk")
    for k, ob in enumerate(dom.obstacles):
        if isinstance(ob, Disk):
            if np.hypot(q[0] - ob.center[0], q[1] - ob.center[1]) < ob.radius:
                raise PointOutsideDomain(f"point {tuple(q)} is inside disk obstacle {k}")
        elif isinstance(ob, Polygon) and ob.filled:
            vs = np.asarray(ob.vertices)
            if bool(_polygon_inside(vs, q[None, :])[0]) and \
                    float(_polygon_edge_distance(vs, q[None, :])[0]) > 0.0:
                raise PointOutsideDomain(f"point {tuple(q)} is inside filled polygon {k}")


# --- JSON serialization -----------------------------------------------------------


def obstacle_to_dict(ob: Obstacle) -> dict:
    if isinstance(ob, Disk):
        return {"type": "disk", "center": list(ob.center), "radius": ob.radius}
    if isinstance(ob, Segment):
        return {"type": "segment", "a": list(ob.a), "b": list(ob.b)}
    if isinstance(ob, Arc):
        return {"type": "arc", "center": list(ob.center), "radius": ob.radius,
                "theta": [ob.theta_min, ob.theta_max]}
    if isinstance(ob, Polygon):
        return {"type": "polygon", "vertices": [list(v) for v in ob.vertices],
                "filled": ob.filled}
    raise TypeError(f"unknown obstacle type {type(ob)!r}")


def obstacle_from_dict(d: dict) -> Obstacle:
    t = d["type"]
    if t == "disk":
        return Disk(tuple(d["center"]), d["radius"])
    if t == "segment":
        return Segment(tuple(d["a"]), tuple(d["b"]))
    if t == "arc":
        return Arc(tuple(d["center"]), d["radius"], d["theta"][0], d["theta"][1])
    if t == "polygon":
        return Polygon(tuple(tuple(v) for v in d["vertices"]), d.get("filled", False))
    raise ValueError(f"unknown obstacle type {t!r}")


def domain_to_dict(dom: Domain) -> dict:
    return {
        "ambient": {"center": list(dom.ambient.center), "radius": dom.ambient.radius},
        "obstacles": [obstacle_to_dict(ob) for ob in dom.obstacles],
        "label": dom.label,
    }


def domain_from_dict(d: dict) -> Domain:
    amb = Disk(tuple(d["ambient"]["center"]), d["ambient"]["radius"])
    obs = tuple(obstacle_from_dict(o) for o in d.get("obstacles", []))
    return Domain(amb, obs, d.get("label", ""))


def save_domain(dom: Domain, path):
    with open(path, "w") as fh:
        json.dump(domain_to_dict(dom), fh, indent=2)


def load_domain(path) -> Domain:
    with open(path) as fh:
        return domain_from_dict(json.load(fh))


def unit_disk(label: str = "unit-disk") -> Domain:
    return Domain(Disk((0.0, 0.0), 1.0), (), label)
