import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmlab import (Arc, Disk, Domain, PointOutsideDomain, Polygon, Segment,
                   domain_from_dict, domain_to_dict, load_domain, save_domain,
                   unit_disk)
from hmlab.geometry import (contains, dist_to_boundary,
                            nearest_boundary_point)


# --- brute-force oracle --------------------------------------------------------

def brute_obstacle_distance(ob, p, n=20000):
    """Min distance from p to a dense point sample of the obstacle curve."""
    p = np.asarray(p, dtype=float)
    if isinstance(ob, Disk):
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        pts = np.array(ob.center) + ob.radius * np.stack([np.cos(t), np.sin(t)], 1)
    elif isinstance(ob, Segment):
        t = np.linspace(0, 1, n)[:, None]
        pts = (1 - t) * np.array(ob.a) + t * np.array(ob.b)
    elif isinstance(ob, Arc):
        t = np.linspace(ob.theta_min, ob.theta_max, n)
        pts = np.array(ob.center) + ob.radius * np.stack([np.cos(t), np.sin(t)], 1)
    elif isinstance(ob, Polygon):
        vs = np.asarray(ob.vertices + (ob.vertices[0],))
        chunks = []
        for a, b in zip(vs[:-1], vs[1:]):
            t = np.linspace(0, 1, n // len(ob.vertices))[:, None]
            chunks.append((1 - t) * a + t * b)
        pts = np.concatenate(chunks)
    else:
        raise TypeError(ob)
    return float(np.hypot(*(pts - p).T).min())


OBSTACLES = [
    Disk((0.3, -0.2), 0.25),
    Segment((-0.5, 0.1), (0.4, 0.6)),
    Arc((0.1, 0.0), 0.5, -1.0, 2.2),
    Polygon(((-0.3, -0.3), (0.3, -0.4), (0.1, 0.2))),
]


@pytest.mark.parametrize("ob", OBSTACLES, ids=lambda o: type(o).__name__)
def test_boundary_distance_matches_dense_sampling(ob):
    dom = Domain(Disk((0.0, 0.0), 2.0), (ob,))
    rng = np.random.default_rng(3)
    for _ in range(40):
        p = rng.uniform(-1.4, 1.4, 2)
        try:
            d = dist_to_boundary(dom, p)
        except PointOutsideDomain:
            continue
        ref = min(brute_obstacle_distance(ob, p),
                  2.0 - math.hypot(*p))
        # dense sampling overestimates by at most one sample spacing
        assert abs(d - ref) < 1e-3
        assert d <= ref + 1e-12


def test_nearest_boundary_point_realizes_distance(slit):
    rng = np.random.default_rng(5)
    for _ in range(60):
        p = rng.uniform(-0.9, 0.9, 2)
        if not contains(slit, p):
            continue
        d = dist_to_boundary(slit, p)
        q = nearest_boundary_point(slit, p)
        assert math.hypot(q[0] - p[0], q[1] - p[1]) == pytest.approx(d, abs=1e-12)


def test_contains_excludes_obstacles_and_exterior(holed):
    assert contains(holed, (0.0, 0.0))
    assert not contains(holed, (0.4, 0.0))       # center of the hole
    assert not contains(holed, (0.4, 0.149))     # still inside the hole
    assert not contains(holed, (1.2, 0.0))
    assert not contains(holed, (1.0, 0.0))       # ambient circle is boundary


def test_dist_raises_outside(holed):
    with pytest.raises(PointOutsideDomain):
        dist_to_boundary(holed, (1.5, 0.0))
    with pytest.raises(PointOutsideDomain):
        dist_to_boundary(holed, (0.42, 0.01))


def test_clearance_vectorizes_dist(slit):
    pts = np.random.default_rng(9).uniform(-0.7, 0.7, (50, 2))
    keep = slit.contains_points(pts)
    clear = slit.clearance(pts)
    for p, ok, c in zip(pts, keep, clear):
        if ok:
            assert c == pytest.approx(dist_to_boundary(slit, p), abs=1e-12)


@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
@settings(max_examples=60, deadline=None)
def test_unit_disk_distance_closed_form(x, y):
    r = math.hypot(x, y)
    if r >= 0.999:
        return
    assert dist_to_boundary(unit_disk(), (x, y)) == pytest.approx(1.0 - r, abs=1e-12)


@given(st.floats(0.0, 2 * math.pi), st.floats(0.05, 0.6), st.floats(-0.3, 0.3))
@settings(max_examples=40, deadline=None)
def test_disk_obstacle_distance_rotation_invariant(phi, rr, off):
    """Distances are preserved by rotating the whole configuration."""
    c, s = math.cos(phi), math.sin(phi)

    def rot(p):
        return (c * p[0] - s * p[1], s * p[0] + c * p[1])

    base = Domain(Disk((0.0, 0.0), 1.0), (Disk((0.5, 0.1), rr),))
    turned = Domain(Disk((0.0, 0.0), 1.0), (Disk(rot((0.5, 0.1)), rr),))
    p = (-0.4, off)
    if not (contains(base, p) and contains(turned, rot(p))):
        return
    assert dist_to_boundary(base, p) == pytest.approx(
        dist_to_boundary(turned, rot(p)), abs=1e-12)


def test_primitive_validation():
    with pytest.raises(ValueError):
        Disk((0, 0), 0.0)
    with pytest.raises(ValueError):
        Segment((1, 1), (1, 1))
    with pytest.raises(ValueError):
        Arc((0, 0), 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        Arc((0, 0), 1.0, 0.0, 7.0)            # span over a full turn
    with pytest.raises(ValueError):
        Polygon(((0, 0), (1, 1)))
    with pytest.raises(ValueError):
        Polygon(((0, 0), (1, 0), (2, 0)))     # collinear
    with pytest.raises(ValueError):
        Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))  # bowtie


def test_domain_validation():
    # obstacles may poke past the ambient circle (the excess is unreachable)
    Domain(Disk((0, 0), 1.0), (Segment((0.0, 0.0), (1.5, 0.0)),))
    with pytest.raises(ValueError):
        # but a fully exterior obstacle is rejected
        Domain(Disk((0, 0), 1.0), (Disk((1.8, 0.0), 0.3),))
    with pytest.raises(ValueError):
        Domain(Disk((0, 0), 1.0), (Segment((1.2, 0.0), (1.5, 0.0)),))


def test_records_order_and_shapes(slit, holed):
    kinds, params, rec_obs, amb = slit.records()
    assert kinds.dtype == np.int8 and params.dtype == np.float64
    assert params.shape == (len(kinds), 12)
    assert np.allclose(amb, (0.0, 0.0, 1.0))
    # obstacle records come first and map back to obstacle 0
    assert rec_obs[0] == 0
    kinds2, _, rec_obs2, _ = holed.records()
    assert kinds2[0] == 0 and rec_obs2[0] == 0


def test_filled_polygon_interior_is_solid():
    sq = Polygon(((-0.2, -0.2), (0.2, -0.2), (0.2, 0.2), (-0.2, 0.2)),
                 filled=True)
    dom = Domain(Disk((0, 0), 1.0), (sq,))
    with pytest.raises(PointOutsideDomain):
        dist_to_boundary(dom, (0.0, 0.0))
    hollow = Polygon(((-0.2, -0.2), (0.2, -0.2), (0.2, 0.2), (-0.2, 0.2)))
    dom2 = Domain(Disk((0, 0), 1.0), (hollow,))
    assert dist_to_boundary(dom2, (0.0, 0.0)) == pytest.approx(0.2, abs=1e-12)


def test_json_roundtrip(tmp_path, slit, holed):
    for dom in (slit, holed, unit_disk(),
                Domain(Disk((0.1, -0.2), 1.5),
                       (Arc((0.0, 0.0), 0.4, 0.0, 3.0),
                        Polygon(((0.6, 0.6), (0.9, 0.6), (0.75, 0.9))),),
                       label="mixed")):
        d = domain_to_dict(dom)
        back = domain_from_dict(d)
        assert back == dom
        path = tmp_path / f"{dom.label}.json"
        save_domain(dom, path)
        assert load_domain(path) == dom
