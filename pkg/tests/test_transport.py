import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmlab import (EmpiricalMeasure, MassMismatch, SizeCap, TransportPlan,
                   discretize_reference, subsample, unit_disk, w1_distance)
from hmlab.errors import UnsupportedDomain


def measure(pts, w=None, obs=None):
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    if w is None:
        w = np.full(n, 1.0 / n)
    if obs is None:
        obs = np.full(n, -1, dtype=np.int32)
    return EmpiricalMeasure(pts, w, obs)


# --- exhaustive oracle ----------------------------------------------------------
#
# Instances are built from Q unit-mass chunks per side (Q <= 8), aggregated
# into atoms with integer multiplicity.  The optimal transport cost then
# equals the best matching of chunks, found by trying all Q! permutations.

def brute_force_w1(chunks_a, chunks_b):
    q = len(chunks_a)
    perms = np.array(list(itertools.permutations(range(q))))
    d = np.hypot(*(chunks_a[:, None, :] - chunks_b[None, :, :]).T).T
    costs = d[np.arange(q), perms].sum(axis=1)
    return float(costs.min()) / q


def aggregate(chunks, rng):
    """Randomly merge unit chunks into weighted atoms."""
    q = len(chunks)
    n_atoms = rng.integers(1, q + 1)
    owner = rng.integers(0, n_atoms, q)
    # remap to the atoms that actually got chunks
    used = np.unique(owner)
    pts = np.array([chunks[owner == u][0] for u in used])
    w = np.array([(owner == u).sum() for u in used], dtype=float) / q
    # all chunks of one atom share its location
    full = np.concatenate([np.repeat(pts[i:i + 1], (owner == used[i]).sum(), 0)
                           for i in range(len(used))])
    return measure(pts, w), full


def test_exact_w1_matches_permutation_enumeration():
    rng = np.random.default_rng(2026)
    for trial in range(200):
        q = int(rng.integers(2, 9))
        ca = rng.uniform(-1, 1, (q, 2))
        cb = rng.uniform(-1, 1, (q, 2))
        mu, chunks_a = aggregate(ca, rng)
        nu, chunks_b = aggregate(cb, rng)
        want = brute_force_w1(chunks_a, chunks_b)
        got = w1_distance(mu, nu)
        assert abs(got - want) < 1e-9, f"trial {trial}: {got} vs {want}"


def test_rotation_of_uniform_atoms():
    """Rotating n equispaced circle atoms by pi/n moves each one chord length."""
    for n in (4, 16, 64):
        t = 2 * math.pi * np.arange(n) / n
        a = measure(np.stack([np.cos(t), np.sin(t)], 1))
        b = measure(np.stack([np.cos(t + math.pi / n), np.sin(t + math.pi / n)], 1))
        assert w1_distance(a, b) == pytest.approx(2 * math.sin(math.pi / (2 * n)),
                                                  abs=1e-12)


def test_identity_and_symmetry():
    rng = np.random.default_rng(1)
    a = measure(rng.uniform(-1, 1, (30, 2)))
    b = measure(rng.uniform(-1, 1, (17, 2)), w=rng.dirichlet(np.ones(17)))
    assert w1_distance(a, a) == 0.0
    assert w1_distance(a, b) == pytest.approx(w1_distance(b, a), abs=1e-12)


def test_triangle_inequality():
    rng = np.random.default_rng(8)
    for _ in range(20):
        ms = [measure(rng.uniform(-1, 1, (rng.integers(2, 12), 2)))
              for _ in range(3)]
        dab = w1_distance(ms[0], ms[1])
        dbc = w1_distance(ms[1], ms[2])
        dac = w1_distance(ms[0], ms[2])
        assert dac <= dab + dbc + 1e-9


def test_translation_of_point_mass():
    a = measure([[0.0, 0.0]])
    b = measure([[0.3, -0.4]])
    assert w1_distance(a, b) == pytest.approx(0.5, abs=1e-15)


def test_plan_marginals_and_cost():
    rng = np.random.default_rng(12)
    mu = measure(rng.uniform(-1, 1, (9, 2)), w=rng.dirichlet(np.ones(9)))
    nu = measure(rng.uniform(-1, 1, (6, 2)), w=rng.dirichlet(np.ones(6)))
    d, plan = w1_distance(mu, nu, return_plan=True)
    cost = np.hypot(*(mu.points[plan.src] - nu.points[plan.dst]).T)
    assert float((plan.mass * cost).sum()) == pytest.approx(d, abs=1e-9)
    row = np.bincount(plan.src, weights=plan.mass, minlength=9)
    col = np.bincount(plan.dst, weights=plan.mass, minlength=6)
    assert np.allclose(row, mu.weights / mu.total_weight, atol=1e-8)
    assert np.allclose(col, nu.weights / nu.total_weight, atol=1e-8)


def test_plan_csv_roundtrip(tmp_path):
    mu = measure([[0, 0], [1, 0]])
    nu = measure([[0, 1], [1, 1]])
    d, plan = w1_distance(mu, nu, return_plan=True)
    path = tmp_path / "plan.csv"
    plan.save_csv(path)
    text = path.read_text()
    assert "src,dst,mass" in text
    assert repr(d) in text


def test_mass_mismatch_raises():
    a = measure([[0, 0]], w=np.array([0.7]))
    b = measure([[1, 0]], w=np.array([1.0]))
    with pytest.raises(MassMismatch):
        w1_distance(a, b)


def test_size_cap_raises():
    pts = np.random.default_rng(0).uniform(-1, 1, (5000, 2))
    big = measure(pts)
    with pytest.raises(SizeCap):
        w1_distance(big, big)


def test_subsample_preserves_mass_and_support():
    rng = np.random.default_rng(3)
    mu = measure(rng.uniform(-1, 1, (500, 2)), w=rng.dirichlet(np.ones(500)))
    sub = subsample(mu, 64, seed=9)
    assert sub.n_atoms == 64
    assert sub.total_weight == pytest.approx(mu.total_weight, abs=1e-9)
    # every sampled point is one of the originals
    orig = {tuple(p) for p in mu.points}
    assert all(tuple(p) in orig for p in sub.points)
    again = subsample(mu, 64, seed=9)
    assert np.array_equal(sub.points, again.points)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20, deadline=None)
def test_subsample_w1_stays_close(seed):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, 2 * math.pi, 300)
    mu = measure(np.stack([np.cos(t), np.sin(t)], 1))
    sub = subsample(mu, 150, seed=seed)
    assert w1_distance(mu, sub) < 0.25


def test_reference_uniform_circle():
    ref = discretize_reference(unit_disk(), 8)
    assert ref.n_atoms == 8
    assert np.allclose(np.hypot(*ref.points.T), 1.0)
    assert np.allclose(ref.weights, 1.0 / 8)


def test_reference_poisson_modes_agree():
    """Equal-weight quantile atoms approximate the reweighted comb."""
    z = (0.4, 0.3)
    a = discretize_reference(unit_disk(), 512, "analytic-poisson", z=z)
    b = discretize_reference(unit_disk(), 512, "poisson-equal", z=z)
    assert b.weights.std() == 0.0
    assert w1_distance(subsample(a, 512, seed=1), b) < 0.02


def test_reference_poisson_equal_centers_on_basepoint_angle():
    z = (0.0, 0.6)
    ref = discretize_reference(unit_disk(), 101, "poisson-equal", z=z)
    # median atom sits at the angle of z
    mid = ref.points[50]
    assert math.atan2(mid[1], mid[0]) == pytest.approx(math.pi / 2, abs=1e-9)


def test_reference_zero_basepoint_is_uniform():
    a = discretize_reference(unit_disk(), 32, "poisson-equal", z=(0.0, 0.0))
    t = np.sort(np.arctan2(a.points[:, 1], a.points[:, 0]))
    gaps = np.diff(t)
    assert np.allclose(gaps, gaps[0], atol=1e-9)


def test_reference_rejects_obstacles(slit):
    with pytest.raises(UnsupportedDomain):
        discretize_reference(slit, 16)
