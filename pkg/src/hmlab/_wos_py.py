"""Pure-numpy walk-on-spheres kernel.

Mirrors the compiled kernel operation for operation: the same splitmix64
per-walk streams, the same rejection sampling for jump directions and the
same distance formula orderings, so both backends produce bit-identical
first-hit samples for a given seed.  Vectorized over the active walk set;
rejected direction draws advance only their own streams.
"""

from __future__ import annotations

import numpy as np

from .geometry import project_to_record

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_states(seed: int, n: int) -> np.ndarray:
    """Initial splitmix64 state for walk streams 0..n-1."""
    base = mix64(np.full(1, seed & 0xFFFFFFFFFFFFFFFF, dtype=np.uint64))
    idx = np.arange(1, n + 1, dtype=np.uint64)
    return mix64(base + idx * GAMMA)


def _next_doubles(states: np.ndarray, w: np.ndarray) -> np.ndarray:
    states[w] = states[w] + GAMMA
    z = mix64(states[w])
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _directions(states: np.ndarray, idx: np.ndarray):
    """Unit directions for the walks in idx, one accepted draw per walk."""
    k = len(idx)
    dx = np.empty(k)
    dy = np.empty(k)
    pend = np.arange(k)
    while pend.size:
        w = idx[pend]
        u = 2.0 * _next_doubles(states, w) - 1.0
        v = 2.0 * _next_doubles(states, w) - 1.0
        s = u * u + v * v
        ok = ~((s > 1.0) | (s == 0.0))
        g = pend[ok]
        uu = u[ok]
        vv = v[ok]
        ss = s[ok]
        dx[g] = (uu * uu - vv * vv) / ss
        dy[g] = (2.0 * uu * vv) / ss
        pend = pend[~ok]
    return dx, dy


def _record_distance(kind: int, p: np.ndarray, px: np.ndarray, py: np.ndarray):
    if kind == 0:  # disk; signed, equals the set distance at interior positions
        dx = px - p[0]
        dy = py - p[1]
        return np.sqrt(dx * dx + dy * dy) - p[2]
    if kind == 1:  # segment
        wx = px - p[0]
        wy = py - p[1]
        t = (wx * p[2] + wy * p[3]) / p[4]
        t = np.minimum(np.maximum(t, 0.0), 1.0)
        ex = wx - t * p[2]
        ey = wy - t * p[3]
        return np.sqrt(ex * ex + ey * ey)
    # arc: angular sector test via cross products against the endpoint rays
    dx = px - p[0]
    dy = py - p[1]
    c1 = p[3] * dy - p[4] * dx
    c2 = dx * p[6] - dy * p[5]
    if p[7] != 0.0:
        insec = (c1 >= 0.0) | (c2 >= 0.0)
    else:
        insec = (c1 >= 0.0) & (c2 >= 0.0)
    norm = np.sqrt(dx * dx + dy * dy)
    w1x = px - p[8]
    w1y = py - p[9]
    d1 = w1x * w1x + w1y * w1y
    w2x = px - p[10]
    w2y = py - p[11]
    d2 = w2x * w2x + w2y * w2y
    return np.where(insec, np.abs(norm - p[2]), np.sqrt(np.minimum(d1, d2)))


def _nearest(kinds, params, amb, px, py):
    """Strict-< scan over records, ambient circle last; rec -1 means ambient."""
    best = None
    rec = None
    for j in range(len(kinds)):
        d = _record_distance(int(kinds[j]), params[j], px, py)
        if best is None:
            best = d
            rec = np.zeros(len(px), dtype=np.int32)
        else:
            upd = d < best
            best = np.where(upd, d, best)
            rec = np.where(upd, np.int32(j), rec)
    dxa = px - amb[0]
    dya = py - amb[1]
    da = amb[2] - np.sqrt(dxa * dxa + dya * dya)
    if best is None:
        return da, np.full(len(px), -1, dtype=np.int32)
    upd = da < best
    best = np.where(upd, da, best)
    rec = np.where(upd, np.int32(-1), rec)
    return best, rec


def run_walks(amb, kinds, params, x0, y0, eps, max_steps, seed):
    """First-hit positions for len(x0) walks.

    Returns (hx, hy, rec, steps).  rec is the absorbing record index, -1 for
    the ambient circle, -2 for walks that hit the step cap without absorbing.
    """
    n = len(x0)
    x = np.array(x0, dtype=np.float64, copy=True)
    y = np.array(y0, dtype=np.float64, copy=True)
    hx = np.empty(n)
    hy = np.empty(n)
    rec = np.full(n, -2, dtype=np.int32)
    steps = np.full(n, max_steps, dtype=np.int64)
    states = stream_states(seed, n)
    act = np.arange(n)

    for step in range(max_steps):
        if not act.size:
            break
        d, r = _nearest(kinds, params, amb, x[act], y[act])
        hit = d < eps
        if hit.any():
            _absorb(kinds, params, amb, act[hit], r[hit], x, y, hx, hy, rec)
            steps[act[hit]] = step
            act = act[~hit]
            if not act.size:
                break
            d = d[~hit]
        ux, uy = _directions(states, act)
        x[act] = x[act] + d * ux
        y[act] = y[act] + d * uy

    if act.size:  # one final absorption check at the cap
        d, r = _nearest(kinds, params, amb, x[act], y[act])
        hit = d < eps
        _absorb(kinds, params, amb, act[hit], r[hit], x, y, hx, hy, rec)
        out = act[~hit]
        hx[out] = x[out]
        hy[out] = y[out]
    return hx, hy, rec, steps


def _absorb(kinds, params, amb, walks, recs, x, y, hx, hy, rec_out):
    for w, r in zip(walks, recs):
        q = project_to_record(kinds, params, amb, x[w], y[w], int(r))
        hx[w] = q[0]
        hy[w] = q[1]
        rec_out[w] = r
