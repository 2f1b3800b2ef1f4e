# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk-on-spheres kernel.

Scalar per-walk loop with the same splitmix64 streams, rejection sampling and
distance formula orderings as the numpy fallback (_wos_py); the module is
built with contraction disabled so both backends emit bit-identical samples.
"""

from libc.math cimport fabs, fmax, fmin, sqrt

import numpy as np

ctypedef unsigned long long u64

cdef u64 GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline u64 mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double next_double(u64* state) nogil:
    state[0] = state[0] + GAMMA
    return <double>(mix64(state[0]) >> 11) * INV53


cdef inline int nearest(signed char* kinds, double* params, Py_ssize_t m,
                        double acx, double acy, double ar,
                        double px, double py, double* dist_out) nogil:
    cdef double best = 0.0
    cdef double d, dx, dy, wx, wy, t, ex, ey, c1, c2, norm, d1, d2
    cdef int rec = 0
    cdef bint have = False
    cdef bint insec
    cdef Py_ssize_t j
    cdef double* p
    for j in range(m):
        p = params + 12 * j
        if kinds[j] == 0:
            dx = px - p[0]
            dy = py - p[1]
            d = sqrt(dx * dx + dy * dy) - p[2]
        elif kinds[j] == 1:
            wx = px - p[0]
            wy = py - p[1]
            t = (wx * p[2] + wy * p[3]) / p[4]
            t = fmin(fmax(t, 0.0), 1.0)
            ex = wx - t * p[2]
            ey = wy - t * p[3]
            d = sqrt(ex * ex + ey * ey)
        else:
            dx = px - p[0]
            dy = py - p[1]
            c1 = p[3] * dy - p[4] * dx
            c2 = dx * p[6] - dy * p[5]
            if p[7] != 0.0:
                insec = (c1 >= 0.0) or (c2 >= 0.0)
            else:
                insec = (c1 >= 0.0) and (c2 >= 0.0)
            if insec:
                norm = sqrt(dx * dx + dy * dy)
                d = fabs(norm - p[2])
            else:
                wx = px - p[8]
                wy = py - p[9]
                d1 = wx * wx + wy * wy
                wx = px - p[10]
                wy = py - p[11]
                d2 = wx * wx + wy * wy
                d = sqrt(fmin(d1, d2))
        if (not have) or d < best:
            best = d
            rec = <int>j
            have = True
    dx = px - acx
    dy = py - acy
    d = ar - sqrt(dx * dx + dy * dy)
    if (not have) or d < best:
        best = d
        rec = -1
    dist_out[0] = best
    return rec


cdef inline void project(signed char* kinds, double* params,
                         double acx, double acy, double ar,
                         double px, double py, int rec,
                         double* qx, double* qy) nogil:
    cdef double dx, dy, norm, s, t, wx, wy, c1, c2, d1, d2
    cdef bint insec
    cdef double* p
    if rec < 0:
        dx = px - acx
        dy = py - acy
        norm = sqrt(dx * dx + dy * dy)
        if norm == 0.0:
            qx[0] = acx + ar
            qy[0] = acy
            return
        s = ar / norm
        qx[0] = acx + dx * s
        qy[0] = acy + dy * s
        return
    p = params + 12 * rec
    if kinds[rec] == 0:
        dx = px - p[0]
        dy = py - p[1]
        norm = sqrt(dx * dx + dy * dy)
        if norm == 0.0:
            qx[0] = p[0] + p[2]
            qy[0] = p[1]
            return
        s = p[2] / norm
        qx[0] = p[0] + dx * s
        qy[0] = p[1] + dy * s
        return
    if kinds[rec] == 1:
        wx = px - p[0]
        wy = py - p[1]
        t = (wx * p[2] + wy * p[3]) / p[4]
        t = fmin(fmax(t, 0.0), 1.0)
        qx[0] = p[0] + t * p[2]
        qy[0] = p[1] + t * p[3]
        return
    dx = px - p[0]
    dy = py - p[1]
    c1 = p[3] * dy - p[4] * dx
    c2 = dx * p[6] - dy * p[5]
    if p[7] != 0.0:
        insec = (c1 >= 0.0) or (c2 >= 0.0)
    else:
        insec = (c1 >= 0.0) and (c2 >= 0.0)
    if insec:
        norm = sqrt(dx * dx + dy * dy)
        if norm == 0.0:
            qx[0] = p[8]
            qy[0] = p[9]
            return
        s = p[2] / norm
        qx[0] = p[0] + dx * s
        qy[0] = p[1] + dy * s
        return
    wx = px - p[8]
    wy = py - p[9]
    d1 = wx * wx + wy * wy
    wx = px - p[10]
    wy = py - p[11]
    d2 = wx * wx + wy * wy
    if d2 < d1:
        qx[0] = p[10]
        qy[0] = p[11]
    else:
        qx[0] = p[8]
        qy[0] = p[9]


cdef inline void walk_one(signed char* kinds, double* params, Py_ssize_t m,
                          double acx, double acy, double ar,
                          double x, double y, double eps, long long max_steps,
                          u64 state, double* hx, double* hy,
                          int* rec_out, long long* steps_out) nogil:
    cdef long long step
    cdef double d, u, v, s, ux, uy
    cdef int r
    for step in range(max_steps):
        r = nearest(kinds, params, m, acx, acy, ar, x, y, &d)
        if d < eps:
            project(kinds, params, acx, acy, ar, x, y, r, hx, hy)
            rec_out[0] = r
            steps_out[0] = step
            return
        while True:
            u = 2.0 * next_double(&state) - 1.0
            v = 2.0 * next_double(&state) - 1.0
            s = u * u + v * v
            if not (s > 1.0 or s == 0.0):
                break
        ux = (u * u - v * v) / s
        uy = (2.0 * u * v) / s
        x = x + d * ux
        y = y + d * uy
    r = nearest(kinds, params, m, acx, acy, ar, x, y, &d)
    if d < eps:
        project(kinds, params, acx, acy, ar, x, y, r, hx, hy)
        rec_out[0] = r
    else:
        hx[0] = x
        hy[0] = y
        rec_out[0] = -2
    steps_out[0] = max_steps


def run_walks(double[::1] amb not None, signed char[::1] kinds not None,
              double[:, ::1] params not None, double[::1] x0 not None,
              double[::1] y0 not None, double eps, long long max_steps,
              unsigned long long seed):
    """First-hit positions for len(x0) walks; same contract as _wos_py.run_walks."""
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t m = kinds.shape[0]
    hx = np.empty(n, dtype=np.float64)
    hy = np.empty(n, dtype=np.float64)
    rec = np.empty(n, dtype=np.int32)
    steps = np.empty(n, dtype=np.int64)
    cdef double[::1] hxv = hx
    cdef double[::1] hyv = hy
    cdef int[::1] recv = rec
    cdef long long[::1] stepsv = steps
    cdef signed char* kp = NULL
    cdef double* pp = NULL
    if m > 0:
        kp = &kinds[0]
        pp = &params[0, 0]
    cdef double acx = amb[0]
    cdef double acy = amb[1]
    cdef double ar = amb[2]
    cdef u64 base = mix64(seed)
    cdef Py_ssize_t i
    if n == 0:
        return hx, hy, rec, steps
    with nogil:
        for i in range(n):
            walk_one(kp, pp, m, acx, acy, ar, x0[i], y0[i], eps, max_steps,
                     mix64(base + (<u64>i + 1) * GAMMA), &hxv[i], &hyv[i],
                     &recv[i], &stepsv[i])
    return hx, hy, rec, steps
