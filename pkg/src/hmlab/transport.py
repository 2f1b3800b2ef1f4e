"""Exact Wasserstein-1 distances between discrete boundary measures.

Equal-count uniform measures go through the assignment solver; general
weighted pairs solve the dense transportation LP.  Both routes are exact up
to solver tolerance, so test oracles can pin their outputs tightly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_matrix
from scipy.spatial.distance import cdist

from .errors import MassMismatch, SizeCap, UnsupportedDomain
from .geometry import Domain
from .sampler import EmpiricalMeasure, derive_seed, _mix_int

MASS_TOL = 1e-6
ATOM_CAP = 4096
LP_PAIR_CAP = 512 * 512


@dataclass
class TransportPlan:
    """Sparse optimal coupling: mass[k] moves from atom src[k] to atom dst[k]."""

    src: np.ndarray
    dst: np.ndarray
    mass: np.ndarray
    cost: float
    meta: dict = field(default_factory=dict)

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write("# hmlab transport plan\n")
            fh.write(f"# cost={self.cost!r}\n")
            fh.write("src,dst,mass\n")
            for i, j, m in zip(self.src, self.dst, self.mass):
                fh.write(f"{int(i)},{int(j)},{float(m)!r}\n")


def _normalized_weights(mu: EmpiricalMeasure, nu: EmpiricalMeasure):
    tm, tn = mu.total_weight, nu.total_weight
    if abs(tm - tn) > MASS_TOL:
        raise MassMismatch(
            f"total weights differ: {tm:.9f} vs {tn:.9f} (tolerance {MASS_TOL})"
        )
    if tm <= 0 or tn <= 0:
        raise MassMismatch("cannot compare measures with nonpositive total weight")
    return mu.weights / tm, nu.weights / tn


def w1_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                return_plan: bool = False):
    """Exact W1 between two discrete measures (after renormalizing to mass 1).

    Raises MassMismatch when totals differ by more than 1e-6 and SizeCap when
    the instance exceeds the exact-solver budget; subsample first in that case.
    """
    if mu.n_atoms > ATOM_CAP or nu.n_atoms > ATOM_CAP:
        raise SizeCap(
            f"atom counts {mu.n_atoms}x{nu.n_atoms} exceed the per-side cap "
            f"{ATOM_CAP}; subsample before comparing"
        )
    wa, wb = _normalized_weights(mu, nu)
    uniform = (
        mu.n_atoms == nu.n_atoms
        and np.allclose(wa, 1.0 / mu.n_atoms, rtol=1e-9, atol=0)
        and np.allclose(wb, 1.0 / nu.n_atoms, rtol=1e-9, atol=0)
    )
    cost = cdist(mu.points, nu.points)
    if uniform:
        rows, cols = linear_sum_assignment(cost)
        total = float(cost[rows, cols].sum() / mu.n_atoms)
        if not return_plan:
            return total
        plan = TransportPlan(rows.astype(np.int64), cols.astype(np.int64),
                             np.full(len(rows), 1.0 / mu.n_atoms), total,
                             {"solver": "assignment"})
        return total, plan
    return _lp_transport(cost, wa, wb, return_plan)


def _lp_transport(cost: np.ndarray, wa: np.ndarray, wb: np.ndarray,
                  return_plan: bool):
    n, m = cost.shape
    if n * m > LP_PAIR_CAP:
        raise SizeCap(
            f"weighted transport with {n}x{m} atom pairs exceeds the LP budget; "
            "subsample to uniform atoms first"
        )
    # equality constraints: row sums = wa, column sums = wb
    idx = np.arange(n * m)
    rows_i = idx // m
    cols_j = idx % m
    data = np.ones(2 * n * m)
    ai = np.concatenate([rows_i, n + cols_j])
    aj = np.concatenate([idx, idx])
    a_eq = coo_matrix((data, (ai, aj)), shape=(n + m, n * m))
    b_eq = np.concatenate([wa, wb])
    res = linprog(cost.ravel(), A_eq=a_eq.tocsr(), b_eq=b_eq,
                  bounds=(0, None), method="highs")
    if not res.success:  # pragma: no cover - HiGHS handles balanced instances
        raise RuntimeError(f"transport LP failed: {res.message}")
    total = float(res.fun)
    if not return_plan:
        return total
    x = res.x.reshape(n, m)
    src, dst = np.nonzero(x > 1e-12)
    plan = TransportPlan(src.astype(np.int64), dst.astype(np.int64),
                         x[src, dst], total, {"solver": "highs"})
    return total, plan


def subsample(mu: EmpiricalMeasure, n: int, seed: int = 0) -> EmpiricalMeasure:
    """Deterministic systematic resampling to n uniform atoms of weight 1/n.

    Atoms are first ordered by angle around their weighted centroid (radius
    breaks ties), then a single uniform offset selects n points in cumulative
    weight space.  The estimator is unbiased and its stratification keeps the
    self-distance of a circle-supported measure far below iid resampling noise.
    Heavy atoms can be selected multiple times; duplicates are kept so the
    result always has exactly n atoms.
    """
    if n < 1:
        raise ValueError("subsample size must be positive")
    if mu.n_atoms == 0:
        raise ValueError("cannot subsample an empty measure")
    w = mu.weights / mu.total_weight
    c = np.average(mu.points, axis=0, weights=w)
    ang = np.arctan2(mu.points[:, 1] - c[1], mu.points[:, 0] - c[0])
    rad = np.hypot(mu.points[:, 0] - c[0], mu.points[:, 1] - c[1])
    order = np.lexsort((rad, ang))
    cw = np.cumsum(w[order])
    cw[-1] = 1.0  # guard against rounding at the top end
    u = (_mix_int(derive_seed(seed, "subsample")) >> 11) / 9007199254740992.0
    targets = (u + np.arange(n)) / n
    picks = order[np.searchsorted(cw, targets, side="right").clip(max=len(order) - 1)]
    out = EmpiricalMeasure(mu.points[picks], np.full(n, 1.0 / n),
                           mu.obstacle[picks], dict(mu.meta))
    out.meta["subsampled_from"] = mu.n_atoms
    return out


def discretize_reference(dom: Domain, n: int, kind: str = "uniform-circle",
                         z=(0.0, 0.0)) -> EmpiricalMeasure:
    """Reference discretizations of harmonic measure on the unit disk.

    kind "uniform-circle" returns n equispaced unit-circle atoms of weight
    1/n (the measure seen from the center); "analytic-poisson" reweights the
    same atoms by the Poisson kernel at z; "poisson-equal" places n atoms of
    weight 1/n at the Poisson quantiles seen from z, which keeps downstream
    distance computations on the fast equal-weight path.  Other domains raise
    UnsupportedDomain: they have no closed-form reference here.
    """
    if dom.obstacles or dom.ambient.center != (0.0, 0.0) or dom.ambient.radius != 1.0:
        raise UnsupportedDomain("reference discretization requires the bare unit disk")
    if n < 1:
        raise ValueError("need at least one atom")
    theta = 2.0 * np.pi * np.arange(n) / n
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    obs = np.full(n, -1, dtype=np.int32)
    if kind == "uniform-circle":
        return EmpiricalMeasure(pts, np.full(n, 1.0 / n), obs,
                                {"reference": kind, "n_samples": n})
    if kind == "analytic-poisson":
        z = np.asarray(z, dtype=np.float64).reshape(2)
        r2 = z[0] * z[0] + z[1] * z[1]
        if r2 >= 1.0:
            raise ValueError("poisson basepoint must lie inside the unit disk")
        d2 = (pts[:, 0] - z[0]) ** 2 + (pts[:, 1] - z[1]) ** 2
        w = (1.0 - r2) / d2
        w /= w.sum()
        return EmpiricalMeasure(pts, w, obs,
                                {"reference": kind, "n_samples": n,
                                 "basepoint": (float(z[0]), float(z[1]))})
    if kind == "poisson-equal":
        z = np.asarray(z, dtype=np.float64).reshape(2)
        r = float(np.hypot(z[0], z[1]))
        if r >= 1.0:
            raise ValueError("poisson basepoint must lie inside the unit disk")
        alpha = float(np.arctan2(z[1], z[0])) if r > 0 else 0.0
        q = (np.arange(n) + 0.5) / n
        # inverse CDF of the Poisson kernel: the harmonic measure of the
        # boundary arc (alpha-pi, alpha+t] from z has CDF with this arctan form
        t = 2.0 * np.arctan(((1.0 - r) / (1.0 + r)) * np.tan(np.pi * (q - 0.5)))
        theta = alpha + t
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return EmpiricalMeasure(pts, np.full(n, 1.0 / n), obs,
                                {"reference": kind, "n_samples": n,
                                 "basepoint": (float(z[0]), float(z[1]))})
    raise ValueError(f"unknown reference kind {kind!r}")
