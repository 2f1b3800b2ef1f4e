"""Convergence checkers and boundary-hypothesis estimators.

Three notions are tested for a sequence of domains against a limit domain: a
grid kernel condition (compact pieces of the limit eventually fit inside the
sequence, and the grid kernel of the sequence does not overshoot the limit), a
shared eps-interior condition, and Wasserstein convergence of sampled harmonic
measures.  Separate estimators probe uniform perfectness of an obstacle set,
uniform boundary regularity of a domain sequence, and a circular-projection
lower bound for harmonic measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .approximation import clearance_grid, frame_for, _flood_from, interior_region
from .errors import EmptyRegion, PointOutsideDomain, UnsupportedDomain
from .geometry import (Arc, Disk, Domain, Polygon, Segment, contains,
                       dist_to_boundary)
from .sampler import (WalkConfig, derive_seed, first_hit_tail_probability,
                      sample_harmonic_measure)
from .transport import discretize_reference, subsample, w1_distance


# --- kernel (Caratheodory-style) convergence ---------------------------------

@dataclass
class KernelConvergence:
    """Outcome of the grid kernel check; ok means all three clauses hold."""

    ok: bool
    basepoint_ok: bool
    compacts_ok: bool
    kernel_contained: bool
    h: float
    ladder: tuple
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        parts = [f"basepoint {'ok' if self.basepoint_ok else 'FAIL'}",
                 f"compacts {'ok' if self.compacts_ok else 'FAIL'}",
                 f"kernel containment {'ok' if self.kernel_contained else 'FAIL'}"]
        return ("kernel convergence " + ("ok" if self.ok else "FAILED")
                + " (" + ", ".join(parts) + ")")


def _first_valid_start(flags, last_allowed):
    """Smallest 0-based start s <= last_allowed with flags[n] for all n >= s."""
    ok_from = len(flags)
    for n in range(len(flags) - 1, -1, -1):
        if flags[n]:
            ok_from = n
        else:
            break
    return ok_from if ok_from <= last_allowed else None


def check_kernel_convergence(limit: Domain, seq, w, h: float = 0.02,
                             ladder=(2, 3), min_tail: int = 2) -> KernelConvergence:
    """Grid test of kernel convergence of seq toward limit around basepoint w.

    Clause 1: w lies in the limit and in every tail domain.  Clause 2: for
    each m on the ladder, the closed 1/m-interior of the limit (rasterized at
    spacing min(h, 1/(4m)) and flooded from w) fits whole-cell inside every
    tail domain, with the tail start leaving at least min_tail members.
    Clause 3: the grid kernel of the sequence (cells whole-cell inside every
    tail domain, flooded from w) stays within one cell of the limit's own
    mask.  Whole-cell containment asks the center to clear the boundary by
    h * sqrt(2)/2 so that thin obstacles crossing a cell are never ignored.
    """
    seq = list(seq)
    if len(seq) < min_tail:
        raise ValueError("sequence shorter than the required tail")
    w = np.asarray(w, dtype=np.float64).reshape(2)
    last_allowed = len(seq) - min_tail  # latest 0-based start of a valid tail
    details: dict = {}

    inside = [contains(d, w) for d in seq]
    s1 = _first_valid_start(inside, last_allowed)
    basepoint_ok = contains(limit, w) and s1 is not None
    details["basepoint_start"] = None if s1 is None else s1 + 1

    compacts_ok = True
    for m in ladder:
        delta = 1.0 / m
        h_m = min(h, 1.0 / (4.0 * m))
        margin = h_m * math.sqrt(2.0) / 2.0
        try:
            compact = interior_region(limit, w, delta, h_m)
        except EmptyRegion:
            compacts_ok = False
            details[f"compact_m{m}"] = "empty"
            continue
        centers = compact.cell_centers()
        fits = [bool(np.all(d.clearance(centers) > margin)) for d in seq]
        s2 = _first_valid_start(fits, last_allowed)
        details[f"compact_m{m}"] = None if s2 is None else s2 + 1
        if s2 is None:
            compacts_ok = False

    frame = frame_for([limit, *seq], h)
    margin = h * math.sqrt(2.0) / 2.0
    last_bad = np.full((frame.nx, frame.ny), -1, dtype=np.int32)
    for n, dom in enumerate(seq):
        bad = clearance_grid(dom, frame) <= margin
        last_bad[bad] = n
    kernel = _flood_from(last_bad <= last_allowed, frame, w)
    if kernel is None:
        kernel_contained = True
        details["kernel_cells"] = 0
        details["kernel_leak_cells"] = 0
    else:
        lim_mask = clearance_grid(limit, frame) > 0.0
        allowed = ndimage.binary_dilation(lim_mask, structure=np.ones((3, 3), bool))
        leak = int(np.count_nonzero(kernel & ~allowed))
        kernel_contained = leak == 0
        details["kernel_cells"] = int(kernel.sum())
        details["kernel_leak_cells"] = leak

    ok = basepoint_ok and compacts_ok and kernel_contained
    return KernelConvergence(ok, basepoint_ok, compacts_ok, kernel_contained,
                             h, tuple(ladder), details)


# --- measure convergence ------------------------------------------------------

@dataclass
class MeasureRow:
    """One sequence member: W1 to the reference with replicate spread."""

    index: int
    w1: float
    stderr: float
    mass: float
    deficit: float
    flags: tuple = ()


@dataclass
class MeasureConvergence:
    rows: list
    converging: bool
    tau: float
    reference: str
    reason: str = ""

    def summary(self) -> str:
        lines = [f"measure convergence ({self.reference} reference, tau={self.tau:g}): "
                 + ("converging" if self.converging else f"NOT converging ({self.reason})")]
        for r in self.rows:
            flag = f"  [{','.join(r.flags)}]" if r.flags else ""
            w1 = "nan" if math.isnan(r.w1) else f"{r.w1:.4f}"
            lines.append(f"  n={r.index}: W1={w1} +- {r.stderr:.4f} "
                         f"mass={r.mass:.4f}{flag}")
        return "\n".join(lines)


def _ambient_circle_reference(limit: Domain, n: int, w):
    """Equal-mass atoms of the limit's harmonic measure on its ambient circle.

    Only valid when the limit is its bare ambient disk; reduces to the uniform
    circle for w at the center.
    """
    if limit.obstacles:
        raise UnsupportedDomain("boundary reference requires an obstacle-free "
                                "limit domain")
    from .sampler import EmpiricalMeasure
    cx, cy = limit.ambient.center
    R = limit.ambient.radius
    zu = ((w[0] - cx) / R, (w[1] - cy) / R)
    r = math.hypot(*zu)
    if r >= 1.0:
        raise PointOutsideDomain("basepoint outside the limit's ambient disk")
    alpha = math.atan2(zu[1], zu[0]) if r > 0 else 0.0
    q = (np.arange(n) + 0.5) / n
    t = 2.0 * np.arctan(((1.0 - r) / (1.0 + r)) * np.tan(np.pi * (q - 0.5)))
    theta = alpha + t
    pts = np.stack([cx + R * np.cos(theta), cy + R * np.sin(theta)], axis=1)
    return EmpiricalMeasure(pts, np.full(n, 1.0 / n),
                            np.full(n, -1, dtype=np.int32),
                            {"reference": "boundary", "n_samples": n,
                             "basepoint": (float(w[0]), float(w[1]))})


def check_measure_convergence(limit: Domain, seq, w, cfg: WalkConfig,
                              n_atoms: int = 2048, tau: float = 0.05,
                              replicates: int = 5,
                              reference: str = "sampled",
                              mass_gate: float = 0.3,
                              deficit_gate: float = 1e-3) -> MeasureConvergence:
    """Wasserstein trend of sampled harmonic measures along the sequence.

    reference "sampled" compares each member against a fresh sample of the
    limit; "analytic" uses equal-mass Poisson quantile atoms (bare unit disk
    limits only); "boundary" keeps only ambient-circle mass, flags a member
    when that mass strays from 1 by more than mass_gate, and compares the
    renormalized rest against the limit's boundary measure at w (uniform when
    w is the center).  Replicates rerun the full pipeline on split seeds;
    stderr is the replicate spread of W1.

    Converging requires every row clean, the final W1 below tau, and the
    sequence non-increasing within twice the combined stderr.
    """
    seq = list(seq)
    if not seq:
        raise ValueError("need at least one sequence domain")
    if reference not in ("sampled", "analytic", "boundary"):
        raise ValueError(f"unknown reference mode {reference!r}")
    w = np.asarray(w, dtype=np.float64).reshape(2)
    wt = (float(w[0]), float(w[1]))

    ref = None
    if reference == "analytic":
        ref = discretize_reference(limit, n_atoms, "poisson-equal", z=wt)
    elif reference == "boundary":
        ref = _ambient_circle_reference(limit, n_atoms, wt)

    rows = []
    for k, dom in enumerate(seq):
        vals, masses, defs = [], [], []
        flags = set()
        for rep in range(replicates):
            cfg_r = replace(cfg, seed=derive_seed(cfg.seed, "measure", k, rep))
            mu = sample_harmonic_measure(dom, wt, cfg_r)
            deficit = float(mu.meta.get("deficit", 0.0))
            defs.append(deficit)
            if reference == "sampled":
                cfg_l = replace(cfg, seed=derive_seed(cfg.seed, "measure-ref", k, rep))
                nu = sample_harmonic_measure(limit, wt, cfg_l)
                if abs(deficit - float(nu.meta.get("deficit", 0.0))) > deficit_gate:
                    flags.add("deficit-mismatch")
                masses.append(mu.total_weight)
                a = subsample(mu, n_atoms, derive_seed(cfg.seed, "sub", k, rep))
                b = subsample(nu, n_atoms, derive_seed(cfg.seed, "sub-ref", k, rep))
                vals.append(w1_distance(a, b))
            elif reference == "analytic":
                if deficit > deficit_gate:
                    flags.add("deficit")
                masses.append(mu.total_weight)
                a = subsample(mu, n_atoms, derive_seed(cfg.seed, "sub", k, rep))
                vals.append(w1_distance(a, ref))
            else:
                amb = mu.restrict(mu.obstacle == -1)
                mass = amb.total_weight
                masses.append(mass)
                if abs(mass - 1.0) > mass_gate:
                    flags.add("mass-mismatch")
                    vals.append(math.nan)
                    continue
                a = subsample(amb.normalized(), n_atoms,
                              derive_seed(cfg.seed, "sub", k, rep))
                vals.append(w1_distance(a, ref))
        vals = np.asarray(vals, dtype=np.float64)
        good = vals[~np.isnan(vals)]
        w1 = float(good.mean()) if good.size else math.nan
        se = float(good.std(ddof=1) / math.sqrt(good.size)) if good.size > 1 else 0.0
        rows.append(MeasureRow(k + 1, w1, se, float(np.mean(masses)),
                               float(np.mean(defs)), tuple(sorted(flags))))

    reason = ""
    converging = True
    if any(r.flags for r in rows):
        converging = False
        bad = next(r for r in rows if r.flags)
        reason = f"row {bad.index} flagged {','.join(bad.flags)}"
    if converging and math.isnan(rows[-1].w1):
        converging, reason = False, "final W1 undefined"
    if converging and not rows[-1].w1 < tau:
        converging, reason = False, f"final W1 {rows[-1].w1:.4f} >= tau"
    if converging:
        for a, b in zip(rows, rows[1:]):
            slack = 2.0 * math.hypot(a.stderr, b.stderr)
            if b.w1 - a.w1 > slack:
                converging = False
                reason = f"W1 increases from n={a.index} to n={b.index}"
                break
    return MeasureConvergence(rows, converging, tau, reference, reason)


# --- boundary sampling helpers -------------------------------------------------

def _primitive_cloud(obs, m: int):
    """Dense point sample of one obstacle: (points (k,2), spacing estimate)."""
    if isinstance(obs, Disk):
        k = max(8, min(m, 256))
        th = 2.0 * np.pi * np.arange(k) / k
        c = np.asarray(obs.center)
        pts = np.concatenate([c[None, :],
                              c + obs.radius * np.stack([np.cos(th), np.sin(th)], axis=1)])
        return pts, 2.0 * np.pi * obs.radius / k
    if isinstance(obs, Segment):
        a, b = np.asarray(obs.a), np.asarray(obs.b)
        k = max(2, m)
        t = np.linspace(0.0, 1.0, k)[:, None]
        return a + t * (b - a), float(np.hypot(*(b - a))) / (k - 1)
    if isinstance(obs, Arc):
        k = max(2, m)
        th = np.linspace(obs.theta_min, obs.theta_max, k)
        c = np.asarray(obs.center)
        pts = c + obs.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        return pts, obs.radius * (obs.theta_max - obs.theta_min) / (k - 1)
    if isinstance(obs, Polygon):
        vs = np.asarray(obs.vertices, dtype=np.float64)
        edges = np.concatenate([vs, vs[:1]])
        lens = np.hypot(*np.diff(edges, axis=0).T)
        per = max(2, m // len(vs))
        pts = []
        for a, b in zip(edges[:-1], edges[1:]):
            t = np.linspace(0.0, 1.0, per, endpoint=False)[:, None]
            pts.append(a + t * (b - a))
        return np.concatenate(pts), float(lens.sum()) / (per * len(vs))
    raise UnsupportedDomain(f"no point sampler for obstacle {type(obs).__name__}")


def _boundary_probes(dom: Domain, eps: float, k: int):
    """Interior points at depth ~eps/2 facing each boundary piece of dom."""
    probes = []
    cx, cy = dom.ambient.center
    R = dom.ambient.radius
    th = 2.0 * np.pi * (np.arange(k) + 0.5) / k
    for t in th:
        probes.append((cx + (R - eps / 2.0) * math.cos(t),
                       cy + (R - eps / 2.0) * math.sin(t)))
    for obs in dom.obstacles:
        if isinstance(obs, Disk):
            oc = np.asarray(obs.center)
            for t in th:
                u = np.array([math.cos(t), math.sin(t)])
                probes.append(tuple(oc + (obs.radius + eps / 2.0) * u))
        elif isinstance(obs, Segment):
            a, b = np.asarray(obs.a), np.asarray(obs.b)
            d = b - a
            nrm = np.array([-d[1], d[0]]) / np.hypot(*d)
            t = (np.arange(k) + 0.5)[:, None] / k
            for p in a + t * d:
                probes.append(tuple(p + (eps / 2.0) * nrm))
                probes.append(tuple(p - (eps / 2.0) * nrm))
        elif isinstance(obs, Arc):
            c = np.asarray(obs.center)
            th = np.linspace(obs.theta_min, obs.theta_max, k)
            for t in th:
                u = np.array([math.cos(t), math.sin(t)])
                p = c + obs.radius * u
                probes.append(tuple(p + (eps / 2.0) * u))
                probes.append(tuple(p - (eps / 2.0) * u))
        elif isinstance(obs, Polygon):
            pts, _ = _primitive_cloud(obs, k)
            idx = np.unique(np.linspace(0, len(pts) - 1, k).round().astype(int))
            for p in pts[idx]:
                # no stored edge normal; the four axis pushes cover both sides
                for u in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    q = p + (eps / 2.0) * np.asarray(u, dtype=np.float64)
                    probes.append(tuple(q))
    out = []
    for p in probes:
        try:
            if contains(dom, p) and dist_to_boundary(dom, p) <= eps:
                out.append((float(p[0]), float(p[1])))
        except PointOutsideDomain:
            continue
    return out


# --- uniform regularity ---------------------------------------------------------

@dataclass
class RegularityEstimate:
    """Largest ladder eps whose near-boundary points keep local mass >= 1-delta."""

    delta: float
    epsilon_found: float | None
    min_local_mass: float
    sample_points: list = field(default_factory=list)


def estimate_uniform_regularity(seq, delta: float, cfg: WalkConfig,
                                n_probe: int = 8,
                                ladder_len: int = 5) -> RegularityEstimate:
    """Scan a halving eps ladder; accept when every probe point z within eps of
    the boundary of every member carries first-hit mass >= 1 - delta on
    D(z, delta), by margin 2 stderr.  Returns the first (largest) accepted eps
    or None when the ladder is exhausted."""
    seq = list(seq)
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    last_mass, last_pts = 1.0, []
    for rung in range(ladder_len):
        eps = delta / 2.0 ** (rung + 1)
        ok = True
        worst = 1.0
        pts = []
        for k, dom in enumerate(seq):
            for j, z in enumerate(_boundary_probes(dom, eps, n_probe)):
                cfg_z = replace(cfg, seed=derive_seed(cfg.seed, "reg", rung, k, j))
                est = first_hit_tail_probability(dom, z, delta, cfg_z)
                pts.append((k, z))
                worst = min(worst, 1.0 - est.tail)
                if est.tail + 2.0 * est.stderr >= delta:
                    ok = False
                    break
            if not ok:
                break
        last_mass, last_pts = worst, pts
        if ok and pts:
            return RegularityEstimate(delta, eps, worst, pts)
    return RegularityEstimate(delta, None, last_mass, last_pts)


# --- uniform perfectness ---------------------------------------------------------

@dataclass
class PerfectnessEstimate:
    """Sampled sup of (distance to the rest of K)/r over admissible (x, r)."""

    sup_ratio: float
    c_star: float
    passes: bool
    witness: dict | None
    n_cloud: int
    n_eval: int
    r_range: tuple


def _feature_size(obs) -> float:
    if isinstance(obs, Disk):
        return obs.radius
    if isinstance(obs, Segment):
        return float(np.hypot(obs.b[0] - obs.a[0], obs.b[1] - obs.a[1]))
    if isinstance(obs, Arc):
        return obs.radius * (obs.theta_max - obs.theta_min)
    if isinstance(obs, Polygon):
        vs = np.asarray(obs.vertices)
        return float(np.hypot(*(vs.max(0) - vs.min(0))))
    raise UnsupportedDomain(f"no feature size for {type(obs).__name__}")


def estimate_uniform_perfectness(obstacles, c_star: float = 16.0,
                                 points_per_primitive: int = 1024,
                                 max_eval: int = 512,
                                 r_ladder=None) -> PerfectnessEstimate:
    """Estimate how far K = union(obstacles) is from uniform perfectness.

    For sample points x on K and dyadic radii r, the witness ratio is
    dist(x, K \\ D(x, r)) / r, skipping (x, r) pairs where K fits inside
    D(x, r) and pairs below the sampling resolution of x's own primitive
    (unless that primitive is entirely within r of x, in which case discrete
    gaps cannot fake emptiness).  Passes when the sampled sup stays below
    c_star.
    """
    obstacles = list(obstacles)
    if not obstacles:
        raise ValueError("need at least one obstacle")
    clouds, spacings, owner = [], [], []
    for i, obs in enumerate(obstacles):
        pts, sp = _primitive_cloud(obs, points_per_primitive)
        clouds.append(pts)
        spacings.append(sp)
        owner.extend([i] * len(pts))
    cloud = np.concatenate(clouds)
    owner = np.asarray(owner)
    n = len(cloud)

    if n <= max_eval:
        eval_idx = np.arange(n)
    else:
        eval_idx = np.linspace(0, n - 1, max_eval).round().astype(int)
        firsts = np.concatenate([[0], np.cumsum([len(c) for c in clouds])[:-1]])
        eval_idx = np.unique(np.concatenate([eval_idx, firsts]))

    lo = cloud.min(axis=0)
    hi = cloud.max(axis=0)
    diam = float(np.hypot(*(hi - lo)))
    if r_ladder is None:
        if diam == 0.0:
            r_ladder = [1.0]
        else:
            floor = max(1e-13, min(_feature_size(o) for o in obstacles) / 4.0)
            count = max(1, min(64, int(math.ceil(math.log2(max(diam / floor, 2.0))))))
            r_ladder = [diam * 2.0 ** (-j - 1) for j in range(count)]
    r_ladder = sorted(float(r) for r in r_ladder)

    X = cloud[eval_idx]
    D = np.sqrt(((X[:, None, :] - cloud[None, :, :]) ** 2).sum(axis=2))
    D.sort(axis=1)
    own_max = np.empty(len(eval_idx))
    for row, gi in enumerate(eval_idx):
        mine = owner == owner[gi]
        own_max[row] = np.hypot(*(cloud[mine] - X[row]).T).max()
    own_spacing = np.asarray([spacings[owner[gi]] for gi in eval_idx])

    sup = 0.0
    witness = None
    for r in r_ladder:
        valid = (r >= 16.0 * own_spacing) | (own_max <= r)
        for row in np.flatnonzero(valid):
            j = int(np.searchsorted(D[row], r, side="left"))
            if j >= n:
                continue  # all of K within r: no annulus to witness
            ratio = D[row, j] / r
            if ratio > sup:
                sup = ratio
                witness = {"x": (float(X[row, 0]), float(X[row, 1])),
                           "r": r, "ratio": ratio,
                           "primitive": int(owner[eval_idx[row]])}
    return PerfectnessEstimate(sup, c_star, sup < c_star, witness, n,
                               len(eval_idx), (r_ladder[0], r_ladder[-1]))


# --- circular projection check ----------------------------------------------------

@dataclass
class BeurlingResult:
    """Monte Carlo test of the circular-projection lower bound."""

    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    holds: bool
    intervals: list
    margin: float

    def summary(self) -> str:
        rel = ">=" if self.holds else "<"
        return (f"omega(z, K) = {self.lhs:.4f}+-{self.lhs_stderr:.4f} {rel} "
                f"projected bound {self.rhs:.4f}+-{self.rhs_stderr:.4f} "
                f"- margin {self.margin:.4f}")


def _radial_intervals(obstacles, samples: int = 1024):
    raw = []
    for obs in obstacles:
        pts, _ = _primitive_cloud(obs, samples)
        radii = np.hypot(pts[:, 0], pts[:, 1])
        lo, hi = float(radii.min()), float(radii.max())
        if hi - lo < 1e-12:
            mid = max(hi, 1e-9)
            pad = max(5e-13, 5e-10 * mid)
            lo, hi = max(mid - pad, mid / 2.0), mid + pad
        raw.append((lo, hi))
    raw.sort()
    merged = [list(raw[0])]
    for lo, hi in raw[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def beurling_check(dom: Domain, z, cfg: WalkConfig) -> BeurlingResult:
    """Compare omega(z, K) in dom against the circularly projected
    configuration: K collapses to radial intervals on the positive real axis
    and the basepoint moves to -|z|.  The projected value is a lower bound up
    to Monte Carlo error; holds allows a 2-sigma combined margin.
    """
    if not dom.obstacles:
        raise ValueError("projection check needs at least one obstacle")
    if dom.ambient.center != (0.0, 0.0):
        raise UnsupportedDomain("projection check assumes an origin-centered "
                                "ambient disk")
    R = dom.ambient.radius
    z = np.asarray(z, dtype=np.float64).reshape(2)

    mu = sample_harmonic_measure(dom, (float(z[0]), float(z[1])), cfg)
    lhs = float(mu.weights[mu.obstacle >= 0].sum())
    se_l = math.sqrt(max(lhs * (1.0 - lhs), 0.0) / cfg.n_walks)

    intervals = [(lo, min(hi, R)) for lo, hi in _radial_intervals(dom.obstacles)]
    segs = tuple(Segment((lo, 0.0), (hi, 0.0)) for lo, hi in intervals if lo < hi)
    if not segs:
        raise ValueError("projected obstacle set is empty")
    star = Domain(Disk((0.0, 0.0), R), segs, label="projected")
    zs = (-float(np.hypot(z[0], z[1])), 0.0)
    cfg_s = replace(cfg, seed=derive_seed(cfg.seed, "projected"))
    nu = sample_harmonic_measure(star, zs, cfg_s)
    rhs = float(nu.weights[nu.obstacle >= 0].sum())
    se_r = math.sqrt(max(rhs * (1.0 - rhs), 0.0) / cfg.n_walks)

    margin = 2.0 * math.hypot(se_l, se_r)
    return BeurlingResult(lhs, se_l, rhs, se_r, lhs >= rhs - margin,
                          intervals, margin)


# --- aggregated report -------------------------------------------------------------

@dataclass
class ConvergenceReport:
    """Per-member rows plus overall verdicts, as produced by scenario runs."""

    label: str
    rows: list
    verdicts: dict
    notes: list = field(default_factory=list)

    def summary(self) -> str:
        lines = [f"report: {self.label}"]
        for name, v in self.verdicts.items():
            shown = "n/a" if v is None else ("ok" if v else "FAIL")
            lines.append(f"  verdict {name}: {shown}")
        for r in self.rows:
            cells = [f"n={r['n']}"]
            if "w1" in r:
                w1 = r["w1"]
                w1s = "nan" if w1 is None or (isinstance(w1, float) and math.isnan(w1)) \
                    else f"{w1:.4f}"
                cells.append(f"W1={w1s}+-{r.get('stderr', 0.0):.4f}")
            for key, val in r.items():
                if key.startswith("interior_ok"):
                    cells.append(f"{key}={'ok' if val else 'FAIL'}")
            if "mass_deficit" in r:
                cells.append(f"deficit={r['mass_deficit']:.2g}")
            lines.append("  " + "  ".join(cells))
        lines.extend(f"  note: {s}" for s in self.notes)
        return "\n".join(lines)

    def save_csv(self, path):
        cols: list = []
        for r in self.rows:
            for key in r:
                if key not in cols:
                    cols.append(key)
        with open(path, "w") as f:
            f.write(f"# label={self.label}\n")
            for name, v in self.verdicts.items():
                f.write(f"# verdict_{name}={v}\n")
            f.write(",".join(cols) + "\n")
            for r in self.rows:
                f.write(",".join(_csv_cell(r.get(c)) for c in cols) + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)
