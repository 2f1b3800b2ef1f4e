"""First-hit (harmonic measure) sampling via walk-on-spheres.

A walk jumps to a uniform point on the largest boundary-free circle around
its current position and is absorbed once the boundary is closer than
`eps_stop`.  Each absorbed walk contributes an atom of weight 1/n at its
(projected) hit point; walks that exhaust `max_steps` are dropped, so the
returned measure can carry a small mass deficit.
"""

from __future__ import annotations

import ast
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _wos_py
from .errors import DegenerateDomain
from .geometry import Domain, dist_to_boundary, nearest_boundary_point

try:
    from . import _wos as _wos_c
except ImportError:  # pragma: no cover - build without the extension
    _wos_c = None

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def _mix_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(seed: int, *parts) -> int:
    """Deterministic sub-seed from a base seed and a sequence of labels.

    Parts may be strings or ints; the derivation is hash-randomization free so
    results are stable across processes.
    """
    s = _mix_int(seed)
    for part in parts:
        data = part.encode() if isinstance(part, str) else int(part).to_bytes(8, "little")
        for b in data:
            s = _mix_int((s + _GAMMA) ^ b)
    return s


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if _wos_c is not None else ("numpy",)


def get_backend(name: Optional[str] = None):
    """Resolve a kernel module; None honors HMLAB_BACKEND then prefers compiled."""
    if name is None:
        name = os.environ.get("HMLAB_BACKEND") or None
    if name is None:
        name = "compiled" if _wos_c is not None else "numpy"
    if name == "compiled":
        if _wos_c is None:
            raise RuntimeError("compiled walk kernel is not available in this build")
        return _wos_c
    if name == "numpy":
        return _wos_py
    raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'numpy'")


@dataclass(frozen=True)
class WalkConfig:
    """Sampling knobs shared by every walk-based estimator."""

    n_walks: int = 20000
    eps_stop: Optional[float] = None  # None: 1e-6 * ambient radius
    max_steps: int = 1_000_000
    seed: int = 0
    backend: Optional[str] = None

    def __post_init__(self):
        if self.n_walks < 1:
            raise ValueError("n_walks must be positive")
        if self.max_steps < 1000:
            raise ValueError("max_steps must be at least 1000")
        if self.eps_stop is not None and not (self.eps_stop > 0):
            raise ValueError("eps_stop must be positive")

    def resolve_eps(self, dom: Domain) -> float:
        return self.eps_stop if self.eps_stop is not None else 1e-6 * dom.ambient.radius


@dataclass
class EmpiricalMeasure:
    """Weighted atoms on the boundary; total weight may fall short of 1."""

    points: np.ndarray  # (n, 2) float64
    weights: np.ndarray  # (n,) float64
    obstacle: np.ndarray  # (n,) int32; obstacle index, -1 for the ambient circle
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        self.weights = np.asarray(self.weights, dtype=np.float64).ravel()
        self.obstacle = np.asarray(self.obstacle, dtype=np.int32).ravel()
        if not (len(self.points) == len(self.weights) == len(self.obstacle)):
            raise ValueError("points, weights and obstacle must have equal length")

    @property
    def n_atoms(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def restrict(self, mask: np.ndarray) -> "EmpiricalMeasure":
        """Sub-measure of the selected atoms; weights are kept, not rescaled."""
        mask = np.asarray(mask, dtype=bool)
        return EmpiricalMeasure(self.points[mask], self.weights[mask],
                                self.obstacle[mask], dict(self.meta))

    def normalized(self) -> "EmpiricalMeasure":
        tot = self.total_weight
        if tot <= 0:
            raise ValueError("cannot normalize a measure with zero total weight")
        return EmpiricalMeasure(self.points, self.weights / tot,
                                self.obstacle, dict(self.meta))

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write("# hmlab empirical measure\n")
            for key in ("n_samples", "seed", "eps_stop", "total_weight"):
                if key in self.meta or key == "total_weight":
                    val = self.total_weight if key == "total_weight" else self.meta[key]
                    fh.write(f"# {key}={val!r}\n")
            fh.write("x,y,weight,obstacle\n")
            for p, w, o in zip(self.points, self.weights, self.obstacle):
                fh.write(f"{float(p[0])!r},{float(p[1])!r},{float(w)!r},{int(o)}\n")

    @classmethod
    def load_csv(cls, path) -> "EmpiricalMeasure":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        try:
                            meta[k.strip()] = ast.literal_eval(v)
                        except (ValueError, SyntaxError):
                            meta[k.strip()] = v
                    continue
                if line.startswith("x,"):
                    continue
                x, y, w, o = line.split(",")
                rows.append((float(x), float(y), float(w), int(o)))
        if not rows:
            return cls(np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=np.int32), meta)
        arr = np.array(rows)
        return cls(arr[:, :2], arr[:, 2], arr[:, 3].astype(np.int32), meta)


def _merge_atoms(hx, hy, obs, weight_each):
    """Merge exact-duplicate atoms, keeping first-occurrence (walk-index) order."""
    key = np.empty((len(hx), 3))
    key[:, 0] = hx
    key[:, 1] = hy
    key[:, 2] = obs
    uniq, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    w = np.bincount(rank[inv], minlength=len(uniq)) * weight_each
    pts = np.stack([uniq[order, 0], uniq[order, 1]], axis=1)
    return pts, w, uniq[order, 2].astype(np.int32)


def sample_harmonic_measure(dom: Domain, z, cfg: WalkConfig = WalkConfig()) -> EmpiricalMeasure:
    """Empirical harmonic measure of `dom` seen from the interior point z."""
    z = np.asarray(z, dtype=np.float64).reshape(2)
    eps = cfg.resolve_eps(dom)
    d0 = dist_to_boundary(dom, z)
    meta = {
        "n_samples": cfg.n_walks,
        "seed": cfg.seed,
        "eps_stop": eps,
        "max_steps": cfg.max_steps,
        "basepoint": (float(z[0]), float(z[1])),
        "label": dom.label,
    }
    if d0 < eps:
        warnings.warn(
            f"start point {tuple(z)} is within eps_stop of the boundary; "
            "returning a point mass at the nearest boundary point",
            DegenerateDomain,
        )
        q = nearest_boundary_point(dom, z)
        _, rec = dom.boundary_scan(q[None, :])
        kinds, params, rec_obs, amb = dom.records()
        obs = -1 if rec[0] < 0 else int(rec_obs[rec[0]])
        meta.update(degenerate=True, deficit=0.0, backend="none", mean_steps=0.0)
        return EmpiricalMeasure(q[None, :], np.ones(1),
                                np.array([obs], dtype=np.int32), meta)

    kinds, params, rec_obs, amb = dom.records()
    backend = get_backend(cfg.backend)
    x0 = np.full(cfg.n_walks, z[0])
    y0 = np.full(cfg.n_walks, z[1])
    hx, hy, rec, steps = backend.run_walks(amb, kinds, params, x0, y0,
                                           eps, cfg.max_steps, cfg.seed)
    ok = rec != -2
    n_drop = int(np.count_nonzero(~ok))
    if len(rec_obs):
        obs = np.where(rec[ok] < 0, -1, rec_obs[np.maximum(rec[ok], 0)]).astype(np.int32)
    else:
        obs = np.full(int(np.count_nonzero(ok)), -1, dtype=np.int32)
    pts, w, obs = _merge_atoms(hx[ok], hy[ok], obs, 1.0 / cfg.n_walks)
    meta.update(
        degenerate=False,
        deficit=n_drop / cfg.n_walks,
        backend="numpy" if backend is _wos_py else "compiled",
        mean_steps=float(steps[ok].mean()) if ok.any() else float("nan"),
    )
    return EmpiricalMeasure(pts, w, obs, meta)


@dataclass(frozen=True)
class TailEstimate:
    """Monte Carlo estimate of the first-hit mass escaping D(z, delta)."""

    delta: float
    tail: float
    stderr: float
    n_walks: int
    n_timeout: int

    @property
    def near_mass(self) -> float:
        return 1.0 - self.tail


def first_hit_tail_probability(dom: Domain, z, delta: float,
                               cfg: WalkConfig = WalkConfig()) -> TailEstimate:
    """Fraction of walks from z absorbed outside the closed disk D(z, delta).

    Timed-out walks count toward the tail, which keeps regularity acceptance
    tests conservative.
    """
    z = np.asarray(z, dtype=np.float64).reshape(2)
    mu = sample_harmonic_measure(dom, z, cfg)
    d = np.hypot(mu.points[:, 0] - z[0], mu.points[:, 1] - z[1])
    far = float(mu.weights[d > delta].sum()) + mu.meta.get("deficit", 0.0)
    n = cfg.n_walks
    se = float(np.sqrt(max(far * (1.0 - far), 0.0) / n))
    return TailEstimate(delta=float(delta), tail=far, stderr=se, n_walks=n,
                        n_timeout=int(round(mu.meta.get("deficit", 0.0) * n)))
