"""Grid approximations of domain interiors.

All grids share a global integer lattice: cell (i, j) covers
[i*h, (i+1)*h] x [j*h, (j+1)*h], so halving h nests cells exactly and regions
produced at different resolutions can be unioned without resampling.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import EmptyRegion, PointOutsideDomain
from .geometry import Disk, Domain, Segment, dist_to_boundary

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class GridFrame:
    """Integer index window [i0, i0+nx) x [j0, j0+ny) on the lattice with spacing h."""

    h: float
    i0: int
    j0: int
    nx: int
    ny: int

    def centers(self) -> np.ndarray:
        """(nx*ny, 2) cell centers in row-major (i, j) order."""
        xs = (self.i0 + np.arange(self.nx) + 0.5) * self.h
        ys = (self.j0 + np.arange(self.ny) + 0.5) * self.h
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=1)

    def cell_of(self, p) -> tuple[int, int]:
        return (int(np.floor(p[0] / self.h)), int(np.floor(p[1] / self.h)))

    def local(self, cell: tuple[int, int]):
        """Array indices of a global cell, or None when outside the window."""
        a, b = cell[0] - self.i0, cell[1] - self.j0
        if 0 <= a < self.nx and 0 <= b < self.ny:
            return a, b
        return None


def frame_for(domains, h: float, pad: int = 1) -> GridFrame:
    """Smallest lattice window covering every ambient disk, plus padding cells."""
    lo_x = min(d.ambient.center[0] - d.ambient.radius for d in domains)
    hi_x = max(d.ambient.center[0] + d.ambient.radius for d in domains)
    lo_y = min(d.ambient.center[1] - d.ambient.radius for d in domains)
    hi_y = max(d.ambient.center[1] + d.ambient.radius for d in domains)
    i0 = int(np.floor(lo_x / h)) - pad
    j0 = int(np.floor(lo_y / h)) - pad
    nx = int(np.ceil(hi_x / h)) + pad - i0 + 1
    ny = int(np.ceil(hi_y / h)) + pad - j0 + 1
    return GridFrame(h, i0, j0, nx, ny)


def clearance_grid(dom: Domain, frame: GridFrame) -> np.ndarray:
    """Signed clearance of every cell center, shaped (nx, ny)."""
    return dom.clearance(frame.centers()).reshape(frame.nx, frame.ny)


@dataclass
class GridRegion:
    """A set of lattice cells at spacing frame.h, stored as a boolean window."""

    frame: GridFrame
    mask: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (self.frame.nx, self.frame.ny):
            raise ValueError("mask shape does not match the frame")

    @property
    def n_cells(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        return self.n_cells * self.frame.h ** 2

    def cell_centers(self) -> np.ndarray:
        a, b = np.nonzero(self.mask)
        xs = (self.frame.i0 + a + 0.5) * self.frame.h
        ys = (self.frame.j0 + b + 0.5) * self.frame.h
        return np.stack([xs, ys], axis=1)

    def global_cells(self) -> np.ndarray:
        """(n, 2) int array of global (i, j) indices."""
        a, b = np.nonzero(self.mask)
        return np.stack([a + self.frame.i0, b + self.frame.j0], axis=1)

    def contains_point(self, p) -> bool:
        loc = self.frame.local(self.frame.cell_of(p))
        return loc is not None and bool(self.mask[loc])

    def edge_mask(self) -> np.ndarray:
        """Cells with a 4-neighbor outside the region (the grid boundary layer)."""
        inner = ndimage.binary_erosion(self.mask, structure=_CROSS, border_value=0)
        return self.mask & ~inner

    def edge_centers(self) -> np.ndarray:
        a, b = np.nonzero(self.edge_mask())
        xs = (self.frame.i0 + a + 0.5) * self.frame.h
        ys = (self.frame.j0 + b + 0.5) * self.frame.h
        return np.stack([xs, ys], axis=1)

    def refined(self, factor: int) -> "GridRegion":
        """The same point set on a grid with spacing h/factor."""
        if factor < 1:
            raise ValueError("factor must be >= 1")
        f = self.frame
        nf = GridFrame(f.h / factor, f.i0 * factor, f.j0 * factor,
                       f.nx * factor, f.ny * factor)
        return GridRegion(nf, np.kron(self.mask, np.ones((factor, factor), bool)),
                          dict(self.meta))

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write("# hmlab grid region\n")
            fh.write(f"# h={self.frame.h!r}\n")
            fh.write(f"# n_cells={self.n_cells}\n")
            fh.write("i,j\n")
            for i, j in self.global_cells():
                fh.write(f"{i},{j}\n")

    @classmethod
    def load_csv(cls, path) -> "GridRegion":
        h = None
        cells = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("i,"):
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if body.startswith("h="):
                        h = ast.literal_eval(body[2:])
                    continue
                i, j = line.split(",")
                cells.append((int(i), int(j)))
        if h is None:
            raise ValueError("region file is missing the spacing header")
        if not cells:
            raise EmptyRegion("region file contains no cells")
        arr = np.asarray(cells, dtype=np.int64)
        i0, j0 = arr.min(axis=0)
        nx, ny = arr.max(axis=0) - (i0, j0) + 1
        mask = np.zeros((nx, ny), dtype=bool)
        mask[arr[:, 0] - i0, arr[:, 1] - j0] = True
        return cls(GridFrame(h, int(i0), int(j0), int(nx), int(ny)), mask)


def _flood_from(mask: np.ndarray, frame: GridFrame, w) -> np.ndarray:
    """Connected component (4-connectivity) of w's cell, or None if w's cell fails."""
    loc = frame.local(frame.cell_of(w))
    if loc is None or not mask[loc]:
        return None
    labels, _ = ndimage.label(mask, structure=_CROSS)
    return labels == labels[loc]


def interior_region(dom: Domain, w, delta: float, h: float = None) -> GridRegion:
    """Grid approximation of the delta-interior component of `dom` containing w.

    Keeps cells whose centers clear the boundary by at least delta/2 and floods
    from w's cell with 4-connectivity.  Raises EmptyRegion when w's own cell
    does not qualify.
    """
    if not (delta > 0):
        raise ValueError("delta must be positive")
    if h is None:
        h = delta / 8.0
    w = np.asarray(w, dtype=np.float64).reshape(2)
    dist_to_boundary(dom, w)  # raises PointOutsideDomain for bad basepoints
    frame = frame_for([dom], h)
    clear = clearance_grid(dom, frame)
    mask = clear >= delta / 2.0
    region = _flood_from(mask, frame, w)
    if region is None:
        raise EmptyRegion(
            f"basepoint cell does not survive the delta={delta:g} clearance cut "
            f"at spacing h={h:g}"
        )
    return GridRegion(frame, region,
                      {"delta": delta, "basepoint": (float(w[0]), float(w[1]))})


@dataclass
class CommonInteriorResult:
    """Outcome of the shared epsilon-interior search over a domain sequence."""

    ok: bool
    start_index: int  # 1-based index N into the sequence; 0 when nothing worked
    eps: float
    h: float
    region: GridRegion | None
    worst_boundary_gap: float
    per_n_gap: dict = field(default_factory=dict)

    def summary(self) -> str:
        if self.ok:
            return (f"ok: common interior from sequence index {self.start_index} "
                    f"({self.region.n_cells} cells, boundary gap "
                    f"{self.worst_boundary_gap:.4g} <= eps={self.eps:g})")
        return (f"failed: worst boundary gap {self.worst_boundary_gap:.4g} "
                f"exceeds eps={self.eps:g} (best start index {self.start_index})")


def common_interior_approximation(limit: Domain, seq, w, eps: float,
                                  h: float = None) -> CommonInteriorResult:
    """Search for a grid region inside the limit and every tail domain.

    For each start index N the candidate is the w-component of the
    intersection of the h-clearance masks of the limit and of all domains
    from N on.  The cut at one cell spacing keeps the mask sound (every point
    of a kept cell clears the boundary by h*(1 - sqrt(2)/2) > 0) while letting
    the region fill the interior to within 2h of each boundary; the verdict is
    ok when every edge-cell center lies within eps of each participating
    boundary.
    """
    seq = list(seq)
    if not seq:
        raise ValueError("need at least one sequence domain")
    if not (eps > 0):
        raise ValueError("eps must be positive")
    if h is None:
        h = eps / 16.0
    w = np.asarray(w, dtype=np.float64).reshape(2)
    frame = frame_for([limit, *seq], h)
    clears = [clearance_grid(d, frame) for d in [limit, *seq]]
    masks = [c >= h for c in clears]

    best = CommonInteriorResult(False, 0, eps, h, None, np.inf)
    for start in range(1, len(seq) + 1):
        mask = masks[0].copy()
        for n in range(start, len(seq) + 1):
            mask &= masks[n]
        region = _flood_from(mask, frame, w)
        if region is None:
            continue
        gr = GridRegion(frame, region, {"eps": eps, "start_index": start})
        edge = gr.edge_mask()
        gaps = {}
        worst = 0.0
        for n in (0, *range(start, len(seq) + 1)):
            g = float(clears[n][edge].max()) if edge.any() else 0.0
            key = "limit" if n == 0 else n
            gaps[key] = g
            worst = max(worst, g)
        if worst <= eps:
            return CommonInteriorResult(True, start, eps, h, gr, worst, gaps)
        if worst < best.worst_boundary_gap:
            best = CommonInteriorResult(False, start, eps, h, gr, worst, gaps)
    return best


def basepoint_transfer_check(result: CommonInteriorResult, z) -> bool:
    """True when z sits inside the common region, so both basepoints see the
    same connected eps-interior."""
    return result.region is not None and result.region.contains_point(z)


@dataclass
class LimitCandidate:
    """Increasing chain of per-level regions plus their union (finest grid)."""

    chain: list
    union: GridRegion

    @property
    def region(self) -> GridRegion:
        return self.union


def extract_limit_candidate(seq, w, r0: float = None, levels: int = 6,
                            min_tail: int = 2) -> LimitCandidate:
    """Multiscale candidate for the interior limit of a domain sequence.

    Level l uses spacing (r0/4)/2^l and keeps cells whose centers clear every
    tail domain (all n >= N for some N at least min_tail from the end) by
    2^{-l-1} * r0; each level floods from w.  Returns the per-level chain and
    the union over levels on the finest grid.  Requires the basepoint to clear
    the tail boundaries by more than 2*r0.
    """
    seq = list(seq)
    if len(seq) < min_tail:
        raise ValueError("sequence shorter than the required tail")
    w = np.asarray(w, dtype=np.float64).reshape(2)
    clear_w = []
    for d in seq:
        try:
            clear_w.append(dist_to_boundary(d, w))
        except PointOutsideDomain:
            clear_w.append(0.0)
    tail_clear = min(clear_w[-min_tail:])
    if tail_clear <= 0:
        raise PointOutsideDomain("basepoint must be interior to the tail domains")
    if r0 is None:
        r0 = 0.4 * tail_clear
    if not (r0 > 0):
        raise ValueError("r0 must be positive")
    if tail_clear <= 2.0 * r0:
        raise ValueError(
            f"basepoint clearance {tail_clear:g} must exceed 2*r0={2 * r0:g} "
            "on the tail domains")

    finest = frame_for(seq, (r0 / 4.0) / 2 ** (levels - 1))
    union = np.zeros((finest.nx, finest.ny), dtype=bool)
    chain = []
    counts = []
    last_allowed = len(seq) - min_tail  # 0-based latest start of a valid suffix
    for lev in range(levels):
        h = (r0 / 4.0) / 2 ** lev
        rho = r0 * 2.0 ** (-lev - 1)
        frame = frame_for(seq, h)
        # last index where a cell is blocked must leave a min_tail suffix clear
        last_bad = np.full((frame.nx, frame.ny), -1, dtype=np.int32)
        for n, dom in enumerate(seq):
            bad = clearance_grid(dom, frame) < rho
            last_bad[bad] = n
        mask = last_bad <= last_allowed
        region = _flood_from(mask, frame, w)
        if region is None:
            counts.append(0)
            continue
        counts.append(int(region.sum()))
        chain.append(GridRegion(frame, region, {"level": lev, "rho": rho}))
        factor = 2 ** (levels - 1 - lev)
        fine = np.kron(region, np.ones((factor, factor), dtype=bool))
        # crop to the finest window; anything outside is padding and never set
        gi0, gj0 = frame.i0 * factor, frame.j0 * factor
        lo_i = max(gi0, finest.i0)
        hi_i = min(gi0 + fine.shape[0], finest.i0 + finest.nx)
        lo_j = max(gj0, finest.j0)
        hi_j = min(gj0 + fine.shape[1], finest.j0 + finest.ny)
        if lo_i < hi_i and lo_j < hi_j:
            union[lo_i - finest.i0:hi_i - finest.i0,
                  lo_j - finest.j0:hi_j - finest.j0] |= \
                fine[lo_i - gi0:hi_i - gi0, lo_j - gj0:hi_j - gj0]
    if not union.any():
        raise EmptyRegion("no cell qualified at any level")
    out = GridRegion(finest, union,
                     {"r0": r0, "levels": levels, "min_tail": min_tail,
                      "level_cells": counts,
                      "basepoint": (float(w[0]), float(w[1]))})
    return LimitCandidate(chain, out)


def region_boundary_segments(region: GridRegion):
    """Merged axis-aligned segments tracing the outline of the cell union.

    Every unit cell edge separating an inside cell from an outside cell (or
    the frame border) contributes; colinear consecutive edges are merged.
    """
    fr = region.frame
    m = np.zeros((fr.nx + 2, fr.ny + 2), dtype=bool)
    m[1:-1, 1:-1] = region.mask
    segs = []

    # vertical edges at x = i*h between columns i-1 and i (padded index k)
    diff = m[1:, :] ^ m[:-1, :]  # (nx+1, ny+2), rows k=0..nx
    for k in range(diff.shape[0]):
        js = np.flatnonzero(diff[k])
        if js.size == 0:
            continue
        x = (fr.i0 + k) * fr.h
        runs = np.split(js, np.flatnonzero(np.diff(js) > 1) + 1)
        for run in runs:
            y0 = (fr.j0 + run[0] - 1) * fr.h
            y1 = (fr.j0 + run[-1]) * fr.h
            segs.append(Segment((x, y0), (x, y1)))

    diff = m[:, 1:] ^ m[:, :-1]  # (nx+2, ny+1)
    for k in range(diff.shape[1]):
        is_ = np.flatnonzero(diff[:, k])
        if is_.size == 0:
            continue
        y = (fr.j0 + k) * fr.h
        runs = np.split(is_, np.flatnonzero(np.diff(is_) > 1) + 1)
        for run in runs:
            x0 = (fr.i0 + run[0] - 1) * fr.h
            x1 = (fr.i0 + run[-1]) * fr.h
            segs.append(Segment((x0, y), (x1, y)))
    return segs


def region_to_domain(region: GridRegion) -> Domain:
    """Wrap the region outline as a domain so walks started inside the region
    stop on its boundary.  The ambient disk just needs to enclose everything;
    interior walks never reach it."""
    segs = region_boundary_segments(region)
    if not segs:
        raise EmptyRegion("region has no cells")
    pts = np.concatenate([[s.a, s.b] for s in segs])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    c = (lo + hi) / 2.0
    r = 1.5 * float(np.hypot(*(hi - lo))) / 2.0 + region.frame.h
    return Domain(Disk((float(c[0]), float(c[1])), r), tuple(segs),
                  label="grid-region")
