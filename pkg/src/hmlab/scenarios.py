"""Scenario generators, calibration, and end-to-end runs.

A scenario bundles a domain family, one or more limit domains, basepoints,
checker options with expected verdicts, and walk seeds into a JSON file.
Two generated families need Monte Carlo calibration of a free radius: a
nearly closed circle whose trapped mass from the origin must stay below
2^-n, and a ring of 2^n short radial teeth that must stay nearly invisible
from outside a shrinking annulus.  Calibrated radii and their certificates
are stored in the file so verification runs never repeat the search.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .approximation import basepoint_transfer_check, common_interior_approximation
from .convergence import (ConvergenceReport, check_kernel_convergence,
                          check_measure_convergence)
from .errors import CalibrationFailed, PointOutsideDomain
from .geometry import (Arc, Disk, Domain, Segment, contains, dist_to_boundary,
                       domain_from_dict, domain_to_dict, unit_disk)
from .sampler import WalkConfig, derive_seed, sample_harmonic_measure

_WILSON_Z = 2.5758293035489004  # two-sided 99%
_R_FLOOR = 1e-12
_R_CEIL = 0.1
_BISECT_ITERS = 20
_CAL_WALKS = 20000
_CAL_EPS = 1e-13
_SAFETY = 0.95  # calibrate against a shaved target so certificates re-verify


@dataclass
class CalibrationResult:
    """Certificate for one calibrated radius."""

    n: int
    r: float
    achieved_mass: float
    ci_halfwidth: float
    target: float
    accepted: bool
    n_walks: int
    eps_stop: float
    seed: int

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r, "achieved_mass": self.achieved_mass,
                "ci_halfwidth": self.ci_halfwidth, "target": self.target,
                "accepted": self.accepted, "n_walks": self.n_walks,
                "eps_stop": self.eps_stop, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationResult":
        return cls(**d)

    def validate(self):
        if self.accepted and not self.achieved_mass + self.ci_halfwidth < self.target:
            raise CalibrationFailed(
                f"certificate n={self.n}: mass {self.achieved_mass:.6g} + ci "
                f"{self.ci_halfwidth:.6g} >= target {self.target:.6g}")


@dataclass
class Scenario:
    """A named domain-sequence experiment with frozen expectations."""

    name: str
    limits: dict            # role -> Domain
    family: list            # Domain per index
    n_values: list          # display index per family member
    basepoints: list        # (x, y) tuples
    walk: WalkConfig
    checkers: dict          # checker name -> options incl. "expect"
    calibration: list = field(default_factory=list)
    seed: int = 0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        for w in self.basepoints:
            for role, lim in self.limits.items():
                if not contains(lim, w):
                    raise PointOutsideDomain(
                        f"basepoint {w} outside limit '{role}'")
            for n, dom in zip(self.n_values, self.family):
                if not contains(dom, w):
                    raise PointOutsideDomain(
                        f"basepoint {w} outside family member n={n}")

    def to_dict(self) -> dict:
        return {
            "format": "hmlab-scenario-v1",
            "name": self.name,
            "seed": self.seed,
            "limits": {k: domain_to_dict(v) for k, v in self.limits.items()},
            "family": [domain_to_dict(d) for d in self.family],
            "n_values": list(self.n_values),
            "basepoints": [[float(a), float(b)] for a, b in self.basepoints],
            "walk": {"n_walks": self.walk.n_walks,
                     "eps_stop": self.walk.eps_stop,
                     "max_steps": self.walk.max_steps},
            "checkers": self.checkers,
            "calibration": [c.to_dict() for c in self.calibration],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if d.get("format") != "hmlab-scenario-v1":
            raise ValueError(f"unsupported scenario format {d.get('format')!r}")
        cal = [CalibrationResult.from_dict(c) for c in d.get("calibration", [])]
        for c in cal:
            c.validate()
        walk = d.get("walk", {})
        return cls(
            name=d["name"],
            limits={k: domain_from_dict(v) for k, v in d["limits"].items()},
            family=[domain_from_dict(x) for x in d["family"]],
            n_values=list(d["n_values"]),
            basepoints=[tuple(b) for b in d["basepoints"]],
            walk=WalkConfig(n_walks=walk.get("n_walks", 20000),
                            eps_stop=walk.get("eps_stop"),
                            max_steps=walk.get("max_steps", 1000000),
                            seed=d.get("seed", 0)),
            checkers=d.get("checkers", {}),
            calibration=cal,
            seed=d.get("seed", 0),
            notes=list(d.get("notes", [])),
        )

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _wilson_upper(k: int, n: int, z: float = _WILSON_Z):
    """(point estimate, upper-bound halfwidth) of a binomial proportion."""
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    hw = (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    return p, max(center + hw - p, 0.0)


def _obstacle_mass(dom: Domain, z, cfg: WalkConfig):
    """(mass on obstacles, Wilson upper halfwidth) from one walk batch."""
    mu = sample_harmonic_measure(dom, z, cfg)
    k = int(round(float(mu.weights[mu.obstacle >= 0].sum()) * cfg.n_walks))
    return _wilson_upper(k, cfg.n_walks)


# --- generators -----------------------------------------------------------------

def gen_shrinking_disks(n_max: int = 8, seed: int = 20260814) -> Scenario:
    """Obstacle-free disks of radius 1 - 1/n growing toward the unit disk."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    family = [Domain(Disk((0.0, 0.0), 1.0 - 1.0 / n), label=f"disk-{n}")
              for n in range(2, n_max + 1)]
    checkers = {
        "kernel": {"limit": "main", "h": 0.02, "ladder": [2, 3], "min_tail": 2,
                   "expect": [True, True]},
        "interior": {"limit": "main", "eps": [0.3, 0.15],
                     "expect": {"0.3": [True, True], "0.15": [True, True]}},
        "measure": {"limit": "main", "reference": "analytic", "tau": 0.15,
                    "n_atoms": 2048, "replicates": 5,
                    "expect": [True, True]},
    }
    notes = ["positive control: every checker should report convergence"]
    if n_max < 8:
        # short families lack the tail the kernel/measure checkers need
        notes.append(f"n_max={n_max}: expectations assume n_max >= 8, "
                     "truncated runs may deviate")
    return Scenario(
        name="shrinking-disks",
        limits={"main": unit_disk()},
        family=family,
        n_values=list(range(2, n_max + 1)),
        basepoints=[(0.0, 0.0), (0.3, 0.0)],
        walk=WalkConfig(n_walks=20000, eps_stop=1e-6, seed=seed),
        checkers=checkers,
        seed=seed,
        notes=notes,
    )


def _slit_domain(n: int, r: float) -> Domain:
    arc = Arc((0.5, 0.0), r, -math.pi + r, math.pi - r)
    return Domain(Disk((0.0, 0.0), 1.0), (arc,), label=f"slit-circle-{n}")


def _calibrate_radius(make_domain, probes, target: float, seed: int,
                      n_walks: int = _CAL_WALKS) -> tuple:
    """Largest r in [floor, ceil] whose worst-probe obstacle mass stays under
    target (shaved by a safety factor during the search).  Returns
    (r, achieved, ci, accepted); accepted=False means even the floor failed
    and r is the floor."""
    cfg0 = WalkConfig(n_walks=n_walks, eps_stop=_CAL_EPS, seed=seed)

    def worst(r: float, tag: int):
        top = (0.0, 0.0)
        for j, z in enumerate(probes):
            cfg = replace(cfg0, seed=derive_seed(seed, "cal", tag, j))
            p, hw = _obstacle_mass(make_domain(r), z, cfg)
            if p + hw > top[0] + top[1]:
                top = (p, hw)
            if p + hw >= target:  # no point finishing the probe sweep
                break
        return top

    shaved = target * _SAFETY
    lo, hi = _R_FLOOR, _R_CEIL
    p, hw = worst(lo, 0)
    if p + hw >= shaved:
        return lo, p, hw, False
    for it in range(_BISECT_ITERS):
        mid = math.sqrt(lo * hi)
        p_m, hw_m = worst(mid, it + 1)
        if p_m + hw_m < shaved:
            lo = mid
        else:
            hi = mid
    # fresh certificate at the accepted radius, judged against the full target
    p, hw = worst(lo, _BISECT_ITERS + 1)
    if p + hw >= target:
        return lo, p, hw, False
    return lo, p, hw, True


def gen_example_slit_circle(n_max: int = 6, cfg: WalkConfig = None,
                            seed: int = 20260814,
                            strict: bool = True):
    """Disk minus a nearly closed circle of radius r_n about (1/2, 0).

    r_n is calibrated so the trapped-circle mass seen from the origin stays
    below 2^-n with 99% confidence; the gap of angular width 2 r_n faces the
    origin.  Basepoints: 0 (outside the trap) and 1/2 (inside it).
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    n_walks = cfg.n_walks if cfg is not None else _CAL_WALKS
    family, ns, cal = [], [], []
    for n in range(2, n_max + 1):
        target = 2.0 ** -n
        r, p, hw, ok = _calibrate_radius(
            lambda rr: _slit_domain(n, rr), [(0.0, 0.0)], target,
            derive_seed(seed, "slit", n), n_walks)
        cert = CalibrationResult(n, r, p, hw, target, ok, n_walks, _CAL_EPS,
                                 derive_seed(seed, "slit", n))
        if not ok and strict:
            raise CalibrationFailed(
                f"slit-circle n={n}: floor radius {r:g} still places mass "
                f"{p:.4g}+{hw:.4g} >= 2^-{n}")
        cal.append(cert)
        family.append(_slit_domain(n, r))
        ns.append(n)
    checkers = {
        "kernel": {"limit": "main", "h": 0.02, "ladder": [2, 3], "min_tail": 2,
                   "expect": [False, False]},
        "interior": {"limit": "main", "eps": [0.3, 0.15],
                     "expect": {"0.3": [False, False], "0.15": [False, False]}},
        "measure": {"limit": "main", "reference": "boundary", "tau": 0.05,
                    "n_atoms": 2048, "replicates": 5,
                    "expect": [True, False]},
    }
    scen = Scenario(
        name="slit-circle",
        limits={"main": unit_disk()},
        family=family,
        n_values=ns,
        basepoints=[(0.0, 0.0), (0.5, 0.0)],
        walk=WalkConfig(n_walks=20000, eps_stop=_CAL_EPS, seed=seed),
        checkers=checkers,
        calibration=cal,
        seed=seed,
        notes=["measure converges from the origin but not from inside the "
               "trapped circle; neither grid checker sees convergence"],
    )
    rejected = [c.n for c in cal if not c.accepted]
    if rejected:
        scen.notes.append(
            f"calibration floor reached at n={rejected}: those radii do not "
            "meet their mass targets and their certificates are not accepted")
    return scen, cal


def _teeth_obstacles(n: int, r: float):
    rho = 0.5 + 2.0 ** -n
    segs = []
    for k in range(1, 2 ** n + 1):
        t = 2.0 * math.pi * k / 2.0 ** n
        u = (math.cos(t), math.sin(t))
        segs.append(Segment(((rho - r) * u[0], (rho - r) * u[1]),
                            ((rho + r) * u[0], (rho + r) * u[1])))
    return tuple(segs)


def _teeth_domain(n: int, r: float) -> Domain:
    return Domain(Disk((0.0, 0.0), 1.0), _teeth_obstacles(n, r),
                  label=f"radial-teeth-{n}")


def _teeth_probes(n: int):
    """Origin plus rings just inside and outside the exclusion annulus."""
    pts = [(0.0, 0.0)]
    inner = 0.5 + 2.0 ** -(n + 1)
    outer = 0.5 + 2.0 ** -(n - 1)
    angles = [math.pi * k / 8.0 for k in range(16)]
    for t in angles:
        pts.append((inner * math.cos(t), inner * math.sin(t)))
    if outer < 1.0:
        for t in angles:
            pts.append((outer * math.cos(t), outer * math.sin(t)))
    return pts


def gen_example_radial_teeth(n_max: int = 6, cfg: WalkConfig = None,
                             seed: int = 20260814,
                             strict: bool = True):
    """Disk minus 2^n short radial teeth on the circle of radius 1/2 + 2^-n.

    r_n is calibrated so the teeth stay nearly invisible (mass <= 2^-n) from
    every probe outside the annulus 1/2 + 2^-(n+1) < |z| < 1/2 + 2^-(n-1).
    Two limits: the unit disk (measure, kernel) and the half disk (interior).
    """
    if not 2 <= n_max <= 8:
        raise ValueError("n_max must be between 2 and 8")
    n_walks = cfg.n_walks if cfg is not None else _CAL_WALKS
    family, ns, cal = [], [], []
    for n in range(2, n_max + 1):
        target = 2.0 ** -n
        r, p, hw, ok = _calibrate_radius(
            lambda rr: _teeth_domain(n, rr), _teeth_probes(n), target,
            derive_seed(seed, "teeth", n), n_walks)
        cert = CalibrationResult(n, r, p, hw, target, ok, n_walks, _CAL_EPS,
                                 derive_seed(seed, "teeth", n))
        if not ok and strict:
            raise CalibrationFailed(
                f"radial-teeth n={n}: floor radius {r:g} still places mass "
                f"{p:.4g}+{hw:.4g} >= 2^-{n}")
        cal.append(cert)
        family.append(_teeth_domain(n, r))
        ns.append(n)
    accepted_upto = 0
    for cert in cal:
        if not cert.accepted:
            break
        accepted_upto += 1
    checkers = {
        "kernel": {"limit": "main", "h": 0.02, "ladder": [2, 3], "min_tail": 2,
                   "expect": [False, False]},
        "interior": {"limit": "inner", "eps": [0.3, 0.15, 0.1],
                     "expect": {"0.3": [True, True], "0.15": [True, True],
                                "0.1": [True, True]}},
        "measure": {"limit": "main", "reference": "boundary", "tau": 0.05,
                    "n_atoms": 2048, "replicates": 5,
                    "n_upto": accepted_upto or None,
                    "expect": [True, True]},
    }
    scen = Scenario(
        name="radial-teeth",
        limits={"main": unit_disk(),
                "inner": Domain(Disk((0.0, 0.0), 0.5), label="half-disk")},
        family=family,
        n_values=ns,
        basepoints=[(0.0, 0.0), (0.25, 0.0)],
        walk=WalkConfig(n_walks=20000, eps_stop=_CAL_EPS, seed=seed),
        checkers=checkers,
        calibration=cal,
        seed=seed,
        notes=["interior approximations certify the half disk while the "
               "measure tracks the full disk's boundary measure",
               f"measure checker scoped to the {accepted_upto} accepted "
               "calibration(s); floored radii beyond that make the teeth "
               "opaque and trip the mass gate"],
    )
    return scen, cal


# --- running ---------------------------------------------------------------------

@dataclass
class ScenarioRun:
    """All reports for one scenario plus expectation deviations."""

    scenario: str
    reports: list
    deviations: list

    @property
    def ok(self) -> bool:
        return not self.deviations


def _fmt_eps(e: float) -> str:
    return f"{e:g}"


def run_scenario(scen: Scenario, which=None, out_dir=None) -> ScenarioRun:
    """Run the configured checkers at every basepoint; verdicts are compared
    against the scenario's expectations and written to CSV + text summary.
    Fully deterministic given the scenario seed."""
    which = set(which) if which is not None else set(scen.checkers)
    unknown = which - set(scen.checkers)
    if unknown:
        raise ValueError(f"scenario has no checker(s) {sorted(unknown)}")
    reports, deviations = [], []

    for bi, w in enumerate(scen.basepoints):
        rows = [{"n": n} for n in scen.n_values]
        verdicts = {}
        notes = []

        if "kernel" in which:
            opt = scen.checkers["kernel"]
            limit = scen.limits[opt.get("limit", "main")]
            res = check_kernel_convergence(
                limit, scen.family, w, h=opt.get("h", 0.02),
                ladder=tuple(opt.get("ladder", (2, 3))),
                min_tail=opt.get("min_tail", 2))
            verdicts["kernel"] = res.ok
            notes.append(res.summary())
            exp = opt.get("expect")
            if exp is not None and res.ok != exp[bi]:
                deviations.append(
                    f"w{bi} kernel: got {res.ok}, expected {exp[bi]}")
            for row in rows:
                row["kernel_ok"] = res.ok

        if "interior" in which:
            opt = scen.checkers["interior"]
            limit = scen.limits[opt.get("limit", "main")]
            for eps in opt.get("eps", [0.3]):
                res = common_interior_approximation(limit, scen.family, w, eps)
                ok = res.ok and basepoint_transfer_check(res, w)
                key = _fmt_eps(eps)
                verdicts[f"interior@{key}"] = ok
                notes.append(f"eps={key}: {res.summary()}")
                exp = (opt.get("expect") or {}).get(key)
                if exp is not None and ok != exp[bi]:
                    deviations.append(
                        f"w{bi} interior@{key}: got {ok}, expected {exp[bi]}")
                start_n = (scen.n_values[res.start_index - 1]
                           if res.ok and res.start_index >= 1 else None)
                for row in rows:
                    row[f"interior_ok@{key}"] = ok and start_n is not None \
                        and row["n"] >= start_n

        if "measure" in which:
            opt = scen.checkers["measure"]
            limit = scen.limits[opt.get("limit", "main")]
            upto = opt.get("n_upto")
            seq = scen.family[:upto] if upto else scen.family
            cfg = replace(scen.walk,
                          seed=derive_seed(scen.seed, "run-measure", bi))
            res = check_measure_convergence(
                limit, seq, w, cfg,
                n_atoms=opt.get("n_atoms", 2048),
                tau=opt.get("tau", 0.05),
                replicates=opt.get("replicates", 5),
                reference=opt.get("reference", "sampled"))
            verdicts["measure"] = res.converging
            notes.append(res.summary())
            exp = opt.get("expect")
            if exp is not None and res.converging != exp[bi]:
                deviations.append(
                    f"w{bi} measure: got {res.converging}, expected {exp[bi]}")
            for row, mr in zip(rows, res.rows):
                row["w1"] = mr.w1
                row["stderr"] = mr.stderr
                row["mass"] = mr.mass
                row["mass_deficit"] = mr.deficit
                row["flags"] = ";".join(mr.flags)

        reports.append(ConvergenceReport(
            label=f"{scen.name} w=({w[0]:g},{w[1]:g})",
            rows=rows, verdicts=verdicts, notes=notes))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{scen.name}.report.csv")
        with open(csv_path, "w") as f:
            f.write(f"# scenario={scen.name}\n# seed={scen.seed}\n")
            for bi, rep in enumerate(reports):
                for name, v in rep.verdicts.items():
                    f.write(f"# w{bi}_{name}={v}\n")
            cols = ["basepoint"]
            for rep in reports:
                for row in rep.rows:
                    for k in row:
                        if k not in cols:
                            cols.append(k)
            f.write(",".join(cols) + "\n")
            for bi, rep in enumerate(reports):
                for row in rep.rows:
                    vals = [str(bi)]
                    for c in cols[1:]:
                        v = row.get(c)
                        if v is None:
                            vals.append("")
                        elif isinstance(v, float):
                            vals.append(repr(v))
                        else:
                            vals.append(str(v))
                    f.write(",".join(vals) + "\n")
        with open(os.path.join(out_dir, f"{scen.name}.summary.txt"), "w") as f:
            for rep in reports:
                f.write(rep.summary() + "\n\n")
            if deviations:
                f.write("DEVIATIONS FROM EXPECTED VERDICTS:\n")
                for d in deviations:
                    f.write(f"  {d}\n")
            else:
                f.write("all verdicts match expectations\n")

    return ScenarioRun(scen.name, reports, deviations)


# the CLI regenerates shipped files, which record failed calibrations
# honestly instead of refusing; library callers keep the strict default
_GENERATORS = {
    "shrinking-disks": lambda n_max, seed: gen_shrinking_disks(n_max, seed=seed),
    "slit-circle": lambda n_max, seed:
        gen_example_slit_circle(n_max, seed=seed, strict=False)[0],
    "radial-teeth": lambda n_max, seed:
        gen_example_radial_teeth(n_max, seed=seed, strict=False)[0],
}


def generate(name: str, n_max: int, seed: int = 20260814) -> Scenario:
    if name not in _GENERATORS:
        raise ValueError(f"unknown scenario {name!r}; "
                         f"choose from {sorted(_GENERATORS)}")
    return _GENERATORS[name](n_max, seed)
