"""Numerical laboratory for harmonic measure on bounded planar domains.

A domain here is an ambient disk minus a finite set of compact obstacles
(disks, segments, arcs, polygons).  The package samples first-hit
distributions by walk-on-spheres, compares them in Wasserstein-1 distance,
builds grid approximations of eps-interiors, and decides convergence
questions for whole families of such domains.
"""

__version__ = "0.1.0"

from .approximation import (CommonInteriorResult, GridRegion, LimitCandidate,
                            common_interior_approximation,
                            extract_limit_candidate, interior_region,
                            region_boundary_segments, region_to_domain)
from .convergence import (BeurlingResult, ConvergenceReport,
                          KernelConvergence, MeasureConvergence,
                          PerfectnessEstimate, RegularityEstimate,
                          beurling_check, check_kernel_convergence,
                          check_measure_convergence,
                          estimate_uniform_perfectness,
                          estimate_uniform_regularity)
from .errors import (CalibrationFailed, EmptyRegion, HmlabError, MassMismatch,
                     PointOutsideDomain, SizeCap, UnsupportedDomain)
from .geometry import (Arc, Disk, Domain, Polygon, Segment, domain_from_dict,
                       domain_to_dict, load_domain, save_domain, unit_disk)
from .sampler import (EmpiricalMeasure, TailEstimate, WalkConfig, derive_seed,
                      first_hit_tail_probability, sample_harmonic_measure)
from .scenarios import (CalibrationResult, Scenario, ScenarioRun, generate,
                        run_scenario)
from .transport import (TransportPlan, discretize_reference, subsample,
                        w1_distance)

__all__ = [
    "__version__",
    "Arc", "Disk", "Domain", "Polygon", "Segment",
    "domain_from_dict", "domain_to_dict", "load_domain", "save_domain",
    "unit_disk",
    "EmpiricalMeasure", "TailEstimate", "WalkConfig", "derive_seed",
    "first_hit_tail_probability", "sample_harmonic_measure",
    "TransportPlan", "discretize_reference", "subsample", "w1_distance",
    "CommonInteriorResult", "GridRegion", "LimitCandidate",
    "common_interior_approximation", "extract_limit_candidate",
    "interior_region", "region_boundary_segments", "region_to_domain",
    "BeurlingResult", "ConvergenceReport", "KernelConvergence",
    "MeasureConvergence", "PerfectnessEstimate", "RegularityEstimate",
    "beurling_check", "check_kernel_convergence",
    "check_measure_convergence", "estimate_uniform_perfectness",
    "estimate_uniform_regularity",
    "CalibrationResult", "Scenario", "ScenarioRun", "generate",
    "run_scenario",
    "CalibrationFailed", "EmptyRegion", "HmlabError", "MassMismatch",
    "PointOutsideDomain", "SizeCap", "UnsupportedDomain",
]
