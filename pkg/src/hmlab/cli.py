"""Command line interface.

Exit codes: 0 when every requested verdict passes, 2 when a verdict fails or
deviates from a scenario's expectations, 1 on errors (bad input, calibration
failure, exceptions).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .approximation import common_interior_approximation, interior_region
from .convergence import (beurling_check, estimate_uniform_perfectness,
                          estimate_uniform_regularity)
from .errors import HmlabError
from .geometry import load_domain
from .sampler import (EmpiricalMeasure, WalkConfig, derive_seed,
                      sample_harmonic_measure)
from .scenarios import Scenario, generate, run_scenario
from .transport import subsample, w1_distance


def _point(s: str):
    x, y = s.split(",")
    return (float(x), float(y))


def _walk_cfg(args) -> WalkConfig:
    return WalkConfig(n_walks=args.samples, eps_stop=args.eps_stop,
                      seed=args.seed)


def _add_walk_flags(p, samples=20000):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=samples,
                   help="walks per estimate")
    p.add_argument("--eps-stop", type=float, default=None,
                   help="absorption distance (default 1e-6 x ambient radius)")


def cmd_sample(args) -> int:
    dom = load_domain(args.domain)
    mu = sample_harmonic_measure(dom, _point(args.basepoint), _walk_cfg(args))
    mu.save_csv(args.out)
    print(f"wrote {mu.n_atoms} atoms (total mass {mu.total_weight:.6f}) "
          f"to {args.out}")
    return 0


def cmd_w1(args) -> int:
    mu = EmpiricalMeasure.load_csv(args.measure_a)
    nu = EmpiricalMeasure.load_csv(args.measure_b)
    if args.subsample is not None:
        # distinct derived seeds so the two sides resample independently
        mu = subsample(mu, args.subsample, seed=derive_seed(args.seed, 0))
        nu = subsample(nu, args.subsample, seed=derive_seed(args.seed, 1))
    if args.plan:
        d, plan = w1_distance(mu, nu, return_plan=True)
        plan.save_csv(args.plan)
    else:
        d = w1_distance(mu, nu)
    print(f"W1 = {d!r}")
    if args.tolerance is not None:
        print("within tolerance" if d <= args.tolerance else "exceeds tolerance")
        return 0 if d <= args.tolerance else 2
    return 0


def cmd_interior(args) -> int:
    limit = load_domain(args.limit)
    w = _point(args.basepoint)
    if args.family:
        seq = [load_domain(p) for p in args.family]
        res = common_interior_approximation(limit, seq, w, args.eps,
                                            h=args.grid_h)
        print(res.summary())
        if args.out and res.region is not None:
            res.region.save_csv(args.out)
        return 0 if res.ok else 2
    region = interior_region(limit, w, args.eps, h=args.grid_h)
    print(f"{region.n_cells} cells, area {region.area:.6g}")
    if args.out:
        region.save_csv(args.out)
    return 0


def cmd_beurling(args) -> int:
    dom = load_domain(args.domain)
    res = beurling_check(dom, _point(args.basepoint), _walk_cfg(args))
    print(res.summary())
    return 0 if res.holds else 2


def cmd_perfectness(args) -> int:
    dom = load_domain(args.domain)
    res = estimate_uniform_perfectness(dom.obstacles, c_star=args.tolerance)
    print(f"sup ratio {res.sup_ratio:.4g} vs C*={res.c_star:g}: "
          + ("pass" if res.passes else "FAIL"))
    if res.witness:
        print(f"  witness: x={res.witness['x']} r={res.witness['r']:.4g} "
              f"ratio={res.witness['ratio']:.4g}")
    return 0 if res.passes else 2


def cmd_regularity(args) -> int:
    doms = [load_domain(p) for p in args.domains]
    res = estimate_uniform_regularity(doms, args.delta, _walk_cfg(args))
    if res.epsilon_found is None:
        print(f"no eps on the ladder certified delta={args.delta:g} "
              f"(worst local mass {res.min_local_mass:.4f})")
        return 2
    print(f"eps={res.epsilon_found:g} certifies delta={args.delta:g} "
          f"(min local mass {res.min_local_mass:.4f}, "
          f"{len(res.sample_points)} probes)")
    return 0


def _run_and_report(scen: Scenario, which, out_dir) -> int:
    run = run_scenario(scen, which=which, out_dir=out_dir)
    for rep in run.reports:
        print(rep.summary())
        print()
    if run.deviations:
        print("deviations from expected verdicts:")
        for d in run.deviations:
            print(f"  {d}")
        return 2
    print("all verdicts match expectations")
    return 0


def cmd_check_convergence(args) -> int:
    scen = Scenario.load(args.scenario)
    return _run_and_report(scen, None, args.out_dir)


def cmd_scenario_gen(args) -> int:
    scen = generate(args.name, args.n_max, seed=args.seed)
    scen.save(args.out)
    print(f"wrote scenario '{scen.name}' "
          f"({len(scen.family)} domains) to {args.out}")
    return 0


def cmd_scenario_run(args) -> int:
    scen = Scenario.load(args.scenario)
    which = args.checkers.split(",") if args.checkers else None
    return _run_and_report(scen, which, args.out_dir)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hmlab",
        description="harmonic measure laboratory for planar domains")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a harmonic measure to CSV")
    p.add_argument("domain", help="domain JSON file")
    p.add_argument("--basepoint", required=True, metavar="X,Y")
    p.add_argument("--out", required=True)
    _add_walk_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("w1", help="Wasserstein-1 distance of two measure CSVs")
    p.add_argument("measure_a")
    p.add_argument("measure_b")
    p.add_argument("--plan", help="write the transport plan CSV here")
    p.add_argument("--tolerance", type=float, default=None,
                   help="exit 2 when the distance exceeds this")
    p.add_argument("--subsample", type=int, default=None, metavar="N",
                   help="resample each measure to N atoms first "
                        "(required when inputs exceed the exact-transport cap)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --subsample resampling")
    p.set_defaults(func=cmd_w1)

    p = sub.add_parser("interior",
                       help="eps-interior region of a limit (optionally "
                            "common with a family)")
    p.add_argument("--limit", required=True, help="limit domain JSON")
    p.add_argument("--family", nargs="*", default=[],
                   help="sequence domain JSONs")
    p.add_argument("--basepoint", required=True, metavar="X,Y")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--grid-h", type=float, default=None)
    p.add_argument("--out", help="write the region CSV here")
    p.set_defaults(func=cmd_interior)

    p = sub.add_parser("beurling",
                       help="circular projection lower bound check")
    p.add_argument("domain")
    p.add_argument("--basepoint", required=True, metavar="X,Y")
    _add_walk_flags(p, samples=50000)
    p.set_defaults(func=cmd_beurling)

    p = sub.add_parser("perfectness",
                       help="uniform perfectness of a domain's obstacle set")
    p.add_argument("domain")
    p.add_argument("--tolerance", type=float, default=16.0,
                   help="pass threshold C*")
    p.set_defaults(func=cmd_perfectness)

    p = sub.add_parser("regularity",
                       help="uniform boundary regularity over domain files")
    p.add_argument("domains", nargs="+")
    p.add_argument("--delta", type=float, required=True)
    _add_walk_flags(p, samples=2000)
    p.set_defaults(func=cmd_regularity)

    p = sub.add_parser("check-convergence",
                       help="run every checker of a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_check_convergence)

    p = sub.add_parser("scenario", help="generate or run scenario files")
    ssub = p.add_subparsers(dest="scenario_command", required=True)
    g = ssub.add_parser("gen", help="generate a named scenario")
    g.add_argument("name")
    g.add_argument("--n-max", type=int, required=True)
    g.add_argument("--seed", type=int, default=20260814)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_scenario_gen)
    r = ssub.add_parser("run", help="run checkers from a scenario file")
    r.add_argument("scenario")
    r.add_argument("--checkers", default=None,
                   help="comma list: kernel,interior,measure")
    r.add_argument("--out-dir", default=None)
    r.set_defaults(func=cmd_scenario_run)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HmlabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
