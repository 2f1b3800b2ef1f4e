"""Time the compiled walk kernel against the numpy fallback.

Both backends must produce bit-identical output for the same seed; this
script asserts that before printing timings.

    python3 bench/bench_backends.py --walks 200000
"""

import argparse
import math
import time

import numpy as np

from hmlab import Arc, Disk, Domain, Segment
from hmlab import _wos_py

try:
    from hmlab import _wos
except ImportError:
    _wos = None


def make_domains():
    amb = Disk((0.0, 0.0), 1.0)
    teeth = [Segment((0.55 * math.cos(a), 0.55 * math.sin(a)),
                     (0.7 * math.cos(a), 0.7 * math.sin(a)))
             for a in np.linspace(0.0, 2 * math.pi, 16, endpoint=False)]
    return {
        "disk": Domain(amb, label="disk"),
        "slit": Domain(amb, (Arc((0.5, 0.0), 0.02, -3.0, 3.0),), label="slit"),
        "teeth": Domain(amb, tuple(teeth), label="teeth"),
    }


def run(backend, dom, n, seed):
    kinds, params, _, amb = dom.records()
    x0 = np.zeros(n)
    y0 = np.zeros(n)
    t0 = time.perf_counter()
    out = backend.run_walks(amb, kinds, params, x0, y0, 1e-6, 100000, seed)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--walks", type=int, default=100000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    if _wos is None:
        print("compiled backend not available, timing fallback only")
    print(f"{args.walks} walks per domain\n")
    print(f"{'domain':<8} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, dom in make_domains().items():
        t_py, out_py = run(_wos_py, dom, args.walks, args.seed)
        if _wos is None:
            print(f"{name:<8} {t_py:>9.2f}s {'-':>10} {'-':>8}")
            continue
        t_c, out_c = run(_wos, dom, args.walks, args.seed)
        for a, b in zip(out_py, out_c):
            assert np.array_equal(a, b), f"backend mismatch on {name}"
        print(f"{name:<8} {t_py:>9.2f}s {t_c:>9.2f}s {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
