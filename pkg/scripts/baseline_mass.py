"""Ground-state mass on a refinement ladder with a Richardson estimate of the limit.

    python3 scripts/baseline_mass.py --sizes 48 64 96 --box 32
"""
import argparse
import json
import time

import numpy as np

from relhartree import Grid, k_functional, solve_ground_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[48, 64, 96])
    ap.add_argument("--box", type=float, default=32.0)
    ap.add_argument("--lam", type=float, default=-1.0)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()

    rows = []
    for n in args.sizes:
        t0 = time.perf_counter()
        gs = solve_ground_state(Grid(n, args.box), args.lam, args.tol, 500)
        rows.append({
            "n": n,
            "h": args.box / n,
            "mass": gs.mass,
            "k_ratio": k_functional(gs.q) / (gs.mass / 2),
            "iterations": gs.iterations,
            "residual": gs.residual,
            "seconds": time.perf_counter() - t0,
        })
        print(json.dumps(rows[-1]))
    if len(rows) >= 3:
        # fit m(h) = m0 + c h^p through the three finest points
        (h1, m1), (h2, m2), (h3, m3) = [(r["h"], r["mass"]) for r in rows[-3:]]
        p = np.log(abs((m2 - m1) / (m3 - m2))) / np.log(h1 / h2)
        m0 = m3 + (m3 - m2) / ((h2 / h3) ** p - 1)
        print(json.dumps({"order": p, "extrapolated_mass": m0, "uncertainty": abs(m0 - m3)}))


if __name__ == "__main__":
    main()
