"""Lipschitz witness over seeded field pairs on a coarse and a fine grid.

    python3 scripts/lipschitz_baseline.py --pairs 8 --sizes 32 64
"""
import argparse
import json

import numpy as np

from relhartree import Grid, Params, lipschitz_witness
from relhartree.suites import lipschitz_suite, random_localized_field


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=8)
    ap.add_argument("--sizes", type=int, nargs=2, default=[32, 64])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for n in args.sizes:
        g = Grid(n, 16.0)
        rng = np.random.default_rng(args.seed)
        u, v = random_localized_field(g, rng), random_localized_field(g, rng)
        first = {s: lipschitz_witness(u, v, Params(), s) for s in (0.5, 1.0)}
        print(json.dumps({"n": n, "first_pair": first}))
    res = lipschitz_suite(args.pairs, args.seed, tuple(args.sizes))
    print(json.dumps(res.to_dict()))


if __name__ == "__main__":
    main()
