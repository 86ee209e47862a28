"""Fitted relative form bound as the probe family narrows, plus a fresh-probe check.

    python3 scripts/form_bound_envelope.py --c 0.5 --eps 0.5 --fresh 1000
"""
import argparse
import json

from relhartree import Grid, PotentialSpec, estimate_form_bound
from relhartree.potentials import CoulombLike, form_bound_terms, probe_family


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--widths", type=float, nargs="+", default=[1.2, 0.9, 0.7, 0.5])
    ap.add_argument("--fresh", type=int, default=1000)
    args = ap.parse_args()

    g = Grid(64, 16.0)
    spec = PotentialSpec(vminus=CoulombLike(args.c, args.eps))
    for w in args.widths:
        a, b = estimate_form_bound(spec, g, min_width=w)
        print(json.dumps({"min_width": w, "a": a, "b": b}))
    a, b = estimate_form_bound(spec, g)
    vm = spec.vminus_values(g)
    worst = max(v - a * t - b * n for t, n, v in (form_bound_terms(p, vm) for p in probe_family(g, args.fresh, seed=12345)))
    print(json.dumps({"a": a, "b": b, "fresh_probes": args.fresh, "max_violation": worst}))


if __name__ == "__main__":
    main()
