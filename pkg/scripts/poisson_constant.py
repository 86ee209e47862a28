"""Poisson semigroup of a unit point mass against the whole-space and periodized kernels.

Whole space: ``P_t delta = C t / (t^2 + |x|^2)^2`` with ``C = 1/pi^2``. On the
torus the images decay like ``r^-4`` and add a few percent at a quarter box.

    python3 scripts/poisson_constant.py --n 64 --box 16 --t 1
"""
import argparse
import numpy as np

from relhartree import Field, Grid, poisson_semigroup


def image_sum(x, t, L, k=10):
    """``sum_n t / (t^2 + |x + n L|^2)^2`` with far images replaced by their mean density."""
    n = np.arange(-k, k + 1)
    shifts = np.stack(np.meshgrid(n, n, n, indexing="ij"), -1).reshape(-1, 3) * L
    r2 = np.sum((shifts + np.array([x, 0.0, 0.0])) ** 2, axis=1)
    return np.sum(t / (t**2 + r2) ** 2) + 4 * np.pi * t / ((k + 0.5) * L) / L**3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--box", type=float, default=16.0)
    ap.add_argument("--t", type=float, default=1.0)
    args = ap.parse_args()

    g = Grid(args.n, args.box)
    delta = np.zeros(g.shape)
    delta[(args.n // 2,) * 3] = 1 / g.cell
    out = poisson_semigroup(Field(g, delta), args.t).physical().values.real
    c = args.n // 2
    t = args.t
    print(f"1/pi^2 = {1 / np.pi**2:.6f}")
    print(f"{'r':>6s} {'grid':>12s} {'C bare':>10s} {'C images':>10s}")
    for i in range(0, args.n // 4 + 1, max(1, args.n // 32)):
        r = i * g.h
        val = out[c + i, c, c]
        print(f"{r:6.2f} {val:12.5e} {val * (t * t + r * r) ** 2 / t:10.6f} {val / image_sum(r, t, args.box):10.6f}")


if __name__ == "__main__":
    main()
