"""Seeded inequality suites: Kato ratio, K functional, Lipschitz witness, regularizer, positivity."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .groundstate import GroundState, k_functional
from .hartree import Params, density, lipschitz_witness, quarter_laplacian_norm2
from .kernels import convolve_free
from .spectral import Field, Grid, poisson_semigroup, regularize, sobolev_norm

__all__ = [
    "SuiteResult",
    "KATO_LIMIT",
    "K_LOWER",
    "random_localized_field",
    "random_bump",
    "kato_k_suite",
    "lipschitz_suite",
    "regularizer_suite",
    "positivity_suite",
    "groundstate_identity",
    "narrow_gaussian_kato",
]

KATO_LIMIT = np.pi / 2
K_LOWER = 2 / np.pi


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    bound: float
    n: int
    seconds: float = 0.0
    detail: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def random_localized_field(grid: Grid, rng: np.random.Generator) -> Field:
    """Sum of one to three complex Gaussians, some carrying a plane-wave factor.

    Widths are drawn in ``[0.025, 0.075] L`` and centres within ``L/8`` of the
    origin, which keeps the face values many orders below the peak.
    """
    L = grid.box_length
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        w = rng.uniform(0.025, 0.075) * L
        c = rng.uniform(-L / 8, L / 8, grid.dim)
        r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
        amp = rng.normal() + 1j * rng.normal()
        env = np.exp(-0.5 * r2 / w**2)
        if rng.random() < 0.5:
            k = rng.normal(0.0, 1.0 / w, grid.dim)
            env = env * np.exp(1j * sum(ki * x for ki, x in zip(k, grid.coords)))
        vals += amp * env
    return Field(grid, vals)


def random_bump(grid: Grid, rng: np.random.Generator) -> Field:
    """Nonnegative compactly supported bump ``max(0, 1 - |x-c|^2/w^2)^2``."""
    L = grid.box_length
    w = rng.uniform(0.05, 0.2) * L
    c = rng.uniform(-L / 4, L / 4, grid.dim)
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
    return Field(grid, rng.uniform(0.5, 2.0) * np.maximum(0.0, 1 - r2 / w**2) ** 2)


def _kato_and_k(u: Field) -> tuple[float, float]:
    """Kato ratio and K functional sharing one Coulomb convolution."""
    g = u.grid
    rho = density(u.physical().values, g)
    pot = convolve_free(rho, g)
    t = quarter_laplacian_norm2(u)
    n2 = g.cell * float(rho.sum())
    return float(pot.max() / t), t * n2 / (g.cell * float(np.sum(pot * rho)))


def kato_k_suite(
    grid: Grid, n_fields: int = 100, seed: int = 0, kato_slack: float = 0.01, k_slack: float = 0.001
) -> tuple[SuiteResult, SuiteResult]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    ratios, ks = [], []
    for _ in range(n_fields):
        r, k = _kato_and_k(random_localized_field(grid, rng))
        ratios.append(r)
        ks.append(k)
    dt = time.perf_counter() - t0
    kato_bound = KATO_LIMIT * (1 + kato_slack)
    k_bound = K_LOWER * (1 - k_slack)
    kato = SuiteResult("kato", max(ratios) <= kato_bound, max(ratios), kato_bound, n_fields, dt)
    kfun = SuiteResult("k_functional", min(ks) >= k_bound, min(ks), k_bound, n_fields, dt)
    return kato, kfun


def narrow_gaussian_kato(grid: Grid, points_per_width: float = 2.0) -> SuiteResult:
    w = points_per_width * grid.h
    u = Field(grid, np.exp(-0.5 * grid.r**2 / w**2))
    r, _ = _kato_and_k(u)
    bound = KATO_LIMIT * 1.01
    return SuiteResult("kato_narrow_gaussian", r <= bound, r, bound, 1)


def lipschitz_suite(
    n_pairs: int = 8, seed: int = 0, sizes: tuple[int, int] = (32, 64), box_length: float = 16.0
) -> SuiteResult:
    """Largest witness over seeded pairs on a coarse and a fine grid; passes if they agree to 20%."""
    t0 = time.perf_counter()
    worst = []
    params = Params(m=0.0, lam=1.0, mu=0.0)
    for n in sizes:
        g = Grid(n, box_length)
        rng = np.random.default_rng(seed)
        vals = []
        for _ in range(n_pairs):
            u = random_localized_field(g, rng)
            v = random_localized_field(g, rng)
            vals.append(lipschitz_witness(u, v, params, 0.5))
        worst.append(max(vals))
    spread = abs(worst[1] - worst[0]) / worst[1]
    return SuiteResult(
        "lipschitz",
        bool(np.isfinite(worst).all() and spread <= 0.2),
        spread,
        0.2,
        n_pairs,
        time.perf_counter() - t0,
        {"max_witness": dict(zip(map(str, sizes), worst))},
    )


def regularizer_suite(
    grid: Grid, seed: int = 0, orders=(-0.5, 0.5, 1.5), n_fields: int = 5
) -> SuiteResult:
    """Contraction, smoothing and strong convergence of ``M_eps`` in ``H^s``.

    Fields are normalized in ``H^s``; the convergence defect at ``eps = 1e-8``
    must drop below ``1e-6`` and decrease monotonically along the ``eps`` ladder.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    eps_ladder = np.geomspace(1.0, 1e-8, 9)
    ok = True
    worst_defect = 0.0
    worst_contraction = 0.0
    for _ in range(n_fields):
        f0 = random_localized_field(grid, rng)
        for s in orders:
            f = f0 * (1.0 / sobolev_norm(f0, s))
            defects = []
            for eps in eps_ladder:
                mf = regularize(f, eps)
                contraction = sobolev_norm(mf, s)
                worst_contraction = max(worst_contraction, contraction)
                ok &= contraction <= 1 + 1e-12
                ok &= sobolev_norm(mf, s + 1) <= max(1.0, 1 / eps) * (1 + 1e-12)
                defects.append(sobolev_norm(mf - f, s))
            ok &= all(b < a for a, b in zip(defects, defects[1:]))
            ok &= defects[-1] < 1e-6
            worst_defect = max(worst_defect, defects[-1])
    return SuiteResult(
        "regularizer",
        bool(ok),
        worst_defect,
        1e-6,
        n_fields * len(orders),
        time.perf_counter() - t0,
        {"max_contraction": worst_contraction},
    )


def positivity_suite(grid: Grid, n_bumps: int = 50, seed: int = 0, t: float = 1.0) -> SuiteResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    mins = []
    for _ in range(n_bumps):
        out = poisson_semigroup(random_bump(grid, rng), t).physical().values
        mins.append(float(np.min(out.real)))
    worst = min(mins)
    return SuiteResult("positivity", worst > 0, worst, 0.0, n_bumps, time.perf_counter() - t0)


def groundstate_identity(gs: GroundState) -> SuiteResult:
    ratio = k_functional(gs.q) / (gs.mass / 2)
    return SuiteResult("k_of_q", 0.99 <= ratio <= 1.01, ratio, 0.01, 1)
