"""Solitary-wave ground state of ``sqrt(-Lap) Q + (lam/|x| * Q^2) Q = -Q``.

The profile is computed by Petviashvili iteration on the resolvent form
``Q = (sqrt(-Lap) + 1)^-1 [ |lam| (|x|^-1 * Q^2) Q ]`` with the free-space
Coulomb kernel, so the mass is a property of the profile and not of the box.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .errors import CollapseToZero, NoConvergence, UnresolvedScale, ZeroField
from .hartree import Params, coulomb_energy, potential_from_density, quarter_laplacian_norm2
from .snapshot import read_field, write_field
from .spectral import WORKERS, Field, Grid, l2_norm, resample

log = logging.getLogger(__name__)

__all__ = [
    "GroundState",
    "solve_ground_state",
    "scale_ground_state",
    "euler_lagrange_residual",
    "pairing_defect",
    "k_functional",
    "focusing_energy",
    "energy_scaling_check",
    "decay_length",
    "save_ground_state",
    "load_ground_state",
]

MIN_POINTS_PER_DECAY = 8
MAX_LOST_FRACTION = 1e-6
PETVIASHVILI_GAMMA = 1.5


@dataclass(frozen=True)
class GroundState:
    q: Field
    mass: float
    k_const: float
    eigenvalue: float
    residual: float
    lam: float
    iterations: int = 0

    @property
    def grid(self) -> Grid:
        return self.q.grid

    def sidecar(self) -> dict:
        return {
            "mass": self.mass,
            "k_const": self.k_const,
            "eigenvalue": self.eigenvalue,
            "residual": self.residual,
            "lambda": self.lam,
            "iterations": self.iterations,
            "grid": self.grid.to_dict(),
            "mass_lower_bound": 4 / (np.pi * abs(self.lam)),
        }


def _coulomb(rho: np.ndarray, grid: Grid, kernel: str) -> np.ndarray:
    return potential_from_density(rho, grid, 1.0, 0.0, kernel)


def _kernel_for(grid: Grid, kernel: str | None) -> str:
    if kernel is None:
        return "free" if grid.dim == 3 else "periodic"
    return kernel


def _h_half_norm_rfft(spec: np.ndarray, grid: Grid) -> float:
    w = grid.half_weights * np.sqrt(1.0 + grid.xi2_half)
    return float(np.sqrt(grid.cell / grid.n_total * np.sum(w * (spec.real**2 + spec.imag**2))))


def euler_lagrange_residual(
    q: np.ndarray, grid: Grid, lam: float, omega: float = 1.0, kernel: str | None = None
) -> float:
    """``|| sqrt(-Lap) q + (lam/|x| * q^2) q + omega q ||_{H^{1/2}}`` for real ``q``."""
    kernel = _kernel_for(grid, kernel)
    qh = sfft.rfftn(q, workers=WORKERS)
    nh = sfft.rfftn(lam * _coulomb(q * q, grid, kernel) * q, workers=WORKERS)
    return _h_half_norm_rfft((np.sqrt(grid.xi2_half) + omega) * qh + nh, grid)


def _petviashvili(
    grid: Grid,
    lam: float,
    omega: float,
    tol: float,
    max_iter: int,
    q0: np.ndarray,
    kernel: str,
    gamma: float = PETVIASHVILI_GAMMA,
) -> tuple[np.ndarray, float, int]:
    lin = np.sqrt(grid.xi2_half) + omega
    w = grid.half_weights
    q = np.array(q0, dtype=float)
    res = np.inf
    for it in range(max_iter + 1):
        qh = sfft.rfftn(q, workers=WORKERS)
        nq = abs(lam) * _coulomb(q * q, grid, kernel) * q
        nh = sfft.rfftn(nq, workers=WORKERS)
        res = _h_half_norm_rfft(lin * qh - nh, grid)
        if res <= tol:
            return q, res, it
        if it == max_iter:
            break
        num = np.sum(w * lin * (qh.real**2 + qh.imag**2))
        den = np.sum(w * (qh.conj() * nh).real)
        if not (np.isfinite(num) and np.isfinite(den)) or den <= 0 or num <= 1e-300:
            raise CollapseToZero(f"iterate degenerated at step {it}")
        q = sfft.irfftn((num / den) ** gamma * nh / lin, s=grid.shape, workers=WORKERS)
        if it % 50 == 0:
            log.debug("petviashvili it=%d residual=%.3e stab=%.6f", it, res, num / den)
    raise NoConvergence(max_iter, res)


def _gaussian(grid: Grid, width: float = 1.0) -> np.ndarray:
    g = np.exp(-0.5 * grid.r**2 / width**2)
    return g / np.sqrt(grid.cell * np.sum(g * g))


def solve_ground_state(
    grid: Grid,
    lam: float = -1.0,
    tol: float = 1e-8,
    max_iter: int = 500,
    kernel: str | None = None,
) -> GroundState:
    """Positive radial ground state with eigenvalue -1 for coupling ``lam < 0``.

    Starts from a unit-mass isotropic Gaussian. ``kernel`` defaults to the
    free-space Coulomb kernel in 3-D and to the periodic solve in the 1-D
    smoke-test mode.
    """
    if not lam < 0:
        raise ValueError(f"ground states need a focusing coupling lam < 0, got {lam}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    kernel = _kernel_for(grid, kernel)
    q, res, its = _petviashvili(grid, lam, 1.0, tol, max_iter, _gaussian(grid), kernel)
    if q[(grid.n_per_axis // 2,) * grid.dim] < 0:
        q = -q
    norm2 = l2_norm(Field(grid, q)) ** 2
    log.info("ground state: mass=%.10f residual=%.2e iterations=%d", norm2, res, its)
    return GroundState(Field(grid, q), norm2, norm2 / 2, -1.0, res, lam, its)


def decay_length(f: Field, fraction: float = 0.99) -> float:
    """Radius of the centered ball holding ``fraction`` of ``|f|^2``."""
    g = f.grid
    rho = np.abs(f.physical().values) ** 2
    r = g.r.ravel()
    order = np.argsort(r, kind="stable")
    cum = np.cumsum(rho.ravel()[order])
    if cum[-1] == 0:
        raise ZeroField("decay length of a zero field")
    return float(r[order][np.searchsorted(cum, fraction * cum[-1])])


def _check_resolved(length: float, grid: Grid, what: str):
    pts = length / grid.h
    if pts < MIN_POINTS_PER_DECAY:
        raise UnresolvedScale(
            f"{what}: {pts:.2f} grid points per decay length, need {MIN_POINTS_PER_DECAY}"
        )
    if length > 0.5 * grid.box_length:
        raise UnresolvedScale(f"{what}: decay length {length:.3g} exceeds half the box")


def _lost_fraction(f: Field, scale: float, target: Grid) -> float:
    """Share of ``|f|^2`` lying outside the region that ``f(scale * x)`` samples on ``target``."""
    g = f.grid
    rho = np.abs(f.physical().values) ** 2
    reach = scale * 0.5 * target.box_length
    outside = np.zeros(g.shape, dtype=bool)
    for c in g.coords:
        outside |= np.abs(c) > reach
    total = rho.sum()
    if total == 0:
        raise ZeroField("cannot rescale a zero field")
    return float(rho[outside].sum() / total)


def _check_rescalable(f: Field, scale: float, target: Grid, what: str):
    _check_resolved(decay_length(f) / scale, target, what)
    lost = _lost_fraction(f, scale, target)
    if lost > MAX_LOST_FRACTION:
        raise UnresolvedScale(f"{what}: {lost:.2e} of the mass falls outside the target box")


def scale_ground_state(gs: GroundState, a: float, target: Grid | None = None) -> GroundState:
    """``Q_a(x) = a^{3/2} Q(a x)``, a ground state with eigenvalue ``-a`` and the same mass.

    With ``target=None`` the profile is carried to the box of length ``L/a`` at
    the same point count, where the sampling nodes map onto each other exactly.
    Otherwise ``Q`` is spectrally interpolated onto ``target``.
    """
    if not a > 0:
        raise ValueError(f"scale factor must be positive, got {a}")
    src = gs.grid
    if target is None:
        target = src.scaled(1.0 / a)
        vals = a**1.5 * np.asarray(gs.q.physical().values)
        q = Field(target, vals)
    else:
        _check_rescalable(gs.q, a, target, f"scale a={a}")
        q = resample(gs.q, target, scale=a) * a**1.5
    vals = np.asarray(q.values).real
    res = euler_lagrange_residual(vals, target, gs.lam, omega=a)
    mass = l2_norm(q) ** 2
    return GroundState(q, mass, mass / 2, -float(a), res, gs.lam, gs.iterations)


def pairing_defect(gs: GroundState) -> float:
    """``<Q, sqrt(-Lap) Q> + <Q, (lam/|x| * Q^2) Q> - eigenvalue * ||Q||^2``; zero at a solution."""
    q = gs.q.physical()
    g = q.grid
    kin = quarter_laplacian_norm2(q)
    vals = np.asarray(q.values).real
    pot = gs.lam * g.cell * float(np.sum(_coulomb(vals**2, g, _kernel_for(g, None)) * vals**2))
    return kin + pot - gs.eigenvalue * gs.mass


def k_functional(u: Field) -> float:
    """``||(-Lap)^{1/4} u||^2 ||u||^2 / integral (|x|^-1 * |u|^2)|u|^2``."""
    n2 = l2_norm(u) ** 2
    if n2 == 0:
        raise ZeroField("K functional of the zero field")
    return quarter_laplacian_norm2(u) * n2 / coulomb_energy(u)


def focusing_energy(u: Field) -> float:
    """Whole-space energy at ``m = 0, mu = 0, lam = -1`` of the grid interpolant of ``u``."""
    return 0.5 * quarter_laplacian_norm2(u, free=True) - 0.25 * coulomb_energy(u)


def energy_scaling_check(u: Field, alpha: float) -> tuple[float, float]:
    """``(E[alpha^{3/2} u(alpha .)], alpha * E[u])`` on the grid of ``u``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    e = focusing_energy(u)
    if alpha == 1:
        return e, e
    _check_rescalable(u, alpha, u.grid, f"alpha={alpha}")
    ua = resample(u.physical(), u.grid, scale=alpha) * alpha**1.5
    return focusing_energy(ua), alpha * e


def save_ground_state(gs: GroundState, stem) -> tuple[Path, Path]:
    stem = Path(stem)
    fld = write_field(
        stem.with_suffix(".fld"),
        gs.q,
        params=Params(m=0.0, lam=gs.lam, mu=0.0).to_dict(),
        time=0.0,
    )
    side = stem.with_suffix(".json")
    side.write_text(json.dumps(gs.sidecar(), indent=2, sort_keys=True) + "\n")
    return fld, side


def load_ground_state(stem) -> GroundState:
    stem = Path(stem)
    q, _ = read_field(stem.with_suffix(".fld"))
    meta = json.loads(stem.with_suffix(".json").read_text())
    return GroundState(
        q,
        meta["mass"],
        meta["k_const"],
        meta["eigenvalue"],
        meta["residual"],
        meta["lambda"],
        meta.get("iterations", 0),
    )
