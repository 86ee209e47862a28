"""Hartree nonlinearity via the screened Poisson solve, and inequality witnesses."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import DegeneratePair, ZeroField
from .kernels import convolve_free, half_laplacian_kernel
from .spectral import WORKERS, Field, Grid, sobolev_norm

__all__ = [
    "Params",
    "HartreeResult",
    "density",
    "potential_from_density",
    "hartree_potential",
    "nonlinearity",
    "interaction_energy",
    "coulomb_energy",
    "quarter_laplacian_norm2",
    "kato_ratio",
    "lipschitz_witness",
]


@dataclass(frozen=True)
class Params:
    """Equation constants: mass ``m``, coupling ``lam`` and screening ``mu``."""

    m: float = 0.0
    lam: float = -1.0
    mu: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"mass m must be >= 0, got {self.m}")
        if self.mu < 0:
            raise ValueError(f"screening mu must be >= 0, got {self.mu}")

    def to_dict(self) -> dict:
        return {"m": self.m, "lambda": self.lam, "mu": self.mu}


@dataclass(frozen=True)
class HartreeResult:
    psi: Field
    f_of_u: Field


def _dealias_half(grid: Grid) -> np.ndarray:
    full = grid.dealias_mask
    return full[..., : grid.n_per_axis // 2 + 1]


def density(values: np.ndarray, grid: Grid, dealias: bool = False) -> np.ndarray:
    """``|u|^2`` formed pointwise, optionally truncated to the two-thirds band."""
    rho = values.real**2 + values.imag**2 if np.iscomplexobj(values) else values**2
    if not dealias:
        return rho
    spec = sfft.rfftn(rho, workers=WORKERS)
    spec *= _dealias_half(grid)
    return sfft.irfftn(spec, s=grid.shape, workers=WORKERS)


def potential_from_density(
    rho: np.ndarray,
    grid: Grid,
    lam: float,
    mu: float,
    kernel: str = "periodic",
) -> np.ndarray:
    """Solve ``(mu^2 - Lap) Psi = 4 pi lam rho`` for real ``Psi``.

    ``kernel="periodic"`` inverts on the torus (zero mode dropped when mu=0);
    ``kernel="free"`` convolves with the aperiodic kernel ``lam exp(-mu r)/r``.
    """
    if kernel == "free":
        return lam * convolve_free(rho, grid, mu)
    if kernel != "periodic":
        raise ValueError(f"unknown kernel {kernel!r}")
    spec = sfft.rfftn(rho, workers=WORKERS)
    denom = grid.xi2_half + mu**2
    if mu == 0:
        denom = denom.copy()
        denom.flat[0] = np.inf
    elif denom.flat[0] == 0:
        raise ValueError(f"screening mu={mu:g} underflows mu**2; use mu=0")
    spec *= 4 * np.pi * lam / denom
    return sfft.irfftn(spec, s=grid.shape, workers=WORKERS)


def hartree_potential(
    u: Field, params: Params, dealias: bool = False, kernel: str = "periodic"
) -> Field:
    g = u.grid
    rho = density(u.physical().values, g, dealias)
    return Field(g, potential_from_density(rho, g, params.lam, params.mu, kernel))


def nonlinearity(
    u: Field, params: Params, dealias: bool = False, kernel: str = "periodic"
) -> HartreeResult:
    """``F(u) = Psi * u`` together with ``Psi``."""
    u = u.physical()
    psi = hartree_potential(u, params, dealias, kernel)
    return HartreeResult(psi, Field(u.grid, psi.values * u.values))


def interaction_energy(
    u: Field, params: Params, dealias: bool = False, kernel: str = "periodic"
) -> float:
    """``(1/4) * integral Psi |u|^2``."""
    u = u.physical()
    g = u.grid
    rho = density(u.values, g, dealias)
    psi = potential_from_density(rho, g, params.lam, params.mu, kernel)
    return 0.25 * g.cell * float(np.sum(psi * rho))


def coulomb_energy(u: Field) -> float:
    """``integral (|x|^-1 * |u|^2) |u|^2`` with the free-space kernel."""
    u = u.physical()
    rho = density(u.values, u.grid)
    return u.grid.cell * float(np.sum(convolve_free(rho, u.grid) * rho))


def quarter_laplacian_norm2(u: Field, free: bool = False) -> float:
    """``||(-Lap)^{1/4} u||_2^2``.

    The default sums ``|xi| |u_hat|^2`` over the torus lattice. ``free=True``
    evaluates the whole-space form of the band-limited interpolant instead,
    which removes the periodic-image bias for fields that fill a sizeable part
    of the box.
    """
    if free:
        v = u.physical().values
        return u.grid.cell * float(np.sum((np.conj(v) * half_laplacian_kernel(u.grid)(v)).real))
    c = u.spectral().values
    return u.grid.cell * float(np.sum(u.grid.xi * (c.real**2 + c.imag**2)))


def kato_ratio(u: Field) -> float:
    """``||  |x|^-1 * |u|^2 ||_inf / ||(-Lap)^{1/4} u||_2^2`` (grid maximum, no interpolation)."""
    u = u.physical()
    denom = quarter_laplacian_norm2(u)
    if denom == 0:
        raise ZeroField("kato_ratio needs a field with nonzero kinetic seminorm")
    pot = convolve_free(density(u.values, u.grid), u.grid)
    return float(pot.max() / denom)


def lipschitz_witness(u: Field, v: Field, params: Params, s: float = 0.5) -> float:
    """``||J(u)-J(v)||_{H^s} / ((||u||^2_{H^s} + ||v||^2_{H^s}) ||u-v||_{H^s})`` with J at lam=1."""
    u, v = u.physical(), v.physical()
    if np.array_equal(u.values, v.values):
        raise DegeneratePair("u and v coincide; the Lipschitz quotient is 0/0")
    unit = Params(m=params.m, lam=1.0, mu=params.mu)
    ju = nonlinearity(u, unit).f_of_u
    jv = nonlinearity(v, unit).f_of_u
    num = sobolev_norm(ju - jv, s)
    den = (sobolev_norm(u, s) ** 2 + sobolev_norm(v, s) ** 2) * sobolev_norm(u - v, s)
    return num / den
