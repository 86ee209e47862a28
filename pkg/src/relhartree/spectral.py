"""Periodic-box grids, fields and Fourier-multiplier operators.

All transforms use the unitary DFT, and every integral carries the physical
cell weight ``h**dim`` so that discrete norms approximate continuum ones.
Arrays are indexed ``[x, y, z]``; the box is ``[-L/2, L/2)`` per axis.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .errors import NonPositiveEps, NonPositiveTime, SingularSymbol

__all__ = [
    "Grid",
    "Field",
    "Representation",
    "MultiplierSpec",
    "sqrt_lap_m",
    "riesz",
    "bessel",
    "reg_eps",
    "semigroup",
    "propagator",
    "to_spectral",
    "to_physical",
    "apply_multiplier",
    "sobolev_norm",
    "l2_norm",
    "inner",
    "regularize",
    "poisson_semigroup",
    "resample",
    "boundary_ratio",
    "spectral_tail",
]


def _workers() -> int:
    env = os.environ.get("RELH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


WORKERS = _workers()


def fft(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, norm="ortho", workers=WORKERS)


def ifft(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, norm="ortho", workers=WORKERS)


def _smooth(n: int) -> bool:
    for p in (2, 3, 5):
        while n % p == 0:
            n //= p
    return n == 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus ``[-L/2, L/2)**dim``."""

    n_per_axis: int
    box_length: float
    dim: int = 3

    def __post_init__(self):
        n = self.n_per_axis
        if not isinstance(n, (int, np.integer)) or n < 2 or n % 2 or not _smooth(int(n)):
            raise ValueError(f"n_per_axis must be even with prime factors in {{2, 3, 5}}, got {n!r}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        if self.dim not in (1, 3):
            raise ValueError(f"dim must be 1 or 3, got {self.dim!r}")
        object.__setattr__(self, "n_per_axis", int(n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def h(self) -> float:
        return self.box_length / self.n_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    @property
    def n_total(self) -> int:
        return self.n_per_axis**self.dim

    @property
    def cell(self) -> float:
        """Quadrature weight of one grid point."""
        return self.h**self.dim

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def k_max(self) -> float:
        return np.pi / self.h

    @cached_property
    def axis(self) -> np.ndarray:
        return -0.5 * self.box_length + self.h * np.arange(self.n_per_axis)

    @cached_property
    def k_axis(self) -> np.ndarray:
        """Angular frequencies in FFT order, ``2*pi/L * {-n/2, ..., n/2-1}``."""
        return 2 * np.pi * sfft.fftfreq(self.n_per_axis, d=self.h)

    def _open(self, v: np.ndarray) -> tuple[np.ndarray, ...]:
        if self.dim == 1:
            return (v,)
        return (v[:, None, None], v[None, :, None], v[None, None, :])

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays (open mesh)."""
        return self._open(self.axis)

    @cached_property
    def kvec(self) -> tuple[np.ndarray, ...]:
        return self._open(self.k_axis)

    @cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(k**2 for k in self.kvec) * np.ones(self.shape)

    @cached_property
    def xi(self) -> np.ndarray:
        return np.sqrt(self.xi2)

    @cached_property
    def xi2_half(self) -> np.ndarray:
        """``|xi|**2`` on the ``rfftn`` half-spectrum layout."""
        k_last = 2 * np.pi * sfft.rfftfreq(self.n_per_axis, d=self.h)
        if self.dim == 1:
            return k_last**2
        kx, ky = self.kvec[0], self.kvec[1]
        return kx**2 + ky**2 + k_last[None, None, :] ** 2

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicity of each ``rfftn`` coefficient in the full spectrum."""
        nl = self.n_per_axis // 2 + 1
        w = np.full(nl, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w if self.dim == 1 else w[None, None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with ``|index| <= n/3`` on every axis."""
        idx = np.abs(sfft.fftfreq(self.n_per_axis) * self.n_per_axis)
        keep = idx <= self.n_per_axis / 3
        m = np.ones(self.shape, dtype=bool)
        for ax_keep in self._open(keep):
            m = m & ax_keep
        return m

    def scaled(self, factor: float) -> "Grid":
        """Same point count on a box ``factor`` times the size."""
        return Grid(self.n_per_axis, self.box_length * factor, self.dim)

    def to_dict(self) -> dict:
        return {"n_per_axis": self.n_per_axis, "box_length": self.box_length, "dim": self.dim}


class Representation(str, Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable sampled function; ``values`` are point values or unitary DFT coefficients."""

    grid: Grid
    values: np.ndarray
    representation: Representation = Representation.PHYSICAL

    def __post_init__(self):
        arr = np.array(self.values)
        if arr.dtype.kind == "c":
            arr = arr.astype(np.complex128, copy=False)
        else:
            arr = arr.astype(np.float64, copy=False)
        if arr.shape != self.grid.shape:
            raise ValueError(f"values shape {arr.shape} does not match grid {self.grid.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "representation", Representation(self.representation))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> "Field":
        return cls(grid, np.broadcast_to(fn(*grid.coords), grid.shape))

    @property
    def is_spectral(self) -> bool:
        return self.representation is Representation.SPECTRAL

    def physical(self) -> "Field":
        return to_physical(self) if self.is_spectral else self

    def spectral(self) -> "Field":
        return self if self.is_spectral else to_spectral(self)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values, self.representation)

    def __add__(self, other: "Field") -> "Field":
        return _binary(self, other, np.add)

    def __sub__(self, other: "Field") -> "Field":
        return _binary(self, other, np.subtract)

    def __mul__(self, c) -> "Field":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_values(-self.values)


def _binary(a: Field, b: Field, op) -> Field:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.representation is not b.representation:
        b = b.spectral() if a.is_spectral else b.physical()
    return a.with_values(op(a.values, b.values))


def to_spectral(f: Field) -> Field:
    if f.is_spectral:
        return f
    return Field(f.grid, fft(f.values), Representation.SPECTRAL)


def to_physical(f: Field) -> Field:
    if not f.is_spectral:
        return f
    return Field(f.grid, ifft(f.values), Representation.PHYSICAL)


# --------------------------------------------------------------------------- multipliers

_LABELS = ("sqrt_lap_m", "riesz_s", "bessel_mu_s", "reg_eps", "semigroup_t", "propagator_t")


@dataclass(frozen=True)
class MultiplierSpec:
    """Radial Fourier multiplier identified by ``label`` and its parameters."""

    label: str
    order_s: float | None = None
    m: float = 0.0
    mu: float = 0.0
    eps: float | None = None
    t: float | None = None

    def __post_init__(self):
        if self.label not in _LABELS:
            raise ValueError(f"unknown multiplier label {self.label!r}")

    @property
    def singular_at_zero(self) -> bool:
        if self.label == "riesz_s":
            return self.order_s < 0
        if self.label == "bessel_mu_s":
            return self.mu == 0 and self.order_s < 0
        return False

    def __call__(self, xi2: np.ndarray) -> np.ndarray:
        """Symbol evaluated at ``|xi|**2``."""
        xi2 = np.asarray(xi2, dtype=float)
        lab = self.label
        if lab == "sqrt_lap_m":
            return np.sqrt(xi2 + self.m**2)
        if lab == "propagator_t":
            return np.exp(-1j * self.t * np.sqrt(xi2 + self.m**2))
        if lab == "reg_eps":
            return 1.0 / (self.eps * np.sqrt(xi2 + self.m**2) + 1.0)
        if lab == "semigroup_t":
            return np.exp(-self.t * np.sqrt(xi2))
        base = xi2 if lab == "riesz_s" else xi2 + self.mu**2
        if not self.singular_at_zero:
            return base ** (0.5 * self.order_s)
        out = np.zeros_like(base)
        nz = base > 0
        out[nz] = base[nz] ** (0.5 * self.order_s)
        return out

    def symbol(self, grid: Grid) -> np.ndarray:
        return self(grid.xi2)


def sqrt_lap_m(m: float = 0.0) -> MultiplierSpec:
    return MultiplierSpec("sqrt_lap_m", m=m)


def riesz(s: float) -> MultiplierSpec:
    return MultiplierSpec("riesz_s", order_s=s)


def bessel(mu: float, s: float) -> MultiplierSpec:
    return MultiplierSpec("bessel_mu_s", order_s=s, mu=mu)


def reg_eps(eps: float, m: float = 0.0) -> MultiplierSpec:
    if not eps > 0:
        raise NonPositiveEps(f"eps must be positive, got {eps!r}")
    return MultiplierSpec("reg_eps", eps=eps, m=m)


def semigroup(t: float) -> MultiplierSpec:
    if not t > 0:
        raise NonPositiveTime(f"t must be positive, got {t!r}")
    return MultiplierSpec("semigroup_t", t=t)


def propagator(t: float, m: float = 0.0) -> MultiplierSpec:
    return MultiplierSpec("propagator_t", t=t, m=m)


_MEAN_TOL = 1e-12


def apply_multiplier(spec: MultiplierSpec, f: Field) -> Field:
    """Multiply spectral coefficients by the symbol; output keeps the input representation."""
    c = f.spectral().values
    if spec.singular_at_zero:
        zero_mode = abs(c.flat[0])
        scale = np.sqrt(np.vdot(c, c).real) or 1.0
        if zero_mode > _MEAN_TOL * scale:
            raise SingularSymbol(
                f"{spec.label} with order {spec.order_s} is singular at xi=0; input must have zero mean"
            )
    out = Field(f.grid, spec.symbol(f.grid) * c, Representation.SPECTRAL)
    return out if f.is_spectral else to_physical(out)


# --------------------------------------------------------------------------- norms


def _coeffs(f: Field) -> np.ndarray:
    return f.spectral().values


def l2_norm(f: Field) -> float:
    v = f.values
    return float(np.sqrt(f.grid.cell * np.vdot(v, v).real))


def inner(f: Field, g: Field) -> complex:
    """``<f, g> = integral of conj(f) * g``."""
    if f.representation is not g.representation:
        f, g = f.spectral(), g.spectral()
    return complex(f.grid.cell * np.vdot(f.values, g.values))


def sobolev_norm(f: Field, s: float) -> float:
    c = _coeffs(f)
    w = (1.0 + f.grid.xi2) ** s
    return float(np.sqrt(f.grid.cell * np.sum(w * (c.real**2 + c.imag**2))))


def regularize(f: Field, eps: float, m: float = 0.0) -> Field:
    """Apply ``(eps*sqrt(-Lap + m^2) + 1)^-1``."""
    return apply_multiplier(reg_eps(eps, m), f)


def poisson_semigroup(f: Field, t: float) -> Field:
    """Apply ``exp(-t*sqrt(-Lap))``."""
    return apply_multiplier(semigroup(t), f)


# --------------------------------------------------------------------------- diagnostics


def boundary_ratio(f: Field) -> float:
    """Max modulus on the box faces relative to the global max (localization check)."""
    v = np.abs(f.physical().values)
    peak = v.max()
    if peak == 0:
        return 0.0
    face = max(np.take(v, [0], axis=ax).max() for ax in range(v.ndim))
    return float(face / peak)


def spectral_tail(f: Field) -> float:
    """Max coefficient outside the two-thirds band relative to the max coefficient."""
    c = np.abs(_coeffs(f))
    peak = c.max()
    if peak == 0:
        return 0.0
    outer = c[~f.grid.dealias_mask]
    return float(outer.max() / peak) if outer.size else 0.0


# --------------------------------------------------------------------------- interpolation


def _interp_matrix(src: Grid, y: np.ndarray) -> np.ndarray:
    """Rows evaluate the 1-D trigonometric interpolant of ``src`` at points ``y``."""
    n = src.n_per_axis
    k = src.k_axis
    phase = np.outer(y + 0.5 * src.box_length, k)
    mat = np.exp(1j * phase)
    nyq = n // 2
    mat[:, nyq] = np.cos(phase[:, nyq])
    inside = np.abs(y) <= 0.5 * src.box_length * (1 + 1e-12)
    mat[~inside] = 0.0
    return mat / np.sqrt(n)


def resample(f: Field, target: Grid, scale: float = 1.0) -> Field:
    """Values of ``f(scale * x)`` at the points of ``target`` by spectral interpolation.

    Points whose image falls outside the source box get zero.
    """
    src = f.grid
    if src.dim != target.dim:
        raise ValueError("dimension mismatch")
    c = _coeffs(f)
    mat = _interp_matrix(src, scale * target.axis)
    out = c
    for ax in range(src.dim):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [ax])), 0, ax)
    if not f.is_spectral and f.values.dtype.kind != "c":
        out = out.real
    return Field(target, out)
