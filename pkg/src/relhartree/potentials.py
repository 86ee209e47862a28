"""External potentials ``V = V+ + V-``, relative form bounds and the shifted energy norm."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NotFormBounded
from .groundstate import GroundState
from .hartree import quarter_laplacian_norm2
from .spectral import Field, Grid, sqrt_lap_m, sobolev_norm

__all__ = [
    "PowerLaw",
    "Exponential",
    "CoulombLike",
    "CustomGrid",
    "PotentialSpec",
    "KATO_CONSTANT",
    "probe_family",
    "form_bound_terms",
    "estimate_form_bound",
    "x_norm",
    "x_norm_ratio",
    "threshold_with_potential",
]

KATO_CONSTANT = np.pi / 2


@dataclass(frozen=True)
class PowerLaw:
    """``scale * |x|**beta``."""

    beta: float
    scale: float = 1.0

    def __post_init__(self):
        if self.beta < 0 or self.scale < 0:
            raise ValueError("power-law potential needs beta >= 0 and scale >= 0")

    def values(self, grid: Grid) -> np.ndarray:
        return self.scale * grid.r**self.beta


@dataclass(frozen=True)
class Exponential:
    """``scale * exp(min(x_1, clip))``; the clip keeps the grid values finite."""

    clip: float = 10.0
    scale: float = 1.0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("exponential potential needs scale >= 0")

    def values(self, grid: Grid) -> np.ndarray:
        x1 = np.broadcast_to(grid.coords[0], grid.shape)
        return self.scale * np.exp(np.minimum(x1, self.clip))


@dataclass(frozen=True)
class CoulombLike:
    """``-c / max(|x|, h/2)**(1 - eps) - d``."""

    c: float
    eps: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if self.c < 0 or self.d < 0:
            raise ValueError("coulomb_like needs c >= 0 and d >= 0")
        if not 0 <= self.eps <= 1:
            raise ValueError("coulomb_like needs eps in [0, 1]")

    def values(self, grid: Grid) -> np.ndarray:
        r = np.maximum(grid.r, 0.5 * grid.h)
        return -self.c / r ** (1 - self.eps) - self.d


@dataclass(frozen=True, eq=False)
class CustomGrid:
    """Sampled potential on a fixed grid (for instance read from a snapshot)."""

    data: np.ndarray
    grid: Grid

    def __post_init__(self):
        arr = np.asarray(self.data)
        if np.iscomplexobj(arr):
            if np.abs(arr.imag).max() > 1e-12 * max(np.abs(arr.real).max(), 1.0):
                raise ValueError("custom potential must be real")
            arr = arr.real
        arr = np.array(arr, dtype=float)
        if arr.shape != self.grid.shape:
            raise ValueError(f"custom potential shape {arr.shape} does not match grid {self.grid.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def values(self, grid: Grid) -> np.ndarray:
        if grid != self.grid:
            raise ValueError("custom potential was sampled on a different grid")
        return self.data


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    vplus: PowerLaw | Exponential | CustomGrid | None = None
    vminus: CoulombLike | CustomGrid | None = None
    a_bound: float | None = None
    b_bound: float | None = None

    def __post_init__(self):
        if self.a_bound is not None and not 0 <= self.a_bound < 1:
            raise NotFormBounded(f"relative bound a={self.a_bound} must lie in [0, 1)")
        if self.b_bound is not None and self.b_bound < 0:
            raise ValueError("b_bound must be >= 0")

    def vplus_values(self, grid: Grid) -> np.ndarray:
        if self.vplus is None:
            return np.zeros(grid.shape)
        v = np.broadcast_to(self.vplus.values(grid), grid.shape)
        if v.min() < 0:
            raise ValueError("V+ must be nonnegative on the grid")
        return v

    def vminus_values(self, grid: Grid) -> np.ndarray:
        if self.vminus is None:
            return np.zeros(grid.shape)
        v = np.broadcast_to(self.vminus.values(grid), grid.shape)
        if v.max() > 0:
            raise ValueError("V- must be nonpositive on the grid")
        return v

    def values(self, grid: Grid) -> np.ndarray:
        return np.asarray(self.vplus_values(grid) + self.vminus_values(grid), dtype=float)

    def with_bounds(self, a: float, b: float) -> "PotentialSpec":
        return replace(self, a_bound=a, b_bound=b)


# --------------------------------------------------------------------------- form bounds


def probe_family(
    grid: Grid, n_probes: int, seed: int = 0, min_width: float | None = None
) -> list[Field]:
    """Centered Gaussians over a width sweep, then random complex Gaussian mixtures.

    Widths run from ``min_width`` (default two grid spacings) to a tenth of the
    box; mixture centres stay within a quarter box of the origin.
    """
    rng = np.random.default_rng(seed)
    w_lo, w_hi = min_width or 2 * grid.h, grid.box_length / 10
    if not 0 < w_lo < w_hi:
        raise ValueError(f"min_width must lie in (0, {w_hi:g})")
    n_sweep = max(n_probes // 2, 1)
    probes = []
    for w in np.geomspace(w_lo, w_hi, n_sweep):
        probes.append(Field(grid, np.exp(-0.5 * grid.r**2 / w**2)))
    for _ in range(n_probes - n_sweep):
        vals = np.zeros(grid.shape, dtype=complex)
        for _ in range(rng.integers(1, 4)):
            w = np.exp(rng.uniform(np.log(w_lo), np.log(w_hi)))
            c = rng.uniform(-0.25, 0.25, grid.dim) * grid.box_length
            r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
            amp = rng.normal() + 1j * rng.normal()
            vals += amp * np.exp(-0.5 * r2 / w**2)
        probes.append(Field(grid, vals))
    return probes


def form_bound_terms(u: Field, vminus: np.ndarray) -> tuple[float, float, float]:
    """``(<u, sqrt(-Lap) u>, <u, u>, |<u, V- u>|)`` on the torus."""
    g = u.grid
    vals = u.physical().values
    rho = np.abs(vals) ** 2
    return quarter_laplacian_norm2(u), g.cell * float(rho.sum()), abs(g.cell * float(np.sum(vminus * rho)))


def estimate_form_bound(
    spec: PotentialSpec,
    grid: Grid,
    n_probes: int = 40,
    seed: int = 0,
    margin: float = 0.05,
    min_width: float | None = None,
) -> tuple[float, float]:
    """Relative form bound ``(a, b)`` of ``V-`` against ``sqrt(-Lap)``.

    ``coulomb_like`` with ``eps = 0`` uses the Kato constant: ``a = c pi/2``,
    ``b = d``. Otherwise the slope ``a`` is a least-squares fit of
    ``|<u,V-u>|/<u,u>`` against ``<u,sqrt(-Lap)u>/<u,u>`` over the probes, and
    ``b`` is lifted until every probe satisfies the bound, then padded by
    ``margin`` times the spread of the residuals (zero when the envelope is
    exact, as for a constant ``V-``). This is an upper-bound heuristic and not
    a proof.
    """
    if n_probes < 10:
        raise ValueError("n_probes must be >= 10")
    vm = spec.vminus
    if vm is None:
        return 0.0, 0.0
    if isinstance(vm, CoulombLike) and vm.eps == 0:
        a = vm.c * KATO_CONSTANT
        if a >= 1:
            raise NotFormBounded(f"c={vm.c} gives a = c*pi/2 = {a:.4f} >= 1")
        return float(a), float(vm.d)
    vminus = spec.vminus_values(grid)
    terms = np.array([form_bound_terms(p, vminus) for p in probe_family(grid, n_probes, seed, min_width)])
    x = terms[:, 0] / terms[:, 1]
    z = terms[:, 2] / terms[:, 1]
    design = np.column_stack([x, np.ones_like(x)])
    (slope, _), *_ = np.linalg.lstsq(design, z, rcond=None)
    if slope >= 1:
        raise NotFormBounded(f"fitted relative bound {slope:.4f} is not below 1")
    a = max(float(slope), 0.0)
    resid = z - a * x
    b = float(np.max(resid) + margin * np.ptp(resid))
    return a, max(b, 0.0)


# --------------------------------------------------------------------------- energy space


def _form(u: Field, spec: PotentialSpec | None, m: float) -> tuple[float, float]:
    g = u.grid
    c = u.spectral().values
    a2 = c.real**2 + c.imag**2
    kin = g.cell * float(np.sum(sqrt_lap_m(m).symbol(g) * a2))
    n2 = g.cell * float(np.sum(a2))
    pot = 0.0
    if spec is not None and (spec.vplus is not None or spec.vminus is not None):
        rho = np.abs(u.physical().values) ** 2
        pot = g.cell * float(np.sum(spec.values(g) * rho))
    return kin + pot, n2


def x_norm(u: Field, spec: PotentialSpec | None, m: float = 0.0) -> float:
    """``sqrt(<u,u> + Q(u,u) + M <u,u>)`` with ``Q`` the form of ``sqrt(-Lap+m^2) + V``.

    The shift ``M = b + m`` uses the stored ``b_bound`` (zero when unset) so that
    the shifted form is nonnegative whenever ``(a, b)`` is a valid bound.
    """
    q, n2 = _form(u, spec, m)
    b = spec.b_bound if spec is not None and spec.b_bound is not None else 0.0
    shift = b + m
    return float(np.sqrt(max(n2 + q + shift * n2, 0.0)))


def x_norm_ratio(u: Field, spec: PotentialSpec | None, m: float = 0.0) -> float:
    """``||u||_X / (||u||_{H^1/2} + ||V+^{1/2} u||_2)``; bounded above and below on the energy space."""
    g = u.grid
    vp = spec.vplus_values(g) if spec is not None else np.zeros(g.shape)
    rho = np.abs(u.physical().values) ** 2
    ref = sobolev_norm(u, 0.5) + np.sqrt(g.cell * float(np.sum(vp * rho)))
    return x_norm(u, spec, m) / ref


def threshold_with_potential(gs: GroundState, spec: PotentialSpec) -> float:
    """Mass threshold ``(1 - a) ||Q||^2`` below which global existence holds under ``V``."""
    if spec.a_bound is None:
        raise ValueError("spec.a_bound is unset; run estimate_form_bound first")
    return (1.0 - spec.a_bound) * gs.mass
