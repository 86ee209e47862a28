"""Free-space Coulomb/Yukawa convolution on a periodic grid.

The kernel ``exp(-mu|x|)/|x|`` is truncated at the box diameter, whose Fourier
transform is smooth at ``xi = 0``; sampling it on a fourfold oversampled
frequency lattice and folding back to a doubled box gives the aperiodic
convolution of the trigonometric interpolant with spectral accuracy
(Vico, Greengard & Ferrando, J. Comput. Phys. 323, 2016).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .spectral import WORKERS, Grid

__all__ = [
    "green_function",
    "truncated_symbol",
    "FreeSpaceKernel",
    "free_kernel",
    "convolve_free",
    "half_laplacian_kernel",
]


def green_function(r: np.ndarray, mu: float = 0.0) -> np.ndarray:
    """Green's function ``exp(-mu r) / (4 pi r)`` of ``mu^2 - Lap`` in three dimensions."""
    r = np.asarray(r, dtype=float)
    return np.exp(-mu * r) / (4 * np.pi * r)


def truncated_symbol(xi: np.ndarray, radius: float, mu: float = 0.0) -> np.ndarray:
    """Fourier transform of ``exp(-mu r)/r`` restricted to ``r < radius``."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    small = xi * radius < 1e-4
    x = xi[~small]
    R = radius
    if mu == 0:
        out[~small] = 4 * np.pi * (1 - np.cos(R * x)) / x**2
        xs = xi[small]
        out[small] = 2 * np.pi * R**2 * (1 - (R * xs) ** 2 / 12)
    else:
        damp = np.exp(-mu * R)
        out[~small] = 4 * np.pi / (x**2 + mu**2) * (1 - damp * (np.cos(R * x) + mu / x * np.sin(R * x)))
        xs = xi[small]
        # series in xs to second order
        c0 = 4 * np.pi / mu**2 * (1 - damp * (1 + mu * R))
        c2 = -4 * np.pi / mu**4 * (1 - damp * (1 + mu * R + (mu * R) ** 2 / 2 + (mu * R) ** 3 / 6))
        out[small] = c0 + c2 * xs**2
    return out


class FreeSpaceKernel:
    """Precomputed spectrum of the folded kernel on the doubled grid.

    ``symbol`` is sampled on a frequency lattice ``oversample`` times finer than
    the grid's own and reaching the Brillouin-zone edge; the default is the
    truncated Yukawa symbol. Aliases of the resulting lattice kernel sit at
    distance ``(oversample - 1) * L`` from any pair of box points.
    """

    def __init__(self, grid: Grid, mu: float = 0.0, symbol=None, oversample: int = 4):
        if grid.dim != 3:
            raise ValueError("free-space convolution is only defined for dim=3")
        if oversample < 4 or oversample % 2:
            raise ValueError("oversample must be an even integer >= 4")
        self.grid = grid
        self.mu = float(mu)
        n, L = grid.n_per_axis, grid.box_length
        m = 2 * n
        if symbol is None:
            radius = np.sqrt(3.0) * L
            symbol = lambda xi: truncated_symbol(xi, radius, self.mu)  # noqa: E731
        period = oversample * L
        k = 2 * np.pi * np.arange(oversample * n // 2 + 1) / period
        xi = np.sqrt(k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2)
        ghat = symbol(xi)
        del xi
        w = sfft.dctn(ghat, type=1, workers=WORKERS) / period**3
        del ghat
        idx = np.minimum(np.arange(m), m - np.arange(m))
        w2 = w[np.ix_(idx, idx, idx)]
        self.spectrum = sfft.rfftn(w2, workers=WORKERS).real * grid.cell
        self._pad_shape = (m, m, m)

    def __call__(self, density: np.ndarray) -> np.ndarray:
        """``integral exp(-mu|x-y|)/|x-y| * density(y) dy`` at every grid point.

        The periodic sample on ``[-L/2, L/2)`` is read as a trapezoid-rule sample
        on the closed box: the face plane is split in half between ``-L/2`` and
        ``+L/2`` and the two images of the face are averaged on output. This keeps
        the operator symmetric under every reflection of the torus.
        """
        n = self.grid.n_per_axis
        if np.iscomplexobj(density):
            return self(density.real) + 1j * self(density.imag)
        ext = np.pad(density, [(0, 1)] * 3, mode="wrap")
        for ax in range(3):
            edge = [slice(None)] * 3
            for i in (0, n):
                edge[ax] = i
                ext[tuple(edge)] *= 0.5
        spec = sfft.rfftn(ext, s=self._pad_shape, workers=WORKERS)
        spec *= self.spectrum
        out = sfft.irfftn(spec, s=self._pad_shape, workers=WORKERS)[: n + 1, : n + 1, : n + 1]
        for ax in range(3):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[ax], hi[ax] = 0, n
            out[tuple(lo)] = 0.5 * (out[tuple(lo)] + out[tuple(hi)])
        return np.ascontiguousarray(out[:n, :n, :n])


@lru_cache(maxsize=8)
def free_kernel(grid: Grid, mu: float = 0.0) -> FreeSpaceKernel:
    return FreeSpaceKernel(grid, mu)


def convolve_free(density: np.ndarray, grid: Grid, mu: float = 0.0) -> np.ndarray:
    return free_kernel(grid, float(mu))(density)


@lru_cache(maxsize=2)
def half_laplacian_kernel(grid: Grid) -> FreeSpaceKernel:
    """Whole-space ``sqrt(-Lap)`` acting on the band-limited interpolant of grid data."""
    return FreeSpaceKernel(grid, symbol=np.abs, oversample=8)
