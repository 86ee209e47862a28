"""Strang-split time integration, a Duhamel/Picard oracle and run monitoring.

The state between steps is kept as unitary DFT coefficients. A step is
``L(dt/2) N(dt) L(dt/2)`` with ``L`` the diagonal propagator of
``sqrt(-Lap + m^2)`` and ``N`` the pointwise phase ``exp(-i dt (Psi + V))``.
``|u|`` is invariant under ``N``, so freezing ``Psi`` over the substep is exact.
"""
from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from numpy.polynomial import legendre

from .errors import NoContraction, ResolutionLoss
from .hartree import Params, potential_from_density
from .snapshot import write_field
from .spectral import WORKERS, Field, Grid, fft, ifft, sobolev_norm

log = logging.getLogger(__name__)

__all__ = [
    "Status",
    "EnergyReport",
    "RunState",
    "IntegratorConfig",
    "SplitStepper",
    "step_strang",
    "picard_duhamel",
    "measure",
    "detect_blowup",
    "apriori_bound_check",
    "evolve",
    "write_history_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("time", "charge", "kinetic", "interaction", "external", "total", "h_half_norm", "dt")


class Status(str, Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    BLOWUP = "blowup_detected"
    ABORTED = "aborted"


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    interaction: float
    external: float
    total: float
    charge: float
    time: float
    h_half_norm: float = 0.0
    dt: float = 0.0
    # ||(-Lap)^{1/4} u||^2, needed by the a-priori bound
    dispersion: float = 0.0

    def row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class RunState:
    """Mutable run record, owned by one loop at a time."""

    field: Field
    time: float = 0.0
    step_count: int = 0
    status: Status = Status.RUNNING
    history: list[EnergyReport] = field(default_factory=list)
    dt: float = 0.0
    recent_norms: deque = field(default_factory=lambda: deque(maxlen=10))
    message: str = ""


def _potential_values(v, grid: Grid) -> np.ndarray | None:
    if v is None:
        return None
    if isinstance(v, np.ndarray):
        vals = v
    else:
        vals = v.values(grid)
    vals = np.asarray(vals, dtype=float)
    if vals.shape != grid.shape:
        raise ValueError(f"potential shape {vals.shape} does not match grid {grid.shape}")
    return vals


class SplitStepper:
    """Precomputed symbols for the split step on a fixed grid and parameter set."""

    def __init__(self, grid: Grid, params: Params, potential=None, dealias: bool = True):
        self.grid = grid
        self.params = params
        self.dealias = dealias
        self.omega = np.sqrt(grid.xi2 + params.m**2)
        denom = grid.xi2_half + params.mu**2
        if params.mu == 0:
            denom = denom.copy()
            denom.flat[0] = np.inf
        green = 4 * np.pi * params.lam / denom
        if dealias:
            green = green * grid.dealias_mask[..., : grid.n_per_axis // 2 + 1]
        self.green = green
        self.v = _potential_values(potential, grid)
        self._prop: dict[float, np.ndarray] = {}
        self._h_half_weight = np.sqrt(1.0 + grid.xi2)

    def half_propagator(self, dt: float) -> np.ndarray:
        p = self._prop.get(dt)
        if p is None:
            if len(self._prop) > 8:
                self._prop.clear()
            p = np.exp(-0.5j * dt * self.omega)
            self._prop[dt] = p
        return p

    def psi(self, u: np.ndarray) -> np.ndarray:
        rho = u.real**2 + u.imag**2
        return sfft.irfftn(sfft.rfftn(rho, workers=WORKERS) * self.green, s=self.grid.shape, workers=WORKERS)

    def phase_potential(self, u: np.ndarray) -> np.ndarray:
        phi = self.psi(u)
        if self.v is not None:
            phi += self.v
        return phi

    def advance(self, c: np.ndarray, dt: float) -> np.ndarray:
        """One Strang step on spectral coefficients ``c``."""
        p = self.half_propagator(dt)
        u = ifft(c * p)
        arg = -dt * self.phase_potential(u)
        u *= np.cos(arg) + 1j * np.sin(arg)
        out = fft(u)
        out *= p
        return out

    def h_half_norm(self, c: np.ndarray) -> float:
        return float(np.sqrt(self.grid.cell * np.sum(self._h_half_weight * (c.real**2 + c.imag**2))))

    def report(self, c: np.ndarray, time: float, dt: float = 0.0, kernel: str = "periodic") -> EnergyReport:
        """Energy terms of ``c``; ``kernel="free"`` swaps in the whole-space interaction."""
        g = self.grid
        a2 = c.real**2 + c.imag**2
        kinetic = 0.5 * g.cell * float(np.sum(self.omega * a2))
        dispersion = g.cell * float(np.sum(g.xi * a2))
        charge = g.cell * float(np.sum(a2))
        h_half = float(np.sqrt(g.cell * np.sum(self._h_half_weight * a2)))
        u = ifft(c)
        rho = u.real**2 + u.imag**2
        if kernel == "free":
            psi = potential_from_density(rho, g, self.params.lam, self.params.mu, "free")
        else:
            psi = self.psi(u)
        interaction = 0.25 * g.cell * float(np.sum(psi * rho))
        external = 0.5 * g.cell * float(np.sum(self.v * rho)) if self.v is not None else 0.0
        return EnergyReport(
            kinetic=kinetic,
            interaction=interaction,
            external=external,
            total=kinetic + interaction + external,
            charge=charge,
            time=time,
            h_half_norm=h_half,
            dt=dt,
            dispersion=dispersion,
        )

    def tail(self, c: np.ndarray) -> float:
        a = np.abs(c)
        peak = a.max()
        if peak == 0:
            return 0.0
        outer = a[~self.grid.dealias_mask]
        return float(outer.max() / peak) if outer.size else 0.0


def _coeffs_of(f: Field) -> np.ndarray:
    return np.asarray(f.spectral().values, dtype=complex)


def step_strang(
    state: RunState,
    dt: float,
    params: Params,
    v=None,
    dealias: bool = True,
    tail_tol: float = 1e-8,
    stepper: SplitStepper | None = None,
) -> RunState:
    """Advance ``state`` by one Strang step of size ``dt`` (negative ``dt`` runs backwards).

    The returned state shares the history list of the input.
    """
    grid = state.field.grid
    stepper = stepper or SplitStepper(grid, params, v, dealias)
    c = _coeffs_of(state.field)
    tail = stepper.tail(c)
    if tail > tail_tol:
        raise ResolutionLoss(f"spectral tail {tail:.3e} exceeds {tail_tol:.1e} at t={state.time:.6g}")
    c = stepper.advance(c, dt)
    u = Field(grid, ifft(c))
    state.recent_norms.append(stepper.h_half_norm(c))
    return replace(state, field=u, time=state.time + dt, step_count=state.step_count + 1, dt=dt)


def measure(
    state: RunState, params: Params, v=None, dealias: bool = True, kernel: str = "periodic"
) -> EnergyReport:
    """Energy and charge of the current field; appended to the history when time advanced.

    The default interaction uses the periodic potential that drives the split
    step, so it is the conserved quantity. ``kernel="free"`` evaluates the
    whole-space Coulomb/Yukawa energy instead, for comparison with the ground
    state, which is computed with that kernel.
    """
    stepper = SplitStepper(state.field.grid, params, v, dealias and kernel == "periodic")
    rep = stepper.report(_coeffs_of(state.field), state.time, state.dt, kernel)
    if not state.history or rep.time > state.history[-1].time:
        state.history.append(rep)
    return rep


def detect_blowup(state: RunState, threshold: float, dt_floor: float) -> Status:
    """Numerical stand-in for norm divergence: threshold crossing, or a collapsing step size."""
    if state.recent_norms:
        norm = state.recent_norms[-1]
    else:
        norm = sobolev_norm(state.field, 0.5)
    if norm > threshold:
        return Status.BLOWUP
    r = list(state.recent_norms)
    if 0 < abs(state.dt) < dt_floor and len(r) >= 10 and all(b > a for a, b in zip(r, r[1:])):
        return Status.BLOWUP
    return Status.RUNNING


def apriori_bound_check(report: EnergyReport, k_const: float) -> tuple[float, float]:
    """``(E, (1/2 - N/(4K)) ||(-Lap)^{1/4} u||^2)`` for the focusing unit coupling."""
    coeff = 0.5 - report.charge / (4.0 * k_const)
    return report.total, coeff * report.dispersion


# --------------------------------------------------------------------------- Picard oracle


def _collocation(n_quad: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1] and the matrix ``S[j, k] = int_0^{x_j} l_k``."""
    x, w = legendre.leggauss(n_quad)
    vander = legendre.legvander(x, n_quad - 1)
    integ = np.empty((n_quad, n_quad))
    for p in range(n_quad):
        coef = np.zeros(p + 1)
        coef[p] = 1.0
        anti = legendre.legint(coef, lbnd=-1)
        integ[:, p] = legendre.legval(x, anti)
    smat = integ @ np.linalg.inv(vander)
    return 0.5 * (x + 1), 0.5 * w, 0.5 * smat


def picard_duhamel(
    u0: Field,
    t: float,
    n_quad: int,
    n_iter: int,
    params: Params,
    v=None,
    dealias: bool = True,
) -> Field:
    """Fixed point of the Duhamel map on ``[0, t]`` by Gauss-Legendre collocation.

    Works in the interaction picture ``w(s) = exp(i s A) u(s)``, so the free flow
    is integrated exactly and only the nonlinear integrand is interpolated.
    """
    if n_quad < 1 or n_iter < 1:
        raise ValueError("n_quad and n_iter must be positive")
    grid = u0.grid
    if t == 0:
        return u0.physical()
    stepper = SplitStepper(grid, params, v, dealias)
    nodes, weights, smat = _collocation(n_quad)
    taus = t * nodes
    fwd = [np.exp(1j * s * stepper.omega) for s in taus]
    c0 = _coeffs_of(u0)
    w = [c0.copy() for _ in taus]
    dist_prev = np.inf
    growth = 0
    for it in range(n_iter):
        g = []
        for j, s in enumerate(taus):
            u = ifft(w[j] / fwd[j])
            g.append(fwd[j] * fft(stepper.phase_potential(u) * u))
        new = [c0 - 1j * t * sum(smat[j, k] * g[k] for k in range(n_quad)) for j in range(n_quad)]
        dist = max(float(np.sqrt(np.sum(np.abs(a - b) ** 2))) for a, b in zip(new, w))
        w = new
        log.debug("picard it=%d distance=%.3e", it, dist)
        if dist == 0:
            break
        growth = growth + 1 if dist > dist_prev else 0
        if growth >= 3:
            raise NoContraction(f"iterate distance grew 3 times in a row (last {dist:.3e})")
        dist_prev = dist
    wt = c0 - 1j * t * sum(weights[k] * g[k] for k in range(n_quad))
    return Field(grid, ifft(wt * np.exp(-1j * t * stepper.omega)))


# --------------------------------------------------------------------------- run loop


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_final: float = 1.0
    adaptive: bool = False
    dealias: bool = True
    sample_every: int = 10
    energy_tol: float = 1e-7
    quiet_steps: int = 50
    dt_max: float | None = None
    dt_floor: float = 1e-9
    threshold_factor: float = 1e3
    tail_tol: float = 1e-8
    snapshot_interval: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final >= 0:
            raise ValueError("t_final must be nonnegative")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if not self.threshold_factor > 1:
            raise ValueError("threshold_factor must exceed 1")


def evolve(
    u0: Field,
    params: Params,
    cfg: IntegratorConfig,
    potential=None,
    snapshot_dir: Path | None = None,
) -> RunState:
    """Integrate to ``cfg.t_final`` or until the blow-up surrogate fires.

    A ``ResolutionLoss`` ends the run with status ``aborted``; the history keeps
    every sample taken up to that point.
    """
    grid = u0.grid
    stepper = SplitStepper(grid, params, potential, cfg.dealias)
    c = _coeffs_of(u0)
    state = RunState(field=u0.physical(), dt=cfg.dt)
    threshold = cfg.threshold_factor * stepper.h_half_norm(c)
    dt_max = cfg.dt_max or cfg.dt
    dt = cfg.dt
    rep = stepper.report(c, 0.0, dt)
    state.history.append(rep)
    energy = rep.total
    quiet = 0
    since_sample = 0
    next_snap = cfg.snapshot_interval
    t_end = cfg.t_final
    tiny = 1e-12 * max(1.0, t_end)

    def snapshot(cc, time):
        if snapshot_dir is None:
            return
        Path(snapshot_dir).mkdir(parents=True, exist_ok=True)
        write_field(
            Path(snapshot_dir) / f"snap_{state.step_count:08d}.fld",
            Field(grid, ifft(cc)),
            params=params.to_dict(),
            time=time,
        )

    if snapshot_dir is not None and cfg.snapshot_interval:
        snapshot(c, 0.0)

    while state.time < t_end - tiny:
        h = min(dt, t_end - state.time)
        c_new = stepper.advance(c, h)
        if cfg.adaptive:
            rep_new = stepper.report(c_new, state.time + h, h)
            jump = abs(rep_new.total - energy)
            if jump > cfg.energy_tol * max(abs(energy), 1e-300):
                dt = 0.5 * h
                quiet = 0
                state.dt = dt
                if dt < cfg.dt_floor:
                    state.recent_norms.append(stepper.h_half_norm(c_new))
                    if detect_blowup(state, threshold, cfg.dt_floor) is Status.BLOWUP:
                        state.status = Status.BLOWUP
                        state.message = f"step size fell below {cfg.dt_floor:g}"
                        break
                    state.status = Status.ABORTED
                    state.message = f"step size fell below {cfg.dt_floor:g} without norm growth"
                    break
                continue
            energy = rep_new.total
            quiet += 1
            if quiet >= cfg.quiet_steps and dt < dt_max:
                dt = min(2 * dt, dt_max)
                quiet = 0
        c = c_new
        state.time += h
        state.step_count += 1
        state.dt = h
        state.recent_norms.append(stepper.h_half_norm(c))
        since_sample += 1
        status = detect_blowup(state, threshold, cfg.dt_floor)
        done = state.time >= t_end - tiny
        if since_sample >= cfg.sample_every or done or status is Status.BLOWUP:
            since_sample = 0
            rep = stepper.report(c, state.time, h)
            if rep.time > state.history[-1].time:
                state.history.append(rep)
            if status is Status.BLOWUP:
                state.status = status
                state.message = f"H^1/2 norm {state.recent_norms[-1]:.4g} above threshold {threshold:.4g}"
                break
            tail = stepper.tail(c)
            if tail > cfg.tail_tol:
                state.status = Status.ABORTED
                state.message = f"resolution lost: spectral tail {tail:.3e} at t={state.time:.6g}"
                break
        if next_snap is not None and state.time >= next_snap - tiny:
            snapshot(c, state.time)
            next_snap += cfg.snapshot_interval
    if state.status is Status.RUNNING:
        state.status = Status.COMPLETED
    state.field = Field(grid, ifft(c))
    log.info(
        "run finished: status=%s t=%.6g steps=%d %s",
        state.status.value,
        state.time,
        state.step_count,
        state.message,
    )
    return state


def write_history_csv(history: list[EnergyReport], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in history:
            w.writerow([repr(float(x)) for x in rep.row()])
    return path

