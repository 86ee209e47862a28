"""Acceptance criteria at their stated sizes and tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary, and then
asserts. The whole module takes roughly ten minutes on one core.
"""
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from relhartree import (
    Grid,
    PotentialSpec,
    RunState,
    Status,
    estimate_form_bound,
    evolve,
    picard_duhamel,
    step_strang,
    threshold_with_potential,
)
from relhartree.cli import cmd_sweep, initial_field, potential_for
from relhartree.config import load_config
from relhartree.potentials import CoulombLike
from relhartree.suites import kato_k_suite, positivity_suite, regularizer_suite

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
G64 = Grid(64, 16.0)


@pytest.fixture
def record(acceptance_log):
    def _record(number, name, ok, detail):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        acceptance_log.append(line)
        print(line)
        return ok

    return _record


def _drifts(state):
    e = np.array([r.total for r in state.history])
    n = np.array([r.charge for r in state.history])
    return float(np.abs(e - e[0]).max() / abs(e[0])), float(np.abs(n - n[0]).max() / n[0])


def _conservation(cfg):
    """Energy and charge drift at dt and dt/2 over the configured run."""
    grid, params = cfg.grid.build(), cfg.params.build()
    u0 = initial_field(cfg, grid)
    spec = potential_for(cfg, grid, cfg.output.seed)
    out = []
    for dt in (cfg.integrator.dt, cfg.integrator.dt / 2):
        ic = replace(cfg.integrator, dt=dt, sample_every=int(round(cfg.integrator.sample_every * cfg.integrator.dt / dt)))
        state = evolve(u0, params, ic, potential=spec)
        assert state.status is Status.COMPLETED, state.message
        out.append(_drifts(state))
    (e1, n1), (e2, n2) = out
    return e1, max(n1, n2), e1 / e2


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    cfg = load_config(CONFIGS / "dichotomy.ini")
    t0 = time.perf_counter()
    code, results = cmd_sweep(cfg, tmp_path_factory.mktemp("sweep"))
    return cfg, code, {r["ratio"]: r for r in results}, time.perf_counter() - t0


@pytest.fixture(scope="module")
def kato_k():
    t0 = time.perf_counter()
    kato, kfun = kato_k_suite(G64, 100, seed=0)
    return kato, kfun, time.perf_counter() - t0


def test_criterion_01_kato(kato_k, record):
    kato, _, seconds = kato_k
    ok = kato.passed and kato.worst <= np.pi / 2 * 1.01 and seconds < 60
    assert record(1, "Kato ratio", ok, f"max {kato.worst:.5f} <= {np.pi / 2 * 1.01:.5f}, {seconds:.1f} s < 60 s")


def test_criterion_02_k_lower_bound(kato_k, record):
    _, kfun, _ = kato_k
    ok = kfun.passed and kfun.worst >= 2 / np.pi * 0.999
    assert record(2, "K lower bound", ok, f"min {kfun.worst:.5f} >= {2 / np.pi * 0.999:.5f}")


def test_criterion_03_ground_state(gs64, gs96, record):
    from relhartree import k_functional

    k_ratio = k_functional(gs64.q) / (gs64.mass / 2)
    drift = abs(gs96.mass - gs64.mass) / gs64.mass
    ok = (
        gs64.residual <= 1e-8
        and gs64.iterations <= 500
        and gs64.mass > 4 / np.pi
        and abs(k_ratio - 1) <= 0.01
        and drift <= 5e-3
    )
    detail = (
        f"residual {gs64.residual:.2e} in {gs64.iterations} it, mass {gs64.mass:.6f} > {4 / np.pi:.6f}, "
        f"K[Q]/(mass/2) {k_ratio:.5f}, 96^3 change {drift:.2e}"
    )
    assert record(3, "ground state", ok, detail)


def test_criterion_04_conservation(gs64, record):
    cfg = load_config(CONFIGS / "conservation.ini")
    assert cfg.initial.mass == pytest.approx(0.5 * gs64.mass, rel=1e-4)
    e_drift, n_drift, ratio = _conservation(cfg)
    ok = n_drift <= 1e-11 and e_drift <= 1e-6 and 3.5 <= ratio <= 4.5
    detail = f"charge {n_drift:.2e} <= 1e-11, energy {e_drift:.2e} <= 1e-6, halving ratio {ratio:.3f}"
    assert record(4, "conservation", ok, detail)


def test_criterion_05_picard_oracle(record):
    cfg = load_config(CONFIGS / "conservation.ini")
    grid, params = cfg.grid.build(), cfg.params.build()
    u0 = initial_field(cfg, grid)
    state = RunState(field=u0)
    for _ in range(10):
        state = step_strang(state, 1e-3, params)
    ref = picard_duhamel(u0, 0.01, 8, 12, params)
    diff = float(np.linalg.norm(state.field.values - ref.values) / np.linalg.norm(ref.values))
    assert record(5, "Duhamel oracle", diff <= 1e-6, f"relative L2 difference {diff:.2e} <= 1e-6")


def test_criterion_06_dichotomy(sweep, record):
    cfg, code, jobs, seconds = sweep
    verdict = {r: (j["row"] or {}).get("verdict", j.get("error")) for r, j in jobs.items()}
    ok = (
        code == 0
        and all(verdict[r] == "global_surrogate" and jobs[r]["row"]["t_end"] >= 10 - 1e-9 for r in (0.5, 0.8))
        and all(verdict[r] == "blowup_detected" and jobs[r]["energy0"] < 0 for r in (1.5, 2.0))
        and seconds < 1800
    )
    detail = ", ".join(f"{r:g}: {verdict[r]} (E0 {jobs[r]['energy0']:+.3f})" for r in sorted(jobs))
    assert record(6, "dichotomy", ok, f"{detail}; {seconds:.0f} s < 1800 s")


def test_criterion_07_apriori_bound(sweep, record):
    _, _, jobs, _ = sweep
    margins = {r: jobs[r]["apriori_min_margin"] for r in (0.5, 0.8)}
    ok = all(m >= -1e-8 for m in margins.values())
    detail = ", ".join(f"ratio {r:g} min E - RHS {m:.4f}" for r, m in margins.items())
    assert record(7, "a-priori bound", ok, detail + " >= -1e-8")


def test_criterion_08_external_potential(gs64, record):
    grid = G64
    a, b = estimate_form_bound(PotentialSpec(vminus=CoulombLike(0.5, 0.0)), grid)
    spec = PotentialSpec(vminus=CoulombLike(0.5, 0.0)).with_bounds(a, b)
    threshold = threshold_with_potential(gs64, spec)
    cfg = load_config(CONFIGS / "potential.ini")
    assert cfg.initial.mass == pytest.approx(0.5 * threshold, rel=1e-4)

    short = replace(cfg, integrator=replace(cfg.integrator, dt=1e-3, t_final=1.0, sample_every=10))
    e_drift, n_drift, ratio = _conservation(short)

    u0 = initial_field(cfg, grid)
    state = evolve(u0, cfg.params.build(), cfg.integrator, potential=potential_for(cfg, grid))
    h = [r.h_half_norm for r in state.history]
    growth = max(h) / h[0]

    ok = (
        a == np.pi / 4
        and threshold == pytest.approx((1 - np.pi / 4) * gs64.mass, rel=1e-12)
        and n_drift <= 1e-11
        and e_drift <= 1e-6
        and 3.5 <= ratio <= 4.5
        and state.status is Status.COMPLETED
        and state.time >= 5 - 1e-9
        and growth <= 1.25
    )
    detail = (
        f"a {a:.12f} (pi/4), threshold {threshold:.6f}, charge {n_drift:.2e}, energy {e_drift:.2e}, "
        f"ratio {ratio:.3f}, T=5 {state.status.value} with max H growth {growth:.4f}"
    )
    assert record(8, "external potential", ok, detail)


def test_criterion_09_regularizer(record):
    res = regularizer_suite(G64, seed=0)
    detail = f"{res.n} field/order pairs, worst defect {res.worst:.2e} < 1e-6, max contraction {res.detail['max_contraction']:.12f}"
    assert record(9, "regularizer", res.passed, detail)


def test_criterion_10_positivity(record):
    res = positivity_suite(G64, 50, seed=0)
    assert record(10, "positivity", res.passed and res.worst > 0, f"50 bumps, min {res.worst:.3e} > 0")
