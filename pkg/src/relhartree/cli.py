"""``relh`` command line: evolve, groundstate, sweep and check.

Exit codes: evolve 0 completed / 2 blow-up detected / 1 error; groundstate 3 on
non-convergence; check 4 when any suite fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, reference_text
from .errors import NoConvergence, RelhError
from .evolution import Status, apriori_bound_check, evolve, write_history_csv
from .groundstate import (
    GroundState,
    load_ground_state,
    save_ground_state,
    scale_ground_state,
    solve_ground_state,
)
from .potentials import (
    CoulombLike,
    CustomGrid,
    Exponential,
    PotentialSpec,
    PowerLaw,
    estimate_form_bound,
    threshold_with_potential,
)
from .snapshot import read_field, write_field
from .spectral import Field, Grid, boundary_ratio
from .suites import (
    groundstate_identity,
    kato_k_suite,
    lipschitz_suite,
    narrow_gaussian_kato,
    positivity_suite,
    regularizer_suite,
)

log = logging.getLogger("relhartree")

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP, EXIT_NOCONV, EXIT_CHECK = 0, 1, 2, 3, 4
SWEEP_COLUMNS = ("mass_ratio", "lambda", "mu", "m", "verdict", "t_end", "max_h_half")


# --------------------------------------------------------------------------- builders


def ground_state_for(cfg: RunConfig) -> GroundState:
    gc = cfg.groundstate
    if gc.path:
        return load_ground_state(gc.path)
    return solve_ground_state(gc.build_grid(cfg.grid.dim), cfg.params.lam, gc.tol, gc.max_iter)


def gaussian(grid: Grid, width: float, mass: float) -> Field:
    g = np.exp(-0.5 * grid.r**2 / width**2)
    return Field(grid, g * np.sqrt(mass / (grid.cell * np.sum(g * g))))


def initial_field(cfg: RunConfig, grid: Grid, gs: GroundState | None = None) -> Field:
    ic = cfg.initial
    if ic.kind == "gaussian":
        u = gaussian(grid, ic.width, ic.mass)
    elif ic.kind == "ground_state_scaled":
        gs = gs or ground_state_for(cfg)
        if gs.grid == grid and ic.a == 1:
            q = gs.q
        else:
            q = scale_ground_state(gs, ic.a, target=grid).q
        u = q * np.sqrt(ic.mass_ratio)
    else:
        u, _ = read_field(ic.path)
        if u.grid != grid:
            raise RelhError(f"{ic.path}: grid {u.grid} does not match the configured grid {grid}")
    ratio = boundary_ratio(u)
    if ratio > 1e-10:
        log.warning("initial field is not localized: face/peak ratio %.2e", ratio)
    return u


def potential_for(cfg: RunConfig, grid: Grid, seed: int = 0) -> PotentialSpec | None:
    pc = cfg.potential
    if not pc.active:
        return None
    vplus = {
        "none": lambda: None,
        "power": lambda: PowerLaw(pc.beta, pc.scale),
        "exponential": lambda: Exponential(pc.clip, pc.scale),
        "file": lambda: CustomGrid(read_field(pc.vplus_path)[0].values.real, grid),
    }[pc.vplus]()
    vminus = {
        "none": lambda: None,
        "coulomb_like": lambda: CoulombLike(pc.c, pc.eps, pc.d),
        "file": lambda: CustomGrid(read_field(pc.vminus_path)[0].values.real, grid),
    }[pc.vminus]()
    spec = PotentialSpec(vplus=vplus, vminus=vminus)
    a, b = estimate_form_bound(spec, grid, pc.n_probes, seed)
    return spec.with_bounds(a, b)


# --------------------------------------------------------------------------- commands


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid.build()
    params = cfg.params.build()
    u0 = initial_field(cfg, grid)
    spec = potential_for(cfg, grid, cfg.output.seed)
    snaps = out / "snapshots" if cfg.integrator.snapshot_interval else None
    state = evolve(u0, params, cfg.integrator, potential=spec, snapshot_dir=snaps)
    write_history_csv(state.history, out / cfg.output.csv)
    write_field(out / "final.fld", state.field, params=params.to_dict(), time=state.time)
    e = np.array([r.total for r in state.history])
    n = np.array([r.charge for r in state.history])
    summary = {
        "status": state.status.value,
        "message": state.message,
        "t_end": state.time,
        "steps": state.step_count,
        "energy_drift": float(np.abs(e - e[0]).max() / max(abs(e[0]), 1e-300)),
        "charge_drift": float(np.abs(n - n[0]).max() / max(n[0], 1e-300)),
        "form_bound": None if spec is None else [spec.a_bound, spec.b_bound],
    }
    (out / "run.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"status={state.status.value} t={state.time:.6g} steps={state.step_count} {state.message}")
    if state.status is Status.COMPLETED:
        return EXIT_OK
    if state.status is Status.BLOWUP:
        return EXIT_BLOWUP
    return EXIT_ERROR


def cmd_groundstate(cfg: RunConfig, out: Path) -> int:
    gc = cfg.groundstate
    try:
        gs = solve_ground_state(gc.build_grid(cfg.grid.dim), cfg.params.lam, gc.tol, gc.max_iter)
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    save_ground_state(gs, out / "groundstate")
    bound = 4 / (np.pi * abs(gs.lam))
    verdict = "holds" if gs.mass > bound else "FAILS"
    print(
        f"mass={gs.mass:.10f} k_const={gs.k_const:.10f} residual={gs.residual:.3e} "
        f"iterations={gs.iterations}; mass > 4/(pi|lambda|) = {bound:.6f} {verdict}"
    )
    return EXIT_OK


@dataclass
class SweepJob:
    ratio: float
    cfg: RunConfig
    gs: GroundState
    out: Path


def _run_sweep_job(job: SweepJob) -> dict:
    cfg = job.cfg
    grid = cfg.grid.build()
    params = cfg.params.build()
    ic = cfg.initial
    if ic.kind == "gaussian":
        ic = replace(ic, mass=job.ratio * job.gs.mass)
    elif ic.kind == "ground_state_scaled":
        ic = replace(ic, mass_ratio=job.ratio)
    else:
        raise RelhError("sweeps need gaussian or ground_state_scaled initial data")
    cfg = replace(cfg, initial=ic)
    try:
        u0 = initial_field(cfg, grid, job.gs)
        spec = potential_for(cfg, grid, cfg.output.seed)
        state = evolve(u0, params, cfg.integrator, potential=spec)
    except RelhError as exc:
        return {"ratio": job.ratio, "error": f"{type(exc).__name__}: {exc}"}
    write_history_csv(state.history, job.out / f"run_{job.ratio:g}.csv")
    margins = [e - rhs for e, rhs in (apriori_bound_check(r, job.gs.k_const) for r in state.history)]
    verdict = {Status.COMPLETED: "global_surrogate", Status.BLOWUP: "blowup_detected"}.get(state.status)
    res = {
        "ratio": job.ratio,
        "status": state.status.value,
        "message": state.message,
        "row": None,
        "energy0": state.history[0].total,
        "apriori_min_margin": float(min(margins)),
        "samples": len(state.history),
    }
    if verdict is None:
        res["error"] = f"run aborted: {state.message}"
        return res
    res["row"] = {
        "mass_ratio": job.ratio,
        "lambda": params.lam,
        "mu": params.mu,
        "m": params.m,
        "verdict": verdict,
        "t_end": state.time,
        "max_h_half": max(r.h_half_norm for r in state.history),
    }
    return res


def _workers(requested: int, n_jobs: int) -> int:
    env = os.environ.get("RELH_THREADS")
    cap = int(env) if env else (requested or os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def cmd_sweep(cfg: RunConfig, out: Path, ratios: list[float] | None = None) -> tuple[int, list[dict]]:
    ratios = list(cfg.sweep.ratios if ratios is None else ratios)
    out.mkdir(parents=True, exist_ok=True)
    results: list[dict] = []
    gs = None
    if ratios:
        gs = ground_state_for(cfg)
        jobs = [SweepJob(r, cfg, gs, out) for r in ratios]
        n = _workers(cfg.sweep.workers, len(jobs))
        if n == 1:
            results = [_run_sweep_job(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=n) as pool:
                results = list(pool.map(_run_sweep_job, jobs))
    rows = [r["row"] for r in results if r.get("row")]
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([row[c] if isinstance(row[c], str) else repr(float(row[c])) for c in SWEEP_COLUMNS])
    verdicts = [r["verdict"] for r in sorted(rows, key=lambda r: r["mass_ratio"])]
    crossings = sum(a != b for a, b in zip(verdicts, verdicts[1:]))
    report = {
        "ground_state_mass": gs.mass if ratios else None,
        "jobs": results,
        "failures": [r for r in results if r.get("error")],
        "monotone": crossings <= 1 and (not verdicts or verdicts[0] == "global_surrogate" or crossings == 0),
    }
    if gs is not None and cfg.potential.active:
        spec = potential_for(cfg, cfg.grid.build(), cfg.output.seed)
        report["form_bound"] = [spec.a_bound, spec.b_bound]
        report["threshold_with_potential"] = threshold_with_potential(gs, spec)
    if not report["monotone"]:
        log.warning("sweep verdicts are not a single crossing in mass ratio: %s", verdicts)
    (out / "sweep.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    for r in results:
        line = r["row"]["verdict"] if r.get("row") else r["error"]
        print(f"ratio={r['ratio']:g}: {line}")
    return (EXIT_ERROR if report["failures"] else EXIT_OK), results


def cmd_check(cfg: RunConfig, out: Path) -> int:
    cc = cfg.check
    seed = cfg.output.seed
    grid = Grid(cc.n_per_axis, cc.box_length, 3)
    suites = list(kato_k_suite(grid, cc.n_fields, seed))
    suites.append(narrow_gaussian_kato(grid))
    suites.append(lipschitz_suite(cc.n_lipschitz, seed, box_length=cc.box_length))
    suites.append(regularizer_suite(grid, seed))
    suites.append(positivity_suite(grid, cc.n_bumps, seed))
    if cc.groundstate:
        try:
            suites.append(groundstate_identity(ground_state_for(cfg)))
        except NoConvergence as exc:
            print(f"ground state did not converge: {exc}", file=sys.stderr)
            suites.append(None)
    report = {s.name: s.to_dict() for s in suites if s is not None}
    failed = [name for name, s in report.items() if not s["passed"]]
    if None in suites:
        failed.append("k_of_q")
    report["failed"] = failed
    out.mkdir(parents=True, exist_ok=True)
    (out / "check.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for s in suites:
        if s is not None:
            print(f"{s.name:22s} {'pass' if s.passed else 'FAIL'}  worst={s.worst:.6g} bound={s.bound:.6g}")
    if failed:
        print("failing suites: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# --------------------------------------------------------------------------- entry point


def _ratios(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad ratio list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="relh",
        description="Semi-relativistic Hartree toolkit: evolution, ground states, sweeps, inequality checks.",
        epilog="Config reference (all keys at their defaults):\n\n" + reference_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [
        ("evolve", "integrate one run; exit 0 completed, 2 blow-up detected, 1 error"),
        ("groundstate", "solve for the ground state; exit 3 on non-convergence"),
        ("sweep", "dichotomy sweep over mass ratios"),
        ("check", "inequality suites; exit 4 on failure"),
    ]:
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", type=Path, help="INI config file (defaults apply when omitted)")
        sp.add_argument("--seed", type=int, help="seed for randomized suites and probes")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        if name == "sweep":
            sp.add_argument("--ratios", type=_ratios, help="comma-separated mass ratios")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = replace(cfg, output=replace(cfg.output, seed=args.seed))
        out: Path = args.out
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")
        if args.command == "evolve":
            return cmd_evolve(cfg, out)
        if args.command == "groundstate":
            return cmd_groundstate(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.ratios)[0]
        return cmd_check(cfg, out)
    except (RelhError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
