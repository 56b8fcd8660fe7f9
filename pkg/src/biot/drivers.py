"""Experiment drivers behind the command line: single runs, convergence tables, index-set studies."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .discretization import BiotDiscretization
from .git_fom import DecoupledSolver, iterate
from .io import (
    ERRORS_HEADER,
    INDEX_SETS_HEADER,
    ITERATIONS_HEADER,
    SPECTRA_HEADER,
    TABLE_HEADER,
    format_table,
    iteration_rows,
    spectra_rows,
    table_rows,
    write_csv,
    write_json,
)
from .monolithic import run_monolithic
from .rom import build_index_set, run_rom_iteration

log = logging.getLogger(__name__)


def discretize(cfg: RunConfig) -> BiotDiscretization:
    return BiotDiscretization(cfg.make_case(), cfg.nx, cfg.ny, cfg.degree_u, cfg.degree_p, backend=cfg.backend)


def _echo(cfg: RunConfig, outdir: Path, command: str, extra=None):
    d = {"command": command, "version": __version__, "config": cfg.to_json()}
    if extra:
        d.update(extra)
    write_json(outdir / "run.json", d)


def _monolithic(cfg, disc, dt):
    return run_monolithic(disc, float(dt), cfg.num_steps(dt), bootstrap=cfg.bootstrap_mode)


def run_monolithic_cmd(cfg: RunConfig, outdir: Path) -> dict:
    disc = discretize(cfg)
    dt = cfg.dt_value
    res = _monolithic(cfg, disc, dt)
    summary = {"max_relative_residual": res.max_residual, "num_steps": cfg.num_steps(dt)}
    if res.errors:
        write_csv(outdir / "errors.csv", ERRORS_HEADER, res.errors)
        summary["final_errors"] = dict(zip(ERRORS_HEADER[2:], res.errors[-1][2:]))
    _echo(cfg, outdir, "monolithic", {"summary": summary})
    return summary


def convergence_table(cfg: RunConfig, outdir: Path) -> list:
    """Final-time errors and observed orders of the monolithic scheme over the configured dt list."""
    disc = discretize(cfg)
    if not disc.case.has_exact:
        raise ValueError("a convergence table needs the manufactured case example1")
    finals = []
    for dt in cfg.dt:
        res = _monolithic(cfg, disc, dt)
        finals.append(tuple(res.errors[-1][2:]))
        log.info("dt=%s: errors %s", dt, finals[-1])
        disc.clear_load_cache()
        del res
    rows = table_rows(cfg.dt, finals)
    write_csv(outdir / "errors.csv", TABLE_HEADER, rows)
    _echo(cfg, outdir, "convergence-table")
    print(format_table(rows))
    return rows


def _initial_guess(cfg: RunConfig):
    g = cfg.iteration.initial_guess
    if g.startswith("from-file:"):
        with np.load(g.split(":", 1)[1]) as data:
            return data["xi"].copy()
    return g


def _git_setup(cfg: RunConfig):
    disc = discretize(cfg)
    dt = cfg.dt_value
    N = cfg.num_steps(dt)
    reference = None
    initial = None
    if cfg.iteration.reference:
        ref = _monolithic(cfg, disc, dt)
        reference = (ref.u, ref.xi, ref.p)
        initial = ((ref.u[0], ref.xi[0], ref.p[0]), (ref.u[1], ref.xi[1], ref.p[1]))
    solver = DecoupledSolver(disc, float(dt), N, cfg.bootstrap_mode, initial=initial)
    return disc, solver, reference


def run_git_fom_cmd(cfg: RunConfig, outdir: Path, resume: bool = False):
    _, solver, reference = _git_setup(cfg)
    state = iterate(
        solver,
        _initial_guess(cfg),
        cfg.iteration.stopping_rule(),
        checkpoint=outdir / "checkpoint",
        resume=resume,
        reference=reference,
    )
    write_csv(outdir / "iterations.csv", ITERATIONS_HEADER, iteration_rows(state.history))
    _echo(cfg, outdir, "git-fom", {"iterations": state.i, "final_increment": state.metric, "stopping_rule": "increment metric max_n ||xi^{n,i} - xi^{n,i-1}||_L2"})
    return state


def run_git_rom_cmd(cfg: RunConfig, outdir: Path, resume: bool = False):
    _, solver, reference = _git_setup(cfg)
    ro = cfg.rom
    lam = build_index_set(ro.index_set, solver.N)
    state = run_rom_iteration(
        solver,
        lam,
        ro.nr,
        cfg.iteration.stopping_rule(),
        initial_guess=_initial_guess(cfg),
        validate=ro.validate,
        enrich_initial=ro.enrich_initial,
        pod_method=ro.pod_method,
        checkpoint=outdir / "checkpoint",
        resume=resume,
        reference=reference,
    )
    write_csv(outdir / "iterations.csv", ITERATIONS_HEADER, iteration_rows(state.history))
    write_csv(outdir / "spectra.csv", SPECTRA_HEADER, spectra_rows(state.history))
    _echo(cfg, outdir, "git-rom", {"iterations": state.i, "final_increment": state.metric, "n_snapshots": len(lam)})
    return state


def stabilized(history, last: int = 3) -> float:
    vals = [r.S for r in history[-last:]]
    return float(np.mean(vals))


def compare_index_sets(cfg: RunConfig, outdir: Path, resume: bool = False) -> dict:
    """S_i per iteration for the full-order iteration and the ROM with each configured index set."""
    if not cfg.iteration.reference:
        raise ValueError("index-set comparison needs iteration.reference = true")
    _, solver, reference = _git_setup(cfg)
    stop = cfg.iteration.stopping_rule()
    init = _initial_guess(cfg)
    columns = {"fom": iterate(solver, init, stop, checkpoint=outdir / "checkpoint" / "fom", resume=resume, reference=reference).history}
    counts = {}
    for name in cfg.rom.index_sets:
        lam = build_index_set(name, solver.N)
        counts[name] = len(lam)
        st = run_rom_iteration(
            solver,
            lam,
            cfg.rom.nr,
            stop,
            initial_guess=init,
            enrich_initial=cfg.rom.enrich_initial,
            pod_method=cfg.rom.pod_method,
            checkpoint=outdir / "checkpoint" / name.replace(":", "_"),
            resume=resume,
            reference=reference,
        )
        columns[name] = st.history
    n_rows = max(len(h) for h in columns.values())
    header = ["i"] + [f"S_{k}" for k in columns]
    rows = []
    for i in range(n_rows):
        rows.append([i + 1] + [h[i].S if i < len(h) else None for h in columns.values()])
    write_csv(outdir / "compare.csv", header, rows)
    summary = [[name, counts[name], cfg.rom.nr, stabilized(columns[name])] for name in counts]
    summary.append(["fom", solver.N - 1, None, stabilized(columns["fom"])])
    write_csv(outdir / "index_sets.csv", INDEX_SETS_HEADER, summary)
    _echo(cfg, outdir, "compare-index-sets")
    return {k: v for k, v in columns.items()}


COMMANDS = {
    "monolithic": lambda cfg, out, resume: run_monolithic_cmd(cfg, out),
    "git-fom": run_git_fom_cmd,
    "git-rom": run_git_rom_cmd,
    "convergence-table": lambda cfg, out, resume: convergence_table(cfg, out),
    "compare-index-sets": compare_index_sets,
}
