"""Run orchestration: initial data, stepping, CSV rows, snapshots and checkpoints."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dynamics import IMEXStepper, SimState, StepInfo, energy, steady_residual
from .fields import Deformation, Discretization, InitReport, PhaseField, init_deformation, init_phase
from .io import Checkpoint, CheckpointError, DiagnosticsWriter, load_checkpoint, save_checkpoint, write_snapshot

NAN = float("nan")


def initial_state(cfg: RunConfig, disc: Discretization | None = None) -> tuple[SimState, InitReport]:
    disc = disc or Discretization(cfg.lmax, cfg.params.R)
    ini = cfg.init
    phi, rep = init_phase(cfg.params, disc, ini.amplitude, ini.l_init, ini.seed, ini.margin)
    u = init_deformation(disc, ini.u_amplitude, ini.l_init, ini.seed)
    return SimState(0.0, phi, u, 0), rep


def diagnostics_row(state: SimState, cfg: RunConfig, E_prev: float | None = None,
                    info: StepInfo | None = None) -> dict:
    """One CSV row; step-derived columns are nan when no step is available."""
    p = cfg.params
    phi, u = state.phi, state.u
    parts = energy(phi, u, p)
    vals = phi.values.reshape(phi.n, -1)
    dmin, dmax = float(vals.min()), float(vals.max())
    row = {"t": state.t, "E_total": parts.total, "E_H": parts.E_H, "E_CH": parts.E_CH,
           "sum_violation": phi.sum_violation(), "min_phi": dmin, "max_phi": dmax,
           "sep_delta": min(dmin, (1.0 - dmax) / (phi.n - 1)),
           "u_l01_leak": float(np.abs(u.coeffs[:4]).max()),
           "steady_residual": steady_residual(phi, u, p)}
    for i, m in enumerate(phi.means):
        row[f"mass_{i + 1}"] = float(m)
    c0 = phi.disc.basis.radius * math.sqrt(4 * math.pi)
    for i in range(phi.n):
        row[f"mean_w_{i + 1}"] = NAN if info is None else float(info.w[i, 0] / c0)
    if info is None or E_prev is None:
        row.update(diss_phi=NAN, diss_u=NAN, energy_residual=NAN)
    else:
        row.update(diss_phi=info.diss_phi, diss_u=info.diss_u,
                   energy_residual=parts.total - E_prev + p.dt * (info.diss_phi + info.diss_u))
    return row


@dataclass
class RunResult:
    state: SimState
    outdir: Path
    breakdowns: int
    init: InitReport | None


def _snapshot(outdir: Path, state: SimState, lmax: int) -> None:
    g = state.phi.disc.grid
    write_snapshot(outdir / f"snapshot_{state.step:08d}.txt", state.t, lmax, g.theta, g.phi,
                   state.u.values, state.phi.values)


def run(cfg: RunConfig, outdir=None, resume=None, log=print) -> RunResult:
    """
    Integrate to ``t_final`` writing ``diagnostics.csv``, snapshots and
    ``checkpoint_<step>.mcps`` files into ``outdir``.

    ``resume`` names a checkpoint written with the same configuration; rows of
    an existing CSV beyond the checkpoint time are discarded so the file
    continues exactly as an uninterrupted run would.
    """
    out = Path(outdir or cfg.output.outdir)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.params
    disc = Discretization(cfg.lmax, p.R)
    digest = cfg.digest()
    init_rep = None
    if resume is not None:
        ck, lmax = load_checkpoint(resume)
        if ck.digest != digest:
            raise CheckpointError(f"{resume}: written with a different configuration")
        if lmax != cfg.lmax or ck.n != p.n:
            raise CheckpointError(f"{resume}: size (N={ck.n}, lmax={lmax}) does not match the config")
        state = SimState(ck.t, PhaseField(ck.phi, disc), Deformation(ck.u, disc), ck.step)
        writer = DiagnosticsWriter(out / "diagnostics.csv", p.n, resume_t=ck.t)
        log(f"resumed from {resume} at step {ck.step} (t = {ck.t:.6g})")
    else:
        state, init_rep = initial_state(cfg, disc)
        if init_rep.factor < 1:
            log(f"initial amplitude reduced from {init_rep.requested:g} to {init_rep.applied:g}")
        writer = DiagnosticsWriter(out / "diagnostics.csv", p.n)
        writer.append(diagnostics_row(state, cfg))
        if cfg.output.snapshot_every > 0:
            _snapshot(out, state, cfg.lmax)

    stepper = IMEXStepper(p, disc)
    o = cfg.output
    nsteps = cfg.nsteps
    breakdowns = 0
    while state.step < nsteps:
        nxt = state.step + 1
        record = (o.diagnostics_every > 0 and nxt % o.diagnostics_every == 0) or nxt == nsteps
        # the energy residual needs the energy just before the recorded step
        E_prev = energy(state.phi, state.u, p).total if record else None
        state, info = stepper(state)
        breakdowns += int(info.breakdown)
        if record:
            writer.append(diagnostics_row(state, cfg, E_prev, info))
        if o.snapshot_every > 0 and state.step % o.snapshot_every == 0:
            _snapshot(out, state, cfg.lmax)
        if (o.checkpoint_every > 0 and state.step % o.checkpoint_every == 0) or state.step == nsteps:
            save_checkpoint(out / f"checkpoint_{state.step}.mcps",
                            Checkpoint(state.phi.coeffs, state.u.coeffs, state.t, state.step, digest),
                            cfg.lmax)
    if breakdowns:
        log(f"warning: {breakdowns} steps left the open simplex on the grid")
    log(f"finished at step {state.step} (t = {state.t:.6g}); output in {out}")
    return RunResult(state, out, breakdowns, init_rep)
