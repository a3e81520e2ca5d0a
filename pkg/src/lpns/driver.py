"""Run loop (solver + sampling + snapshots) and offline re-analysis of snapshots."""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .flux import flux_samples
from .io import list_snapshots, read_snapshot, snapshot_name, write_snapshot
from .ledger import WindowLedger
from .lpbank import DyadicFilterBank, q_max_for, shell_statistics
from .scenarios import ic_random_spectrum, ic_taylor_green
from .solver import NumericalError, SolverState, Stepper, cfl_dt
from .spectral import dealias, leray_project, make_grid

log = logging.getLogger(__name__)


class RunAborted(NumericalError):
    """Time stepping hit non-finite values; carries the partial ledger."""

    def __init__(self, message, last_good, ledger, snapshot):
        super().__init__(message, last_good)
        self.ledger = ledger
        self.snapshot = snapshot


@dataclass
class RunResult:
    state: SolverState
    ledger: WindowLedger
    snapshots: list = field(default_factory=list)


def initial_field(cfg, grid):
    if cfg.ic == "taylor-green":
        u = ic_taylor_green(grid, cfg.amplitude)
    else:
        # normalised to ||u||_2 = 1, then scaled by the amplitude
        u = ic_random_spectrum(grid, cfg.seed, cfg.slope, cfg.k_peak).scale(cfg.amplitude)
    u = dealias(leray_project(u))
    c = u.coeffs.copy()
    c[:, 0, 0, 0] = 0.0
    return u.replace(c)


def flux_bands(monitored_p, q_max):
    return tuple(p for p in monitored_p if 1 <= p <= q_max)


def record(ledger, bank, u, t):
    """Shell statistics plus flux samples of u appended to the ledger."""
    sp = shell_statistics(u, ledger.monitored_p, ledger.m, bank, t)
    fl = flux_samples(u, bank, sp, flux_bands(ledger.monitored_p, bank.q_max))
    ledger.append(sp, fl)
    return sp


def new_ledger(cfg):
    return WindowLedger(cfg.monitored_p, q_max_for(cfg.n), cfg.b, cfg.c_bkm_value, cfg.m)


def run(cfg, snapshots=True, progress=None):
    """Integrate to cfg.t_end, sampling every cfg.sample_stride steps and at the end."""
    grid = make_grid(cfg.n)
    bank = DyadicFilterBank(grid)
    state = SolverState(initial_field(cfg, grid), 0.0, cfg.nu, 0)
    ledger = new_ledger(cfg)
    snap_dir = Path(cfg.out_dir) / "snapshots"
    written = []
    if snapshots:
        snap_dir.mkdir(parents=True, exist_ok=True)

    next_sample = [0]

    def emit(st, final=False):
        k = st.step_count
        if k >= next_sample[0] or final:
            record(ledger, bank, st.u, st.t)
            next_sample[0] = k + cfg.sample_stride(st.t)
            if snapshots and cfg.snapshot_every <= 0:
                written.append(write_snapshot(snap_dir / snapshot_name(k), st))
        if snapshots and cfg.snapshot_every > 0 and (k % cfg.snapshot_every == 0 or final):
            written.append(write_snapshot(snap_dir / snapshot_name(k), st))

    emit(state, final=cfg.t_end <= 0)
    stepper = Stepper(state)
    fixed = cfg.cfl <= 0
    n_fixed = max(0, math.ceil(cfg.t_end / cfg.dt - 1e-9)) if fixed else None
    while True:
        if fixed:
            if stepper.step_count >= n_fixed:
                break
            k = stepper.step_count + 1
            t_next = min(k * cfg.dt, cfg.t_end)
            dt = t_next - stepper.t
        else:
            remaining = cfg.t_end - stepper.t
            if remaining <= 1e-12 * max(1.0, cfg.t_end):
                break
            dt = min(cfl_dt(stepper.state, cfg.cfl, cfg.dt), remaining)
            t_next = stepper.t + dt
        try:
            stepper.advance(dt)
        except NumericalError as exc:
            snap = None
            if snapshots:
                good = exc.last_good
                snap = write_snapshot(snap_dir / snapshot_name(good.step_count), good)
            raise RunAborted(str(exc), exc.last_good, ledger, snap) from exc
        stepper.t = t_next
        last = (stepper.step_count >= n_fixed) if fixed else (cfg.t_end - stepper.t <= 1e-12 * max(1.0, cfg.t_end))
        k = stepper.step_count
        if last or k >= next_sample[0] or (snapshots and cfg.snapshot_every > 0 and k % cfg.snapshot_every == 0):
            emit(stepper.state, final=last)
        if progress is not None:
            progress(stepper.step_count, stepper.t)
    return RunResult(stepper.state, ledger, written)


def analyze_snapshots(paths, monitored_p, b=2, c_bkm=None, m=(2.0,)):
    """Rebuild a ledger from snapshot files (ordered by time)."""
    states = [read_snapshot(p) for p in paths]
    states.sort(key=lambda s: s.t)
    if not states:
        raise FileNotFoundError("no snapshots to analyse")
    n = states[0].u.grid.n
    bank = DyadicFilterBank(states[0].u.grid)
    ledger = WindowLedger(monitored_p, q_max_for(n), b, c_bkm, m)
    for st in states:
        if st.u.grid.n != n:
            raise ValueError(f"mixed grid sizes among snapshots ({n} and {st.u.grid.n})")
        record(ledger, bank, st.u, st.t)
    return ledger


def analyze_directory(directory, monitored_p, b=2, c_bkm=None, m=(2.0,)):
    return analyze_snapshots(list_snapshots(directory), monitored_p, b, c_bkm, m)
