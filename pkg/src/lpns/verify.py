"""Self-check suite behind the `verify` subcommand."""
import math
import tempfile
import time
from pathlib import Path

import numpy as np

from . import oracles
from .flux import cet_remainder, flux_identity_residual, total_cancellation, trilinear_scale
from .io import read_snapshot, write_snapshot
from .ledger import WindowLedger
from .lpbank import DyadicFilterBank, chi
from .scenarios import ic_random_spectrum, ic_taylor_green
from .solver import SolverState, Stepper
from .spectral import (
    VOLUME,
    PhysicalField,
    divergence_defect,
    leray_project,
    make_grid,
    nonlinear_advection,
    to_physical,
    to_spectral,
)


def _rel(a, b):
    den = np.abs(b).max()
    return float(np.abs(a - b).max() / den) if den > 0 else float(np.abs(a).max())


def check_partition(grid, fields):
    bank = DyadicFilterBank(grid)
    total = sum(bank.shell_symbol(q) for q in bank.shells)
    worst = float(np.abs(total - 1.0).max())
    for u in fields:
        recon = sum(u.coeffs * bank.shell_symbol(q) for q in bank.shells)
        worst = max(worst, _rel(recon, u.coeffs))
    return worst


def check_roundtrip(grid, fields):
    worst = 0.0
    for u in fields:
        v = to_physical(u)
        worst = max(worst, _rel(to_spectral(v).coeffs, u.coeffs))
        lhs = np.sum(v.values**2) * grid.weight
        rhs = VOLUME * np.sum(np.abs(u.coeffs) ** 2)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def check_dft_oracle(grid, fields):
    if grid.n > 8:
        return math.nan
    worst = 0.0
    for u in fields:
        worst = max(worst, _rel(to_physical(u).values, oracles.direct_synthesis(u.coeffs).real))
        v = to_physical(u).values
        worst = max(worst, _rel(to_spectral(PhysicalField(grid, v)).coeffs, oracles.direct_analysis(v)))
    return worst


def check_leray(grid, fields):
    worst = 0.0
    for u in fields:
        w = u.replace(u.coeffs + 1j * np.stack(np.broadcast_arrays(*grid.k)) * np.sum(u.coeffs, axis=0), divergence_free=False)
        pw = leray_project(w)
        worst = max(worst, divergence_defect(pw), _rel(leray_project(pw).coeffs, pw.coeffs))
    return worst


def check_advection(grid, fields):
    if grid.n > 8:
        return math.nan
    worst = 0.0
    for u in fields:
        worst = max(worst, _rel(nonlinear_advection(u).coeffs, oracles.convolution_advection(u.coeffs)))
    return worst


def check_flux_identity(grid, fields):
    bank = DyadicFilterBank(grid)
    worst = 0.0
    for u in fields:
        adv = nonlinear_advection(u).coeffs
        scale = trilinear_scale(u)
        for p in range(0, bank.q_max + 1):
            worst = max(worst, flux_identity_residual(u, p, bank, adv, scale))
        worst = max(worst, abs(total_cancellation(u, adv)) / scale)
    return worst


def check_cet(grid, fields):
    bank = DyadicFilterBank(grid)
    worst = 0.0
    for u in fields[:2]:
        for p in range(0, bank.q_max + 1):
            c = cet_remainder(u, p, bank)
            worst = max(worst, _rel(c.r1 + c.r2, c.r))
    return worst


def check_taylor_green(grid, steps=20, dt=1e-3):
    u = ic_taylor_green(grid)
    st = Stepper(SolverState(u, 0.0, 1.0))
    for _ in range(steps):
        st.advance(dt)
    ref = oracles.taylor_green_coeffs(grid.n, 1.0, math.exp(-2.0 * st.t))
    return _rel(st.state.u.coeffs, ref)


def check_snapshot(grid, fields):
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "s.lpns"
        st = SolverState(fields[0], 0.25, 1.0)
        write_snapshot(path, st)
        back = read_snapshot(path)
        same = np.array_equal(back.u.coeffs.view(np.uint8), fields[0].coeffs.view(np.uint8))
        return 0.0 if same and back.t == 0.25 else 1.0


class _FakeSpectrum:
    def __init__(self, t, v):
        self.t = t
        self.q_max = 3
        self.band_e = np.full(4, v)
        self.band_d = np.full(4, v)
        self.g = np.full(4, v)
        self.m_shell = np.full(5, v)


def check_window_quadrature():
    dt = 1.0 / 512
    ts = np.arange(0, 513) * dt
    led = WindowLedger((3,), 3)
    for t in ts:
        led.append(_FakeSpectrum(t, math.exp(-2 * t)))
    val = led.window_D(3, 1.0).value
    exact = (math.exp(-2 * (1 - 1 / 64)) - math.exp(-2)) / 2
    return abs(val - exact) / exact


def check_profile():
    xi = np.linspace(0, 2, 2001)
    c = chi(xi)
    ok = np.all(c[xi <= 0.75] == 1) and np.all(c[xi >= 1] == 0) and np.all(np.diff(c) <= 0)
    return 0.0 if ok else 1.0


SUITES = (
    ("profile chi monotone, 1 below 3/4, 0 above 1", 0.0, lambda g, f: check_profile()),
    ("partition of unity / shell reconstruction", 1e-13, check_partition),
    ("transform round trip and Parseval", 1e-13, check_roundtrip),
    ("fast transform vs direct DFT (n=8)", 1e-12, check_dft_oracle),
    ("Leray projection idempotent, solenoidal", 1e-12, check_leray),
    ("advection vs triad convolution (n=8)", 1e-10, check_advection),
    ("flux identity and total cancellation", 1e-9, check_flux_identity),
    ("CET split r1 + r2 = r", 1e-12, check_cet),
    ("Taylor-Green analytic decay", 1e-10, lambda g, f: check_taylor_green(g)),
    ("snapshot bit-exact round trip", 0.0, check_snapshot),
    ("window trapezoid vs closed form", 2e-6, lambda g, f: check_window_quadrature()),
)


def run_suite(n=8, seed=0, count=4, out=print):
    grid = make_grid(n)
    k_peak = min(2.0, n / 3 - 0.5)
    fields = [ic_random_spectrum(grid, seed + i, -5.0 / 3.0, k_peak) for i in range(count)]
    ok_all = True
    out(f"{'check':48s} {'value':>12s} {'tol':>9s}  result")
    for name, tol, fn in SUITES:
        t0 = time.perf_counter()
        val = fn(grid, fields)
        dt = time.perf_counter() - t0
        if isinstance(val, float) and math.isnan(val):
            out(f"{name:48s} {'-':>12s} {tol:9.1e}  skip ({dt:.2f}s)")
            continue
        ok = val <= tol
        ok_all &= ok
        out(f"{name:48s} {val:12.3e} {tol:9.1e}  {'PASS' if ok else 'FAIL'} ({dt:.2f}s)")
    return ok_all
