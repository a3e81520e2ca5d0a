"""Integrating-factor RK4 for du/dt + P[(u.grad)u] = nu Lap u on the torus."""
import logging
from dataclasses import dataclass

import numpy as np

from . import _fft
from .spectral import (
    _PAIRS,
    SpectralField,
    _conservative_half,
    energy,
    enstrophy,
    expand_half,
    inner,
    leray_coeffs,
    nonlinear_advection,
    norm_lp,
)

log = logging.getLogger(__name__)

CFL_EPS = 1e-8


class NumericalError(RuntimeError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


@dataclass(frozen=True)
class SolverState:
    u: SpectralField
    t: float
    nu: float
    step_count: int = 0


class _Kernel:
    """Half-spectrum workspace for the time stepper.

    The nonlinear term is evaluated as div(u (x) u) with preallocated
    buffers: 3 inverse and 6 forward transforms per stage instead of the
    12 + 3 the advective form needs.  On dealiased divergence-free fields
    the two agree to rounding (see tests/test_solver.py).
    """

    def __init__(self, grid, nu):
        self.grid = grid
        self.nu = nu
        n = grid.n
        self.k = grid.k_half
        self.k2 = grid.k2_half
        self.k2_safe = np.where(self.k2 == 0, 1.0, self.k2)
        self.mask = grid.dealias_mask_half
        shape = (n, n, grid.nhalf)
        scale = self.mask / float(n) ** 3
        self.ik_masked = [np.broadcast_to(kj * scale, shape).astype(np.complex128) for kj in grid.ik_half]
        self.tmp = np.empty(shape, dtype=np.complex128)
        self._factors = {}
        self._fast = _fft.pyfftw is not None

    def factors(self, dt):
        f = self._factors.get(dt)
        if f is None:
            if len(self._factors) > 8:
                self._factors.clear()
            f = self._factors[dt] = (
                np.exp(-self.nu * self.k2 * dt),
                np.exp(-0.5 * self.nu * self.k2 * dt),
            )
        return f

    def _divergence_of_products(self, half):
        n = self.grid.n
        if not self._fast:
            return _conservative_half(half, self.grid)
        c2r = _fft._plan("c2r", half.shape, (n, n, n))
        c2r.input_array[...] = half
        vel = c2r(normalise_idft=False)
        r2c = _fft._plan("r2c", (6, n, n, n))
        pin = r2c.input_array
        for a, (i, j) in enumerate(_PAIRS):
            np.multiply(vel[i], vel[j], out=pin[a])
        t = r2c()
        out = np.empty(half.shape, dtype=np.complex128)
        ax, ay, az = self.ik_masked
        tmp = self.tmp
        for row, (x, y, z) in enumerate(((0, 3, 4), (3, 1, 5), (4, 5, 2))):
            o = out[row]
            np.multiply(ax, t[x], out=o)
            np.multiply(ay, t[y], out=tmp)
            o += tmp
            np.multiply(az, t[z], out=tmp)
            o += tmp
        return out

    def _leray_inplace(self, c):
        kx, ky, kz = self.k
        ratio = kx * c[0]
        ratio += ky * c[1]
        ratio += kz * c[2]
        ratio /= self.k2_safe
        tmp = self.tmp
        for i, ki in enumerate(self.k):
            np.multiply(ki, ratio, out=tmp)
            c[i] -= tmp
        return c

    def rhs(self, half):
        adv = self._divergence_of_products(half)
        self._leray_inplace(adv)
        adv *= -1.0
        return adv

    def project(self, half):
        return self._leray_inplace(np.array(half)) * self.mask

    def step(self, half, dt):
        decay, decay_half = self.factors(dt)
        k1 = self.rhs(half)
        k2 = self.rhs(decay_half * (half + 0.5 * dt * k1))
        k3 = self.rhs(decay_half * half + 0.5 * dt * k2)
        k4 = self.rhs(decay * half + dt * decay_half * k3)
        k2 += k3
        k2 *= 2.0 * decay_half
        k1 *= decay
        k1 += k2
        k1 += k4
        k1 *= dt / 6.0
        new = decay * half
        new += k1
        new = self.project(new)
        new[:, 0, 0, 0] = 0.0
        return new


def _field_from_half(grid, half):
    return SpectralField(grid, expand_half(half, grid.n), divergence_free=True, dealiased=True)


def _check_finite(half, state):
    if not np.all(np.isfinite(half)):
        raise NumericalError(
            f"non-finite coefficients after step {state.step_count + 1} (t={state.t:.6g})",
            last_good=state,
        )


def step(state, dt):
    kernel = _Kernel(state.u.grid, state.nu)
    half = kernel.step(state.u.half, dt)
    _check_finite(half, state)
    return SolverState(_field_from_half(state.u.grid, half), state.t + dt, state.nu, state.step_count + 1)


def cfl_dt(state, cfl=0.5, dt_max=1e-2, oversample=2):
    if not 0 < cfl <= 0.5:
        raise ValueError(f"CFL target must lie in (0, 0.5], got {cfl}")
    umax = norm_lp(state.u, np.inf, oversample)
    return min(cfl * state.u.grid.h / max(umax, CFL_EPS), dt_max)


def nonlinear_transfer(u):
    """-2 (N(u), u): rate of change of ||u||^2 due to advection (ideally 0)."""
    return -2.0 * inner(nonlinear_advection(u), u)


def energy_balance_residual(before, after):
    dt = after.t - before.t
    e0, e1 = energy(before.u), energy(after.u)
    if e0 == 0.0:
        return 0.0
    nu = before.nu
    diss = 2.0 * nu * dt * 0.5 * (enstrophy(before.u) + enstrophy(after.u))
    transfer = dt * 0.5 * (nonlinear_transfer(before.u) + nonlinear_transfer(after.u))
    return abs(e1 - e0 + diss - transfer) / e0


class Stepper:
    """Advances a state in place-free fashion while reusing one kernel."""

    def __init__(self, state):
        self.grid = state.u.grid
        self.kernel = _Kernel(self.grid, state.nu)
        self.half = np.array(state.u.half)
        self.t = state.t
        self.nu = state.nu
        self.step_count = state.step_count
        self._field = state.u

    @property
    def state(self):
        if self._field is None:
            self._field = _field_from_half(self.grid, self.half)
        return SolverState(self._field, self.t, self.nu, self.step_count)

    def advance(self, dt):
        new = self.kernel.step(self.half, dt)
        if not np.all(np.isfinite(new)):
            raise NumericalError(
                f"non-finite coefficients after step {self.step_count + 1} (t={self.t:.6g})",
                last_good=self.state,
            )
        self.half = new
        self.t += dt
        self.step_count += 1
        self._field = None


__all__ = [
    "NumericalError",
    "SolverState",
    "Stepper",
    "cfl_dt",
    "energy_balance_residual",
    "nonlinear_transfer",
    "step",
]
