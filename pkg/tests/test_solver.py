import math

import numpy as np
import pytest

from conftest import random_solenoidal
from lpns import oracles
from lpns.scenarios import ic_taylor_green
from lpns.solver import (
    NumericalError,
    SolverState,
    Stepper,
    cfl_dt,
    energy_balance_residual,
    nonlinear_transfer,
    step,
)
from lpns.spectral import divergence_defect, energy, make_grid, nonlinear_advection


def integrate(u, nu, dt, steps):
    st = Stepper(SolverState(u, 0.0, nu))
    for _ in range(steps):
        st.advance(dt)
    return st.state


def test_taylor_green_decay(grid16):
    s = integrate(ic_taylor_green(grid16), 1.0, 1e-3, 100)
    ref = oracles.taylor_green_coeffs(16, 1.0, math.exp(-2 * s.t))
    assert np.abs(s.u.coeffs - ref).max() / np.abs(ref).max() < 1e-10
    assert s.step_count == 100 and s.t == pytest.approx(0.1)


def test_single_step_matches_stepper(grid8):
    u = random_solenoidal(grid8, 3).scale(5.0)
    a = step(SolverState(u, 0.0, 0.5), 1e-3)
    b = integrate(u, 0.5, 1e-3, 1)
    assert np.array_equal(a.u.coeffs, b.u.coeffs)
    assert a.t == 1e-3 and a.step_count == 1


def test_fourth_order_convergence(grid16):
    u = random_solenoidal(grid16, 5).scale(40.0)
    T = 0.05
    ref = integrate(u, 0.1, T / 400, 400).u.coeffs
    errs = []
    for steps in (10, 20):
        errs.append(np.abs(integrate(u, 0.1, T / steps, steps).u.coeffs - ref).max())
    order = math.log2(errs[0] / errs[1])
    assert 3.6 < order < 4.4


def test_conservative_form_matches_advective(grid16):
    # solver rhs (divergence of products) equals the advective diagnostic
    from lpns.solver import _Kernel

    u = random_solenoidal(grid16, 2)
    k = _Kernel(grid16, 1.0)
    cons = k._divergence_of_products(u.half)
    adv = nonlinear_advection(u).half * grid16.dealias_mask_half
    assert np.abs(cons - adv).max() < 1e-13 * np.abs(adv).max()


def test_invariants_preserved(grid16):
    u = random_solenoidal(grid16, 9).scale(30.0)
    s = integrate(u, 1.0, 1e-3, 20)
    assert divergence_defect(s.u) < 1e-12
    assert np.abs(s.u.coeffs[:, 0, 0, 0]).max() < 1e-15
    assert np.all(s.u.coeffs[:, ~grid16.dealias_mask] == 0)
    assert energy(s.u) < energy(u)


def test_nonlinear_transfer_vanishes(grid16):
    u = random_solenoidal(grid16, 11)
    assert abs(nonlinear_transfer(u)) < 1e-12 * energy(u) * np.sqrt(energy(u))


def test_energy_balance_residual_shrinks(grid16):
    u = random_solenoidal(grid16, 6).scale(20.0)
    res = []
    for dt in (4e-3, 2e-3):
        s0 = SolverState(u, 0.0, 1.0)
        res.append(energy_balance_residual(s0, step(s0, dt)))
    assert res[1] < res[0] / 6


def test_cfl_dt(grid16):
    u = ic_taylor_green(grid16)
    s = SolverState(u, 0.0, 1.0)
    # |u|_inf = 1, h = 2 pi / 16
    assert cfl_dt(s, 0.5, 1.0) == pytest.approx(0.5 * 2 * math.pi / 16, rel=1e-12)
    assert cfl_dt(s, 0.5, 1e-3) == 1e-3
    with pytest.raises(ValueError):
        cfl_dt(s, 0.7)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blowup_reported_with_last_good_state(grid8):
    u = random_solenoidal(grid8, 1).scale(1e200)
    st = Stepper(SolverState(u, 0.0, 1e-3))
    with pytest.raises(NumericalError) as info:
        for _ in range(10):
            st.advance(1.0)
    good = info.value.last_good
    assert good is not None and np.all(np.isfinite(good.u.coeffs))
