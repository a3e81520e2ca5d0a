import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_cube, random_solenoidal
from lpns import oracles
from lpns.flux import (
    bound_rhs_value,
    cet_remainder,
    flux_bound_ratio,
    flux_cross,
    flux_high,
    flux_identity_residual,
    flux_low,
    flux_samples,
    shell_balance_residual,
    total_cancellation,
    trilinear_scale,
)
from lpns.lpbank import DyadicFilterBank, chi, shell_statistics
from lpns.scenarios import ic_taylor_green
from lpns.solver import SolverState, step
from lpns.spectral import FieldError, dealias, make_grid


@given(st.integers(0, 2**31 - 1), st.sampled_from([8, 16]))
def test_flux_identity(seed, n):
    g = make_grid(n)
    bank = DyadicFilterBank(g)
    u = random_solenoidal(g, seed).scale(7.0)
    scale = trilinear_scale(u)
    assert abs(total_cancellation(u)) / scale < 1e-12
    for p in range(0, bank.q_max + 1):
        assert flux_identity_residual(u, p, bank) < 1e-12


def test_flux_matches_convolution_oracle(grid8):
    bank = DyadicFilterBank(grid8)
    u = random_solenoidal(grid8, 3)
    nhat = oracles.convolution_advection(u.coeffs)
    for p in range(1, bank.q_max + 1):
        direct = oracles.pairing(nhat, u.coeffs, bank.high_symbol(p) ** 2)
        assert flux_high(u, p, bank) == pytest.approx(direct, rel=1e-10, abs=1e-14)
        low = oracles.pairing(nhat, u.coeffs, bank.low_symbol(p - 1) ** 2)
        assert flux_low(u, p - 1, bank) == pytest.approx(low, rel=1e-10, abs=1e-14)


def test_non_solenoidal_field_breaks_cancellation(grid8):
    bank = DyadicFilterBank(grid8)
    u = dealias(random_cube(grid8, np.random.default_rng(2)))
    assert abs(total_cancellation(u)) / trilinear_scale(u) > 1e-6
    assert max(flux_identity_residual(u, p, bank) for p in range(bank.q_max + 1)) > 1e-6


def test_taylor_green_has_no_flux(grid16):
    bank = DyadicFilterBank(grid16)
    u = ic_taylor_green(grid16)
    for p in range(1, bank.q_max + 1):
        assert abs(flux_high(u, p, bank)) < 1e-13
        assert abs(flux_cross(u, p, bank)) < 1e-13


def test_bound_rhs_value_example():
    # shells -1, 0, 1, 2 with energies 1, 2, 3, 4 at p = 1
    rhs = bound_rhs_value([1.0, 2.0, 3.0, 4.0], 1, 2.0)
    assert rhs == pytest.approx((1 / 16 + 2 / 4 + 3 + 4) * 2.0)


def test_flux_samples_consistent(grid16):
    bank = DyadicFilterBank(grid16)
    u = random_solenoidal(grid16, 8).scale(10.0)
    sp = shell_statistics(u, (0, 1, 2, 3), 2.0, bank, t=0.1)
    fs = flux_samples(u, bank, sp)
    assert sorted(fs) == [1, 2, 3]
    for p, s in fs.items():
        direct = flux_bound_ratio(u, p, bank, t=0.1)
        assert s.pi_high == pytest.approx(direct.pi_high, rel=1e-12, abs=1e-14)
        assert s.ratio == pytest.approx(direct.ratio, rel=1e-10)
        assert s.identity_residual < 1e-12
        assert s.bound_lhs == abs(s.pi_high)


def test_flux_bound_vanishing_rhs_is_categorical(grid8):
    bank = DyadicFilterBank(grid8)
    u = random_solenoidal(grid8, 1)
    with pytest.raises(FieldError):
        flux_bound_ratio(u, 1, bank, shell_e=np.zeros(bank.q_max + 2), grad_low_sup=0.0)


def _cet_oracle(u, p, bank):
    n = u.grid.n
    m = 2 * n
    low = u.coeffs * bank.low_symbol(p)
    high = u.coeffs - low
    full = oracles.direct_product_coeffs(u.coeffs, u.coeffs)
    mol = {k: chi(np.linalg.norm(k) / 2.0 ** (p + 1)) * T for k, T in full.items()}
    hh = oracles.direct_product_coeffs(high, high)
    ll = {k: -T for k, T in oracles.direct_product_coeffs(low, low).items()}
    return sum(oracles.synthesize_sparse(t, m) for t in (mol, hh, ll))


def test_cet_remainder_matches_direct_products(grid8):
    bank = DyadicFilterBank(grid8)
    u = random_solenoidal(grid8, 4)
    for p in (0, 1):
        c = cet_remainder(u, p, bank)
        ref = _cet_oracle(u, p, bank)
        assert np.abs(c.r - ref).max() < 1e-12 * np.abs(ref).max()
        assert np.abs(c.r1 + c.r2 - c.r).max() < 1e-14 * np.abs(c.r).max()
        assert c.l1_low <= c.l1 + c.l1_high
        assert c.low_ratio >= 0


def test_shell_balance(grid16):
    bank = DyadicFilterBank(grid16)
    u = random_solenoidal(grid16, 5).scale(20.0)
    res = []
    for dt in (2e-3, 1e-3):
        s0 = SolverState(u, 0.0, 1.0)
        s1 = step(s0, dt)
        res.append(shell_balance_residual((0.0, s0.u), (dt, s1.u), 1, 1.0, bank))
    assert res[1].residual < res[0].residual / 6
    assert res[1].residual < 1e-6
    assert all(r.ratio < 1 for r in res)
