"""Energy flux through dyadic wavenumbers and the identities behind its bounds.

All trilinear integrals are evaluated spectrally: for a dealiased u the
grid product (u.grad)u is exact on the retained modes, so Parseval with the
(projected) test field reproduces the continuum integral.
"""
from dataclasses import dataclass

import numpy as np

from . import _fft
from .lpbank import chi, lam
from .spectral import (
    TWO_PI,
    VOLUME,
    FieldError,
    energy,
    enstrophy,
    grad_sup,
    make_grid,
    nonlinear_advection,
    norm_lp,
    oversampled_values,
)

EPS = 1e-300


def _pairing(nhat, coeffs, symbol):
    """(2 pi)^3 Re sum_k conj(N(k)) . symbol(k) u(k)."""
    return float(VOLUME * np.real(np.sum(np.conj(nhat) * (symbol * coeffs))))


def _advection(u, adv):
    return nonlinear_advection(u).coeffs if adv is None else adv


def flux_high(u, p, bank, adv=None):
    """Pi_{>=p} = int (u.grad)u . Delta_{>=p}(u_{>=p}) dx (high symbol squared)."""
    return _pairing(_advection(u, adv), u.coeffs, bank.high_symbol(p) ** 2)


def flux_low(u, p, bank, adv=None):
    """Pi_{<=p} with the squared low symbol."""
    return _pairing(_advection(u, adv), u.coeffs, bank.low_symbol(p) ** 2)


def flux_cross(u, p, bank, adv=None):
    """int (u.grad)u . Delta_{>=p}(u_{<=p-1}) dx."""
    return _pairing(_advection(u, adv), u.coeffs, bank.high_symbol(p) * bank.low_symbol(p - 1))


def total_cancellation(u, adv=None):
    """int (u.grad)u . u dx, zero for divergence-free u."""
    return _pairing(_advection(u, adv), u.coeffs, 1.0)


def trilinear_scale(u, oversample=2):
    """||u||_2 ||grad u||_2 ||u||_inf, the natural size of a flux."""
    return np.sqrt(energy(u) * enstrophy(u)) * norm_lp(u, np.inf, oversample)


def flux_identity_residual(u, p, bank, adv=None, scale=None):
    """|Pi_{>=p} + Pi_{<=p-1} + 2 cross| normalised by the trilinear scale."""
    adv = _advection(u, adv)
    total = flux_high(u, p, bank, adv) + flux_low(u, p - 1, bank, adv) + 2.0 * flux_cross(u, p, bank, adv)
    if scale is None:
        scale = trilinear_scale(u, bank.oversample)
    return abs(total) / (scale + EPS) if scale > 0 else abs(total)


@dataclass
class FluxSample:
    t: float
    p: int
    pi_high: float
    pi_low: float
    cross: float
    identity_residual: float
    bound_lhs: float
    bound_rhs: float
    ratio: float


def bound_rhs_value(shell_e, p, grad_low_sup):
    """[sum_{r<=p} lambda_{r-p}^2 ||u_r||^2 + sum_{r>p} ||u_r||^2] ||grad u_{<p}||_inf.

    ``shell_e`` is indexed by r + 1 for r = -1 .. q_max.
    """
    total = 0.0
    for idx, e in enumerate(shell_e):
        r = idx - 1
        total += e * 4.0 ** (r - p) if r <= p else e
    return total * grad_low_sup


def _ratio(lhs, rhs):
    if rhs > 0:
        return lhs / rhs
    if lhs == 0:
        return 0.0
    raise FieldError(f"flux bound violated categorically: |Pi|={lhs:g} with vanishing right-hand side")


def flux_bound_ratio(u, p, bank, t=0.0, adv=None, shell_e=None, grad_low_sup=None, scale=None):
    """FluxSample for band p; the implicit constant is recorded, not asserted."""
    adv = _advection(u, adv)
    hi = flux_high(u, p, bank, adv)
    lo = flux_low(u, p - 1, bank, adv)
    cr = flux_cross(u, p, bank, adv)
    if scale is None:
        scale = trilinear_scale(u, bank.oversample)
    resid = abs(hi + lo + 2.0 * cr)
    resid = resid / scale if scale > 0 else resid
    if shell_e is None:
        a2 = np.sum(np.abs(u.coeffs) ** 2, axis=0)
        shell_e = [VOLUME * np.sum(bank.shell_symbol(q) ** 2 * a2) for q in bank.shells]
    if grad_low_sup is None:
        grad_low_sup = grad_sup(u.coeffs * bank.low_symbol(p - 1), u.grid, bank.oversample)
    lhs = abs(hi)
    rhs = bound_rhs_value(shell_e, p, grad_low_sup)
    return FluxSample(t, p, hi, lo, cr, resid, lhs, rhs, _ratio(lhs, rhs))


def flux_samples(u, bank, spectrum, p_values=None):
    """FluxSamples for every p in p_values (default 1 .. q_max), sharing one advection."""
    adv = nonlinear_advection(u).coeffs
    scale = np.sqrt(spectrum.energy * spectrum.enstrophy) * spectrum.sup_u
    if p_values is None:
        p_values = range(1, bank.q_max + 1)
    out = {}
    for p in p_values:
        out[p] = flux_bound_ratio(
            u, p, bank, t=spectrum.t, adv=adv, shell_e=spectrum.e, grad_low_sup=spectrum.g[p - 1], scale=scale
        )
    return out


@dataclass
class CETRemainder:
    r: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    l1: float
    l1_low: float
    l1_high: float
    low_bound: float
    low_ratio: float


def _outer(a, b):
    return np.einsum("ixyz,jxyz->ijxyz", a, b)


def cet_remainder(u, p, bank):
    """Remainder r_p(u, u) = M(u (x) u) + u_{>p} (x) u_{>p} - u_{<=p} (x) u_{<=p}.

    M is the single low symbol chi(|k| / 2^{p+1}).  Products are formed on
    the oversampled grid, where they are alias-free for dealiased u.  Tensor
    fields are returned on that grid with shape (3, 3, N, N, N).
    """
    ov = max(bank.oversample, 2)
    big = ov * u.grid.n
    vel = oversampled_values(u.coeffs, ov)
    low = oversampled_values(u.coeffs * bank.low_symbol(p), ov)
    high = vel - low
    kb = np.sqrt(make_grid(big).k2_half)
    m_big = chi(kb / 2.0 ** (p + 1)) if p < bank.q_max else np.ones_like(kb)

    def mollify(t):
        return _fft.synth(_fft.analyze(t.reshape(9, big, big, big)) * m_big, big).reshape(t.shape)

    r = mollify(_outer(vel, vel)) + _outer(high, high) - _outer(low, low)
    r1 = mollify(r)
    r2 = r - r1
    w = (TWO_PI / big) ** 3

    def l1(t):
        return float(np.sum(np.sqrt(np.sum(t**2, axis=(0, 1)))) * w)

    a2 = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    bound = 0.0
    for q in range(-1, min(p, bank.q_max) + 1):
        bound += VOLUME * np.sum(bank.shell_symbol(q) ** 2 * a2) * 4.0 ** (-abs(p - q))
    l1_low = l1(r1)
    ratio = l1_low / bound if bound > 0 else 0.0
    return CETRemainder(r, r1, r2, l1(r), l1_low, l1(r2), float(bound), ratio)


@dataclass
class ShellBalance:
    residual: float
    transfer: float
    bound: float
    ratio: float


def shell_transfer(u, q, bank, adv=None, squared=True):
    """Nonlinear transfer into shell q: -2 (N, Delta_q^2 u), or -2 (N, Delta_q u)."""
    sym = bank.shell_symbol(q)
    return -2.0 * _pairing(_advection(u, adv), u.coeffs, sym**2 if squared else sym)


def _shell_energy(u, q, bank):
    a2 = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    sym2 = bank.shell_symbol(q) ** 2
    return VOLUME * np.sum(sym2 * a2), VOLUME * np.sum(sym2 * u.grid.k2 * a2)


def paraproduct_bound(u, q, bank):
    """Bracket on the right of the per-shell evolution inequality."""
    a2 = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    norms = {r: np.sqrt(VOLUME * np.sum(bank.shell_symbol(r) ** 2 * a2)) for r in bank.shells}
    uq = norms[q]
    low = sum(lam(r) ** 2.5 * norms[r] for r in bank.shells if r <= q)
    near = sum(norms[r] for r in bank.shells if abs(r - q) <= 2)
    high = sum(norms[r] ** 2 for r in bank.shells if r >= q - 2)
    return low * near * uq + lam(q) ** 2.5 * high * uq


def shell_balance_residual(state1, state2, q, nu, bank):
    """Time-differenced check of d/dt ||u_q||^2 + 2 nu ||grad u_q||^2 = T_q.

    Endpoint-averaged rates over one step, normalised by ||u(t1)||^2.  Also
    returns the measured |T_q| against the paraproduct bracket.
    """
    (t1, u1), (t2, u2) = state1, state2
    dt = t2 - t1
    e1, d1 = _shell_energy(u1, q, bank)
    e2, d2 = _shell_energy(u2, q, bank)
    tr1 = shell_transfer(u1, q, bank)
    tr2 = shell_transfer(u2, q, bank)
    total = energy(u1)
    resid = e2 - e1 + dt * nu * (d1 + d2) - 0.5 * dt * (tr1 + tr2)
    resid = abs(resid) / total if total > 0 else abs(resid)
    transfer = 0.5 * (abs(tr1) + abs(tr2))
    bound = 0.5 * (paraproduct_bound(u1, q, bank) + paraproduct_bound(u2, q, bank))
    ratio = transfer / bound if bound > 0 else 0.0
    return ShellBalance(float(resid), float(transfer), float(bound), float(ratio))
