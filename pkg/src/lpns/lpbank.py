"""Dyadic Littlewood-Paley filter bank on the periodic grid.

Shell q >= 0 carries the symbol phi(|k| / 2^q) with
phi(xi) = chi(xi / 2) - chi(xi); shell -1 carries chi(|k|).  The top shell
q_max collects everything above, 1 - chi(|k| / 2^q_max), so the shells sum
to one on every grid mode (including the |k| > 3n/4 corners of a
non-dealiased cube).  On dealiased fields this is the plain phi symbol.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _fft
from .spectral import (
    TWO_PI,
    VOLUME,
    FieldError,
    lp_of_magnitude,
    make_grid,
    oversampled_values,
    padded_half,
)


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def chi(xi):
    """Low-pass profile: 1 on [0, 3/4], 0 on [1, inf), C^2 quintic ramp between."""
    xi = np.asarray(xi, dtype=np.float64)
    return 1.0 - smoothstep((xi - 0.75) * 4.0)


def phi(xi):
    xi = np.asarray(xi, dtype=np.float64)
    return chi(xi / 2.0) - chi(xi)


def lam(q):
    """Dyadic wavenumber 2^q, with lambda_{-1} := 1."""
    return 1.0 if q == -1 else 2.0**q


def dyadic_symbol(q, xi):
    if q < -1:
        raise FieldError(f"shell index must be >= -1, got {q}")
    if np.any(np.asarray(xi) < 0):
        raise FieldError("frequency must be non-negative")
    if q == -1:
        return chi(xi)
    return phi(np.asarray(xi, dtype=np.float64) / 2.0**q)


def q_max_for(n):
    return math.ceil(math.log2(n / 2))


@dataclass(eq=False)
class DyadicFilterBank:
    """Multiplier tables for one grid; built eagerly, read-only afterwards."""

    grid: object
    oversample: int = 2
    q_max: int = field(init=False)

    def __post_init__(self):
        g = self.grid
        self.q_max = q_max_for(g.n)
        kabs = g.kabs
        # low[p] = symbol of u_{<=p}, p = -1 .. q_max
        self._low = {}
        for p in range(-1, self.q_max):
            self._low[p] = chi(kabs / 2.0 ** (p + 1))
        self._low[self.q_max] = np.ones_like(kabs)
        self._shell = {-1: self._low[-1]}
        for q in range(0, self.q_max + 1):
            self._shell[q] = self._low[q] - self._low[q - 1]
        for tab in list(self._low.values()) + list(self._shell.values()):
            tab.setflags(write=False)

    @property
    def shells(self):
        return range(-1, self.q_max + 1)

    def low_symbol(self, p):
        if p < -1:
            return np.zeros_like(self.grid.kabs)
        return self._low[min(p, self.q_max)]

    def high_symbol(self, p):
        """Symbol of u_{>=p} = 1 - low(p - 1)."""
        return 1.0 - self.low_symbol(p - 1)

    def shell_symbol(self, q):
        if not -1 <= q <= self.q_max:
            raise FieldError(f"shell index {q} outside [-1, {self.q_max}]")
        return self._shell[q]

    def oversampled_tables(self):
        """Wavevectors and shell symbols on the rfft half of the oversampled grid.

        Symbols depend on |k| only, so applying them after zero padding equals
        padding the filtered field (the split Nyquist pair shares one |k|).
        Built on first use and cached.
        """
        tabs = getattr(self, "_big", None)
        if tabs is None:
            big = make_grid(self.oversample * self.grid.n)
            kabs = np.sqrt(big.k2_half)
            low = {p: chi(kabs / 2.0 ** (p + 1)) for p in range(-1, self.q_max)}
            low[self.q_max] = np.ones_like(kabs)
            shell = {-1: low[-1]}
            for q in range(0, self.q_max + 1):
                shell[q] = low[q] - low[q - 1]
            tabs = self._big = (big.k_half, shell)
        return tabs

    def tilde_symbol(self, p, b):
        return self.low_symbol(p + b) - self.low_symbol(p - b - 1)


def shell_project(u, q, bank):
    return u.replace(u.coeffs * bank.shell_symbol(q))


def band_project(u, p, side, bank):
    if side == "low":
        sym = bank.low_symbol(p)
    elif side == "high":
        if p < 0:
            raise FieldError(f"band index must be >= 0, got {p}")
        sym = bank.high_symbol(p)
    else:
        raise FieldError(f"side must be 'low' or 'high', got {side!r}")
    return u.replace(u.coeffs * sym)


def tilde_project(u, p, b, bank):
    if not p >= b >= 1:
        raise FieldError(f"need p >= b >= 1, got p={p}, b={b}")
    return u.replace(u.coeffs * bank.tilde_symbol(p, b))


def _sup(coeffs, m):
    vals = oversampled_values(coeffs, m)
    return float(np.sqrt(np.sum(vals**2, axis=0)).max())


def _lp(coeffs, r, m, n):
    vals = oversampled_values(coeffs, m)
    mag = np.sqrt(np.sum(vals**2, axis=0))
    return lp_of_magnitude(mag, r, (TWO_PI / (m * n)) ** 3)


def besov_norm(u, s, bank, flavor=("inf", "inf")):
    """B^s_{inf,inf} norm: max_q lambda_q^s ||Delta_q u||_inf."""
    if tuple(str(f) for f in flavor) != ("inf", "inf"):
        raise FieldError("only the (inf, inf) Besov flavour is supported")
    if not -2.0 <= s <= 2.0:
        raise FieldError(f"Besov index must lie in [-2, 2], got {s}")
    best = 0.0
    for q in bank.shells:
        c = u.coeffs * bank.shell_symbol(q)
        if not np.any(c):
            continue
        best = max(best, lam(q) ** s * _sup(c, bank.oversample))
    return best


def bernstein_ratio(u, q, s_exp, r_exp, bank):
    """||u_q||_r / (lambda_q^{3(1/s - 1/r)} ||u_q||_s) for u_q = Delta_q u."""
    s_exp, r_exp = float(s_exp), float(r_exp)
    if not 1.0 <= s_exp <= r_exp:
        raise FieldError(f"need 1 <= s <= r, got s={s_exp}, r={r_exp}")
    c = u.coeffs * bank.shell_symbol(q)
    n = u.grid.n
    den = _lp(c, s_exp, bank.oversample, n)
    if den == 0.0:
        raise FieldError("shell component vanishes; Bernstein ratio undefined")
    if s_exp == r_exp:
        return 1.0
    num = _lp(c, r_exp, bank.oversample, n)
    return num / (lam(q) ** (3.0 * (1.0 / s_exp - 1.0 / r_exp)) * den)


@dataclass
class ShellSpectrum:
    """Per-shell and per-band scalars of one field at time t.

    Shell arrays are indexed by q + 1 (q = -1 .. q_max); band arrays by p
    (p = 0 .. q_max).  ``lp_low[m][p]`` is ||u_{<=p}||_m.
    """

    t: float
    q_max: int
    monitored_p: tuple
    e: np.ndarray
    d: np.ndarray
    m_shell: np.ndarray
    band_e: np.ndarray
    band_d: np.ndarray
    g: np.ndarray
    lp_low: dict
    energy: float
    enstrophy: float
    sup_u: float

    def shell(self, name, q):
        return getattr(self, name)[q + 1]


def _sumsq(a):
    """Pointwise sum of squares over the leading (component) axis."""
    return np.einsum("i...,i...->...", a, a)


def shell_statistics(u, monitored_p, m, bank, t=0.0):
    """Fill a ShellSpectrum for u.

    Band quantities come from Parseval; sup norms and L^m norms from the
    oversampled grid.  Physical shell fields are accumulated in ascending q
    so every u_{<=p} costs no extra transform.
    """
    g = u.grid
    qm = bank.q_max
    monitored_p = tuple(sorted(int(p) for p in monitored_p))
    for p in monitored_p:
        if not 0 <= p <= qm:
            raise FieldError(f"monitored band {p} outside [0, {qm}]")
    exps = tuple(float(x) for x in np.atleast_1d(m))
    c = u.coeffs
    a2 = np.sum(np.abs(c) ** 2, axis=0)
    k2 = g.k2
    e = np.empty(qm + 2)
    d = np.empty(qm + 2)
    for q in bank.shells:
        s2 = bank.shell_symbol(q) ** 2
        e[q + 1] = VOLUME * np.sum(s2 * a2)
        d[q + 1] = VOLUME * np.sum(s2 * k2 * a2)
    band_e = np.empty(qm + 1)
    band_d = np.empty(qm + 1)
    for p in range(qm + 1):
        h2 = bank.high_symbol(p) ** 2
        band_e[p] = VOLUME * np.sum(h2 * a2)
        band_d[p] = VOLUME * np.sum(h2 * k2 * a2)

    ov = bank.oversample
    nbig = ov * g.n
    w = (TWO_PI / nbig) ** 3
    kbig, shell_big = bank.oversampled_tables()
    padded = padded_half(c, ov)
    m_shell = np.zeros(qm + 2)
    gsup = np.zeros(qm + 1)
    lp_low = {x: np.zeros(qm + 1) for x in exps}
    vel_acc = np.zeros((3,) + (nbig,) * 3)
    grad_acc = np.zeros((9,) + (nbig,) * 3)
    stacked = np.empty((12,) + padded.shape[1:], dtype=np.complex128)
    for q in bank.shells:
        cq = np.multiply(padded, shell_big[q], out=stacked[:3])
        if np.any(cq):
            for i in range(3):
                np.multiply(kbig[i], cq, out=stacked[3 + 3 * i : 6 + 3 * i])
                stacked[3 + 3 * i : 6 + 3 * i] *= 1j
            vals = _fft.synth(stacked, nbig, copy=False)
            vel_acc += vals[:3]
            grad_acc += vals[3:]
            m_shell[q + 1] = math.sqrt(_sumsq(vals[:3]).max()) / lam(q)
        if q >= 0:
            gsup[q] = math.sqrt(_sumsq(grad_acc).max())
            mag = np.sqrt(_sumsq(vel_acc))
            for x in exps:
                lp_low[x][q] = lp_of_magnitude(mag, x, w)
    return ShellSpectrum(
        t=float(t),
        q_max=qm,
        monitored_p=monitored_p,
        e=e,
        d=d,
        m_shell=m_shell,
        band_e=band_e,
        band_d=band_d,
        g=gsup,
        lp_low=lp_low,
        energy=float(VOLUME * np.sum(a2)),
        enstrophy=float(VOLUME * np.sum(k2 * a2)),
        sup_u=math.sqrt(_sumsq(vel_acc).max()),
    )


__all__ = [
    "DyadicFilterBank",
    "ShellSpectrum",
    "band_project",
    "bernstein_ratio",
    "besov_norm",
    "chi",
    "dyadic_symbol",
    "lam",
    "phi",
    "q_max_for",
    "shell_project",
    "shell_statistics",
    "tilde_project",
]
