"""Time-ordered store of shell/flux samples and the dyadic-window monitors.

Windows are I_p(T) = [T - c 4^{-p}, T).  Integrals use the trapezoid rule
over the samples inside the window, with linear interpolation at the window
edges; a window holding fewer than ``MIN_SAMPLES`` samples, or reaching
before the first sample, is reported as under-resolved rather than
extrapolated.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .lpbank import lam

MIN_SAMPLES = 4
# band values below this fraction of the largest are treated as empty
# (FFT round-off leaves ~1e-36 in bands a field does not reach)
ROUNDOFF_FLOOR = 1e-28


class LedgerError(ValueError):
    pass


class WindowValue(NamedTuple):
    value: float
    resolved: bool
    n_samples: int

    def __float__(self):
        return float(self.value)


class IterationCheck(NamedTuple):
    lhs: float
    rhs: float
    ratio: float
    resolved: bool


class FluxWindowCheck(NamedTuple):
    lhs: float
    rhs: float
    ratio: float
    delta: float
    resolved: bool


class DecayFit(NamedTuple):
    alpha: float
    residual: float
    p_used: tuple
    defined: bool


def _ratio(lhs, rhs):
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def leray_band(dt_to_ref, q_max):
    """q(t) = floor(log2((T - t)^{-1/2})) clamped to [0, q_max]."""
    q = math.floor(-0.5 * math.log2(dt_to_ref))
    return min(max(q, 0), q_max)


def fit_decay(ps, values):
    """Least-squares slope of log2(values) against p, negated; returns (alpha, rms residual)."""
    x = np.asarray(ps, dtype=float)
    y = np.log2(np.asarray(values, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return -float(coef[0]), float(np.sqrt(np.mean(resid**2)))


@dataclass
class Sample:
    t: float
    spectrum: object
    flux: dict = field(default_factory=dict)


@dataclass
class WindowLedger:
    monitored_p: tuple
    q_max: int
    b: int = 2
    c_bkm: float = None
    m: tuple = (2.0,)
    samples: list = field(default_factory=list)

    def __post_init__(self):
        self.monitored_p = tuple(sorted(int(p) for p in self.monitored_p))
        if self.c_bkm is None:
            self.c_bkm = float(4**self.b)
        self.m = tuple(float(x) for x in np.atleast_1d(self.m))

    # -- recording -------------------------------------------------------
    def append(self, spectrum, flux=None):
        t = float(spectrum.t)
        if self.samples and not t > self.samples[-1].t:
            raise LedgerError(f"sample times must increase strictly: {t} after {self.samples[-1].t}")
        self.samples.append(Sample(t, spectrum, dict(flux or {})))

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        return np.array([s.t for s in self.samples])

    # -- series ----------------------------------------------------------
    def b1inf_instant(self, spectrum, p):
        """max_{|r - p| <= b + 1} lambda_r^{-1} ||Delta_r u||_inf at one sample."""
        lo = max(-1, p - self.b - 1)
        hi = min(spectrum.q_max, p + self.b + 1)
        if lo > hi:
            return 0.0
        return float(np.max(spectrum.m_shell[lo + 1 : hi + 2]))

    def series(self, name, p=None):
        """Values of a named per-sample series; names: energy, enstrophy,
        band_e, band_d, g, b1inf, flux (|Pi_{>=p}|), flux_signed."""
        out = np.empty(len(self.samples))
        for i, s in enumerate(self.samples):
            sp = s.spectrum
            if name in ("energy", "enstrophy"):
                out[i] = getattr(sp, name)
            elif name in ("band_e", "band_d", "g"):
                out[i] = getattr(sp, name)[p] if 0 <= p <= sp.q_max else 0.0
            elif name == "b1inf":
                out[i] = self.b1inf_instant(sp, p)
            elif name in ("flux", "flux_signed"):
                if p > sp.q_max:
                    out[i] = 0.0
                    continue
                if p not in s.flux:
                    raise LedgerError(f"no flux sample for p={p} at t={s.t}")
                v = s.flux[p].pi_high
                out[i] = abs(v) if name == "flux" else v
            else:
                raise LedgerError(f"unknown series {name!r}")
        return out

    # -- windows ---------------------------------------------------------
    def _window(self, p, T, c):
        if not self.samples:
            raise LedgerError("ledger is empty")
        times = self.times
        tol = 1e-12 * max(1.0, abs(T))
        if T > times[-1] + tol:
            raise LedgerError(f"window end {T} beyond last sample {times[-1]}")
        start = T - c * 4.0 ** (-p)
        inside = (times >= start - tol) & (times <= T + tol)
        n_in = int(np.count_nonzero(inside))
        resolved = n_in >= MIN_SAMPLES and start >= times[0] - tol
        return times, start, inside, n_in, resolved

    def window_sup(self, values, p, T, c=1.0):
        times, start, inside, n_in, resolved = self._window(p, T, c)
        if n_in == 0:
            return WindowValue(math.nan, False, 0)
        return WindowValue(float(np.max(values[inside])), resolved, n_in)

    def window_int(self, values, p, T, c=1.0):
        times, start, inside, n_in, resolved = self._window(p, T, c)
        if not resolved:
            return WindowValue(math.nan, False, n_in)
        lo = max(start, times[0])
        ts = times[inside]
        vs = values[inside]
        tol = 1e-12 * max(1.0, abs(T))
        if ts[0] > lo + tol:
            ts = np.concatenate([[lo], ts])
            vs = np.concatenate([[np.interp(lo, times, values)], vs])
        if ts[-1] < T - tol:
            ts = np.concatenate([ts, [T]])
            vs = np.concatenate([vs, [np.interp(T, times, values)]])
        val = float(np.sum(0.5 * (vs[1:] + vs[:-1]) * np.diff(ts)))
        return WindowValue(val, resolved, n_in)

    # -- windowed quantities ----------------------------------------------
    def window_E(self, p, T):
        return self.window_sup(self.series("band_e", p), p, T)

    def window_D(self, p, T):
        return self.window_int(self.series("band_d", p), p, T)

    def bkm_window(self, p, T):
        return self.window_int(self.series("g", p), p, T, c=self.c_bkm)

    def b1inf_window(self, p, T):
        return self.window_sup(self.series("b1inf", p), p, T)

    def flux_window(self, p, T, window_p=None):
        """int over I_{window_p} of |Pi_{>=p}| (window_p defaults to p - b)."""
        wp = p - self.b if window_p is None else window_p
        return self.window_int(self.series("flux", p), wp, T)

    def balance_residual(self, p, T, nu, window_p=None):
        """Windowed high-band energy budget over I_{window_p}(T) (default I_p).

        Returns |Delta ||u_{>=p}||^2 + 2 nu int D + 2 int Pi_{>=p}| divided by
        the sum of the magnitudes of the three terms, or nan if unresolved.
        """
        wp = p if window_p is None else window_p
        e = self.series("band_e", p)
        D = self.window_int(self.series("band_d", p), wp, T)
        F = self.window_int(self.series("flux_signed", p), wp, T)
        if not (D.resolved and F.resolved):
            return math.nan
        times = self.times
        start = T - 4.0 ** (-wp)
        de = float(np.interp(T, times, e) - np.interp(start, times, e))
        terms = (de, 2.0 * nu * D.value, 2.0 * F.value)
        scale = sum(abs(x) for x in terms)
        return abs(sum(terms)) / scale if scale > 0 else 0.0

    def dissipation_seq(self, T, ps=None):
        out = {}
        for p in ps if ps is not None else self.monitored_p:
            d = self.window_D(p, T)
            out[p] = WindowValue(lam(p) * d.value, d.resolved, d.n_samples)
        return out

    def leray_monitor(self, T_ref, m):
        """[(t, q(t), ||u_{<=q(t)}||_m (T_ref - t)^{(m-3)/(2m)})] for samples t < T_ref."""
        m = float(m)
        if not 2.0 <= m <= 3.0:
            raise LedgerError(f"Lebesgue exponent must lie in [2, 3], got {m}")
        out = []
        for s in self.samples:
            gap = T_ref - s.t
            if gap <= 0:
                continue
            sp = s.spectrum
            if m not in sp.lp_low:
                raise LedgerError(f"no L^{m} band norms recorded")
            q = leray_band(gap, sp.q_max)
            out.append((s.t, q, float(sp.lp_low[m][q] * gap ** ((m - 3.0) / (2.0 * m)))))
        return out

    def iteration_check(self, p, T, alpha=1.5):
        if p < self.b:
            raise LedgerError(f"iteration check needs p >= b ({p} < {self.b})")
        E = self.window_E(p, T)
        D = self.window_D(p, T)
        Db = self.window_D(p - self.b, T)
        F = self.flux_window(p, T)
        resolved = E.resolved and D.resolved and Db.resolved and F.resolved
        if not resolved:
            return IterationCheck(math.nan, math.nan, math.nan, False)
        lhs = max(E.value, D.value)
        rhs = lam(self.b) ** (-alpha) * Db.value + F.value
        return IterationCheck(lhs, rhs, _ratio(lhs, rhs), True)

    def flux_window_check(self, p, T, delta=0.0):
        wp = p - self.b
        F = self.flux_window(p, T)
        G = self.window_int(self.series("g", p), wp, T)
        if not (F.resolved and G.resolved) or wp < 0:
            return FluxWindowCheck(math.nan, math.nan, math.nan, math.nan, False)
        eff = max(2.0 * delta, G.value)
        total = 0.0
        for r in range(0, wp + 1):
            E = self.window_E(r, T)
            if not E.resolved:
                return FluxWindowCheck(math.nan, math.nan, math.nan, eff, False)
            total += E.value * 4.0 ** (-abs(r - wp))
        rhs = eff * total
        return FluxWindowCheck(F.value, rhs, _ratio(F.value, rhs), eff, True)

    def decay_fit(self, T, p_range=None):
        ps, vals = [], []
        for p in p_range if p_range is not None else self.monitored_p:
            E = self.window_E(p, T)
            D = self.window_D(p, T)
            if not (E.resolved and D.resolved):
                continue
            ps.append(p)
            vals.append(max(E.value, D.value))
        top = max(vals, default=0.0)
        keep = [i for i, v in enumerate(vals) if v > ROUNDOFF_FLOOR * top]
        ps = [ps[i] for i in keep]
        vals = [vals[i] for i in keep]
        if len(ps) < 3:
            return DecayFit(math.nan, math.nan, tuple(ps), False)
        alpha, resid = fit_decay(ps, vals)
        return DecayFit(alpha, resid, tuple(ps), True)

    def criterion_report(self, T=None, alpha=1.5, delta=0.0):
        T = self.samples[-1].t if T is None else T
        rows = []
        for p in self.monitored_p:
            E = self.window_E(p, T)
            D = self.window_D(p, T)
            bkm = self.bkm_window(p, T)
            b1 = self.b1inf_window(p, T)
            if p >= self.b and p >= 1:
                it = self.iteration_check(p, T, alpha)
                fw = self.flux_window_check(p, T, delta)
            else:
                it = IterationCheck(math.nan, math.nan, math.nan, False)
                fw = FluxWindowCheck(math.nan, math.nan, math.nan, math.nan, False)
            rows.append(
                CriterionRow(
                    p=p,
                    E=E.value if E.resolved else math.nan,
                    D=D.value if D.resolved else math.nan,
                    s=lam(p) * D.value if D.resolved else math.nan,
                    bkm=bkm.value if bkm.resolved else math.nan,
                    b1inf=b1.value if b1.resolved else math.nan,
                    flux_window_lhs=fw.lhs,
                    flux_window_rhs=fw.rhs,
                    iteration_lhs=it.lhs,
                    iteration_rhs=it.rhs,
                    resolved=E.resolved and D.resolved,
                )
            )
        fit = self.decay_fit(T)
        return CriterionReport(T, rows, fit.alpha, fit.residual, fit.p_used)


@dataclass
class CriterionRow:
    p: int
    E: float
    D: float
    s: float
    bkm: float
    b1inf: float
    flux_window_lhs: float
    flux_window_rhs: float
    iteration_lhs: float
    iteration_rhs: float
    resolved: bool


@dataclass
class CriterionReport:
    T: float
    rows: list
    alpha_fit: float
    alpha_residual: float
    alpha_p: tuple
