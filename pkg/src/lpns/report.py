"""CSV reports (time series and per-band criteria) plus the run_meta echo."""
import csv
import math
import platform
from pathlib import Path

import numpy as np

from . import _fft
from .io import write_key_values

BASE_COLUMNS = ("t", "energy", "enstrophy", "leray_q", "leray_m")
BAND_COLUMNS = ("band_e", "band_d", "g", "b1inf", "lp_low")
CRITERIA_COLUMNS = (
    "p",
    "E_p",
    "D_p",
    "s_p",
    "bkm_p",
    "b1inf_p",
    "flux_window_lhs",
    "flux_window_rhs",
    "iteration_lhs",
    "iteration_rhs",
    "flux_bound_ratio_max",
    "resolved",
)


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def time_series_columns(monitored_p):
    cols = list(BASE_COLUMNS)
    for p in monitored_p:
        cols += [f"{c}_{p}" for c in BAND_COLUMNS]
    return cols


def time_series_rows(ledger, t_ref=None):
    if not ledger.samples:
        return []
    t_ref = ledger.samples[-1].t if t_ref is None else t_ref
    m0 = ledger.m[0]
    leray = {t: (q, v) for t, q, v in ledger.leray_monitor(t_ref, m0)}
    series = {}
    for p in ledger.monitored_p:
        for name in ("band_e", "band_d", "g", "b1inf"):
            series[name, p] = ledger.series(name, p)
    rows = []
    for i, s in enumerate(ledger.samples):
        sp = s.spectrum
        q, v = leray.get(s.t, (math.nan, math.nan))
        row = [s.t, sp.energy, sp.enstrophy, q, v]
        for p in ledger.monitored_p:
            row += [series[n, p][i] for n in ("band_e", "band_d", "g", "b1inf")]
            row.append(sp.lp_low[m0][p])
        rows.append(row)
    return rows


def _flux_ratio_max(ledger, p):
    vals = [s.flux[p].ratio for s in ledger.samples if p in s.flux]
    return max(vals) if vals else math.nan


def criteria_rows(ledger, t_ref=None, alpha=1.5, delta=0.0):
    """(rows, footer) for criteria.csv; both empty for an empty ledger."""
    if not ledger.samples:
        return [], None
    rep = ledger.criterion_report(t_ref, alpha, delta)
    rows = []
    for r in rep.rows:
        rows.append(
            [
                r.p,
                r.E,
                r.D,
                r.s,
                r.bkm,
                r.b1inf,
                r.flux_window_lhs,
                r.flux_window_rhs,
                r.iteration_lhs,
                r.iteration_rhs,
                _flux_ratio_max(ledger, r.p),
                bool(r.resolved),
            ]
        )
    footer = ["alpha_fit", rep.alpha_fit, rep.alpha_residual] + [""] * (len(CRITERIA_COLUMNS) - 3)
    return rows, footer


def _write_csv(path, header, rows, footer=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
        if footer is not None:
            w.writerow([x if isinstance(x, str) else fmt(x) for x in footer])


def versions():
    import numpy

    from . import __version__

    out = [("lpns_version", __version__), ("numpy_version", numpy.__version__), ("python_version", platform.python_version())]
    out.append(("fft_backend", "pyfftw " + _fft.pyfftw.__version__ if _fft.pyfftw is not None else "numpy.fft"))
    return out


def write_report(ledger, out_dir, meta=(), t_ref=None, alpha=1.5, delta=0.0):
    """Write time_series.csv, criteria.csv and run_meta.txt; returns their paths."""
    from .scenarios import RNG_NAME

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t_ref_eff = t_ref if t_ref is not None else (ledger.samples[-1].t if ledger.samples else math.nan)
    ts = out / "time_series.csv"
    _write_csv(ts, time_series_columns(ledger.monitored_p), time_series_rows(ledger, t_ref))
    cr = out / "criteria.csv"
    rows, footer = criteria_rows(ledger, t_ref, alpha, delta)
    _write_csv(cr, CRITERIA_COLUMNS, rows, footer)
    items = list(meta) + [
        ("t_ref", fmt(t_ref_eff)),
        ("monitored_p", ",".join(str(p) for p in ledger.monitored_p)),
        ("ledger_b", ledger.b),
        ("ledger_c_bkm", fmt(ledger.c_bkm)),
        ("ledger_m", ",".join(fmt(x) for x in ledger.m)),
        ("samples", len(ledger.samples)),
        ("rng", RNG_NAME),
    ] + versions()
    meta_path = out / "run_meta.txt"
    write_key_values(meta_path, items)
    return ts, cr, meta_path


def read_csv(path):
    """Header and rows (strings) of a report CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


__all__ = ["write_report", "read_csv", "time_series_columns"]
