"""Static figures written next to the CSV report (Agg backend, PNG)."""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import read_csv  # noqa: E402

STYLE = {
    "font.size": 8,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def _table(path):
    header, rows = read_csv(path)
    data = {h: [] for h in header}
    for row in rows:
        if row and row[0] == "alpha_fit":
            continue
        for h, v in zip(header, row):
            data[h].append(float(v) if v else np.nan)
    return {h: np.array(v) for h, v in data.items()}


def _positive(y):
    y = np.asarray(y, dtype=float)
    return np.where(y > 0, y, np.nan)


def plot_time_series(ts, out):
    t = ts["t"]
    ps = sorted({int(h.rsplit("_", 1)[1]) for h in ts if h.startswith("band_e_")})
    fig, axes = plt.subplots(1, 3, figsize=(9.0, 2.8))
    ax = axes[0]
    ax.semilogy(t, _positive(ts["energy"]), label=r"$\|u\|_2^2$")
    ax.semilogy(t, _positive(ts["enstrophy"]), label=r"$\|\nabla u\|_2^2$")
    ax.set_xlabel("t")
    ax.legend()
    ax = axes[1]
    for p in ps:
        ax.semilogy(t, _positive(ts[f"band_e_{p}"]), label=f"p={p}")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|u_{\geq p}\|_2^2$")
    ax.legend()
    ax = axes[2]
    for p in ps:
        ax.plot(t, ts[f"g_{p}"], label=f"p={p}")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|\nabla u_{\leq p}\|_\infty$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def plot_criteria(cr, out):
    p = cr["p"]
    fig, axes = plt.subplots(1, 2, figsize=(6.5, 2.8))
    ax = axes[0]
    for key, lab in (("E_p", r"$E_p$"), ("D_p", r"$D_p$"), ("s_p", r"$s_p$")):
        ax.semilogy(p, _positive(cr[key]), "o-", label=lab)
    ax.set_xlabel("p")
    ax.legend()
    ax = axes[1]
    for key, lab in (("bkm_p", "BKM window"), ("b1inf_p", r"$B^{-1}_{\infty,\infty}$ sup")):
        ax.semilogy(p, _positive(cr[key]), "s-", label=lab)
    ax.set_xlabel("p")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def plot_leray(ts, out):
    t, v = ts["t"], ts["leray_m"]
    fig, ax = plt.subplots(figsize=(3.4, 2.6))
    ax.plot(t, v, "-")
    ax.set_xlabel("t")
    ax.set_ylabel("Lebesgue monitor")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def render_figures(out_dir):
    """Read the CSVs in out_dir and write PNG figures beside them; returns the paths."""
    out = Path(out_dir)
    written = []
    with plt.rc_context(STYLE):
        ts = _table(out / "time_series.csv")
        if len(ts["t"]):
            plot_time_series(ts, out / "time_series.png")
            plot_leray(ts, out / "leray_monitor.png")
            written += [out / "time_series.png", out / "leray_monitor.png"]
        cr = _table(out / "criteria.csv")
        if len(cr["p"]):
            plot_criteria(cr, out / "criteria.png")
            written.append(out / "criteria.png")
    return written
