"""Emission of stand-alone matplotlib scripts for finished runs.

Scripts are plain text written to ``<run_dir>/plots``.  Each one reads the CSV
files of the run next to it and needs only numpy and matplotlib, so the
package itself never imports a plotting library.
"""
from __future__ import annotations

import logging
from pathlib import Path
from string import Template

__all__ = ["PlotError", "emit_plots"]

log = logging.getLogger(__name__)


class PlotError(ValueError):
    pass


_HEAD = '''"""$title"""
import glob
import os

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
RUN = os.path.dirname(HERE)


def load(name):
    path = os.path.join(RUN, name)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {h: data[:, i] for i, h in enumerate(header)}


def snapshots():
    out = []
    for path in glob.glob(os.path.join(RUN, "snapshot_t*.csv")):
        t = float(os.path.basename(path)[len("snapshot_t"):-len(".csv")])
        out.append((t, load(os.path.basename(path))))
    return sorted(out, key=lambda item: item[0])


def slopes(t, y, window=0.25):
    keep = (t > 0) & (y > 0)
    t, y = t[keep], y[keep]
    lt, ly = np.log(t), np.log(y)
    width = window * np.log(10.0)
    out = np.empty(len(t))
    for i in range(len(t)):
        lo, hi = lt[i] - width / 2, lt[i] + width / 2
        if lo < lt[0]:
            lo, hi = lt[0], min(lt[0] + width, lt[-1])
        elif hi > lt[-1]:
            lo, hi = max(lt[-1] - width, lt[0]), lt[-1]
        m = (lt >= lo) & (lt <= hi)
        if m.sum() < 2:
            m[max(0, i - 1):i + 2] = True
        x = lt[m] - lt[m].mean()
        out[i] = np.dot(x, ly[m] - ly[m].mean()) / np.dot(x, x)
    return t, out


'''

_PROFILE = Template(_HEAD + '''snaps = snapshots()
if not snaps:
    raise SystemExit("no snapshot_t*.csv files in " + RUN)
fig, ax = plt.subplots(figsize=(5, 4))
for t, d in snaps:
    keep = d["x1"] >= 0
    y = $expr
    ax.plot(d["x1"][keep], y[keep], label="t = %.4g" % t)
ax.set_xlabel("x1")
ax.set_ylabel("$ylabel")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "$png"), dpi=150)
''')

_SERIES = Template(_HEAD + '''d = load("$csv")
fig, ax = plt.subplots(figsize=(5, 4))
ax.plot(d["t"], d["$column"])
ax.set_xlabel("t")
ax.set_ylabel("$ylabel")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "$png"), dpi=150)
''')

_LOGLOG = Template(_HEAD + '''d = load("$csv")
t, y = d["t"], d["$column"]
keep = (t > 0) & (y > 0)
fig, (left, right) = plt.subplots(1, 2, figsize=(9, 4))
left.loglog(t[keep], y[keep])
left.set_xlabel("t")
left.set_ylabel("$ylabel")
ts, s = slopes(t, y)
right.semilogx(ts, s)
right.set_xlabel("t")
right.set_ylabel("$slope_label")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "$png"), dpi=150)
''')

_ERRBAR = Template(_HEAD + '''d = load("$csv")
fig, ax = plt.subplots(figsize=(5, 4))
ax.errorbar(d["t"], d["$mean"], yerr=d["$se"], fmt="-", capsize=2, elinewidth=0.7)
ax.set_xlabel("t")
ax.set_ylabel("$ylabel")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "$png"), dpi=150)
''')

_CNS = Template(_HEAD + '''d = load("$csv")
fig, ax = plt.subplots(figsize=(5, 4))
keep = d["t"] > 0
ax.loglog(d["t"][keep], d["theta_av"][keep], label="reduced NS")
ax.loglog(d["t"][keep], d["theta_closed_form"][keep], "--", label="(C1 t + 1)^(1/(1+delta))")
ax.set_xlabel("t")
ax.set_ylabel("theta_av")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "$png"), dpi=150)
''')

_SLOPES = Template(_HEAD + '''d = load("$csv")
fig, ax = plt.subplots(figsize=(5, 4))
for name in ("alpha", "beta", "beta_bar"):
    if name in d and np.isfinite(d[name]).any():
        ax.semilogx(d["t"], d[name], label=name)
ax.set_xlabel("t")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "$png"), dpi=150)
''')


def _header(path: Path) -> list[str]:
    with open(path) as fh:
        return fh.readline().strip().split(",")


def _require(path: Path, columns) -> None:
    have = _header(path)
    for col in columns:
        if col not in have:
            raise PlotError(f"{path.name} lacks column {col!r} (has {', '.join(have)})")


def _bgk_scripts(run: Path) -> dict:
    _require(run / "series.csv", ["t", "theta_av", "u2_av"])
    snaps = sorted(run.glob("snapshot_t*.csv"))
    for s in snaps:
        _require(s, ["x1", "rho", "u1", "u2", "theta"])
    out = {}
    prof = [("a_u2_profiles", 'd["u2"]', "u2"),
            ("c_theta_deviation", 'd["theta"] - d["theta"].mean()', "theta - theta_av"),
            ("d_density_profiles", 'd["rho"]', "rho"),
            ("e_u1_profiles", 'd["u1"]', "u1")]
    for name, expr, ylabel in prof:
        out[f"fig_{name}.py"] = _PROFILE.substitute(
            title=f"Profiles of {ylabel} over the half interval 0 <= x1 <= 1/4.",
            expr=expr, ylabel=ylabel, png=f"fig_{name}.png")
    out["fig_b_theta_av.py"] = _SERIES.substitute(
        title="Average temperature theta_av(t).", csv="series.csv", column="theta_av",
        ylabel="theta_av", png="fig_b_theta_av.png")
    out["fig_f_theta_av_loglog.py"] = _LOGLOG.substitute(
        title="theta_av on log-log axes with alpha = d ln theta_av / d ln t.", csv="series.csv",
        column="theta_av", ylabel="theta_av", slope_label="alpha", png="fig_f_theta_av_loglog.png")
    out["fig_g_u2_av_loglog.py"] = _LOGLOG.substitute(
        title="|u2|_av on log-log axes with beta = d ln |u2|_av / d ln t.", csv="series.csv",
        column="u2_av", ylabel="|u2|_av", slope_label="beta", png="fig_g_u2_av_loglog.png")
    return dict(sorted(out.items()))


def _dsmc_scripts(run: Path) -> dict:
    cols = ["t", "theta_av_mean", "theta_av_se", "u2_av_mean", "u2_av_se"]
    _require(run / "aggregate.csv", cols)
    out = {
        "fig_b_theta_av_errorbars.py": _ERRBAR.substitute(
            title="Ensemble-mean theta_av with standard errors.", csv="aggregate.csv",
            mean="theta_av_mean", se="theta_av_se", ylabel="theta_av",
            png="fig_b_theta_av_errorbars.png"),
        "fig_u2_av_errorbars.py": _ERRBAR.substitute(
            title="Ensemble-mean |u2|_av with standard errors.", csv="aggregate.csv",
            mean="u2_av_mean", se="u2_av_se", ylabel="|u2|_av", png="fig_u2_av_errorbars.png"),
        "fig_d_theta_av_loglog.py": _LOGLOG.substitute(
            title="Ensemble-mean theta_av on log-log axes with alpha.", csv="aggregate.csv",
            column="theta_av_mean", ylabel="theta_av", slope_label="alpha",
            png="fig_d_theta_av_loglog.png"),
        "fig_e_u2_av_loglog.py": _LOGLOG.substitute(
            title="Ensemble-mean |u2|_av on log-log axes with beta.", csv="aggregate.csv",
            column="u2_av_mean", ylabel="|u2|_av", slope_label="beta",
            png="fig_e_u2_av_loglog.png"),
    }
    return out


def _cns_scripts(run: Path) -> dict:
    _require(run / "series.csv", ["t", "theta_av", "theta_closed_form"])
    return {"fig_theta_av_vs_closed_form.py": _CNS.substitute(
        title="Reduced NS theta_av against the closed form.", csv="series.csv",
        png="fig_theta_av_vs_closed_form.png")}


def _slope_scripts(run: Path) -> dict:
    _require(run / "slopes.csv", ["t", "alpha", "beta", "beta_bar"])
    return {"fig_slopes.py": _SLOPES.substitute(title="Growth exponents.", csv="slopes.csv",
                                                png="fig_slopes.png")}


def emit_plots(run_dir) -> list[Path]:
    """Write plot scripts for whatever run outputs ``run_dir`` holds.

    BGK runs (series.csv with theta_av and u2_av) get seven scripts, one per
    panel: u2, θ-θ_av, ρ and u1 profiles, θ_av(t), and log-log θ_av, |u2|_av
    with their slopes.  DSMC runs (aggregate.csv) get error-bar variants.
    A directory without recognised outputs is left alone with a warning.
    """
    run = Path(run_dir)
    if not run.is_dir():
        raise PlotError(f"{run} is not a directory")
    scripts: dict = {}
    series = run / "series.csv"
    if series.exists():
        header = _header(series)
        if "theta_closed_form" in header:
            scripts.update(_cns_scripts(run))
        else:
            scripts.update(_bgk_scripts(run))
    if (run / "aggregate.csv").exists():
        scripts.update(_dsmc_scripts(run))
    if (run / "slopes.csv").exists():
        scripts.update(_slope_scripts(run))
    if not scripts:
        log.warning("no recognised run outputs in %s; nothing to plot", run)
        return []
    plots = run / "plots"
    plots.mkdir(exist_ok=True)
    written = []
    for name, text in scripts.items():
        path = plots / name
        path.write_text(text)
        written.append(path)
    return written
