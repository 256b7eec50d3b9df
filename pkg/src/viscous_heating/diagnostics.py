"""Growth exponents α = d ln θ_av / d ln t and β = d ln |u2|_av / d ln t.

Slopes come from a local least-squares line fitted to (ln t, ln value) over a
sliding window measured in decades of t.  Near the ends of the series the
window becomes one-sided: it keeps its width and is shifted to lie inside
the sampled range.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "SlopeDomainError",
    "SlopeSeries",
    "loglog_slope",
    "windowed_average",
    "trailing_mean",
    "slope_table",
    "read_series_csv",
    "write_slope_csv",
]

log = logging.getLogger(__name__)


class SlopeDomainError(ValueError):
    pass


@dataclass
class SlopeSeries:
    times: np.ndarray
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    beta_bar: np.ndarray | None = None
    window: float = 0.25
    notes: list = field(default_factory=list)

    def indicator(self) -> np.ndarray | None:
        """α + |β|; close to 1 when β ≈ -(1 - α).  Reported, never enforced."""
        if self.alpha is None or self.beta is None:
            return None
        return self.alpha + np.abs(self.beta)


def _values(series, name):
    if isinstance(series, dict):
        return np.asarray(series["times"], float), np.asarray(series[name], float)
    return np.asarray(series.times, float), np.asarray(getattr(series, name), float)


def _local_slopes(t, y, window):
    lt = np.log(t)
    ly = np.log(y)
    width = window * np.log(10.0)
    lo_end, hi_end = lt[0], lt[-1]
    out = np.empty(len(t))
    for i in range(len(t)):
        lo = lt[i] - 0.5 * width
        hi = lt[i] + 0.5 * width
        # near the ends keep the full width but make the window one-sided
        if lo < lo_end:
            lo, hi = lo_end, min(lo_end + width, hi_end)
        elif hi > hi_end:
            lo, hi = max(hi_end - width, lo_end), hi_end
        tol = 1e-12 * max(1.0, abs(lt[i]))
        idx = np.flatnonzero((lt >= lo - tol) & (lt <= hi + tol))
        if len(idx) < 2:
            idx = np.arange(max(0, i - 1), min(len(t), i + 2))
        x = lt[idx] - lt[idx].mean()
        yy = ly[idx] - ly[idx].mean()
        out[i] = np.dot(x, yy) / np.dot(x, x)
    return out


def loglog_slope(series, field_name: str = "theta_av", smoothing_window: float = 0.25,
                 t_min: float = 0.0) -> SlopeSeries:
    """Local slope of ln(value) against ln(t), windowed over ``smoothing_window`` decades.

    ``series`` is any object (or dict) with ``times`` and the named field.
    Samples at t <= t_min (and always t = 0) are skipped; a non-positive
    value among the remaining ones is a :class:`SlopeDomainError`.
    Returns a :class:`SlopeSeries` with ``alpha`` (θ_av) or ``beta`` (u2_av) set.
    """
    if field_name not in ("theta_av", "u2_av"):
        raise ValueError(f"unknown field {field_name!r}; expected theta_av or u2_av")
    if not smoothing_window > 0:
        raise ValueError("smoothing_window must be positive")
    t, y = _values(series, field_name)
    keep = t > max(t_min, 0.0)
    t, y = t[keep], y[keep]
    bad = np.flatnonzero(~(y > 0))
    if len(bad):
        i = bad[0]
        raise SlopeDomainError(f"{field_name} is non-positive ({y[i]!r}) at sample t={t[i]!r}")
    if len(t) < 3:
        raise SlopeDomainError("need at least three positive samples for a slope")
    if np.any(np.diff(t) <= 0):
        raise SlopeDomainError("sample times must be strictly increasing")
    decades = np.log10(t[-1] / t[0])
    if decades > 0 and len(t) / decades < 10:
        log.warning("only %.1f samples per decade; slopes will be coarse", len(t) / decades)
    slopes = _local_slopes(t, y, smoothing_window)
    if field_name == "theta_av":
        return SlopeSeries(times=t, alpha=slopes, window=smoothing_window)
    return SlopeSeries(times=t, beta=slopes, window=smoothing_window)


def trailing_mean(times, values, window: float, notes: list | None = None) -> np.ndarray:
    """Time average of ``values`` over [t - window, t] for every sample t.

    The series is treated as piecewise linear.  Where the window reaches
    back before the first sample it is truncated, and a note is appended to
    ``notes``.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    t = np.asarray(times, float)
    v = np.asarray(values, float)
    if len(t) < 2:
        return v.copy()
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])

    def integral_to(s):
        k = np.clip(np.searchsorted(t, s, side="right") - 1, 0, len(t) - 2)
        frac = s - t[k]
        vs = v[k] + (v[k + 1] - v[k]) * frac / (t[k + 1] - t[k])
        return cum[k] + 0.5 * (v[k] + vs) * frac

    start = t - window
    truncated = start < t[0]
    start = np.maximum(start, t[0])
    span = t - start
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (integral_to(t) - integral_to(start)) / safe, v)
    if np.any(truncated) and notes is not None:
        notes.append(f"window {window:g} truncated at the series start for t < {t[0] + window:g}")
    return out


def windowed_average(s: SlopeSeries, which: str = "beta", window: float = 500 / np.sqrt(2)
                     ) -> SlopeSeries:
    """Trailing time average over [t - window, t] of ``s.alpha`` or ``s.beta``.

    The result is stored in ``beta_bar`` of a copy of ``s``.
    """
    if which not in ("alpha", "beta"):
        raise ValueError(f"which must be 'alpha' or 'beta', got {which!r}")
    vals = getattr(s, which)
    if vals is None:
        raise ValueError(f"slope series has no {which} values")
    out = SlopeSeries(s.times, s.alpha, s.beta, None, s.window, list(s.notes))
    out.beta_bar = trailing_mean(s.times, vals, window, out.notes)
    return out


def slope_table(series, window: float = 0.25, beta_window: float | None = None,
                t_min: float = 0.0) -> SlopeSeries:
    """α, β and (if ``beta_window`` is given) the trailing time average β̄."""
    out = loglog_slope(series, "theta_av", window, t_min)
    try:
        b = loglog_slope(series, "u2_av", window, t_min)
    except SlopeDomainError as exc:
        out.notes.append(f"beta unavailable: {exc}")
        return out
    if len(b.times) == len(out.times) and np.allclose(b.times, out.times):
        out.beta = b.beta
        if beta_window is not None:
            out = windowed_average(out, "beta", beta_window)
    else:
        out.notes.append("theta_av and u2_av have different valid samples; beta omitted")
    return out


def read_series_csv(path) -> dict:
    """Load a headed CSV into a dict of column arrays (times under ``times``)."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    if "t" in cols:
        cols["times"] = cols["t"]
    return cols


def write_slope_csv(path, s: SlopeSeries) -> Path:
    n = len(s.times)
    nan = np.full(n, np.nan)
    cols = [s.times, s.alpha if s.alpha is not None else nan, s.beta if s.beta is not None else nan,
            s.beta_bar if s.beta_bar is not None else nan]
    path = Path(path)
    np.savetxt(path, np.column_stack(cols), delimiter=",", header="t,alpha,beta,beta_bar",
               comments="", fmt="%.12e")
    return path
