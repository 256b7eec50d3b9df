"""Unbounded heating in the reduced Navier-Stokes-Fourier model.

With μ, κ ∝ θ^δ the average temperature follows (C1 t + 1)^{1/(1+δ)} once
the velocity profile is quasi-steady, so θ_av grows like t^{1/2} for δ = 1
and t^{2/3} for δ = 1/2.  The run below compares the finite-volume solution
with that law and prints the local log-log slope.

    python3 demos/cns_heating.py
"""
import numpy as np

from viscous_heating.diagnostics import loglog_slope
from viscous_heating.reduced_cns import CnsConfig, closed_form_theta_av, run_cns

for delta in (1.0, 0.5):
    cfg = CnsConfig(g0=2.0, delta=delta, t_end=1e4)
    ser = run_cns(cfg)
    slope = loglog_slope(ser, "theta_av", 0.5, t_min=1.0)
    print(f"delta = {delta}: slope should approach {1 / (1 + delta):.4f}")
    for t in (1.0, 10.0, 100.0, 1e3, 1e4):
        th = np.interp(t, ser.times, ser.theta_av)
        a = np.interp(np.log(t), np.log(slope.times), slope.alpha)
        print(f"  t = {t:8.0f}  theta_av = {th:9.4f}  closed form = "
              f"{closed_form_theta_av(t, cfg):9.4f}  slope = {a:.4f}")
