"""DSMC hard spheres against the BGK model for the same forcing.

Both heat the gas without bound, at slightly different rates since the two
collision models give different transport coefficients at equal Kn.  After
one multiplicative rescaling the ln θ_av curves line up.

    python3 demos/dsmc_vs_bgk.py
"""
import numpy as np

from viscous_heating.bgk_solver import BgkConfig, run
from viscous_heating.dsmc_solver import DsmcConfig, run_ensemble
from viscous_heating.kinetic_core import SpatialGrid1D, VelocityGrid2D

S2 = np.sqrt(2.0)
T = 40 / S2
avg = run_ensemble(DsmcConfig(kn=0.1, f0=2.0, t_end=T, sample_interval=1 / S2, n_ensemble=4))
bgk = run(BgkConfig(kn=0.1, f0=2.0, grid=SpatialGrid1D(50), vgrid=VelocityGrid2D(32, 32),
                    t_end=T, sample_interval=1 / S2))
t = np.asarray(avg.times)[1:]
ld = np.log(avg.theta_av_mean[1:])
lb = np.log(np.interp(t, bgk.times, bgk.theta_av))
shift = np.mean(ld - lb)
print(f"scale factor exp(shift) = {np.exp(shift):.3f}, "
      f"correlation {np.corrcoef(ld, lb + shift)[0, 1]:.5f}")
for i in range(0, len(t), 8):
    print(f"t = {t[i] * S2:5.1f}/sqrt2  DSMC {np.exp(ld[i]):7.3f} +- {avg.theta_av_se[i + 1]:.3f}"
          f"  BGK {np.exp(lb[i]):7.3f}")
