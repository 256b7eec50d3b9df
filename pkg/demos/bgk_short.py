"""A short, coarse BGK run at Kn = 0.1 with force amplitude 2.

The flow spins up, |u2|_av peaks near t = 1.5/√2 and then decays while the
gas keeps heating.  Takes about 15 s on one core.

    python3 demos/bgk_short.py [out.csv]
"""
import sys

import numpy as np

from viscous_heating.bgk_solver import BgkConfig, run
from viscous_heating.kinetic_core import SpatialGrid1D, VelocityGrid2D

S2 = np.sqrt(2.0)
cfg = BgkConfig(kn=0.1, f0=2.0, grid=SpatialGrid1D(50), vgrid=VelocityGrid2D(32, 32),
                t_end=30 / S2, sample_interval=0.1 / S2)
ser = run(cfg)
k = int(np.argmax(ser.u2_av))
print(f"|u2|_av peaks at t = {ser.times[k] * S2:.2f}/sqrt2 with value {ser.u2_av[k]:.4f}")
for t in (1, 5, 10, 20, 30):
    print(f"t = {t:2d}/sqrt2: theta_av = {ser.value_at('theta_av', t / S2):.4f}, "
          f"|u2|_av = {ser.value_at('u2_av', t / S2):.4f}")
st = ser.final_state
print(f"{st.step_count} steps, {len(st.remap_events)} velocity-grid remaps, "
      f"mass drift {abs(ser.mass[-1] / ser.mass[0] - 1):.1e}")
if len(sys.argv) > 1:
    print("series written to", ser.write_csv(sys.argv[1]))
