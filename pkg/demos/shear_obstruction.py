"""Why a steady forced state cannot exist: the shear-flow example.

A steady incompressible flow driven by f = (0, 0, sin 2πx1) exists and is
unique for small forcing.  A steady kinetic state would also need the
temperature equation to balance, but with an insulated box the only
temperature is θ = const, and then the viscous heating ∫|∇u + ∇uᵀ|² must
vanish.  For the shear flow it equals 1/(4π²) instead.

    python3 demos/shear_obstruction.py
"""
import numpy as np

from viscous_heating.steady_ns import (SteadyNsConfig, nsf_theta, shear_force, solve_steady,
                                       viscous_heating_obstruction)

N = 8
for nu in (1.0, 0.5, 0.25):
    res = solve_steady(SteadyNsConfig(nu, shear_force(N), N=N))
    amp = 2 * abs(res.u.coeffs[2, N + 1, N, N])
    theta = nsf_theta(res.u)
    print(f"nu = {nu:5.2f}: {res.iterations} Picard step(s), u3 amplitude {amp:.10f} "
          f"(1/(4 pi^2 nu) = {1 / (4 * np.pi**2 * nu):.10f})")
    print(f"    temperature perturbation norm {np.sqrt(np.sum(np.abs(theta)**2)):.1e}, "
          f"heating integral {viscous_heating_obstruction(res.u):.6e}")
print(f"with nu = 1 the heating integral should equal 1/(4 pi^2) = {1 / (4 * np.pi**2):.6e}")
