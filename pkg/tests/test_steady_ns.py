import numpy as np
import pytest

from viscous_heating.steady_ns import (FourierVectorField, InconsistencyError, NonConvergenceError,
                                       SteadyNsConfig, bilinear_T, energy_bound, leray_project,
                                       nsf_theta, random_solenoidal, shear_force, solve_steady,
                                       steady_residual, viscous_heating_obstruction,
                                       write_coefficients_csv)

N = 4


def gradient_field(n, seed=0):
    # v = ∇φ for a random real φ: c_k = 2πi k φ_k
    rng = np.random.default_rng(seed)
    K1 = 2 * n + 1
    phi = rng.standard_normal((K1,) * 3) + 1j * rng.standard_normal((K1,) * 3)
    phi = 0.5 * (phi + np.conj(phi[::-1, ::-1, ::-1]))
    k = np.arange(-n, n + 1)
    K = np.array(np.meshgrid(k, k, k, indexing="ij"))
    return FourierVectorField(n, 2j * np.pi * K * phi[None])


def test_field_validation():
    with pytest.raises(ValueError):
        FourierVectorField(2, np.zeros((3, 4, 4, 4)))
    with pytest.raises(ValueError):
        FourierVectorField.from_modes(2, [((3, 0, 0), (0, 0, 1))])
    with pytest.raises(ValueError):
        FourierVectorField.from_modes(2, [((0, 0, 0), (0, 0, 1))])
    f = shear_force(N)
    assert f.hermitian_defect() == 0.0
    assert np.allclose(f.to_physical().imag, 0.0)


def test_leray_removes_gradients_and_keeps_solenoidal():
    g = gradient_field(N)
    assert leray_project(g).l2_norm() < 1e-12 * g.l2_norm()
    v = random_solenoidal(N, 1.0, seed=3)
    assert (leray_project(v) - v).l2_norm() < 1e-13
    w = leray_project(g + v)
    assert (leray_project(w) - w).l2_norm() < 1e-13
    assert w.divergence_defect() < 1e-12


def test_bilinear_vanishes_on_zero_and_shear():
    assert bilinear_T(FourierVectorField.zeros(N)).l2_norm() == 0.0
    assert bilinear_T(shear_force(N, 3.0)).l2_norm() < 1e-13
    one_mode = FourierVectorField.from_modes(N, [((0, 2, 1), (1.0, 0.0, 0.0))])
    assert bilinear_T(one_mode).l2_norm() < 1e-13


def test_bilinear_is_energy_skew():
    # <Π div(v⊗v), v> = 0 for divergence-free v, so <T(v), (-Δ) v> = 0
    v = random_solenoidal(N, 1.0, k_max=2, seed=5)
    t = bilinear_T(v)
    k = np.arange(-N, N + 1)
    K = np.array(np.meshgrid(k, k, k, indexing="ij"))
    k2 = (K**2).sum(axis=0)
    inner = np.sum(np.conj(t.coeffs) * 4 * np.pi**2 * k2[None] * v.coeffs)
    assert abs(inner) < 1e-12 * t.l2_norm() * v.grad_norm() * 2 * np.pi * N
    assert t.l2_norm() > 1e-3


@pytest.mark.parametrize("nu", [1.0, 0.3])
def test_shear_solution_in_one_iteration(nu):
    cfg = SteadyNsConfig(nu, shear_force(N), N=N)
    res = solve_steady(cfg)
    assert res.converged and res.iterations == 1
    u3 = res.u.coeffs[2, N + 1, N, N]
    assert abs(u3) * 2 == pytest.approx(1 / (4 * np.pi**2 * nu), rel=1e-10)
    assert res.residual < 1e-10


def test_zero_force_gives_zero_flow():
    res = solve_steady(SteadyNsConfig(1.0, FourierVectorField.zeros(N), N=N))
    assert res.converged and res.iterations == 0
    assert res.u.l2_norm() == 0.0


def test_nonlinear_solve_converges_with_contraction():
    f = random_solenoidal(N, 20.0, seed=7)
    res = solve_steady(SteadyNsConfig(1.0, f, N=N))
    assert res.converged
    assert steady_residual(res.u, f, 1.0) < 1e-10
    assert np.all(res.contraction_ratios() < 1)
    assert res.u.divergence_defect() < 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_energy_bound_holds(seed):
    f = random_solenoidal(N, 10.0, seed=100 + seed)
    res = solve_steady(SteadyNsConfig(1.0, f, N=N))
    assert res.converged
    # ν‖∇u‖² = <f, u> gives ‖∇u‖ ≤ ‖(-Δ)^{-1/2} f‖ / ν
    assert res.u.grad_norm() <= energy_bound(f, 1.0) * (1 + 1e-10)


def test_strong_force_does_not_converge():
    cfg = SteadyNsConfig(0.05, random_solenoidal(N, 50.0, seed=1), N=N, max_iter=30)
    res = solve_steady(cfg)
    assert not res.converged
    with pytest.raises(NonConvergenceError):
        solve_steady(cfg, raise_on_failure=True)


def test_config_validation():
    with pytest.raises(ValueError):
        SteadyNsConfig(0.0, shear_force(N), N=N)
    with pytest.raises(ValueError):
        SteadyNsConfig(1.0, shear_force(N), N=N, damping=0.0)
    with pytest.raises(ValueError):
        SteadyNsConfig(1.0, shear_force(N), N=N + 1)
    with pytest.raises(ValueError):
        SteadyNsConfig(1.0, gradient_field(N), N=N)


def test_temperature_is_zero():
    assert np.all(nsf_theta(FourierVectorField.zeros(N)) == 0)
    u = solve_steady(SteadyNsConfig(1.0, shear_force(N), N=N)).u
    assert np.sqrt(np.sum(np.abs(nsf_theta(u)) ** 2)) <= 1e-10
    v = random_solenoidal(N, 0.5, seed=2)
    assert np.sqrt(np.sum(np.abs(nsf_theta(v, seed=4)) ** 2)) <= 1e-10


def test_temperature_sweeps_fail_loudly_for_strong_flow():
    with pytest.raises(InconsistencyError):
        nsf_theta(random_solenoidal(N, 200.0, seed=2), max_sweeps=50)


def test_obstruction_values():
    assert viscous_heating_obstruction(FourierVectorField.zeros(N)) == 0.0
    u = solve_steady(SteadyNsConfig(1.0, shear_force(N), N=N)).u
    assert viscous_heating_obstruction(u) == pytest.approx(1 / (4 * np.pi**2), rel=1e-8)
    # ∫|∇u + ∇uᵀ|² = 2∫|∇u|² for divergence-free u
    v = random_solenoidal(N, 1.0, seed=9)
    assert viscous_heating_obstruction(v) == pytest.approx(2 * v.grad_norm() ** 2, rel=1e-12)
    assert viscous_heating_obstruction(v) > 0


def test_coefficients_csv(tmp_path):
    u = solve_steady(SteadyNsConfig(1.0, shear_force(N), N=N)).u
    p = write_coefficients_csv(tmp_path / "c.csv", u)
    lines = p.read_text().splitlines()
    assert lines[0] == "kx,ky,kz,re1,im1,re2,im2,re3,im3"
    assert len(lines) == 3  # the ±e1 pair
