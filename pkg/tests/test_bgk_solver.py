import numpy as np
import pytest

from viscous_heating.bgk_solver import (CHECKPOINT_MAGIC, BgkConfig, BgkSolver, GridCoverageError,
                                        NumericalBlowupError, SolverState, StepSizeError,
                                        TimeSeries, collision_frequency, collision_relax,
                                        force_step, initial_state, read_checkpoint,
                                        remap_velocity_grid, run, specular_walls, transport_step,
                                        write_checkpoint, write_manifest, write_snapshots)
from viscous_heating.kinetic_core import (ParameterError, ReducedDistributionPair, SpatialGrid1D,
                                          VelocityGrid2D, cell_entropy, conserved_moments,
                                          discrete_maxwellian, maxwellian_cells, moments)

GRID = SpatialGrid1D(20)
VG = VelocityGrid2D(16, 16, 6.0)


def random_state(seed, n=20, vg=VG):
    rng = np.random.default_rng(seed)
    rho = 1 + 0.3 * rng.random(n)
    u1 = 0.3 * rng.standard_normal(n)
    u2 = 0.3 * rng.standard_normal(n)
    th = 0.7 + 0.5 * rng.random(n)
    f = maxwellian_cells(rho, u1, u2, th, vg)
    noise = 1 + 0.1 * rng.random(f.G.shape)
    return ReducedDistributionPair(f.G * noise, f.H * noise)


def two_stream(vg=VG, a=1.0, n=1):
    return (maxwellian_cells([1.0] * n, [0.0] * n, [a] * n, [0.6] * n, vg)
            + maxwellian_cells([0.5] * n, [0.3] * n, [-a] * n, [0.9] * n, vg))


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(ParameterError):
        BgkConfig(kn=0.0, f0=1.0)
    with pytest.raises(ParameterError):
        BgkConfig(kn=0.1, f0=1.0, dt_cfl=1.5)
    with pytest.raises(ParameterError):
        BgkConfig(kn=0.1, f0=1.0, remap_trigger=1.0)
    cfg = BgkConfig(kn=0.1, f0=2.0)
    assert cfg.grid.n_cells == 100 and cfg.vgrid.n_v1 == 64 and cfg.vgrid.v_max == 6.0


def test_collision_frequency():
    assert collision_frequency(1.0, 0.1) == pytest.approx(np.sqrt(8 / np.pi) / 0.1)


# ---------------------------------------------------------------- streaming

@pytest.mark.parametrize("large", [False, True])
def test_uniform_state_is_unchanged_by_streaming(large):
    f = maxwellian_cells([1.0] * 20, [0.0] * 20, [0.4] * 20, [1.2] * 20, VG)
    dt = 0.5 * GRID.dx / VG.half_width * (7.3 if large else 1.0)
    g = transport_step(f, GRID, VG, dt, 1.0, large)
    assert np.allclose(g.G, f.G, rtol=1e-13, atol=0)
    assert np.allclose(g.H, f.H, rtol=1e-13, atol=0)


def beam(j, profile):
    G = np.zeros((len(profile), VG.n_v1, VG.n_v2))
    G[:, j, VG.n_v2 // 2] = profile
    return ReducedDistributionPair(G, G.copy())


@pytest.mark.parametrize("cells", [1.0, 0.3, 2.6])
def test_beam_advects_linear_profile_exactly(cells):
    j = VG.n_v1 - 3
    v1 = VG.v1[j]
    assert v1 > 0
    i = np.arange(GRID.n_cells, dtype=float)
    f = beam(j, 1.0 + 0.05 * i)
    g = transport_step(f, GRID, VG, cells * GRID.dx / v1, large_step=True)
    expect = 1.0 + 0.05 * (i - cells)
    inner = slice(int(np.ceil(cells)) + 2, GRID.n_cells - 2)
    assert np.allclose(g.G[inner, j, VG.n_v2 // 2], expect[inner], rtol=0, atol=1e-13)


def test_beam_reflects_into_opposite_slice():
    j = VG.n_v1 - 1
    profile = np.zeros(GRID.n_cells)
    profile[-1] = 1.0
    f = beam(j, profile)
    g = transport_step(f, GRID, VG, GRID.dx / VG.v1[j], large_step=True)
    # one full cell towards the wall at +1/4: the mass comes back with -v1
    assert g.G[:, j].sum() == pytest.approx(0.0, abs=1e-14)
    assert g.G[-1, VG.n_v1 - 1 - j, VG.n_v2 // 2] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_streaming_conserves_mass(seed):
    f = random_state(seed)
    dt = 3.7 * GRID.dx / VG.half_width
    g = transport_step(f, GRID, VG, dt, large_step=True)
    assert g.G.sum() == pytest.approx(f.G.sum(), rel=1e-12)
    assert g.H.sum() == pytest.approx(f.H.sum(), rel=1e-12)
    assert g.G.min() >= 0


def test_cfl_violation_raises_without_large_steps():
    f = random_state(0)
    with pytest.raises(StepSizeError):
        transport_step(f, GRID, VG, 2 * GRID.dx / VG.half_width, 1.0, large_step=False)


def test_streaming_is_reversible_for_integer_shifts():
    # a whole-cell shift for every slice happens when dt * v1 / dx is an integer for all v1
    vg = VelocityGrid2D(4, 4, 2.0)  # v1 in {-1.5, -0.5, 0.5, 1.5}
    f = random_state(3, vg=vg)
    dt = 2 * GRID.dx / 0.5
    g = transport_step(transport_step(f, GRID, vg, dt, large_step=True), GRID, vg, -dt,
                       large_step=True)
    assert np.allclose(g.G, f.G, atol=1e-14)


# ---------------------------------------------------------------- walls

def test_even_state_ghosts_equal_interior():
    f = maxwellian_cells(np.linspace(1, 2, 20), [0.0] * 20, np.linspace(-1, 1, 20),
                         [1.0] * 20, VG)
    p = specular_walls(f, VG, 2)
    assert p.G.shape[0] == 24
    # v1-even distribution: each ghost equals its mirror cell
    assert np.array_equal(p.G[1], f.G[0]) and np.array_equal(p.G[0], f.G[1])
    assert np.array_equal(p.G[-1], f.G[-2])


def test_wall_mass_flux_vanishes():
    f = random_state(5)
    p = specular_walls(f, VG, 1)
    v1 = VG.v1[None, :, None]
    # wall value taken as the average of the two cells adjacent to it
    for a, b in ((0, 1), (-2, -1)):
        wall = 0.5 * (p.G[a] + p.G[b])
        assert abs(np.sum(v1[0] * wall)) < 1e-13 * np.sum(np.abs(v1[0] * wall))


# ---------------------------------------------------------------- force

def test_force_vanishes_at_node_x_zero():
    f = random_state(2, n=3)
    g = force_step(f, VG, 2.0, 0.05, np.array([0.0, 0.0, 0.0]))
    assert np.array_equal(g.G, f.G)


@pytest.mark.parametrize("dt", [0.02, 0.01, 0.005])
def test_force_shifts_u2_by_f0_sin_dt(dt):
    vg = VelocityGrid2D(32, 64, 6.0)
    x = np.array([0.05, 0.125, -0.2])
    f = maxwellian_cells([1.0] * 3, [0.0] * 3, [0.1] * 3, [1.0] * 3, vg)
    before = moments(f, vg)
    g = force_step(f, vg, 2.0, dt, x, correct_moments=False)
    du = moments(g, vg).u2 - before.u2
    expect = 2.0 * np.sin(2 * np.pi * x) * dt
    assert np.allclose(du, expect, atol=5 * dt**2)


def test_force_with_correction_is_exact_shift():
    vg = VelocityGrid2D(32, 64, 6.0)
    x = np.array([0.05, 0.125])
    # scaled so that θ = 1.4 sits inside the covered range, as the solver keeps it
    vg = vg.rescaled(1.3)
    f = maxwellian_cells([1.0, 2.0], [0.0, 0.2], [0.1, -0.3], [1.0, 1.4], vg)
    a = moments(f, vg)
    g = force_step(f, vg, 2.0, 0.04, x)
    b = moments(g, vg)
    assert np.allclose(b.u2 - a.u2, 2.0 * np.sin(2 * np.pi * x) * 0.04, atol=1e-13)
    assert np.allclose(b.theta, a.theta, atol=1e-13)
    assert np.allclose(b.rho, a.rho, atol=1e-14)


def test_force_step_guards():
    f = maxwellian_cells([1.0], [0.0], [0.0], [1.0], VG)
    with pytest.raises(StepSizeError):
        force_step(f, VG, 2.0, 10 * VG.dv2, np.array([0.25]))
    hot = maxwellian_cells([1.0], [0.0], [0.0], [6.0], VG)
    with pytest.raises(GridCoverageError):
        force_step(hot, VG, 2.0, 0.1, np.array([0.25]))


# ---------------------------------------------------------------- collisions

def test_local_maxwellian_is_fixed_point():
    target = np.array([[1.0, 0.1, -0.2, 3.2], [0.7, 0.0, 0.3, 2.0]])
    M = discrete_maxwellian(target, VG)
    out = collision_relax(M, moments(M, VG), 0.1, 0.3, VG)
    assert np.allclose(out.G, M.G, rtol=1e-12, atol=1e-16)


def test_infinite_step_gives_discrete_maxwellian():
    f = two_stream()
    m = moments(f, VG)
    out = collision_relax(f, m, 0.1, np.inf, VG)
    M = discrete_maxwellian(conserved_moments(f, VG), VG)
    assert np.allclose(out.G, M.G, rtol=1e-12, atol=1e-16)


def test_two_stream_collision_conserves_moments():
    f = two_stream()
    out = collision_relax(f, moments(f, VG), 0.1, 0.01, VG)
    a, b = conserved_moments(f, VG), conserved_moments(out, VG)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_entropy_nonincreasing_under_relaxation():
    f = two_stream(a=1.5)
    s = [cell_entropy(f, VG)[0]]
    for _ in range(30):
        f = collision_relax(f, moments(f, VG), 0.1, 0.01, VG)
        s.append(cell_entropy(f, VG)[0])
    assert np.all(np.diff(s) <= 1e-13)
    assert s[-1] < s[0]


# ---------------------------------------------------------------- remap

def test_remap_restores_moments():
    f = random_state(7)
    old = VG
    new = VG.rescaled(1.4)
    g, defect = remap_velocity_grid(f, old, new)
    assert np.allclose(conserved_moments(g, new), conserved_moments(f, old), rtol=1e-12, atol=1e-13)
    assert 0 <= defect < 0.05
    assert g.G.min() >= 0


def test_remap_carries_a_maxwellian_exactly():
    target = np.array([[1.0, 0.0, 0.4, 3.5], [0.8, 0.1, 0.0, 2.6]])
    old, new = VG, VG.rescaled(1.5)
    g, defect = remap_velocity_grid(discrete_maxwellian(target, old), old, new)
    assert defect < 1e-13
    assert np.allclose(g.G, discrete_maxwellian(target, new).G, rtol=1e-12, atol=1e-300)


# ---------------------------------------------------------------- driver

def small_config(**kw):
    base = dict(kn=0.1, f0=2.0, grid=SpatialGrid1D(20), vgrid=VelocityGrid2D(24, 24, 6.0),
                t_end=1.0, sample_interval=0.25)
    base.update(kw)
    return BgkConfig(**base)


def test_initial_state_is_exact_equilibrium():
    st = initial_state(small_config())
    m = moments(st.f, st.vgrid)
    assert np.allclose(m.rho, 1, atol=1e-14) and np.allclose(m.theta, 1, atol=1e-14)


def test_force_free_run_stays_at_rest():
    ser = run(small_config(f0=0.0, t_end=2.0))
    assert np.max(np.abs(np.array(ser.theta_av) - 1)) < 1e-10
    assert np.max(ser.u2_av) < 1e-10
    assert np.max(np.abs(np.array(ser.mass) - 1)) < 1e-12


def test_forced_run_symmetry_and_conservation():
    cfg = small_config(t_end=2.0, snapshot_times=(2.0,), check_entropy=True)
    ser = run(cfg)
    m = ser.snapshots[-1]
    scale = np.max(np.abs(m.u2))
    assert np.max(np.abs(m.u2 + m.u2[::-1])) < 1e-8 * scale
    assert np.max(np.abs(m.u1 + m.u1[::-1])) < 1e-8
    assert np.max(np.abs(m.theta - m.theta[::-1])) < 1e-8 * m.theta.max()
    assert np.max(np.abs(m.rho - m.rho[::-1])) < 1e-8
    assert abs(ser.mass[-1] - 1) < 1e-12
    assert ser.theta_av[-1] > ser.theta_av[0]
    # H-theorem for the collision substep, counted cell by cell
    assert ser.final_state.entropy_violations == 0


def test_run_samples_exact_times():
    ser = run(small_config(t_end=1.0, sample_interval=0.25))
    assert np.allclose(ser.times, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
    assert ser.value_at("theta_av", 0.5) == ser.theta_av[2]


def test_last_sample_not_duplicated_by_rounding():
    # 3 * 0.1 lands one ulp past 0.3
    ser = run(small_config(t_end=0.3, sample_interval=0.1, snapshot_times=(0.3,)))
    assert len(ser.times) == 4 and ser.times[-1] == 0.3
    assert np.all(np.diff(ser.theta_av) > 0)
    assert len(ser.snapshots) == 1


def test_remap_triggers_when_gas_heats():
    cfg = small_config(f0=2.0, kn=0.1, t_end=6.0, sample_interval=1.0,
                       vgrid=VelocityGrid2D(24, 24, 6.0))
    ser = run(cfg)
    st = ser.final_state
    assert len(st.remap_events) >= 1
    assert st.vgrid.scale > 1
    assert abs(ser.mass[-1] - 1) < 1e-12
    ev = st.remap_events[0]
    assert ev["new_scale"] > ev["old_scale"]


def test_restart_matches_uninterrupted_run(tmp_path):
    cfg = small_config(t_end=1.0, sample_interval=0.5)
    full = run(cfg)
    half = run(small_config(t_end=0.5, sample_interval=0.5))
    path = write_checkpoint(tmp_path / "c.bin", half.final_state, cfg.grid)
    state, grid = read_checkpoint(path)
    assert grid == cfg.grid
    assert state.time == 0.5
    rest = run(cfg, state)
    assert rest.theta_av[-1] == pytest.approx(full.theta_av[-1], rel=1e-12)


def test_checkpoint_round_trip(tmp_path):
    st = SolverState(random_state(1), VG.rescaled(1.7), time=3.25, step_count=41)
    path = write_checkpoint(tmp_path / "s.bin", st, GRID)
    assert path.read_bytes()[:8] == CHECKPOINT_MAGIC
    back, grid = read_checkpoint(path)
    assert np.array_equal(back.f.G, st.f.G) and np.array_equal(back.f.H, st.f.H)
    assert back.vgrid == st.vgrid and back.time == 3.25 and back.step_count == 41
    assert grid == GRID


def test_checkpoint_rejects_garbage(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"NOTACHECKPOINT" * 10)
    with pytest.raises(ValueError):
        read_checkpoint(p)


def test_blowup_is_reported_with_dump():
    solver = BgkSolver(small_config())
    G = solver.state.f.G.copy()
    G[3, 5, 5] = -1.0
    with pytest.raises(NumericalBlowupError) as info:
        solver._clean(ReducedDistributionPair(G, solver.state.f.H))
    assert info.value.dump["step"] == 0


def test_series_csv_and_manifest(tmp_path):
    cfg = small_config(t_end=0.5, sample_interval=0.25, snapshot_times=(0.5,))
    ser = run(cfg)
    p = ser.write_csv(tmp_path / "series.csv")
    assert p.read_text().splitlines()[0] == "t,theta_av,u2_av,entropy,mass"
    snaps = write_snapshots(tmp_path, ser, cfg.grid)
    assert len(snaps) == 1
    man = write_manifest(tmp_path / "m.txt", "kn = 0.1\n", ser.final_state, ["series.csv"])
    assert "config_sha256" in man.read_text()


def test_timeseries_append_and_lookup():
    ts = TimeSeries()
    ts.append(0.0, 1.0, 0.0, -1.0, 1.0)
    ts.append(1.0, 2.0, 0.1, -1.1, 1.0)
    assert ts.as_array().shape == (2, 5)
    assert ts.value_at("theta_av", 0.9) == 2.0
    with pytest.raises(ValueError):
        ts.append(1.0, 2.0, 0.1, -1.1, 1.0)
