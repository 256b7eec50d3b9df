"""Direct simulation Monte Carlo for hard spheres on [-1/4, 1/4] with specular walls.

Units match the BGK solver: density 1, temperature 1 initially, velocities in
units of the thermal speed √(RT0), lengths in units of the force period.

Hard-sphere kernel
------------------
The mean free path of a hard-sphere gas at rest is λ = 1/(√2 π d² n0).  Taking
λ = Kn and n0 = 1 fixes the total cross section σ = π d² = 1/(√2 Kn).  The
equilibrium collision frequency per molecule at temperature θ is then

    ν_eq = n σ ⟨|v_r|⟩ = n σ · 4 √(θ/π) = 4 n √θ / (√(2π) Kn),

which at θ = 1 equals (8/π)^{1/2}/Kn, the BGK collision frequency.

Pair selection (no-time-counter)
--------------------------------
Each simulator particle stands for W = n0 · (1/2) / N_particles molecules per
unit cross-sectional area.  In a cell of width Δx holding N particles,

    N_cand = (1/2) N (N - 1) W (σ v_r)_max dt / Δx

candidate pairs (rounded stochastically) are drawn uniformly and accepted with
probability v_r / v_r,max.  The majorant v_r,max is kept per cell and raised
whenever a candidate exceeds it.  Accepted pairs keep their centre-of-mass
velocity and get a relative velocity of unchanged length in a uniformly
random direction.

Time stepping
-------------
Kick-drift-kick: v2 += (dt/2) f0 sin 2πx1, x1 += dt v1 with specular
reflection, v2 += (dt/2) f0 sin 2πx1 at the new position, then collisions.
All random numbers come from one ``numpy.random.Generator`` per run, so a run
is reproducible from its seed.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

__all__ = [
    "DsmcConfig",
    "ParticleEnsemble",
    "RunSeries",
    "RunAverager",
    "DsmcRunError",
    "cross_section",
    "equilibrium_collision_frequency",
    "init_particles",
    "move_and_reflect",
    "collide_cells",
    "cell_moments",
    "run_single",
    "run_ensemble",
    "worker_count",
]

log = logging.getLogger(__name__)

WORKERS_ENV = "VISCOUS_HEATING_WORKERS"


class DsmcRunError(RuntimeError):
    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed


@dataclass
class DsmcConfig:
    kn: float
    f0: float
    n_cells: int = 50
    particles_per_cell: int = 100
    dt: float | None = None
    t_end: float = 10.0
    n_ensemble: int = 8
    time_avg_window: float = 0.0
    rng_seed: int = 12345
    sample_interval: float = 1.0
    # shrink dt as 1/√θ_max so the hottest cells keep the same collision resolution
    adapt_dt: bool = True

    def __post_init__(self):
        if self.dt is None:
            self.dt = 0.2 * self.kn
        for name in ("kn", "n_cells", "particles_per_cell", "dt", "t_end", "n_ensemble",
                     "sample_interval"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.time_avg_window < 0:
            raise ValueError("time_avg_window must be non-negative")
        if self.particles_per_cell < 20:
            raise ValueError("particles_per_cell must be at least 20 for usable cell statistics")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")

    @property
    def n_particles(self) -> int:
        return self.n_cells * self.particles_per_cell


@dataclass
class ParticleEnsemble:
    x: np.ndarray
    v: np.ndarray
    weight: float
    n_cells: int

    @property
    def dx(self) -> float:
        return 0.5 / self.n_cells

    def cell_index(self) -> np.ndarray:
        return np.minimum(((self.x + 0.25) / self.dx).astype(np.int64), self.n_cells - 1)

    def momentum(self) -> np.ndarray:
        return self.v.sum(axis=0)

    def energy(self) -> float:
        return float(0.5 * np.sum(self.v * self.v))


def cross_section(kn: float) -> float:
    return 1.0 / (np.sqrt(2.0) * kn)


def equilibrium_collision_frequency(kn: float, theta: float = 1.0, n: float = 1.0) -> float:
    return 4.0 * n * np.sqrt(theta) / (np.sqrt(2.0 * np.pi) * kn)


def init_particles(cfg: DsmcConfig, rng: np.random.Generator) -> ParticleEnsemble:
    """Stratified positions (ppc per cell) and Maxwellian velocities at θ = 1."""
    n = cfg.n_particles
    dx = 0.5 / cfg.n_cells
    cells = np.repeat(np.arange(cfg.n_cells), cfg.particles_per_cell)
    x = -0.25 + (cells + rng.random(n)) * dx
    v = rng.standard_normal((n, 3))
    return ParticleEnsemble(x, v, 0.5 / n, cfg.n_cells)


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _kdk(x, v, f0, dt):
    n = x.shape[0]
    tp = 2.0 * np.pi
    for p in range(n):
        v[p, 1] += 0.5 * dt * f0 * np.sin(tp * x[p])
        # unfold to the mirrored period [0, 1) of y = x + 1/4
        y = x[p] + 0.25 + dt * v[p, 0]
        y = y - np.floor(y)
        if y > 0.5:
            y = 1.0 - y
            v[p, 0] = -v[p, 0]
        x[p] = y - 0.25
        v[p, 1] += 0.5 * dt * f0 * np.sin(tp * x[p])


@njit(cache=True)
def _collide(v, order, starts, n_cand, vr_max, u_pick, u_acc, u_dir):
    """Run NTC candidates cell by cell; returns the number of accepted collisions.

    ``order`` lists particle indices sorted by cell, ``starts`` the offsets.
    The random arrays hold, per candidate, two picks, one acceptance draw and
    two direction draws, consumed in order.
    """
    n_cells = starts.shape[0] - 1
    r = 0
    accepted = 0
    for c in range(n_cells):
        s = starts[c]
        nc = starts[c + 1] - s
        for q in range(n_cand[c]):
            i = order[s + int(u_pick[r, 0] * nc)]
            j = order[s + int(u_pick[r, 1] * (nc - 1))]
            if j == i:
                j = order[s + nc - 1]
            g0 = v[i, 0] - v[j, 0]
            g1 = v[i, 1] - v[j, 1]
            g2 = v[i, 2] - v[j, 2]
            vr = np.sqrt(g0 * g0 + g1 * g1 + g2 * g2)
            if vr > vr_max[c]:
                vr_max[c] = vr
            if u_acc[r] * vr_max[c] < vr:
                cost = 2.0 * u_dir[r, 0] - 1.0
                sint = np.sqrt(max(0.0, 1.0 - cost * cost))
                phi = 2.0 * np.pi * u_dir[r, 1]
                m0 = 0.5 * (v[i, 0] + v[j, 0])
                m1 = 0.5 * (v[i, 1] + v[j, 1])
                m2 = 0.5 * (v[i, 2] + v[j, 2])
                h0 = 0.5 * vr * cost
                h1 = 0.5 * vr * sint * np.cos(phi)
                h2 = 0.5 * vr * sint * np.sin(phi)
                v[i, 0] = m0 + h0
                v[i, 1] = m1 + h1
                v[i, 2] = m2 + h2
                v[j, 0] = m0 - h0
                v[j, 1] = m1 - h1
                v[j, 2] = m2 - h2
                accepted += 1
            r += 1
    return accepted


# ---------------------------------------------------------------- operations

def move_and_reflect(p: ParticleEnsemble, f0: float, dt: float) -> ParticleEnsemble:
    """Leapfrog kick-drift-kick with specular walls (in place; returns ``p``)."""
    _kdk(p.x, p.v, float(f0), float(dt))
    return p


def _sorted_cells(p: ParticleEnsemble):
    cell = p.cell_index()
    order = np.argsort(cell, kind="stable")
    counts = np.bincount(cell, minlength=p.n_cells)
    starts = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return order.astype(np.int64), starts, counts


def collide_cells(p: ParticleEnsemble, kn: float, dt: float, rng: np.random.Generator,
                  vr_max: np.ndarray | None = None) -> int:
    """One NTC collision pass over all cells (in place).  Returns accepted collisions.

    ``vr_max`` holds the per-cell majorant of the relative speed and is
    updated in place; it is initialised to 6√2 when not supplied.
    """
    if not isinstance(rng, np.random.Generator):
        raise ValueError("collide_cells needs a numpy Generator")
    if vr_max is None:
        vr_max = np.full(p.n_cells, 6.0 * np.sqrt(2.0))
    order, starts, counts = _sorted_cells(p)
    sigma = cross_section(kn)
    expected = 0.5 * counts * np.maximum(counts - 1, 0) * p.weight * sigma * vr_max * dt / p.dx
    n_cand = np.floor(expected + rng.random(p.n_cells)).astype(np.int64)
    n_cand[counts < 2] = 0
    total = int(n_cand.sum())
    u_pick = rng.random((total, 2))
    u_acc = rng.random(total)
    u_dir = rng.random((total, 2))
    return int(_collide(p.v, order, starts, n_cand, vr_max, u_pick, u_acc, u_dir))


def cell_moments(p: ParticleEnsemble):
    """Per-cell (density, mean velocity (n,3), temperature) with unbiased variance."""
    cell = p.cell_index()
    counts = np.bincount(cell, minlength=p.n_cells).astype(float)
    safe = np.maximum(counts, 1.0)
    mean = np.stack([np.bincount(cell, p.v[:, i], p.n_cells) for i in range(3)], axis=1) / safe[:, None]
    dev = p.v - mean[cell]
    ss = np.bincount(cell, (dev * dev).sum(axis=1), p.n_cells)
    theta = ss / (3.0 * np.maximum(counts - 1.0, 1.0))
    rho = counts * p.weight / p.dx
    return rho, mean, theta


@dataclass
class RunSeries:
    seed: int
    times: list = field(default_factory=list)
    theta_av: list = field(default_factory=list)
    u2_av: list = field(default_factory=list)
    collisions: int = 0
    steps: int = 0

    def write_csv(self, path) -> Path:
        path = Path(path)
        np.savetxt(path, np.column_stack([self.times, self.theta_av, self.u2_av]), delimiter=",",
                   header="t,theta_av,u2_av", comments="", fmt="%.12e")
        return path


def _record(series: RunSeries, p: ParticleEnsemble, t: float):
    _, mean, theta = cell_moments(p)
    series.times.append(float(t))
    series.theta_av.append(float(theta.mean()))
    series.u2_av.append(float(np.abs(mean[:, 1]).mean()))


def run_single(cfg: DsmcConfig, seed: int) -> RunSeries:
    """One independent run from M_(1,0,1), sampled every ``sample_interval``."""
    rng = np.random.default_rng(seed)
    p = init_particles(cfg, rng)
    vr_max = np.full(cfg.n_cells, 6.0 * np.sqrt(2.0))
    series = RunSeries(seed)
    t = 0.0
    _record(series, p, t)
    n_samples = int(np.floor(cfg.t_end / cfg.sample_interval + 1e-9))
    theta_max = 1.0
    for k in range(1, n_samples + 1):
        t_next = k * cfg.sample_interval
        while t < t_next * (1 - 1e-13):
            dt = cfg.dt / np.sqrt(max(theta_max, 1.0)) if cfg.adapt_dt else cfg.dt
            dt = min(dt, t_next - t)
            move_and_reflect(p, cfg.f0, dt)
            series.collisions += collide_cells(p, cfg.kn, dt, rng, vr_max)
            t += dt
            series.steps += 1
        if not (np.all(np.isfinite(p.v)) and np.all(np.abs(p.x) <= 0.25 + 1e-12)):
            raise DsmcRunError(f"run with seed {seed} produced invalid particles at t={t:g}", seed)
        t = t_next
        _record(series, p, t)
        theta_max = max(theta_max, float(np.max(cell_moments(p)[2])))
    return series


@dataclass
class RunAverager:
    runs: list
    times: np.ndarray = None
    theta_av_mean: np.ndarray = None
    theta_av_se: np.ndarray = None
    u2_av_mean: np.ndarray = None
    u2_av_se: np.ndarray = None
    window: float = 0.0

    def __post_init__(self):
        if len(self.runs) < 2:
            raise ValueError("standard errors need at least two runs")
        self.times = np.asarray(self.runs[0].times)
        th = np.array([r.theta_av for r in self.runs])
        u2 = np.array([r.u2_av for r in self.runs])
        if self.window > 0:
            th = np.array([_centred_average(self.times, row, self.window) for row in th])
            u2 = np.array([_centred_average(self.times, row, self.window) for row in u2])
        n = len(self.runs)
        self.theta_av_mean = th.mean(axis=0)
        self.theta_av_se = th.std(axis=0, ddof=1) / np.sqrt(n)
        self.u2_av_mean = u2.mean(axis=0)
        self.u2_av_se = u2.std(axis=0, ddof=1) / np.sqrt(n)

    @property
    def seeds(self) -> list:
        return [r.seed for r in self.runs]

    def write_csv(self, path) -> Path:
        path = Path(path)
        data = np.column_stack([self.times, self.theta_av_mean, self.theta_av_se,
                                self.u2_av_mean, self.u2_av_se])
        np.savetxt(path, data, delimiter=",", comments="", fmt="%.12e",
                   header="t,theta_av_mean,theta_av_se,u2_av_mean,u2_av_se")
        return path


def _centred_average(t: np.ndarray, y: np.ndarray, half_width: float) -> np.ndarray:
    # mean over samples in [t - half_width, t + half_width]
    out = np.empty(len(t))
    cs = np.concatenate([[0.0], np.cumsum(y)])
    lo = np.searchsorted(t, t - half_width, side="left")
    hi = np.searchsorted(t, t + half_width, side="right")
    out[:] = (cs[hi] - cs[lo]) / (hi - lo)
    return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_seed(args):
    cfg, seed = args
    try:
        return run_single(cfg, seed)
    except DsmcRunError:
        raise
    except Exception as exc:  # keep the seed with any failure
        raise DsmcRunError(f"run with seed {seed} failed: {exc}", seed) from exc


def run_ensemble(cfg: DsmcConfig, workers: int | None = None) -> RunAverager:
    """``n_ensemble`` independent runs with seeds derived from ``rng_seed``.

    Runs are spread over ``workers`` processes (default from the
    VISCOUS_HEATING_WORKERS environment variable, else 1).  The optional
    time average uses the centred window [t - W, t + W], W = time_avg_window.
    """
    seeds = [int(s) for s in np.random.SeedSequence(cfg.rng_seed).generate_state(cfg.n_ensemble)]
    workers = workers or worker_count()
    jobs = [(cfg, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_seed, jobs))
    else:
        runs = [_run_seed(j) for j in jobs]
    return RunAverager(runs, window=cfg.time_avg_window)
