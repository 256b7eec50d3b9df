"""Deterministic solver for the forced BGK problem on the half period [-1/4, 1/4].

    ∂t F + v1 ∂x F + f0 sin(2πx1) ∂v2 F = (8/π)^{1/2} (ρ/Kn) (M[F] - F)

with specular reflection at x1 = ±1/4 and initial data M_(1,0,1).  The
distribution is stored in the reduced (G, H) form of :mod:`kinetic_core`.

One step of size dt is the symmetric composition

    T(dt/2) A(dt/2) C(dt) A(dt/2) T(dt/2)

with T streaming in x1, A the acceleration in v2 and C the exact exponential
relaxation towards the discrete Maxwellian of the current moments.

Streaming uses the mirror trick: the half domain together with its reflection
(x1 -> -x1 about a wall, v1 -> -v1) is a periodic domain of twice the length,
so specular walls need no special flux.  The shift of each v1 slice is split
into a whole number of cells, applied exactly, and a remainder advected with
a minmod-limited second-order upwind flux.  Because of that split the streaming
step is stable for any dt, and the step size is set by the collision and
acceleration terms only.  ``large_step_transport=False`` restores the
classical CFL restriction instead.
"""
from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._kernels import accelerate_v2, relax_towards, transport_specular
from .kinetic_core import (
    DegenerateStateError,
    MacroFields,
    ParameterError,
    ReducedDistributionPair,
    SpatialGrid1D,
    VelocityGrid2D,
    cell_entropy,
    conserved_moments,
    discrete_maxwellian,
    match_moments,
    moments,
    write_profile_csv,
)

__all__ = [
    "StepSizeError",
    "GridCoverageError",
    "NumericalBlowupError",
    "BgkConfig",
    "SolverState",
    "TimeSeries",
    "BgkSolver",
    "collision_frequency",
    "collision_relax",
    "transport_step",
    "force_step",
    "specular_walls",
    "remap_velocity_grid",
    "initial_state",
    "run",
    "write_checkpoint",
    "read_checkpoint",
    "write_manifest",
    "CHECKPOINT_MAGIC",
]

log = logging.getLogger(__name__)

SQRT_8_OVER_PI = float(np.sqrt(8.0 / np.pi))
CHECKPOINT_MAGIC = b"VHBGK001"
# magic, n_cells, n_v1, n_v2, step_count, time, v_max, scale, x_min, x_max
_HEADER = struct.Struct("<8s3iq5d")

COVERAGE_TOL = 1e-8      # boundary-node mass fraction that forces a remap
BLOWUP_TOL = 1e-6        # negative values beyond this fraction of the local max


class StepSizeError(ValueError):
    pass


class GridCoverageError(RuntimeError):
    """Distribution mass reached the edge of the velocity grid."""


class NumericalBlowupError(FloatingPointError):
    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


@dataclass
class BgkConfig:
    kn: float
    f0: float
    grid: SpatialGrid1D = field(default_factory=lambda: SpatialGrid1D(100))
    vgrid: VelocityGrid2D = field(default_factory=lambda: VelocityGrid2D(64, 64, 6.0))
    dt_cfl: float = 0.5
    t_end: float = 1.0
    sample_interval: float = 0.1
    remap_trigger: float = 1.2
    # dt * (largest collision frequency); exact relaxation is stable for any
    # value, this only bounds the splitting error
    collision_number: float = 0.4
    large_step_transport: bool = True
    snapshot_times: tuple = ()
    check_entropy: bool = False
    max_steps: int = 0

    def __post_init__(self):
        if not self.kn > 0:
            raise ParameterError(f"kn must be positive, got {self.kn}")
        if not self.t_end > 0:
            raise ParameterError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.dt_cfl <= 1:
            raise ParameterError(f"dt_cfl must lie in (0, 1], got {self.dt_cfl}")
        if not self.sample_interval > 0:
            raise ParameterError("sample_interval must be positive")
        if not self.remap_trigger > 1:
            raise ParameterError("remap_trigger must exceed 1")
        if not self.collision_number > 0:
            raise ParameterError("collision_number must be positive")
        if not self.vgrid.is_symmetric():
            raise ParameterError("specular walls need a v1-symmetric velocity grid")
        self.snapshot_times = tuple(sorted(float(t) for t in self.snapshot_times))


@dataclass
class SolverState:
    f: ReducedDistributionPair
    vgrid: VelocityGrid2D
    time: float = 0.0
    step_count: int = 0
    scale_history: list = field(default_factory=list)
    remap_events: list = field(default_factory=list)
    clip_count: int = 0
    entropy_violations: int = 0

    def __post_init__(self):
        if not self.scale_history:
            self.scale_history.append((self.time, self.vgrid.scale))


@dataclass
class TimeSeries:
    times: list = field(default_factory=list)
    theta_av: list = field(default_factory=list)
    u2_av: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final_state: SolverState | None = None

    def append(self, t, theta_av, u2_av, ent, mass):
        if self.times and not t > self.times[-1]:
            raise ValueError(f"sample time {t} does not advance past {self.times[-1]}")
        self.times.append(float(t))
        self.theta_av.append(float(theta_av))
        self.u2_av.append(float(u2_av))
        self.entropy.append(float(ent))
        self.mass.append(float(mass))

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.times, self.theta_av, self.u2_av, self.entropy, self.mass])

    def value_at(self, name: str, t: float) -> float:
        """Sampled value of ``name`` at the sample time closest to ``t``."""
        times = np.asarray(self.times)
        return float(np.asarray(getattr(self, name))[np.argmin(np.abs(times - t))])

    def write_csv(self, path) -> Path:
        path = Path(path)
        np.savetxt(path, self.as_array(), delimiter=",", header="t,theta_av,u2_av,entropy,mass",
                   comments="", fmt="%.12e")
        return path


# ---------------------------------------------------------------- substeps

def collision_frequency(rho, kn: float) -> np.ndarray:
    return SQRT_8_OVER_PI * np.asarray(rho) / kn


def _conserved_from_macro(macro: MacroFields) -> np.ndarray:
    rho = np.asarray(macro.rho)
    u1, u2, th = np.asarray(macro.u1), np.asarray(macro.u2), np.asarray(macro.theta)
    return np.stack([rho, rho * u1, rho * u2, rho * (u1 * u1 + u2 * u2 + 3.0 * th)], axis=1)


def collision_relax(f: ReducedDistributionPair, macro: MacroFields, kn: float, dt: float,
                    vgrid: VelocityGrid2D) -> ReducedDistributionPair:
    """Exact relaxation F <- M + (F - M) exp(-ν dt) towards the discrete Maxwellian."""
    M = discrete_maxwellian(_conserved_from_macro(macro), vgrid)
    decay = np.exp(-collision_frequency(macro.rho, kn) * dt)
    G = np.ascontiguousarray(f.G)
    H = np.ascontiguousarray(f.H)
    outG = np.empty_like(G)
    outH = np.empty_like(H)
    relax_towards(G, H, M.G, M.H, decay, outG, outH)
    return ReducedDistributionPair(outG, outH)


def transport_step(f: ReducedDistributionPair, grid: SpatialGrid1D, vgrid: VelocityGrid2D,
                   dt: float, dt_cfl: float = 1.0, large_step: bool = False
                   ) -> ReducedDistributionPair:
    """Stream in x1 for time dt with specular walls (minmod second-order upwind)."""
    if not large_step:
        limit = dt_cfl * grid.dx / vgrid.half_width
        if dt > limit * (1 + 1e-12):
            raise StepSizeError(f"dt={dt:g} exceeds the streaming CFL limit {limit:g}")
    if not vgrid.is_symmetric():
        raise ParameterError("specular walls need a v1-symmetric velocity grid")
    G = np.ascontiguousarray(f.G)
    H = np.ascontiguousarray(f.H)
    outG = np.empty_like(G)
    outH = np.empty_like(H)
    transport_specular(G, H, vgrid.v1 * (dt / grid.dx), outG, outH)
    return ReducedDistributionPair(outG, outH)


def _force_targets(m: np.ndarray, accel: np.ndarray, dt: float) -> np.ndarray:
    # exact effect of a uniform shift v2 -> v2 + a dt on the conserved moments
    dv = accel * dt
    out = m.copy()
    out[:, 2] += m[:, 0] * dv
    out[:, 3] += 2.0 * m[:, 2] * dv + m[:, 0] * dv * dv
    return out


def force_step(f: ReducedDistributionPair, vgrid: VelocityGrid2D, f0: float, dt: float,
               x1: np.ndarray, dt_cfl: float = 1.0, correct_moments: bool = True
               ) -> ReducedDistributionPair:
    """Accelerate each cell along v2 by f0 sin(2πx1) for time dt.

    The limited advection keeps the cell mass exactly; with
    ``correct_moments`` the momentum and energy are then set to their exact
    post-shift values by a small polynomial correction.
    """
    accel = f0 * np.sin(2.0 * np.pi * np.asarray(x1, dtype=float))
    if not np.any(accel != 0.0):
        return f.copy()
    disp = accel * dt / vgrid.dv2
    if np.max(np.abs(disp), initial=0.0) > dt_cfl * (1 + 1e-12):
        raise StepSizeError(f"acceleration moves {np.max(np.abs(disp)):.3g} v2 cells per step")
    G = np.ascontiguousarray(f.G)
    H = np.ascontiguousarray(f.H)
    outG = np.empty_like(G)
    outH = np.empty_like(H)
    accelerate_v2(G, H, disp, outG, outH)
    out = ReducedDistributionPair(outG, outH)
    edge = outG[:, :, 0].sum(axis=1) + outG[:, :, -1].sum(axis=1)
    cell = outG.sum(axis=(1, 2))
    frac = edge / np.where(cell > 0, cell, 1.0)
    if np.any(frac > COVERAGE_TOL):
        i = int(np.argmax(frac))
        raise GridCoverageError(f"cell {i} has {frac[i]:.2e} of its mass at the v2 grid edge")
    if correct_moments:
        target = _force_targets(conserved_moments(f, vgrid), accel, dt)
        out = match_moments(out, target, vgrid)
    return out


def specular_walls(f: ReducedDistributionPair, vgrid: VelocityGrid2D, n_ghost: int = 2
                   ) -> ReducedDistributionPair:
    """Return f padded with ``n_ghost`` specular ghost cells at each wall.

    The ghost cell k outside a wall holds the interior cell k inside it with
    v1 reversed, so the wall state satisfies F(v) = F(Rv) for incoming
    velocities and the net mass flux through the wall vanishes.
    """
    if not vgrid.is_symmetric():
        raise ParameterError("specular walls need a v1-symmetric velocity grid")
    n = n_ghost
    lo_G = f.G[:n][::-1, ::-1]
    hi_G = f.G[-n:][::-1, ::-1]
    lo_H = f.H[:n][::-1, ::-1]
    hi_H = f.H[-n:][::-1, ::-1]
    return ReducedDistributionPair(np.concatenate([lo_G, f.G, hi_G]),
                                   np.concatenate([lo_H, f.H, hi_H]))


def _interp_matrix(x_old: np.ndarray, x_new: np.ndarray) -> np.ndarray:
    # linear interpolation of point values, constant beyond the old grid
    W = np.zeros((len(x_new), len(x_old)))
    h = x_old[1] - x_old[0]
    pos = np.clip((x_new - x_old[0]) / h, 0.0, len(x_old) - 1.0)
    k = np.minimum(np.floor(pos).astype(int), len(x_old) - 2)
    t = pos - k
    rows = np.arange(len(x_new))
    W[rows, k] = 1.0 - t
    W[rows, k + 1] += t
    return W


def remap_velocity_grid(f: ReducedDistributionPair, old: VelocityGrid2D, new: VelocityGrid2D
                        ) -> tuple[ReducedDistributionPair, float]:
    """Move (G, H) onto ``new`` keeping the conserved moments.

    The ratio of f to the discrete Maxwellian of its own moments is smooth
    and non-negative, so it is interpolated instead of f itself and then
    multiplied by the Maxwellian on the new grid.  A Maxwellian is carried
    over exactly and positivity is kept.  Returns the remapped pair and the
    relative moment defect before the final correction.
    """
    before = conserved_moments(f, old)
    M_old = discrete_maxwellian(before, old)
    M_new = discrete_maxwellian(before, new)
    W1 = _interp_matrix(old.v1, new.v1)
    W2 = _interp_matrix(old.v2, new.v2)
    tiny = np.finfo(float).tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        rG = np.where(M_old.G > tiny, f.G / M_old.G, 0.0)
        rH = np.where(M_old.H > tiny, f.H / M_old.H, 0.0)
    G = M_new.G * np.einsum("aj,ijk,bk->iab", W1, rG, W2, optimize=True)
    H = M_new.H * np.einsum("aj,ijk,bk->iab", W1, rH, W2, optimize=True)
    out = ReducedDistributionPair(G, H)
    after = conserved_moments(out, new)
    ref = np.maximum(np.abs(before), before[:, [0]])
    defect = float(np.max(np.abs(after - before) / ref))
    return match_moments(out, before, new), defect


# ---------------------------------------------------------------- driver

def initial_state(config: BgkConfig) -> SolverState:
    """M_(1,0,1) in every cell, taken as the discrete Maxwellian with exact moments."""
    n = config.grid.n_cells
    target = np.tile([1.0, 0.0, 0.0, 3.0], (n, 1))
    return SolverState(discrete_maxwellian(target, config.vgrid), config.vgrid)


class BgkSolver:
    """Step-by-step driver; :func:`run` wraps it for whole runs."""

    def __init__(self, config: BgkConfig, state: SolverState | None = None):
        self.config = config
        self.grid = config.grid
        self.x = config.grid.centers
        self.state = state if state is not None else initial_state(config)
        self._lag = 0.0
        self._last_macro = None
        if self.state.f.n_cells != self.grid.n_cells:
            raise ParameterError("state and spatial grid disagree on the number of cells")

    @property
    def vgrid(self) -> VelocityGrid2D:
        return self.state.vgrid

    def macro(self) -> MacroFields:
        m = moments(self.state.f, self.vgrid)
        m.time = self.state.time
        return m

    def time_step(self, macro: MacroFields | None = None) -> float:
        cfg = self.config
        macro = macro if macro is not None else self.macro()
        dt = cfg.collision_number / float(np.max(collision_frequency(macro.rho, cfg.kn)))
        if cfg.f0 != 0.0:
            dt = min(dt, cfg.dt_cfl * self.vgrid.dv2 / abs(cfg.f0))
        if not cfg.large_step_transport:
            dt = min(dt, cfg.dt_cfl * self.grid.dx / self.vgrid.half_width)
        return dt

    # ---- substeps with state bookkeeping
    def _stream(self, f, dt):
        cfg = self.config
        return transport_step(f, self.grid, self.vgrid, dt, cfg.dt_cfl, cfg.large_step_transport)

    def _accelerate(self, f, dt):
        if self.config.f0 == 0.0:
            return f
        return force_step(f, self.vgrid, self.config.f0, dt, self.x, self.config.dt_cfl)

    def _collide(self, f, dt):
        macro = moments(f, self.vgrid)
        self._last_macro = macro
        out = collision_relax(f, macro, self.config.kn, dt, self.vgrid)
        if self.config.check_entropy:
            before = cell_entropy(f, self.vgrid)
            after = cell_entropy(out, self.vgrid)
            bad = after > before + 1e-12 * np.maximum(1.0, np.abs(before))
            self.state.entropy_violations += int(bad.sum())
        return out

    def _clean(self, f: ReducedDistributionPair) -> ReducedDistributionPair:
        G, H = f.G, f.H
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(H))):
            raise NumericalBlowupError("non-finite distribution values", self._dump(f))
        gmin = G.min(axis=(1, 2))
        hmin = H.min(axis=(1, 2))
        if np.all(gmin >= 0) and np.all(hmin >= 0):
            return f
        gmax = G.max(axis=(1, 2))
        hmax = H.max(axis=(1, 2))
        worst = np.minimum(gmin / gmax, hmin / np.where(hmax > 0, hmax, 1.0))
        if np.any(worst < -BLOWUP_TOL):
            i = int(np.argmin(worst))
            raise NumericalBlowupError(
                f"negative distribution {worst[i]:.3e} (relative) in cell {i}", self._dump(f))
        neg = (G < 0) | (H < 0)
        self.state.clip_count += int(neg.sum())
        G = np.where(neg, 0.0, G)
        H = np.where(neg, 0.0, H)
        return ReducedDistributionPair(G, H)

    def _dump(self, f) -> dict:
        s = self.state
        dump = {"time": s.time, "step": s.step_count, "scale": self.vgrid.scale,
                "G_min": float(np.nanmin(f.G)), "G_max": float(np.nanmax(f.G)),
                "H_min": float(np.nanmin(f.H)), "H_max": float(np.nanmax(f.H))}
        try:
            m = moments(s.f, self.vgrid)
            dump.update(rho=m.rho, u1=m.u1, u2=m.u2, theta=m.theta)
        except (DegenerateStateError, FloatingPointError):
            pass
        return dump

    def _required_scale(self, macro: MacroFields) -> float:
        speed = np.maximum(np.abs(macro.u1), np.abs(macro.u2))
        return float(np.max(np.sqrt(macro.theta) + speed / self.vgrid.v_max))

    def maybe_remap(self, macro: MacroFields | None = None, force: bool = False) -> bool:
        """Widen the velocity grid when the gas has heated past its coverage.

        Triggers when θ_av exceeds remap_trigger² · scale², or when some cell
        needs more than v_max thermal radii beyond its mean velocity.
        """
        macro = macro if macro is not None else self.macro()
        scale = self.vgrid.scale
        theta_av = float(np.mean(macro.theta))
        need = self._required_scale(macro)
        trig = self.config.remap_trigger
        if not (force or theta_av > trig**2 * scale**2 or need > scale):
            return False
        new_scale = trig * max(np.sqrt(theta_av), need, scale if force else 0.0)
        new = self.vgrid.rescaled(new_scale)
        f, defect = remap_velocity_grid(self.state.f, self.vgrid, new)
        self.state.f = self._clean(f)
        self.state.vgrid = new
        self.state.scale_history.append((self.state.time, new_scale))
        self.state.remap_events.append({"time": self.state.time, "old_scale": scale,
                                        "new_scale": new_scale, "defect": defect})
        log.info("remap at t=%.4g: scale %.4g -> %.4g (defect %.2e)",
                 self.state.time, scale, new_scale, defect)
        return True

    def step(self, dt: float, fuse: bool = False):
        """Advance one symmetric step.

        With ``fuse`` the closing half streaming is left pending and merged
        into the opening half of the next step (or applied by :meth:`flush`).
        """
        h = 0.5 * dt
        f = self._stream(self.state.f, self._lag + h)
        self._lag = 0.0
        for attempt in range(3):
            try:
                g = self._accelerate(f, h)
                break
            except GridCoverageError:
                self.state.f = f
                self.maybe_remap(force=True)
                f = self.state.f
        else:
            raise GridCoverageError("velocity grid could not be widened enough")
        g = self._collide(g, dt)
        g = self._accelerate(g, h)
        if fuse:
            self._lag = h
        else:
            g = self._stream(g, h)
        self.state.f = self._clean(g)
        self.state.time += dt
        self.state.step_count += 1

    def flush(self):
        """Apply any pending streaming so that ``state.f`` is at ``state.time``."""
        if self._lag:
            self.state.f = self._clean(self._stream(self.state.f, self._lag))
            self._lag = 0.0

    def advance(self, t_target: float, series: TimeSeries | None = None,
                sample_times=(), snapshot_times=()) -> None:
        """Step until ``t_target``, landing exactly on the given sample times."""
        cfg = self.config
        raw = sorted(set(float(t) for t in list(sample_times) + list(snapshot_times)
                         if t > self.state.time) | {float(t_target)})
        # k * interval and t_end can differ in the last bits; keep one, t_target first
        t_target = float(t_target)
        events = []
        for t in raw:
            if events and t - events[-1] < 1e-9 * max(1.0, t):
                events[-1] = t_target if events[-1] == t_target else t
            else:
                events.append(t)
        snaps = set(float(t) for t in snapshot_times)
        for t_event in events:
            while self.state.time < t_event * (1 - 1e-13):
                if cfg.max_steps and self.state.step_count >= cfg.max_steps:
                    self.flush()
                    return
                macro = self._last_macro if self._last_macro is not None else self.macro()
                if self.maybe_remap(macro):
                    macro = self.macro()
                remaining = t_event - self.state.time
                dt = self.time_step(macro)
                last = dt >= remaining * (1 - 1e-12)
                self.step(min(dt, remaining), fuse=not last)
            self.flush()
            # the next step is sized from the flushed state, exactly as after a restart
            self._last_macro = None
            if abs(self.state.time - t_event) < 1e-9 * max(1.0, t_event):
                self.state.time = t_event
            if series is not None:
                self.record(series, snapshot=any(abs(t_event - t) < 1e-9 * max(1.0, t)
                                                  for t in snaps))

    def record(self, series: TimeSeries, snapshot: bool = False) -> MacroFields:
        m = self.macro()
        ent = float(cell_entropy(self.state.f, self.vgrid).mean())
        # averages 2∫ over the half period equal plain cell means
        series.append(self.state.time, np.mean(m.theta), np.mean(np.abs(m.u2)), ent, np.mean(m.rho))
        if snapshot:
            series.snapshots.append(m)
        return m


def run(config: BgkConfig, state: SolverState | None = None) -> TimeSeries:
    """Integrate from M_(1,0,1) (or ``state``) to ``config.t_end``.

    θ_av, |u2|_av, the entropy surrogate (per unit length) and the mean
    density are sampled every ``sample_interval``, and macroscopic profiles
    are kept at ``snapshot_times``.
    """
    solver = BgkSolver(config, state)
    series = TimeSeries()
    t0 = solver.state.time
    if t0 in config.snapshot_times or t0 == 0.0:
        solver.record(series, snapshot=t0 in config.snapshot_times)
    n = int(np.floor((config.t_end - t0) / config.sample_interval + 1e-9))
    samples = [t0 + k * config.sample_interval for k in range(1, n + 1)]
    solver.advance(config.t_end, series, samples, [t for t in config.snapshot_times if t > t0])
    if series.times and series.times[-1] < solver.state.time:
        solver.record(series)
    series.final_state = solver.state
    return series


# ---------------------------------------------------------------- files

def write_checkpoint(path, state: SolverState, grid: SpatialGrid1D) -> Path:
    """Binary checkpoint: fixed little-endian header, then G and H row-major float64."""
    path = Path(path)
    vg = state.vgrid
    n = state.f.n_cells
    header = _HEADER.pack(CHECKPOINT_MAGIC, n, vg.n_v1, vg.n_v2, state.step_count,
                          state.time, vg.v_max, vg.scale, grid.x_min, grid.x_max)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.f.G, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.f.H, dtype="<f8").tobytes())
    return path


def read_checkpoint(path) -> tuple[SolverState, SpatialGrid1D]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: too short for a checkpoint header")
    magic, n, n1, n2, steps, t, v_max, scale, x_min, x_max = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a BGK checkpoint (magic {magic!r})")
    size = n * n1 * n2
    if len(data) != _HEADER.size + 16 * size:
        raise ValueError(f"{path}: payload size does not match header dims {n}x{n1}x{n2}")
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(float)
    G = arr[:size].reshape(n, n1, n2)
    H = arr[size:].reshape(n, n1, n2)
    vgrid = VelocityGrid2D(n1, n2, v_max, scale)
    state = SolverState(ReducedDistributionPair(G, H), vgrid, time=t, step_count=steps)
    return state, SpatialGrid1D(n, x_min, x_max)


def write_manifest(path, config_text: str, state: SolverState, outputs=()) -> Path:
    """Plain-text run record: config hash, final state summary, remap events."""
    path = Path(path)
    lines = [f"config_sha256 = {hashlib.sha256(config_text.encode()).hexdigest()}",
             f"final_time = {state.time:.12g}",
             f"steps = {state.step_count}",
             f"final_scale = {state.vgrid.scale:.12g}",
             f"clipped_values = {state.clip_count}",
             f"remap_count = {len(state.remap_events)}"]
    for ev in state.remap_events:
        lines.append(f"remap t={ev['time']:.10g} scale {ev['old_scale']:.8g} -> "
                     f"{ev['new_scale']:.8g} defect={ev['defect']:.3e}")
    for out in outputs:
        lines.append(f"output = {out}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_snapshots(directory, series: TimeSeries, grid: SpatialGrid1D) -> list:
    directory = Path(directory)
    paths = []
    for m in series.snapshots:
        paths.append(write_profile_csv(directory / f"snapshot_t{m.time:.6g}.csv", grid.centers, m))
    return paths
