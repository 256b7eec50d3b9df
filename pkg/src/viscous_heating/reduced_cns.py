"""Unidirectional compressible Navier-Stokes reduction with viscous heating.

With ρ uniform and only u2(x1, t), θ(x1, t) varying on [-1/4, 1/4]:

    ∂t u2 = (1/ρ) ∂x(μ(θ) ∂x u2) + g0 sin 2πx1
    ∂t θ  = (2/3ρ) ∂x(κ(θ) ∂x θ) + (2/3)(μ(θ)/ρ)(∂x u2)²

with ∂x u2 = ∂x θ = 0 at x1 = ±1/4, μ = C_μ θ^δ and κ = C_κ θ^δ.

Once u2 has relaxed to its quasi-steady profile u2 ≈ (g0ρ/4π²μ) sin 2πx1 and
conduction has flattened θ, averaging the θ equation gives

    dθ_av/dt = g0²ρ / (12π² C_μ θ_av^δ)   =>   θ_av^{1+δ} = C1 t + 1,
    C1 = (1+δ) g0² ρ / (12π² C_μ).

Default coefficients are the Chapman-Enskog values of the BGK model with
collision frequency ν = (8/π)^{1/2}ρ (so τ = 1/ν): μ = pτ = θ ρ/ν = √(π/8) θ
and, with Prandtl number 1 and c_p = 5/2, κ = (5/2) √(π/8) θ.  Both scale as
θ^1, i.e. δ = 1 for BGK.

Discretisation: cell-centred finite volumes, backward Euler for both
diffusion terms with coefficients frozen at the old θ, explicit force, and a
heating term built from the face dissipation μ_f (Δu/Δx)² split equally
between the two cells sharing the face.  That split makes the discrete
dissipation equal to the loss of kinetic energy through the viscous flux, so
total energy changes only through the work of the force (up to O(dt)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "StepError",
    "CnsConfig",
    "CnsState",
    "CnsSeries",
    "initial_state",
    "cns_step",
    "closed_form_theta_av",
    "closed_form_c1",
    "quasi_steady_profile",
    "run_cns",
    "total_energy",
]

C_MU_BGK = float(np.sqrt(np.pi / 8.0))
C_KAPPA_BGK = 2.5 * C_MU_BGK


class StepError(ArithmeticError):
    pass


@dataclass
class CnsConfig:
    g0: float
    delta: float = 1.0
    c_mu: float = C_MU_BGK
    c_kappa: float = C_KAPPA_BGK
    rho0: float = 1.0
    n_cells: int = 64
    dt: float = 0.01
    t_end: float = 1000.0
    # step size grows as dt_rel * t once that exceeds dt
    dt_rel: float = 1e-3
    samples_per_decade: int = 40
    t_first_sample: float = 0.1

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if not (self.c_mu > 0 and self.c_kappa > 0):
            raise ValueError("c_mu and c_kappa must be positive")
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if self.n_cells < 4:
            raise ValueError("n_cells must be at least 4")
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.dt_rel < 0:
            raise ValueError("dt_rel must be non-negative")

    @property
    def dx(self) -> float:
        return 0.5 / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return -0.25 + (np.arange(self.n_cells) + 0.5) * self.dx

    def mu(self, theta):
        return self.c_mu * np.asarray(theta) ** self.delta

    def kappa(self, theta):
        return self.c_kappa * np.asarray(theta) ** self.delta


@dataclass
class CnsState:
    u2: np.ndarray
    theta: np.ndarray
    rho: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        self.u2 = np.asarray(self.u2, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if np.any(~(self.theta > 0)):
            raise ValueError("theta must be positive")

    @property
    def theta_av(self) -> float:
        return float(self.theta.mean())


@dataclass
class CnsSeries:
    times: list = field(default_factory=list)
    theta_av: list = field(default_factory=list)
    u2_amplitude: list = field(default_factory=list)
    u2_av: list = field(default_factory=list)
    dudt_max: list = field(default_factory=list)
    theta_spread: list = field(default_factory=list)
    closed_form: list = field(default_factory=list)
    final_state: CnsState | None = None

    def slope_estimate(self) -> np.ndarray:
        """Centred two-point d ln θ_av / d ln t (NaN where t = 0)."""
        t = np.asarray(self.times)
        th = np.asarray(self.theta_av)
        out = np.full(len(t), np.nan)
        ok = t > 0
        if ok.sum() >= 2:
            lt, lth = np.log(t[ok]), np.log(th[ok])
            out[ok] = np.gradient(lth, lt)
        return out

    def write_csv(self, path) -> Path:
        path = Path(path)
        cf = np.asarray(self.closed_form)
        data = np.column_stack([self.times, self.theta_av, self.u2_amplitude, self.slope_estimate(),
                                cf, np.asarray(self.theta_av) / cf - 1.0])
        np.savetxt(path, data, delimiter=",", comments="", fmt="%.12e",
                   header="t,theta_av,u2_amplitude,slope_estimate,theta_closed_form,rel_diff")
        return path


def closed_form_c1(cfg: CnsConfig) -> float:
    return (1.0 + cfg.delta) * cfg.g0**2 * cfg.rho0 / (12.0 * np.pi**2 * cfg.c_mu)


def closed_form_theta_av(t, cfg: CnsConfig):
    """(C1 t + 1)^{1/(1+δ)} for θ = 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    out = (closed_form_c1(cfg) * t + 1.0) ** (1.0 / (1.0 + cfg.delta))
    return float(out) if out.ndim == 0 else out


def quasi_steady_profile(theta_av: float, cfg: CnsConfig, x=None):
    """u2 ≈ (g0ρ/4π²μ) sin 2πx1 and ∂x u2 ≈ (g0ρ/2πμ) cos 2πx1 with μ = C_μ θ_av^δ."""
    if not theta_av > 0:
        raise ValueError("theta_av must be positive")
    x = cfg.x if x is None else np.asarray(x, dtype=float)
    mu = cfg.c_mu * theta_av**cfg.delta
    u2 = cfg.g0 * cfg.rho0 / (4 * np.pi**2 * mu) * np.sin(2 * np.pi * x)
    du2 = cfg.g0 * cfg.rho0 / (2 * np.pi * mu) * np.cos(2 * np.pi * x)
    return u2, du2


def initial_state(cfg: CnsConfig) -> CnsState:
    n = cfg.n_cells
    return CnsState(np.zeros(n), np.ones(n), cfg.rho0, 0.0)


def _face(coef: np.ndarray) -> np.ndarray:
    # interior face values, arithmetic mean of the neighbours
    return 0.5 * (coef[1:] + coef[:-1])


def _implicit_diffusion(y: np.ndarray, face_coef: np.ndarray, factor: float, rhs: np.ndarray):
    """Solve (I - factor·D(face_coef D)) y_new = rhs with zero flux at both ends."""
    n = len(y)
    lower = np.zeros(n)
    upper = np.zeros(n)
    upper[:-1] = face_coef
    lower[1:] = face_coef
    ab = np.zeros((3, n))
    ab[0, 1:] = -factor * face_coef
    ab[2, :-1] = -factor * face_coef
    ab[1] = 1.0 + factor * (lower + upper)
    return solve_banded((1, 1), ab, rhs)


def face_dissipation(u2: np.ndarray, mu: np.ndarray, dx: float) -> np.ndarray:
    """Cell heating density μ(∂x u2)², each face's value split between its two cells."""
    du = np.diff(u2) / dx
    d = _face(mu) * du * du
    q = np.zeros(len(u2))
    q[:-1] += 0.5 * d
    q[1:] += 0.5 * d
    return q


def total_energy(s: CnsState, dx: float) -> float:
    return float(np.sum(s.rho * (0.5 * s.u2**2 + 1.5 * s.theta)) * dx)


def cns_step(s: CnsState, cfg: CnsConfig, dt: float | None = None) -> CnsState:
    dt = cfg.dt if dt is None else dt
    if not dt > 0:
        raise StepError(f"dt must be positive, got {dt}")
    dx = cfg.dx
    rho = s.rho
    mu = cfg.mu(s.theta)
    kap = cfg.kappa(s.theta)
    force = cfg.g0 * np.sin(2 * np.pi * cfg.x)
    u_new = _implicit_diffusion(s.u2, _face(mu), dt / (rho * dx * dx), s.u2 + dt * force)
    heat = (2.0 / (3.0 * rho)) * face_dissipation(u_new, mu, dx)
    th_new = _implicit_diffusion(s.theta, _face(kap), 2.0 * dt / (3.0 * rho * dx * dx),
                                 s.theta + dt * heat)
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(th_new))) or np.any(th_new <= 0):
        raise StepError(f"non-physical state after step at t={s.time:g} with dt={dt:g}")
    return CnsState(u_new, th_new, rho, s.time + dt)


def _sample_times(cfg: CnsConfig) -> np.ndarray:
    lo = np.log10(cfg.t_first_sample)
    hi = np.log10(cfg.t_end)
    n = max(int(np.ceil((hi - lo) * cfg.samples_per_decade)), 1)
    return np.unique(np.concatenate([[0.0], np.logspace(lo, hi, n + 1)]))


def _record(series: CnsSeries, s: CnsState, cfg: CnsConfig, dudt: float):
    x = cfg.x
    sn = np.sin(2 * np.pi * x)
    th_av = s.theta_av
    series.times.append(s.time)
    series.theta_av.append(th_av)
    series.u2_amplitude.append(float(np.sum(s.u2 * sn) / np.sum(sn * sn)))
    series.u2_av.append(float(np.mean(np.abs(s.u2))))
    series.dudt_max.append(dudt)
    series.theta_spread.append(float(np.max(np.abs(s.theta - th_av)) / th_av))
    series.closed_form.append(closed_form_theta_av(s.time, cfg))


def run_cns(cfg: CnsConfig, state: CnsState | None = None) -> CnsSeries:
    """Evolve from u2 = 0, θ = 1 and sample on a logarithmic time grid.

    ``dudt_max`` records max|∂t u2| over the last step, a monitor of the
    quasi-steady assumption behind the closed form.
    """
    s = state if state is not None else initial_state(cfg)
    series = CnsSeries()
    dudt = 0.0
    for t_sample in _sample_times(cfg):
        while s.time < t_sample * (1 - 1e-12):
            dt = min(max(cfg.dt, cfg.dt_rel * s.time), t_sample - s.time)
            new = cns_step(s, cfg, dt)
            dudt = float(np.max(np.abs(new.u2 - s.u2)) / dt)
            s = new
        if t_sample >= s.time * (1 - 1e-12) or not series.times:
            s.time = float(t_sample) if abs(s.time - t_sample) < 1e-9 * max(1.0, t_sample) else s.time
            _record(series, s, cfg, dudt)
    series.final_state = s
    return series
