"""Steady incompressible Navier-Stokes on the unit 3-torus, pseudospectrally.

Fields are mean-zero Fourier series u(x) = Σ_k c_k exp(2πi k·x) truncated to
|k|_∞ ≤ N.  The steady problem

    div(u⊗u) + ∇p = νΔu + f_s,   div u = 0

is rewritten with the Leray projector Π as the fixed point

    u = (-νΔ)^{-1} Π f_s - ν^{-1} T(u),   T(v) = (-Δ)^{-1} Π div(v⊗v),

and solved by damped Picard iteration.  The quadratic term is evaluated on a
physical grid of at least 3N + 1 points per axis and truncated back to
|k|_∞ ≤ N (the 2/3 rule), so T is the exact Galerkin projection of the
product and keeps the energy identity ∫u·Π div(u⊗u) = 0.  Multiplying the
equation by u then gives the a priori bound

    ‖∇u‖ ≤ ν^{-1} ‖(-Δ)^{-1/2} f_s‖,

which holds for every converged discrete solution, not only small ones.

With the temperature equation (5/2) div(uθ) = κΔθ and zero mean, testing with
θ gives κ‖∇θ‖² = 0, hence θ ≡ 0; if viscous heating μ|∇u + ∇uᵀ|² is added
to the right-hand side, integrating over the torus shows a steady state can
exist only if ∫|∇u + ∇uᵀ|² = 0, i.e. u = 0.  :func:`nsf_theta` and
:func:`viscous_heating_obstruction` turn these two arguments into numbers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft

__all__ = [
    "FourierVectorField",
    "SteadyNsConfig",
    "SteadyResult",
    "NonConvergenceError",
    "InconsistencyError",
    "leray_project",
    "bilinear_T",
    "solve_steady",
    "nsf_theta",
    "viscous_heating_obstruction",
    "shear_force",
    "random_solenoidal",
    "energy_bound",
]

log = logging.getLogger(__name__)


class NonConvergenceError(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InconsistencyError(ArithmeticError):
    pass


def _wavenumbers(N: int):
    k = np.arange(-N, N + 1)
    K1, K2, K3 = np.meshgrid(k, k, k, indexing="ij")
    return np.stack([K1, K2, K3]).astype(float)


_WAVE_CACHE: dict = {}


def _waves(N):
    w = _WAVE_CACHE.get(N)
    if w is None:
        K = _wavenumbers(N)
        k2 = (K * K).sum(axis=0)
        k2_safe = np.where(k2 == 0, 1.0, k2)
        w = (K, k2, k2_safe)
        _WAVE_CACHE[N] = w
    return w


@dataclass
class FourierVectorField:
    """Mean-zero vector field with coefficients c[i, k1+N, k2+N, k3+N]."""

    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        K = 2 * self.N + 1
        self.coeffs = np.array(self.coeffs, dtype=complex)
        if self.coeffs.shape != (3, K, K, K):
            raise ValueError(f"coefficients must have shape (3, {K}, {K}, {K})")
        self.coeffs[:, self.N, self.N, self.N] = 0.0

    def __eq__(self, other):
        if not isinstance(other, FourierVectorField):
            return NotImplemented
        return self.N == other.N and np.array_equal(self.coeffs, other.coeffs)

    @classmethod
    def zeros(cls, N: int) -> "FourierVectorField":
        K = 2 * N + 1
        return cls(N, np.zeros((3, K, K, K), dtype=complex))

    @classmethod
    def from_modes(cls, N: int, modes, hermitian: bool = True) -> "FourierVectorField":
        """Build from (k, c) pairs; with ``hermitian`` the partner c_{-k} = conj(c_k) is added."""
        out = cls.zeros(N)
        for k, c in modes:
            k = tuple(int(v) for v in k)
            if max(abs(v) for v in k) > N:
                raise ValueError(f"mode {k} exceeds truncation N={N}")
            if k == (0, 0, 0):
                raise ValueError("the k = 0 mode must be absent (mean-zero field)")
            c = np.asarray(c, dtype=complex)
            out.coeffs[(slice(None),) + tuple(v + N for v in k)] += c
            if hermitian:
                out.coeffs[(slice(None),) + tuple(-v + N for v in k)] += np.conj(c)
        return out

    def copy(self) -> "FourierVectorField":
        return FourierVectorField(self.N, self.coeffs.copy())

    def __add__(self, other):
        return FourierVectorField(self.N, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return FourierVectorField(self.N, self.coeffs - other.coeffs)

    def __mul__(self, a: float):
        return FourierVectorField(self.N, a * self.coeffs)

    __rmul__ = __mul__

    def hermitian_defect(self) -> float:
        flipped = np.conj(self.coeffs[:, ::-1, ::-1, ::-1])
        return float(np.max(np.abs(self.coeffs - flipped), initial=0.0))

    def divergence_defect(self) -> float:
        """max_k |k·c_k|."""
        K, _, _ = _waves(self.N)
        return float(np.max(np.abs((K * self.coeffs).sum(axis=0))))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def grad_norm(self) -> float:
        """‖∇u‖ over the unit torus."""
        _, k2, _ = _waves(self.N)
        return float(np.sqrt(np.sum(4 * np.pi**2 * k2 * np.abs(self.coeffs) ** 2)))

    def inv_sqrt_laplacian_norm(self) -> float:
        """‖(-Δ)^{-1/2} u‖ over the unit torus."""
        _, k2, k2s = _waves(self.N)
        w = np.where(k2 == 0, 0.0, 1.0 / (4 * np.pi**2 * k2s))
        return float(np.sqrt(np.sum(w * np.abs(self.coeffs) ** 2)))

    def to_physical(self, M: int | None = None) -> np.ndarray:
        """Values on the M³ grid x_j = j/M; shape (3, M, M, M), real part only."""
        M = M or _grid_size(self.N)
        spec = _embed(self.coeffs, self.N, M)
        vals = fft.ifftn(spec, axes=(1, 2, 3)) * M**3
        return vals

    @classmethod
    def from_physical(cls, values: np.ndarray, N: int) -> "FourierVectorField":
        M = values.shape[1]
        spec = fft.fftn(values, axes=(1, 2, 3)) / M**3
        return cls(N, _extract(spec, N, M))

    def to_rows(self, rel_tol: float = 1e-14):
        """(kx, ky, kz, re1, im1, re2, im2, re3, im3) rows for non-negligible modes."""
        mag = np.abs(self.coeffs).max(axis=0)
        cut = rel_tol * max(mag.max(), 1e-300)
        rows = []
        for idx in zip(*np.nonzero(mag > cut)):
            k = [int(i) - self.N for i in idx]
            c = self.coeffs[(slice(None),) + idx]
            rows.append(k + [c[0].real, c[0].imag, c[1].real, c[1].imag, c[2].real, c[2].imag])
        return rows


def _grid_size(N: int) -> int:
    return fft.next_fast_len(3 * N + 1)


def _embed(coeffs, N, M):
    spec = np.zeros(coeffs.shape[:-3] + (M, M, M), dtype=complex)
    idx = np.arange(-N, N + 1) % M
    spec[(Ellipsis,) + np.ix_(idx, idx, idx)] = coeffs
    return spec


def _extract(spec, N, M):
    idx = np.arange(-N, N + 1) % M
    return spec[(Ellipsis,) + np.ix_(idx, idx, idx)]


def leray_project(v: FourierVectorField) -> FourierVectorField:
    """c_k <- c_k - k (k·c_k) / |k|² for every mode."""
    K, k2, k2s = _waves(v.N)
    kc = (K * v.coeffs).sum(axis=0)
    out = v.coeffs - K * (kc / k2s)[None]
    return FourierVectorField(v.N, out)


def _convective(v: FourierVectorField) -> np.ndarray:
    # Fourier coefficients of div(v⊗v), truncated to |k|_∞ ≤ N
    N = v.N
    M = _grid_size(N)
    u = v.to_physical(M).real
    K, _, _ = _waves(N)
    out = np.zeros_like(v.coeffs)
    for i in range(3):
        prods = u[i][None] * u  # (u_j u_i) for j = 0..2
        ph = _extract(fft.fftn(prods, axes=(1, 2, 3)) / M**3, N, M)
        out[i] = (2j * np.pi * K * ph).sum(axis=0)
    return out


def bilinear_T(v: FourierVectorField) -> FourierVectorField:
    """T(v) = (-Δ)^{-1} Π div(v⊗v), dealiased."""
    _, k2, k2s = _waves(v.N)
    conv = leray_project(FourierVectorField(v.N, _convective(v)))
    return FourierVectorField(v.N, conv.coeffs / (4 * np.pi**2 * k2s)[None])


def _inv_laplacian(v: FourierVectorField, nu: float = 1.0) -> FourierVectorField:
    _, _, k2s = _waves(v.N)
    return FourierVectorField(v.N, v.coeffs / (nu * 4 * np.pi**2 * k2s)[None])


def steady_residual(u: FourierVectorField, force: FourierVectorField, nu: float) -> float:
    """‖νΔu - Π div(u⊗u) + Π f_s‖ in L² of the torus."""
    _, k2, _ = _waves(u.N)
    lap = -4 * np.pi**2 * k2[None] * u.coeffs
    conv = leray_project(FourierVectorField(u.N, _convective(u))).coeffs
    r = nu * lap - conv + leray_project(force).coeffs
    r[:, u.N, u.N, u.N] = 0.0
    return float(np.sqrt(np.sum(np.abs(r) ** 2)))


def energy_bound(force: FourierVectorField, nu: float) -> float:
    return leray_project(force).inv_sqrt_laplacian_norm() / nu


@dataclass
class SteadyNsConfig:
    nu_visc: float
    force: FourierVectorField
    N: int = 16
    damping: float = 1.0
    max_iter: int = 200
    residual_tol: float = 1e-10
    sobolev_c: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if not self.nu_visc > 0:
            raise ValueError("nu_visc must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.force.N != self.N:
            raise ValueError(f"force truncation {self.force.N} differs from N={self.N}")
        scale = max(self.force.l2_norm(), 1e-300)
        if (self.force - leray_project(self.force)).l2_norm() > 1e-12 * scale:
            raise ValueError("the force must be divergence-free")


@dataclass
class SteadyResult:
    u: FourierVectorField
    residual: float
    iterations: int
    converged: bool
    smallness_held: bool
    smallness_ratio: float
    energy_margin: float
    obstruction: float
    increments: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    def contraction_ratios(self) -> np.ndarray:
        inc = np.asarray(self.increments)
        inc = inc[inc > 0]
        return inc[1:] / inc[:-1] if len(inc) > 1 else np.array([])

    def certificate_text(self) -> str:
        yn = "yes" if self.smallness_held else "no"
        return "\n".join([
            f"converged = {'yes' if self.converged else 'no'}",
            f"iterations = {self.iterations}",
            f"residual = {self.residual:.6e}",
            f"smallness_held = {yn} (heuristic, Sobolev constant taken as configured)",
            f"smallness_ratio = {self.smallness_ratio:.6e}",
            f"energy_bound_margin = {self.energy_margin:.6e}",
            f"obstruction = {self.obstruction:.12e}",
        ]) + "\n"


def solve_steady(cfg: SteadyNsConfig, raise_on_failure: bool = False) -> SteadyResult:
    """Damped Picard iteration u <- (1-λ)u + λ[(-νΔ)^{-1}Πf_s - ν^{-1}T(u)].

    The smallness certificate is ‖(-Δ)^{-1/2} f_s‖ < ν²/(4C²) with the
    configured constant C.  Non-convergence within ``max_iter`` is reported in
    the result (or raised with ``raise_on_failure``).
    """
    nu = cfg.nu_visc
    lam = cfg.damping
    pf = leray_project(cfg.force)
    base = _inv_laplacian(pf, nu)
    u = FourierVectorField.zeros(cfg.N)
    fnorm = pf.inv_sqrt_laplacian_norm()
    threshold = nu**2 / (4 * cfg.sobolev_c**2)
    increments, residuals = [], []
    res = steady_residual(u, cfg.force, nu)
    residuals.append(res)
    it = 0
    converged = res <= cfg.residual_tol
    while not converged and it < cfg.max_iter:
        target = base - (1.0 / nu) * bilinear_T(u)
        new = (1 - lam) * u + lam * target
        increments.append((new - u).l2_norm())
        u = new
        it += 1
        res = steady_residual(u, cfg.force, nu)
        residuals.append(res)
        converged = res <= cfg.residual_tol
        if not np.isfinite(res):
            break
    margin = energy_bound(cfg.force, nu) - u.grad_norm()
    result = SteadyResult(u, res, it, converged, fnorm < threshold, fnorm / threshold, margin,
                          viscous_heating_obstruction(u), increments, residuals)
    if not converged:
        log.warning("Picard iteration stopped after %d iterations with residual %.3e", it, res)
        if raise_on_failure:
            raise NonConvergenceError(f"no convergence in {it} iterations (residual {res:.3e})",
                                      result)
    return result


# ------------------------------------------------------------- temperature

def _scalar_grad_norm(theta: np.ndarray, N: int) -> float:
    _, k2, _ = _waves(N)
    return float(np.sqrt(np.sum(4 * np.pi**2 * k2 * np.abs(theta) ** 2)))


def _div_u_theta(u_phys: np.ndarray, theta: np.ndarray, N: int, M: int) -> np.ndarray:
    K, _, _ = _waves(N)
    th = fft.ifftn(_embed(theta, N, M)).real * M**3
    flux = _extract(fft.fftn(u_phys * th[None], axes=(1, 2, 3)) / M**3, N, M)
    out = (2j * np.pi * K * flux).sum(axis=0)
    out[N, N, N] = 0.0
    return out


def nsf_theta(u: FourierVectorField, kappa: float = 1.0, tol: float = 1e-10,
              max_sweeps: int = 500, seed: int = 0) -> np.ndarray:
    """Solve (5/2) div(uθ) = κΔθ for mean-zero θ; the answer must be 0.

    Sweeps θ <- (κΔ)^{-1}(5/2) div(uθ) start from a random mean-zero θ of
    unit norm, so reaching zero tests uniqueness rather than assuming it.
    Returns the θ coefficients (shape (2N+1,)*3).  Raises
    :class:`InconsistencyError` if the sweeps do not bring ‖θ‖ below ``tol``
    (including when they diverge, which is reported as such).
    """
    N = u.N
    M = _grid_size(N)
    _, k2, k2s = _waves(N)
    rng = np.random.default_rng(seed)
    K1 = 2 * N + 1
    # a real random field: symmetrise a random spectrum
    raw = rng.standard_normal((K1, K1, K1)) + 1j * rng.standard_normal((K1, K1, K1))
    theta = 0.5 * (raw + np.conj(raw[::-1, ::-1, ::-1]))
    theta /= (1.0 + k2) ** 2
    theta[N, N, N] = 0.0
    theta /= np.sqrt(np.sum(np.abs(theta) ** 2))
    u_phys = u.to_physical(M).real
    norms = [1.0]
    for sweep in range(max_sweeps):
        rhs = 2.5 * _div_u_theta(u_phys, theta, N, M)
        theta = -rhs / (kappa * 4 * np.pi**2 * k2s)
        theta[N, N, N] = 0.0
        n = float(np.sqrt(np.sum(np.abs(theta) ** 2)))
        norms.append(n)
        if n <= tol:
            return theta
        if not np.isfinite(n) or (sweep > 5 and n > norms[-2] > norms[-3]):
            raise InconsistencyError(
                f"temperature sweeps diverge (norm {n:.3e} after {sweep + 1} sweeps); "
                "the flow is too strong for the fixed-point form")
    raise InconsistencyError(f"temperature not zero after {max_sweeps} sweeps (norm {norms[-1]:.3e})")


def viscous_heating_obstruction(u: FourierVectorField) -> float:
    """∫ |∇u + (∇u)ᵀ|² dx over the unit torus, from the Fourier coefficients."""
    K, _, _ = _waves(u.N)
    c = u.coeffs
    total = 0.0
    for i in range(3):
        for j in range(3):
            sij = 2j * np.pi * (K[j] * c[i] + K[i] * c[j])
            total += float(np.sum(np.abs(sij) ** 2))
    return total


# ------------------------------------------------------------- builders

def shear_force(N: int, amplitude: float = 1.0) -> FourierVectorField:
    """f_s = (0, 0, amplitude · sin 2πx1)."""
    return FourierVectorField.from_modes(N, [((1, 0, 0), (0, 0, amplitude / 2j))])


def random_solenoidal(N: int, amplitude: float, k_max: int = 2, seed: int = 0
                      ) -> FourierVectorField:
    """Random real divergence-free field with modes |k|_∞ ≤ k_max and L² norm ``amplitude``."""
    rng = np.random.default_rng(seed)
    K1 = 2 * N + 1
    c = rng.standard_normal((3, K1, K1, K1)) + 1j * rng.standard_normal((3, K1, K1, K1))
    K, _, _ = _waves(N)
    c[:, np.abs(K).max(axis=0) > k_max] = 0.0
    c = 0.5 * (c + np.conj(c[:, ::-1, ::-1, ::-1]))
    v = leray_project(FourierVectorField(N, c))
    return v * (amplitude / max(v.l2_norm(), 1e-300))


def write_coefficients_csv(path, u: FourierVectorField) -> Path:
    path = Path(path)
    rows = u.to_rows()
    np.savetxt(path, np.array(rows, dtype=float).reshape(-1, 9), delimiter=",", comments="",
               header="kx,ky,kz,re1,im1,re2,im2,re3,im3", fmt=["%d"] * 3 + ["%.17e"] * 6)
    return path
