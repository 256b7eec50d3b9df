"""Grids, reduced distributions, Maxwellians and moments for the 1D kinetic solvers.

The distribution F(x1, v1, v2, v3) is stored in reduced form

    G(x1, v1, v2) = ∫ F dv3,        H(x1, v1, v2) = ∫ v3**2 F dv3,

which closes exactly under BGK dynamics because neither the force nor the
streaming term acts on v3.  Velocity integrals use the midpoint rule on a
uniform, origin-symmetric grid.  For smooth rapidly decaying integrands this
rule is spectrally accurate, so G and H are treated as point values.

Entropy surrogate
-----------------
When F is Gaussian in v3 with variance H/G (BGK preserves this from
Maxwellian data), ∫ F ln F dv3 = G ln G - (G/2) ln(2πe H/G).  The diagnostic

    S = ∬ [ (3/2) G ln G - (1/2) G ln H - (1/2) ln(2πe) G ] dv1 dv2 dx

is that expression integrated.  It is jointly convex in (G, H) and is the
minimum of ∫ F ln F over all F with the given (G, H), so BGK relaxation
towards the discrete Maxwellian cannot increase it.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import apply_poly_factor, fill_maxwellian, moment_sums

__all__ = [
    "ParameterError",
    "DegenerateStateError",
    "SupportError",
    "SpatialGrid1D",
    "VelocityGrid2D",
    "ReducedDistributionPair",
    "MacroFields",
    "MaxwellianParams",
    "maxwellian_reduced",
    "maxwellian_cells",
    "discrete_maxwellian",
    "conserved_moments",
    "moments",
    "match_moments",
    "cell_entropy",
    "entropy",
    "write_profile_csv",
]

LOG_2PI_E = np.log(2.0 * np.pi) + 1.0


class ParameterError(ValueError):
    pass


class DegenerateStateError(ArithmeticError):
    pass


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class SpatialGrid1D:
    n_cells: int
    x_min: float = -0.25
    x_max: float = 0.25

    def __post_init__(self):
        if self.n_cells < 1:
            raise ParameterError("n_cells must be positive")
        if not np.isclose(self.x_max - self.x_min, 0.5):
            raise ParameterError("the domain must span half a force period (length 1/2)")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


@dataclass(frozen=True)
class VelocityGrid2D:
    """Uniform midpoint grid on [-v_max*scale, v_max*scale]^2."""

    n_v1: int
    n_v2: int
    v_max: float = 6.0
    scale: float = 1.0

    def __post_init__(self):
        if self.n_v1 < 2 or self.n_v2 < 2:
            raise ParameterError("velocity grid needs at least two nodes per axis")
        if self.v_max <= 0 or self.scale <= 0:
            raise ParameterError("v_max and scale must be positive")

    @property
    def half_width(self) -> float:
        return self.v_max * self.scale

    @property
    def dv1(self) -> float:
        return 2.0 * self.half_width / self.n_v1

    @property
    def dv2(self) -> float:
        return 2.0 * self.half_width / self.n_v2

    @property
    def v1(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n_v1) + 0.5) * self.dv1

    @property
    def v2(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n_v2) + 0.5) * self.dv2

    @property
    def weight(self) -> float:
        return self.dv1 * self.dv2

    def rescaled(self, scale: float) -> "VelocityGrid2D":
        return VelocityGrid2D(self.n_v1, self.n_v2, self.v_max, scale)

    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.v1, -self.v1[::-1], atol=1e-14 * self.half_width))

    def basis(self) -> np.ndarray:
        """Monomials (flattened over the grid) used by all moment reductions.

        Columns: 1, v1, v2, |v|², v1², v1 v2, v2², v1|v|², v2|v|², |v|⁴.
        """
        return _basis(self.n_v1, self.n_v2, self.v_max, self.scale)[0]

    def basis_t(self) -> np.ndarray:
        """Contiguous transpose of :meth:`basis`, shape (10, n_v1 * n_v2)."""
        return _basis(self.n_v1, self.n_v2, self.v_max, self.scale)[1]


_BASIS_CACHE: dict = {}


def _basis(n1, n2, v_max, scale):
    key = (n1, n2, v_max, scale)
    b = _BASIS_CACHE.get(key)
    if b is None:
        g = VelocityGrid2D(n1, n2, v_max, scale)
        V1, V2 = np.meshgrid(g.v1, g.v2, indexing="ij")
        v1, v2 = V1.ravel(), V2.ravel()
        r2 = v1 * v1 + v2 * v2
        bt = np.stack([np.ones_like(v1), v1, v2, r2, v1 * v1, v1 * v2, v2 * v2,
                       v1 * r2, v2 * r2, r2 * r2], axis=0)
        b = (np.ascontiguousarray(bt.T), bt)
        if len(_BASIS_CACHE) > 64:
            _BASIS_CACHE.clear()
        _BASIS_CACHE[key] = b
    return b


@dataclass
class ReducedDistributionPair:
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        if self.G.shape != self.H.shape:
            raise ParameterError("G and H must have the same shape")

    def copy(self) -> "ReducedDistributionPair":
        return ReducedDistributionPair(self.G.copy(), self.H.copy())

    def scaled(self, c: float) -> "ReducedDistributionPair":
        return ReducedDistributionPair(c * self.G, c * self.H)

    def __add__(self, other: "ReducedDistributionPair") -> "ReducedDistributionPair":
        return ReducedDistributionPair(self.G + other.G, self.H + other.H)

    @property
    def n_cells(self) -> int:
        return self.G.shape[0]


@dataclass
class MacroFields:
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    theta: np.ndarray
    time: float | None = None

    @property
    def u3(self) -> np.ndarray:
        return np.zeros_like(self.rho)


@dataclass(frozen=True)
class MaxwellianParams:
    rho: float = 1.0
    u: tuple = (0.0, 0.0, 0.0)
    theta: float = 1.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if not self.theta > 0:
            raise ParameterError(f"theta must be positive, got {self.theta}")
        if len(self.u) != 3:
            raise ParameterError("u must be a 3-vector")


def _as_cells(G):
    G = np.asarray(G, dtype=float)
    return G[None] if G.ndim == 2 else G


def maxwellian_cells(rho, u1, u2, theta, vgrid: VelocityGrid2D) -> ReducedDistributionPair:
    """Reduced Maxwellian (exact v3 integrals) for per-cell parameter arrays."""
    rho, u1, u2, theta = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (rho, u1, u2, theta))
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise ParameterError("rho and theta must be positive")
    d1 = vgrid.v1[None, :, None] - u1[:, None, None]
    d2 = vgrid.v2[None, None, :] - u2[:, None, None]
    th = theta[:, None, None]
    G = rho[:, None, None] / (2.0 * np.pi * th) * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * th))
    return ReducedDistributionPair(G, th * G)


def maxwellian_reduced(p: MaxwellianParams, vgrid: VelocityGrid2D, n_cells: int | None = None
                       ) -> ReducedDistributionPair:
    """G = ρ/(2πθ) exp(-|v-u|²/2θ) over (v1, v2) and H = θ G.

    Returns arrays of shape (n_v1, n_v2), or (n_cells, n_v1, n_v2) when
    ``n_cells`` is given.
    """
    f = maxwellian_cells(p.rho, p.u[0], p.u[1], p.theta, vgrid)
    if n_cells is None:
        return ReducedDistributionPair(f.G[0], f.H[0])
    return ReducedDistributionPair(np.repeat(f.G, n_cells, axis=0), np.repeat(f.H, n_cells, axis=0))


def _moment_table(G, H, vgrid: VelocityGrid2D) -> tuple[np.ndarray, np.ndarray]:
    # weighted G moments over the ten basis monomials, H moments over four
    G = np.ascontiguousarray(G, dtype=float)
    H = np.ascontiguousarray(H, dtype=float)
    out = np.empty((G.shape[0], 14))
    moment_sums(G, H, vgrid.v1, vgrid.v2, out)
    out *= vgrid.weight
    return out[:, :10], out[:, 10:]


def conserved_moments(f: ReducedDistributionPair, vgrid: VelocityGrid2D) -> np.ndarray:
    """Per-cell [ρ, ρu1, ρu2, E] with E = ∫|v|²F dv (twice the energy density)."""
    mg, mh = _moment_table(_as_cells(f.G), _as_cells(f.H), vgrid)
    out = mg[:, :4].copy()
    out[:, 3] += mh[:, 0]
    return out


def _macro_from_conserved(m: np.ndarray) -> tuple:
    rho = m[:, 0]
    if np.any(~(rho > 0)):
        bad = int(np.argmax(~(rho > 0)))
        raise DegenerateStateError(f"non-positive density {rho[bad]!r} in cell {bad}")
    u1 = m[:, 1] / rho
    u2 = m[:, 2] / rho
    theta = (m[:, 3] - rho * (u1 * u1 + u2 * u2)) / (3.0 * rho)
    return rho, u1, u2, theta


def moments(f: ReducedDistributionPair, vgrid: VelocityGrid2D) -> MacroFields:
    """Density, velocity and temperature in every cell."""
    rho, u1, u2, theta = _macro_from_conserved(conserved_moments(f, vgrid))
    return MacroFields(rho, u1, u2, theta)


def match_moments(f: ReducedDistributionPair, target: np.ndarray, vgrid: VelocityGrid2D
                  ) -> ReducedDistributionPair:
    """Rescale ``f`` by a per-cell factor 1 + a + b·v + c|v|² to hit ``target``.

    ``target`` holds per-cell [ρ, ρu1, ρu2, E].  The correction is linear in
    the unknowns and solved exactly; it is meant for small defects (remaps,
    limiter diffusion) and leaves positivity intact when they are small.
    """
    G = np.ascontiguousarray(_as_cells(f.G))
    H = np.ascontiguousarray(_as_cells(f.H))
    n = G.shape[0]
    mg, mh = _moment_table(G, H, vgrid)
    # rows: constraints (1, v1, v2, energy); cols: factor terms (1, v1, v2, |v|²)
    J = np.empty((n, 4, 4))
    J[:, 0] = mg[:, [0, 1, 2, 3]]
    J[:, 1] = mg[:, [1, 4, 5, 7]]
    J[:, 2] = mg[:, [2, 5, 6, 8]]
    J[:, 3] = mg[:, [3, 7, 8, 9]] + mh[:, [0, 1, 2, 3]]
    current = np.stack([mg[:, 0], mg[:, 1], mg[:, 2], mg[:, 3] + mh[:, 0]], axis=1)
    target = np.broadcast_to(np.asarray(target, dtype=float), current.shape)
    coef = np.linalg.solve(J, (target - current)[..., None])[..., 0]
    outG = np.empty_like(G)
    outH = np.empty_like(H)
    apply_poly_factor(G, H, coef, vgrid.v1, vgrid.v2, outG, outH)
    return ReducedDistributionPair(outG.reshape(f.G.shape), outH.reshape(f.H.shape))


def discrete_maxwellian(target: np.ndarray, vgrid: VelocityGrid2D, rtol: float = 1e-14,
                        max_iter: int = 20, return_params: bool = False):
    """Reduced Maxwellian whose discrete moments equal ``target`` exactly.

    The family G = exp(a + b1 v1 + b2 v2 - c|v|²), H = G / 2c is the
    minimiser of the discrete entropy surrogate under the moment constraints;
    its parameters are found by Newton iteration started from the continuous
    Maxwellian.  ``target`` holds per-cell [ρ, ρu1, ρu2, E].
    """
    target = np.atleast_2d(np.asarray(target, dtype=float))
    rho, u1, u2, theta = _macro_from_conserved(target)
    if np.any(~(theta > 0)):
        bad = int(np.argmax(~(theta > 0)))
        raise DegenerateStateError(f"non-positive temperature {theta[bad]!r} in cell {bad}")
    n = len(rho)
    params = np.stack([np.log(rho / (2 * np.pi * theta)) - (u1**2 + u2**2) / (2 * theta),
                       u1 / theta, u2 / theta, 1.0 / (2 * theta)], axis=1)
    scale = np.maximum(np.abs(target), target[:, [0]] * vgrid.half_width**np.array([0, 1, 1, 2]))
    G = np.empty((n, vgrid.n_v1, vgrid.n_v2))
    for it in range(max_iter):
        fill_maxwellian(params, vgrid.v1, vgrid.v2, G)
        mg, _ = _moment_table(G, G, vgrid)
        inv2c = 0.5 / params[:, 3]
        current = np.stack([mg[:, 0], mg[:, 1], mg[:, 2], mg[:, 3] + inv2c * mg[:, 0]], axis=1)
        resid = target - current
        if np.all(np.abs(resid) <= rtol * scale):
            break
        J = np.empty((n, 4, 4))
        J[:, 0] = np.stack([mg[:, 0], mg[:, 1], mg[:, 2], -mg[:, 3]], axis=1)
        J[:, 1] = np.stack([mg[:, 1], mg[:, 4], mg[:, 5], -mg[:, 7]], axis=1)
        J[:, 2] = np.stack([mg[:, 2], mg[:, 5], mg[:, 6], -mg[:, 8]], axis=1)
        J[:, 3] = np.stack([mg[:, 3] + inv2c * mg[:, 0], mg[:, 7] + inv2c * mg[:, 1],
                            mg[:, 8] + inv2c * mg[:, 2],
                            -mg[:, 9] - inv2c * mg[:, 3] - 2 * inv2c**2 * mg[:, 0]], axis=1)
        params = params + np.linalg.solve(J, resid[..., None])[..., 0]
    out = ReducedDistributionPair(G, G * inv2c[:, None, None])
    if return_params:
        return out, params, it
    return out


def cell_entropy(f: ReducedDistributionPair, vgrid: VelocityGrid2D) -> np.ndarray:
    """Entropy surrogate density per cell (velocity integral only)."""
    G = _as_cells(f.G)
    H = _as_cells(f.H)
    if np.any(G < 0) or np.any(H < 0):
        raise SupportError("entropy needs a non-negative distribution")
    bad = (G == 0) & (H > 0)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SupportError(f"G = 0 with H > 0 at node {idx}")
    pos = G > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(pos, 1.5 * G * np.log(np.where(pos, G, 1.0))
                        - 0.5 * G * np.log(np.where(pos, H, 1.0)) - 0.5 * LOG_2PI_E * G, 0.0)
    return dens.reshape(G.shape[0], -1).sum(axis=1) * vgrid.weight


def entropy(f: ReducedDistributionPair, vgrid: VelocityGrid2D, dx: float = 1.0) -> float:
    """Discrete ∫∫ F ln F dv dx through the reduced surrogate (cell width ``dx``)."""
    return float(cell_entropy(f, vgrid).sum() * dx)


def write_profile_csv(path, x: np.ndarray, macro: MacroFields) -> Path:
    path = Path(path)
    data = np.column_stack([x, macro.rho, macro.u1, macro.u2, macro.theta])
    np.savetxt(path, data, delimiter=",", header="x1,rho,u1,u2,theta", comments="", fmt="%.12e")
    return path
