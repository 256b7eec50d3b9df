"""Gaussian brackets and the A, B, C tensor identities.

The bracket of a velocity function is its average against the standard
Maxwellian ``M(v) = (2*pi)**-1.5 * exp(-|v|**2 / 2)``.  Two tensor-product
quadratures are available: Gauss-Hermite (exact for polynomials) and a
truncated trapezoid rule for radial weights that are not polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

__all__ = [
    "QuadratureSpec",
    "IsotropicWeight",
    "LemmaReport",
    "QuadratureError",
    "bracket",
    "tensor_fields",
    "verify_appendix",
    "POLY_TOL",
    "GENERIC_TOL",
]

POLY_TOL = 1e-10
GENERIC_TOL = 1e-6

Polynomial = Mapping[tuple, float]
Integrand = Union[Callable[[np.ndarray], np.ndarray], Polynomial, float]


class QuadratureError(ValueError):
    """Raised when an integrand is not finite at some quadrature node."""


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_axis: int = 8
    scheme: str = "gauss_hermite"
    truncation_radius: float = 9.0

    def __post_init__(self):
        if self.nodes_per_axis < 4:
            raise ValueError("nodes_per_axis must be >= 4")
        if self.scheme not in ("gauss_hermite", "trapezoid_truncated"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.scheme == "trapezoid_truncated" and not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be > 0 for the trapezoid scheme")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(v, w)`` with ``v`` of shape (n**3, 3) and weights summing to ~1."""
        return _nodes(self.nodes_per_axis, self.scheme, self.truncation_radius)


_NODE_CACHE: dict = {}


def _nodes(n, scheme, radius):
    key = (n, scheme, radius if scheme == "trapezoid_truncated" else None)
    if key in _NODE_CACHE:
        return _NODE_CACHE[key]
    if scheme == "gauss_hermite":
        x, w1 = np.polynomial.hermite_e.hermegauss(n)
        w1 = w1 / np.sqrt(2.0 * np.pi)
    else:
        x = np.linspace(-radius, radius, n)
        h = x[1] - x[0]
        w1 = np.full(n, h)
        w1[0] = w1[-1] = h / 2
        w1 = w1 * np.exp(-x**2 / 2) / np.sqrt(2.0 * np.pi)
    v = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    w = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).ravel()
    _NODE_CACHE[key] = (v, w)
    return v, w


@dataclass(frozen=True)
class IsotropicWeight:
    label: str
    radial_fn: Callable[[np.ndarray], np.ndarray]
    polynomial: bool = False

    def __call__(self, r):
        return np.asarray(self.radial_fn(r), dtype=float) * np.ones_like(r)


UNIT_WEIGHT = IsotropicWeight("1", lambda r: np.ones_like(r), polynomial=True)
R2_WEIGHT = IsotropicWeight("r^2", lambda r: r**2, polynomial=True)
EXP_WEIGHT = IsotropicWeight("exp(-r)", lambda r: np.exp(-r), polynomial=False)


@dataclass
class LemmaReport:
    identity_name: str
    max_abs_error: float
    tolerance: float
    passed: bool
    nu_value: float = float("nan")
    kappa_value: float = float("nan")
    c_value: float = float("nan")
    worst_index: tuple | None = None

    def __post_init__(self):
        self.passed = bool(self.max_abs_error <= self.tolerance)


def _evaluate(phi: Integrand, v: np.ndarray) -> np.ndarray:
    if callable(phi):
        return np.asarray(phi(v), dtype=float)
    if isinstance(phi, Mapping):
        out = np.zeros(len(v))
        for (a, b, c), coef in phi.items():
            out += coef * v[:, 0] ** a * v[:, 1] ** b * v[:, 2] ** c
        return out
    return np.full(len(v), float(phi))


def bracket(phi: Integrand, quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray | float:
    """Integrate ``phi(v) M(v) dv`` over R^3.

    ``phi`` may be a constant, a polynomial given as ``{(a, b, c): coef}``
    for ``coef * v1**a * v2**b * v3**c``, or a callable taking an (n, 3)
    array of velocities and returning values of shape (n, ...).  Tensor-valued
    callables give tensor-valued brackets.
    """
    v, w = quad.nodes()
    vals = _evaluate(phi, v)
    if vals.shape[0] != len(v):
        raise ValueError("integrand must return one value (or tensor) per node")
    finite = np.isfinite(vals).reshape(len(v), -1).all(axis=1)
    if not finite.all():
        k = int(np.argmin(finite))
        raise QuadratureError(f"non-finite integrand at node {k}, v = {tuple(v[k])}")
    out = np.tensordot(w, vals, axes=(0, 0))
    return float(out) if np.ndim(out) == 0 else out


# T[m, j, k, l] = δ_mj δ_kl + δ_mk δ_jl + δ_ml δ_jk, so v_m T[m] is the δ part of C
_I3 = np.eye(3)
_DELTA_TERMS = (np.einsum("mj,kl->mjkl", _I3, _I3) + np.einsum("mk,jl->mjkl", _I3, _I3)
                + np.einsum("ml,jk->mjkl", _I3, _I3))


def tensor_fields(v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(A, B, C)`` at velocity ``v`` (or at each row of an (n, 3) array).

    A = v⊗v - |v|²I/3, B = (|v|² - 5) v / 2, and
    C_jkl = (v_j v_k v_l - v_j δ_kl - v_k δ_jl - v_l δ_jk) / 2.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    eye = np.eye(3)
    r2 = np.einsum("ni,ni->n", v, v)
    vv = v[:, :, None] * v[:, None, :]
    A = vv - r2[:, None, None] * eye / 3.0
    B = 0.5 * (r2 - 5.0)[:, None] * v
    # broadcasting and one small matmul rather than einsum: these run over
    # ~10^5-10^6 nodes
    n = len(v)
    cubic = (vv.reshape(n, 9, 1) * v[:, None, :]).reshape(n, 3, 3, 3)
    C = 0.5 * (cubic - (v @ _DELTA_TERMS.reshape(3, 27)).reshape(n, 3, 3, 3))
    if single:
        return A[0], B[0], C[0]
    return A, B, C


def _delta4():
    d = np.eye(3)
    sym = (np.einsum("ij,kl->ijkl", d, d) + np.einsum("ik,jl->ijkl", d, d)
           + np.einsum("il,jk->ijkl", d, d))
    traceless = (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d)
                 - 2.0 / 3.0 * np.einsum("ij,kl->ijkl", d, d))
    return sym, traceless


SYM4, TRACELESS4 = _delta4()


def _worst(err: np.ndarray) -> tuple[float, tuple]:
    err = np.abs(err)
    idx = np.unravel_index(int(np.argmax(err)), err.shape)
    return float(err[idx]), tuple(int(i) for i in idx)


def _report(name, err, tol, **values):
    e, idx = _worst(np.asarray(err, dtype=float))
    return LemmaReport(name, e, tol, e <= tol, worst_index=idx, **values)


def _weighted_sums(quad, weights_alpha, weights_beta):
    v, w = quad.nodes()
    r = np.sqrt(np.einsum("ni,ni->n", v, v))
    r2 = r * r
    alpha = weights_alpha(r)
    beta = weights_beta(r)
    A, B, C = tensor_fields(v)
    B_hat = beta[:, None] * B
    # remove the component of beta*B along v so that B_hat is orthogonal to
    # the collision invariants; zero for beta = 1
    lam = np.dot(w, np.einsum("ni,ni->n", B_hat, v)) / np.dot(w, r2)
    B_hat = B_hat - lam * v
    A_hat = alpha[:, None, None] * A
    return v, w, r, alpha, beta, A, B, C, A_hat, B_hat


def _outer(factors, n):
    out = factors[0].reshape(n, -1)
    for f in factors[1:]:
        out = (out[:, :, None] * f.reshape(n, 1, -1)).reshape(n, -1)
    return out


def _moment(w, *factors):
    """Σ_n w_n f1_n ⊗ f2_n ⊗ ..., as one matrix product of the two halves."""
    n = len(w)
    half = (len(factors) + 1) // 2
    left = _outer(factors[:half], n) * w[:, None]
    right = _outer(factors[half:], n)
    shape = sum((f.shape[1:] for f in factors), ())
    return (left.T @ right).reshape(shape)


def verify_appendix(
    weights_alpha: IsotropicWeight = UNIT_WEIGHT,
    weights_beta: IsotropicWeight = UNIT_WEIGHT,
    quad: QuadratureSpec | None = None,
    tol: float | None = None,
) -> list[LemmaReport]:
    """Check every bracket identity for A, B, C and the surrogate A_hat, B_hat.

    ``A_hat = alpha(|v|) A`` and ``B_hat = beta(|v|) B`` projected off ``v``.
    Each report records the largest componentwise error over all index tuples.
    """
    poly = weights_alpha.polynomial and weights_beta.polynomial
    if quad is None:
        quad = (QuadratureSpec(10, "gauss_hermite") if poly
                else QuadratureSpec(81, "trapezoid_truncated", 8.5))
    if tol is None:
        tol = POLY_TOL if poly else GENERIC_TOL
    v, w, r, alpha, beta, A, B, C, A_hat, B_hat = _weighted_sums(quad, weights_alpha,
                                                                  weights_beta)
    r2 = r * r
    eye = np.eye(3)
    reports = []

    # orthogonality to the collision invariants 1, v, |v|^2 and A ⊥ B
    inv = np.concatenate([np.ones((len(v), 1)), v, r2[:, None]], axis=1)
    orth = [
        _moment(w, A_hat, inv),
        _moment(w, A, inv),
        _moment(w, B, inv),
        _moment(w, B_hat, inv),
        _moment(w, A, B),
    ]
    reports.append(_report("orthogonality A,B,A_hat,B_hat ⊥ {1,v,|v|^2}; A ⊥ B",
                           np.concatenate([o.ravel() for o in orth]), tol))

    BB = _moment(w, B, B)
    reports.append(_report("<B_i B_j> = 5/2 δ_ij", BB - 2.5 * eye, tol))

    AA = _moment(w, A, A)
    reports.append(_report("<A_ij A_kl> = δ_ik δ_jl + δ_il δ_jk - 2/3 δ_ij δ_kl",
                           AA - TRACELESS4, tol))

    nu = float(np.dot(w, r2**2 * alpha)) / 15.0
    nu_alt = float(np.dot(w, (A_hat * A).sum(axis=(1, 2)))) / 10.0
    AhA = _moment(w, A_hat, A)
    err = np.concatenate([(AhA - nu * TRACELESS4).ravel(), [nu - nu_alt]])
    reports.append(_report("<A_hat_ij A_kl> = ν (δδ + δδ - 2/3 δδ), ν = <|v|^4 α>/15 = <A_hat:A>/10",
                           err, tol, nu_value=nu))

    kappa = float(np.dot(w, (r2 - 5.0) ** 2 * r2 * beta)) / 12.0
    kappa_alt = float(np.dot(w, (B_hat * B).sum(axis=1))) / 3.0
    BhB = _moment(w, B_hat, B)
    err = np.concatenate([(BhB - kappa * eye).ravel(), [kappa - kappa_alt]])
    reports.append(_report("<B_hat_i B_j> = κ δ_ij, κ = <(|v|^2-5)^2 |v|^2 β>/12 = <B_hat·B>/3",
                           err, tol, kappa_value=kappa))

    BvA = _moment(w, B_hat, v, A)
    reports.append(_report("<B_hat_i v_j A_kl> = 2/5 κ (δδ + δδ - 2/3 δδ)",
                           BvA - 0.4 * kappa * TRACELESS4, tol, kappa_value=kappa))

    BvAh = _moment(w, B_hat, v, A_hat)
    c = float(np.einsum("ijij->", BvAh)) / 10.0
    reports.append(_report("<B_hat_i v_j A_hat_kl> = c (δδ + δδ - 2/3 δδ), c = <(B_hat⊗v):A_hat>/10",
                           BvAh - c * TRACELESS4, tol, c_value=c))

    BC = _moment(w, B, C)
    reports.append(_report("<B_i C_jkl> = 1/2 (δ_ij δ_kl + δ_ik δ_jl + δ_il δ_jk)",
                           BC - 0.5 * SYM4, tol))

    for label, radial in (("α", alpha), ("β", beta)):
        V4 = _moment(w * radial, v, v, v, v)
        lam = float(np.einsum("iijj->", V4)) / 15.0
        reports.append(_report(f"isotropy <{label}(|v|) v_i v_j v_k v_l> = λ (δδ + δδ + δδ)",
                               V4 - lam * SYM4, tol))

    for rep in reports:
        if np.isnan(rep.nu_value):
            rep.nu_value = nu
        if np.isnan(rep.kappa_value):
            rep.kappa_value = kappa
        if np.isnan(rep.c_value):
            rep.c_value = c
    return reports


def format_reports(reports: list[LemmaReport]) -> str:
    width = max(len(r.identity_name) for r in reports)
    lines = [f"{'identity':<{width}}  {'max_abs_error':>13}  {'tolerance':>9}  passed"]
    for r in reports:
        lines.append(f"{r.identity_name:<{width}}  {r.max_abs_error:13.3e}  {r.tolerance:9.1e}  "
                     f"{'yes' if r.passed else 'NO'}")
    if reports:
        r = reports[0]
        lines.append(f"nu = {r.nu_value:.12g}   kappa = {r.kappa_value:.12g}   c = {r.c_value:.12g}")
    return "\n".join(lines)


def reports_csv(reports: list[LemmaReport]) -> str:
    rows = ["identity,max_abs_error,tolerance,passed"]
    for r in reports:
        name = r.identity_name.replace('"', "'")
        rows.append(f'"{name}",{r.max_abs_error:.6e},{r.tolerance:.1e},{str(r.passed).lower()}')
    return "\n".join(rows) + "\n"

