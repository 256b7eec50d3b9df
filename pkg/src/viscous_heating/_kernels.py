"""Compiled loops shared by the kinetic solvers."""
import numpy as np
from numba import njit


@njit(cache=True)
def _advect_rows(E, c0, c1, c2, c3, s, out):
    half = 0.5 * (1.0 - s)
    for k in range(out.shape[0]):
        a0 = E[c0, k]
        a1 = E[c1, k]
        a2 = E[c2, k]
        a3 = E[c3, k]
        d10 = a1 - a0
        d21 = a2 - a1
        d32 = a3 - a2
        m1 = 0.0
        if d21 * d10 > 0.0:
            m1 = min(abs(d21), abs(d10)) * np.sign(d21)
        m2 = 0.0
        if d32 * d21 > 0.0:
            m2 = min(abs(d32), abs(d21)) * np.sign(d32)
        out[k] = a2 - s * (d21 + half * (m2 - m1))


@njit(cache=True)
def transport_specular(G, H, disp, outG, outH):
    """Advect G, H in x1 by ``disp[j]`` cells for v1 node j, specular walls.

    The half domain with its mirror image (x -> -x about each wall, v1 -> -v1)
    is a periodic domain of 2N cells.  Each displacement is split into an
    integer shift, done exactly, and a fraction in [0, 1) advected with the
    minmod-limited second-order upwind flux.
    """
    N, n1, n2 = G.shape
    N2 = 2 * N
    EG = np.empty((N2, n2))
    EH = np.empty((N2, n2))
    for j in range(n1):
        jm = n1 - 1 - j
        for c in range(N):
            for k in range(n2):
                EG[c, k] = G[c, j, k]
                EH[c, k] = H[c, j, k]
                EG[N2 - 1 - c, k] = G[c, jm, k]
                EH[N2 - 1 - c, k] = H[c, jm, k]
        d = disp[j]
        n = int(np.floor(d))
        s = d - n
        for i in range(N):
            c0 = (i - n - 2) % N2
            c1 = (i - n - 1) % N2
            c2 = (i - n) % N2
            c3 = (i - n + 1) % N2
            _advect_rows(EG, c0, c1, c2, c3, s, outG[i, j])
            _advect_rows(EH, c0, c1, c2, c3, s, outH[i, j])


@njit(cache=True)
def _shift_row(g, s, out):
    # advect one row by s in (-1, 1); zero flux through both ends of the row
    n = g.shape[0]
    a = abs(s)
    half = 0.5 * (1.0 - a)
    prev = 0.0
    if s > 0.0:
        for k in range(n - 1):
            gm = g[k - 1] if k > 0 else 0.0
            dl = g[k] - gm
            dr = g[k + 1] - g[k]
            m = 0.0
            if dl * dr > 0.0:
                m = min(abs(dl), abs(dr)) * np.sign(dr)
            flux = a * (g[k] + half * m)
            out[k] = g[k] - flux + prev
            prev = flux
        out[n - 1] = g[n - 1] + prev
    else:
        for k in range(n - 1, 0, -1):
            gp = g[k + 1] if k < n - 1 else 0.0
            dl = g[k] - g[k - 1]
            dr = gp - g[k]
            m = 0.0
            if dl * dr > 0.0:
                m = min(abs(dl), abs(dr)) * np.sign(dl)
            flux = a * (g[k] - half * m)
            out[k] = g[k] - flux + prev
            prev = flux
        out[0] = g[0] + prev


@njit(cache=True)
def accelerate_v2(G, H, disp, outG, outH):
    """Advect each cell's G, H along v2 by ``disp[i]`` nodes (|disp| < 1)."""
    N, n1, n2 = G.shape
    for i in range(N):
        d = disp[i]
        for j in range(n1):
            if d == 0.0:
                outG[i, j] = G[i, j]
                outH[i, j] = H[i, j]
            else:
                _shift_row(G[i, j], d, outG[i, j])
                _shift_row(H[i, j], d, outH[i, j])


@njit(cache=True)
def moment_sums(G, H, v1, v2, out):
    """Velocity sums of G against the ten basis monomials and of H against four.

    ``out`` has shape (n_cells, 14): columns 0-9 follow the monomial order
    1, v1, v2, |v|², v1², v1 v2, v2², v1|v|², v2|v|², |v|⁴ for G and
    columns 10-13 hold 1, v1, v2, |v|² for H.  No quadrature weight applied.
    """
    N, n1, n2 = G.shape
    for i in range(N):
        m = np.zeros(14)
        for j in range(n1):
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            s4 = 0.0
            t0 = 0.0
            t1 = 0.0
            t2 = 0.0
            for k in range(n2):
                b = v2[k]
                g = G[i, j, k]
                h = H[i, j, k]
                gb = g * b
                gb2 = gb * b
                s0 += g
                s1 += gb
                s2 += gb2
                s3 += gb2 * b
                s4 += gb2 * b * b
                t0 += h
                t1 += h * b
                t2 += h * b * b
            a = v1[j]
            a2 = a * a
            m[0] += s0
            m[1] += a * s0
            m[2] += s1
            m[3] += a2 * s0 + s2
            m[4] += a2 * s0
            m[5] += a * s1
            m[6] += s2
            m[7] += a2 * a * s0 + a * s2
            m[8] += a2 * s1 + s3
            m[9] += a2 * a2 * s0 + 2.0 * a2 * s2 + s4
            m[10] += t0
            m[11] += a * t0
            m[12] += t1
            m[13] += a2 * t0 + t2
        for c in range(14):
            out[i, c] = m[c]


@njit(cache=True)
def apply_poly_factor(G, H, coef, v1, v2, outG, outH):
    """Multiply cell i by 1 + c0 + c1 v1 + c2 v2 + c3 |v|²."""
    N, n1, n2 = G.shape
    for i in range(N):
        c0 = 1.0 + coef[i, 0]
        c1 = coef[i, 1]
        c2 = coef[i, 2]
        c3 = coef[i, 3]
        for j in range(n1):
            a = v1[j]
            base = c0 + c1 * a + c3 * a * a
            for k in range(n2):
                b = v2[k]
                fac = base + c2 * b + c3 * b * b
                outG[i, j, k] = G[i, j, k] * fac
                outH[i, j, k] = H[i, j, k] * fac


@njit(cache=True)
def fill_maxwellian(params, v1, v2, outG):
    """G = exp(a + b1 v1 + b2 v2 - c|v|²) for per-cell params [a, b1, b2, c]."""
    N, n1, n2 = outG.shape
    e1 = np.empty(n1)
    e2 = np.empty(n2)
    for i in range(N):
        a = params[i, 0]
        b1 = params[i, 1]
        b2 = params[i, 2]
        c = params[i, 3]
        for j in range(n1):
            e1[j] = np.exp(a + b1 * v1[j] - c * v1[j] * v1[j])
        for k in range(n2):
            e2[k] = np.exp(b2 * v2[k] - c * v2[k] * v2[k])
        for j in range(n1):
            for k in range(n2):
                outG[i, j, k] = e1[j] * e2[k]


@njit(cache=True)
def relax_towards(G, H, MG, MH, decay, outG, outH):
    """out = M + (F - M) * decay[i], cell by cell."""
    N, n1, n2 = G.shape
    for i in range(N):
        d = decay[i]
        for j in range(n1):
            for k in range(n2):
                outG[i, j, k] = MG[i, j, k] + (G[i, j, k] - MG[i, j, k]) * d
                outH[i, j, k] = MH[i, j, k] + (H[i, j, k] - MH[i, j, k]) * d
