"""Reference computations that share no code with the package.

Each oracle works from first principles: explicit loops, sympy
differentiation of a metric, or central finite differences.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import sympy


# loops ------------------------------------------------------------------------

def loop_contract(t: np.ndarray, i: int, j: int) -> np.ndarray:
    """Trace of slots i and j by explicit summation."""
    dim = t.shape[0]
    rest = [k for k in range(t.ndim) if k not in (i, j)]
    out = np.zeros((dim,) * len(rest), dtype=t.dtype)
    for idx in itertools.product(range(dim), repeat=len(rest)):
        acc = 0
        for s in range(dim):
            full = [0] * t.ndim
            for slot, v in zip(rest, idx):
                full[slot] = v
            full[i] = full[j] = s
            acc = acc + t[tuple(full)]
        out[idx] = acc
    return out


def loop_ricci(R: np.ndarray) -> np.ndarray:
    """``r[x, y] = sum_l R[x, l, y, l]`` with R[x,y,z,l] the l-component of R(e_x,e_y)e_z."""
    dim = R.shape[0]
    r = np.zeros((dim, dim), dtype=R.dtype)
    for x in range(dim):
        for y in range(dim):
            r[x, y] = sum(R[x, l, y, l] for l in range(dim))
    return r


def loop_e_tensor(r, w, n):
    """The Ricci-built curvature tensor, entry by entry."""
    dim = 2 * n
    k = Fraction(-1, 2 * (n + 1))
    e = np.zeros((dim,) * 4, dtype=object)
    for x, y, z, t in itertools.product(range(dim), repeat=4):
        e[x, y, z, t] = k * (2 * w[x][y] * r[z][t] + w[x][z] * r[y][t] + w[x][t] * r[y][z]
                             - w[y][z] * r[x][t] - w[y][t] * r[x][z])
    return e


def loop_trace_w(t, winv):
    """``sum_{z,t} T[x, z, y, t] winv[t, z]``."""
    dim = t.shape[0]
    out = np.zeros((dim, dim), dtype=object)
    for x, y in itertools.product(range(dim), repeat=2):
        out[x, y] = sum(t[x, z, y, s] * winv[s][z] for z in range(dim) for s in range(dim))
    return out


# Fubini-Study from the Hermitian metric ---------------------------------------

def _fs_symbols(n):
    xs = sympy.symbols(f"x0:{n}", real=True)
    ys = sympy.symbols(f"y0:{n}", real=True)
    return list(xs) + list(ys)


def fs_metric_symbolic(n, lam=1):
    """(coords, G, omega) with ``h = lam [xi.conj(eta)/s - (zbar.xi)(z.conj(eta))/s^2]``,
    ``G = Re h`` and ``omega = -Im h`` in the real basis (x_1..x_n, y_1..y_n)."""
    c = _fs_symbols(n)
    z = [c[a] + sympy.I * c[n + a] for a in range(n)]
    s = 1 + sum(c[k] ** 2 for k in range(2 * n))

    def vec(i):
        v = [0] * n
        v[i % n] = 1 if i < n else sympy.I
        return v

    dim = 2 * n
    G = sympy.zeros(dim, dim)
    W = sympy.zeros(dim, dim)
    for i in range(dim):
        for j in range(dim):
            xi, eta = vec(i), vec(j)
            dot = sum(xi[a] * sympy.conjugate(eta[a]) for a in range(n))
            zx = sum(sympy.conjugate(z[a]) * xi[a] for a in range(n))
            ze = sum(z[a] * sympy.conjugate(eta[a]) for a in range(n))
            h = sympy.Rational(lam) * (dot / s - zx * ze / s ** 2)
            h = sympy.expand(h)
            G[i, j] = sympy.simplify(sympy.re(h))
            W[i, j] = sympy.simplify(-sympy.im(h))
    return c, G, W


def levi_civita_curvature(coords, G, point):
    """Exact (Gamma, R) of the Levi-Civita connection of G at a rational point.

    Returns ``Gamma[l, i, j]`` and ``R[x, y, z, l]`` (l-component of
    R(e_x, e_y) e_z) as object arrays of Fractions.
    """
    dim = len(coords)
    sub = dict(zip(coords, [sympy.Rational(str(p)) for p in point]))
    g0 = G.subs(sub)
    dG = [G.diff(v) for v in coords]
    dG0 = [m.subs(sub) for m in dG]
    ddG0 = [[dG[a].diff(coords[b]).subs(sub) for b in range(dim)] for a in range(dim)]
    ginv = g0.inv()

    def low(d, k, i, j):  # Gamma_kij from the first derivatives d[m]
        return (d[i][k, j] + d[j][k, i] - d[k][i, j]) / 2

    gam_low = [[[low(dG0, k, i, j) for j in range(dim)] for i in range(dim)] for k in range(dim)]
    gamma = [[[sum(ginv[l, k] * gam_low[k][i][j] for k in range(dim)) for j in range(dim)]
              for i in range(dim)] for l in range(dim)]
    # d_m Gamma^l_ij = d_m(ginv)_lk Gamma_kij + ginv_lk d_m Gamma_kij
    dgamma = []
    for m in range(dim):
        dginv = -ginv * dG0[m] * ginv
        dd = [ddG0[a][m] for a in range(dim)]
        dlow = [[[low(dd, k, i, j) for j in range(dim)] for i in range(dim)] for k in range(dim)]
        dgamma.append([[[sum(dginv[l, k] * gam_low[k][i][j] + ginv[l, k] * dlow[k][i][j] for k in range(dim))
                         for j in range(dim)] for i in range(dim)] for l in range(dim)])
    R = np.zeros((dim,) * 4, dtype=object)
    for x, y, z, l in itertools.product(range(dim), repeat=4):
        val = dgamma[x][l][y][z] - dgamma[y][l][x][z]
        val += sum(gamma[l][x][m] * gamma[m][y][z] - gamma[l][y][m] * gamma[m][x][z] for m in range(dim))
        R[x, y, z, l] = Fraction(str(sympy.nsimplify(val)))
    gam = np.zeros((dim,) * 3, dtype=object)
    for l, i, j in itertools.product(range(dim), repeat=3):
        gam[l, i, j] = Fraction(str(gamma[l][i][j]))
    return gam, R


# finite differences -------------------------------------------------------------

def fs_gamma_float(point, n):
    """Closed-form complex-bilinear Christoffel symbols of Fubini-Study,
    ``Gamma(xi, eta) = -(xi (zbar.eta) + eta (zbar.xi)) / s``."""
    p = np.asarray(point, float)
    z = p[:n] + 1j * p[n:]
    s = 1 + np.sum(np.abs(z) ** 2)
    dim = 2 * n
    basis = [np.eye(n)[a] if a < n else 1j * np.eye(n)[a - n] for a in range(dim)]
    gam = np.zeros((dim, dim, dim))
    for i in range(dim):
        for j in range(dim):
            v = -(basis[i] * (z.conj() @ basis[j]) + basis[j] * (z.conj() @ basis[i])) / s
            gam[:n, i, j] = v.real
            gam[n:, i, j] = v.imag
    return gam


def fd_curvature(gamma_fn, point, h=1e-5):
    """Curvature from central differences of a Christoffel function."""
    p = np.asarray(point, float)
    dim = len(p)
    g = gamma_fn(p)
    dg = np.zeros((dim,) + g.shape)
    for m in range(dim):
        e = np.zeros(dim)
        e[m] = h
        dg[m] = (gamma_fn(p + e) - gamma_fn(p - e)) / (2 * h)
    lin = np.einsum("xlyz->xyzl", dg)
    quad = np.einsum("lxm,myz->xyzl", g, g)
    R = lin + quad
    return R - np.swapaxes(R, 0, 1)


def fd_covariant_derivative_1form(u_fn, gamma_fn, point, h=1e-5):
    """``(nabla_x u)_y = d_x u_y - Gamma^m_xy u_m`` by central differences."""
    p = np.asarray(point, float)
    dim = len(p)
    du = np.zeros((dim, dim))
    for m in range(dim):
        e = np.zeros(dim)
        e[m] = h
        du[m] = (u_fn(p + e) - u_fn(p - e)) / (2 * h)
    return du - np.einsum("mxy,m->xy", gamma_fn(p), u_fn(p))
