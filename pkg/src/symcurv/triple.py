"""Symmetric symplectic triples built from locally symmetric curvature.

The Lie algebra is ``l = T + a`` where ``T`` is the tangent space at the
point and ``a`` the span of the curvature endomorphisms.  Basis order: the
2n tangent vectors, then the holonomy basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .connection import CurvatureData
from .ricci import local_symmetry_residual
from .scalars import DEFAULT_TOL, EXACT, is_zero, max_abs, relative, to_json_array, to_json_scalar, to_scalar, zeros
from .symplectic import SymplecticForm
from .tensors import Tensor, cyclic_sum

NABLA_R_GATE = 1e-8


class NotLocallySymmetricError(ValueError):
    pass


def curvature_endomorphisms(data: CurvatureData) -> np.ndarray:
    """``E[x, y]`` is the matrix of ``R(e_x, e_y)``, recovered from ``R_low``."""
    R = np.einsum("xyzt,tl->xylz", data.R_low.components, data.omega.inverse)
    return R


def _check_gate(data: CurvatureData, gate: float):
    res = local_symmetry_residual(data)
    ok = res == 0 if data.mode == EXACT else res <= gate
    if not ok:
        raise NotLocallySymmetricError(f"nabla R residual {res} exceeds the gate; the curvature span "
                                       "is not the holonomy algebra")


@dataclass(frozen=True)
class HolonomySpan:
    """Basis matrices (rows of ``flat`` reshaped) with RREF pivots."""

    basis: np.ndarray  # (h, d, d)
    flat: np.ndarray  # (h, d*d) in reduced row echelon form
    pivots: tuple

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def coordinates(self, m: np.ndarray) -> np.ndarray:
        return np.asarray(m).reshape(-1)[list(self.pivots)]

    def closure_defect(self, m: np.ndarray):
        v = np.asarray(m).reshape(-1)
        back = self.coordinates(m) @ self.flat if self.dim else v * 0
        return max_abs(v - back)


def holonomy_span(data: CurvatureData, gate: float = NABLA_R_GATE, force: bool = False,
                  tol: float = DEFAULT_TOL) -> HolonomySpan:
    """Basis of ``span{R(e_i, e_j)}``; rejects data with ``nabla R != 0``
    unless ``force`` is set."""
    if not force:
        _check_gate(data, gate)
    d = data.dim
    E = curvature_endomorphisms(data)
    rows = np.stack([E[i, j].reshape(-1) for i in range(d) for j in range(i + 1, d)])
    red, piv = linalg.rref(rows, tol)
    flat = red[: len(piv)]
    return HolonomySpan(flat.reshape(len(piv), d, d), flat, tuple(piv))


@dataclass(frozen=True)
class SymmetricTriple:
    dim_T: int
    hol_dim: int
    span: HolonomySpan
    structure_constants: np.ndarray  # C[k, i, j]: [x_i, x_j] = C^k_ij x_k
    sigma: np.ndarray  # diagonal entries
    Omega: np.ndarray
    closure_defect: object
    mode: str
    curvature_sign: int = 1

    @property
    def dim(self) -> int:
        return self.dim_T + self.hol_dim

    def ad(self, i: int) -> np.ndarray:
        return self.structure_constants[:, i, :]

    def to_dict(self) -> dict:
        C = self.structure_constants
        entries = [[i, j, k, to_json_scalar(C[k, i, j])]
                   for i in range(self.dim) for j in range(i + 1, self.dim) for k in range(self.dim)
                   if C[k, i, j] != 0]
        return {
            "dim": self.dim, "dim_T": self.dim_T, "hol_dim": self.hol_dim, "mode": self.mode,
            "structure_constants": entries,
            "sigma": to_json_array(self.sigma),
            "Omega": to_json_array(self.Omega),
            "holonomy_basis": to_json_array(self.span.basis),
            "closure_defect": to_json_scalar(self.closure_defect),
            "curvature_sign": self.curvature_sign,
        }


def build_triple(data: CurvatureData, form: SymplecticForm | None = None, gate: float = NABLA_R_GATE,
                 force: bool = False, tol: float = DEFAULT_TOL, curvature_sign: int = 1) -> SymmetricTriple:
    """Brackets ``[X, Y] = s R(X, Y)``, ``[B, X] = BX``, ``[B, C] = BC - CB``.

    ``s = 1`` is the literal construction.  Its symmetric space carries the
    curvature ``-R``; ``s = -1`` gives the dual algebra, whose symmetric
    space reproduces ``R`` (see :func:`symmetric_space_curvature`).
    """
    if curvature_sign not in (1, -1):
        raise ValueError("curvature_sign must be 1 or -1")
    form = form or data.omega
    span = holonomy_span(data, gate, force, tol)
    d, h = data.dim, span.dim
    mode = data.mode
    L = d + h
    E = curvature_endomorphisms(data)
    C = zeros((L, L, L), mode)
    for x in range(d):
        for y in range(d):
            C[d:, x, y] = span.coordinates(E[x, y]) * curvature_sign
    defect = max((span.closure_defect(E[x, y]) for x in range(d) for y in range(d)), default=0)
    for a in range(h):
        B = span.basis[a]
        for x in range(d):
            C[:d, d + a, x] = B[:, x]
            C[:d, x, d + a] = -B[:, x]
        for b in range(h):
            comm = B @ span.basis[b] - span.basis[b] @ B
            C[d:, d + a, d + b] = span.coordinates(comm)
            defect = max(defect, span.closure_defect(comm))
    one = to_scalar(1, mode)
    sigma = np.array([-one] * d + [one] * h, dtype=object if mode == EXACT else float)
    Omega = zeros((L, L), mode)
    Omega[:d, :d] = form.matrix
    return SymmetricTriple(d, h, span, C, sigma, Omega, defect, mode, curvature_sign)


def jacobi_tensor(C: np.ndarray) -> np.ndarray:
    """``J[i, j, k, l]``: l-component of the cyclic sum of ``[x_i, [x_j, x_k]]``."""
    inner = np.einsum("mjk,lim->ijkl", C, C)
    return cyclic_sum(Tensor.covariant(inner), (0, 1, 2)).components


def symmetric_space_curvature(t: SymmetricTriple) -> np.ndarray:
    """``R1[x, y, z, l]``: l-component of ``-[[x, y], z]`` on the tangent part,
    the curvature of the canonical connection of ``L/K`` at the base point."""
    C = t.structure_constants
    d = t.dim_T
    return -np.einsum("mxy,lmz->xyzl", C[:, :d, :d], C[:d, :, :d])


def b_dot_r(t: SymmetricTriple, data: CurvatureData) -> np.ndarray:
    """``(B.R)(X, Y) = [B, R(X, Y)] - R(BX, Y) - R(X, BY)`` for each basis B."""
    E = curvature_endomorphisms(data)
    out = []
    for B in t.span.basis:
        comm = np.einsum("lm,xymz->xylz", B, E) - np.einsum("xylm,mz->xylz", E, B)
        bx = np.einsum("px,pylz->xylz", B, E)
        by = np.einsum("py,xplz->xylz", B, E)
        out.append(comm - bx - by)
    return np.stack(out) if out else zeros((0,) + E.shape, t.mode)


def triple_residuals(t: SymmetricTriple, data: CurvatureData) -> dict:
    """Raw max-abs residuals; all vanish for a valid triple."""
    C = t.structure_constants
    d = t.dim_T
    J = jacobi_tensor(C)
    s = t.sigma
    sig = np.einsum("k,kij->kij", s, C) - np.einsum("i,j,kij->kij", s, s, C)
    Om = t.Omega
    om_sigma = np.einsum("i,j,ij->ij", s, s, Om) - Om
    ad_a = C[:, d:, :]  # [k, a, x]
    om_a = np.einsum("kax,ky->axy", ad_a, Om) + np.einsum("xk,kay->axy", Om, ad_a)
    return {
        "jacobi": max_abs(J),
        "jacobi_TTT": max_abs(J[:d, :d, :d]),
        "jacobi_TTa": max_abs(J[:d, :d, d:]),
        "sigma_automorphism": max_abs(sig),
        "omega_sigma_invariance": max_abs(om_sigma),
        "omega_a_invariance": max_abs(om_a),
        "B_dot_R": max_abs(b_dot_r(t, data)),
        "closure": t.closure_defect,
    }


def relative_residuals(t: SymmetricTriple, data: CurvatureData) -> dict:
    scale = max(max_abs(t.structure_constants), max_abs(data.R_low.components))
    return {k: relative(v, scale) for k, v in triple_residuals(t, data).items()}


def killing_form(t: SymmetricTriple) -> np.ndarray:
    """``K_ij = trace(ad x_i ad x_j)``."""
    C = t.structure_constants
    return np.einsum("kim,mjk->ij", C, C)


@dataclass(frozen=True)
class KillingCertificate:
    determinant: object
    nondegenerate: bool
    definite: str | None  # "positive", "negative" or None

    def to_dict(self) -> dict:
        return {"determinant": to_json_scalar(self.determinant), "nondegenerate": self.nondegenerate,
                "definite": self.definite}


def killing_certificate(t: SymmetricTriple, tol: float = DEFAULT_TOL) -> KillingCertificate:
    K = killing_form(t)
    det = linalg.det(K)
    scale = max_abs(K) ** t.dim if t.dim else 1
    nondeg = not is_zero(det, tol, scale)
    minors = linalg.leading_minors(K) if t.dim else []
    definite = None
    if nondeg and minors:
        if all(m > 0 for m in minors):
            definite = "positive"
        elif all((m < 0) if k % 2 == 0 else (m > 0) for k, m in enumerate(minors)):
            definite = "negative"
    return KillingCertificate(det, nondeg, definite)
