"""E/W decomposition and the pointwise identities of Ricci-type connections.

The 1-form ``u``, the function ``b`` and their derivatives are computed as
jet fields, so every identity compares a genuine covariant derivative with
algebraic curvature data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .connection import CurvatureData, covariant_derivative
from .jets import Jet, JetOrderError, einsum
from .scalars import DEFAULT_TOL, EXACT, eye, is_zero, max_abs, relative, to_json_array, to_json_scalar, to_scalar
from .symplectic import DarbouxFrame, SymplecticForm, build_darboux_frame
from .tensors import DOWN, UP, Tensor, cyclic_sum

RESIDUAL_NAMES = ("eq1_1", "cyclic_nabla_r", "eq1_5", "eq1_6", "eq1_8", "eq1_9", "local_symmetry")


class DimensionError(ValueError):
    pass


def _frac(p, q, mode):
    return to_scalar(p, mode) / q if mode == EXACT else p / q


def _require_n(n: int):
    if n < 2:
        raise DimensionError("the E/W decomposition is only defined for dimension 2n >= 4")


def e_component(r: np.ndarray, form: SymplecticForm) -> np.ndarray:
    """Ricci-determined part of a symplectic curvature tensor."""
    n = form.n
    w = form.matrix
    e = (2 * np.einsum("xy,zt->xyzt", w, r)
         + np.einsum("xz,yt->xyzt", w, r)
         + np.einsum("xt,yz->xyzt", w, r)
         - np.einsum("yz,xt->xyzt", w, r)
         - np.einsum("yt,xz->xyzt", w, r))
    return e * -_frac(1, 2 * (n + 1), form.mode)


def ricci_trace(t, form: SymplecticForm) -> np.ndarray:
    """``Ric(T)(X, Y) = trace(Z -> T(X, Z) Y)`` for a lowered (0,4) tensor."""
    t = t.components if isinstance(t, Tensor) else t
    return np.einsum("xzyt,tz->xy", t, form.inverse)


def decompose(data: CurvatureData, form: SymplecticForm | None = None):
    """``(E, W)`` with ``R_low = E + W``."""
    form = form or data.omega
    _require_n(form.n)
    e = e_component(data.r.components, form)
    return Tensor.covariant(e), Tensor.covariant(data.R_low.components - e)


def extract_u(data: CurvatureData, frame: DarbouxFrame | None = None) -> np.ndarray:
    """``u(X) = -sum_a (nabla_{Q_a} r)(P_a, X)`` over the 2n dual pairs."""
    if data.nabla_r is None:
        raise JetOrderError("extract_u needs nabla r (depth >= 1)")
    return u_from_nabla_r(data.nabla_r.components, data.omega, frame)


def u_from_nabla_r(nabla_r: np.ndarray, form: SymplecticForm, frame: DarbouxFrame | None = None):
    frame = frame or build_darboux_frame(form)
    P, Q = frame.dual_pairs()
    return -np.einsum("ai,aj,ijx->x", Q, P, nabla_r)


def b_from_contraction(nabla_u: np.ndarray, A: np.ndarray, form: SymplecticForm):
    """Contract ``nabla u = -c r2 + b omega`` with omega^{-1}:
    ``b = (trace_omega(nabla u) + c trace(A^2)) / 2n``, c = (2n+1)/(2(n+1))."""
    n = form.n
    c = _frac(2 * n + 1, 2 * (n + 1), form.mode)
    trace_w = np.einsum("xy,yx->", nabla_u, form.inverse)
    tr_a2 = np.einsum("kj,jk->", A, A)
    return (trace_w + c * tr_a2) / (2 * n)


def extract_b(data: CurvatureData, u_jet: Jet | None = None):
    """``b`` at the point from a jet of the 1-form ``u`` (order >= 1).

    Without ``u_jet`` the field is the one induced by ``nabla r``, which
    needs depth >= 2.
    """
    if u_jet is None:
        f = ricci_fields(data)
        if f.b is None:
            raise JetOrderError("b needs curvature data of depth >= 2")
        return f.b.value[()]
    if u_jet.order is not None and u_jet.order < 1:
        raise JetOrderError("u jet carries no derivative")
    nabla_u = covariant_derivative(data.gamma, u_jet, (DOWN,), order=0).value
    A = np.einsum("kx,xy->ky", data.omega.inverse, data.r.components)
    return b_from_contraction(nabla_u, A, data.omega)


def divergence(nabla_vec: np.ndarray):
    """``div X = trace(Z -> nabla_Z X)`` from ``nabla_vec[z, k]``."""
    return np.einsum("zz->", nabla_vec)


@dataclass
class RicciFields:
    """Jet fields r, A, nabla r, u, ubar, nabla A, nabla u, b, db, nabla db."""

    n: int
    mode: str
    omega: Jet
    omega_inv: Jet
    r: Jet
    A: Jet
    nabla_r: Jet
    u: Jet
    ubar: Jet
    nabla_A: Jet | None = None
    nabla_u: Jet | None = None
    nabla_ubar: Jet | None = None
    b: Jet | None = None
    db: Jet | None = None
    nabla_db: Jet | None = None


def _order_available(data: CurvatureData) -> int | None:
    return None if data.gamma.order is None else data.depth


def ricci_fields(data: CurvatureData) -> RicciFields:
    """Differentiate as deep as the data allows (depth 4 gives everything)."""
    depth = _order_available(data)
    if depth is not None and depth < 1:
        raise JetOrderError("Ricci-type identities need curvature data of depth >= 1")
    g = data.gamma
    n = data.n
    mode = data.mode
    om = data.omega_jet if depth is None or data.omega_jet.order is None else data.omega_jet.truncate(depth)
    winv = jets.inverse(om)
    r = data.r_jet
    A = einsum("kx,xy->ky", winv, r)
    nabla_r = covariant_derivative(g, r, (DOWN, DOWN))
    u = -einsum("ij,ijx->x", winv, nabla_r)
    ubar = einsum("j,ji->i", u, winv)
    f = RicciFields(n, mode, om, winv, r, A, nabla_r, u, ubar)
    f.nabla_A = covariant_derivative(g, A, (UP, DOWN))
    if depth is None or depth >= 2:
        f.nabla_u = covariant_derivative(g, u, (DOWN,))
        f.nabla_ubar = covariant_derivative(g, ubar, (UP,))
        c = _frac(2 * n + 1, 2 * (n + 1), mode)
        trace_w = einsum("xy,yx->", f.nabla_u, winv)
        tr_a2 = einsum("kj,jk->", A, A)
        f.b = (trace_w + tr_a2 * c) / (2 * n)
    if depth is None or depth >= 3:
        f.db = f.b.partial()
    if depth is None or depth >= 4:
        f.nabla_db = covariant_derivative(g, f.db, (DOWN,))
    return f


def _rel(diff, *parts):
    return relative(max_abs(diff), *parts)


def lemma_identity_residuals(data: CurvatureData, fields: RicciFields | None = None) -> dict:
    """Relative residual (LHS - RHS over all basis slots) of each identity.

    Needs depth >= 3; at depth 3 ``eq1_9`` is ``None``.
    """
    depth = _order_available(data)
    if depth is not None and depth < 3:
        raise JetOrderError(f"identity residuals need curvature data of depth >= 3, got {depth}")
    f = fields or ricci_fields(data)
    n = data.n
    mode = data.mode
    w = data.omega.matrix
    k1 = _frac(1, 2 * n + 1, mode)
    c = _frac(2 * n + 1, 2 * (n + 1), mode)
    r = f.r.value
    A = f.A.value
    u = f.u.value
    ubar = f.ubar.value
    nr = f.nabla_r.value
    out = dict.fromkeys(RESIDUAL_NAMES)

    rhs11 = k1 * (np.einsum("xy,z->xyz", w, u) + np.einsum("xz,y->xyz", w, u))
    out["eq1_1"] = _rel(nr - rhs11, nr, rhs11)
    cyc = cyclic_sum(Tensor.covariant(nr), (0, 1, 2)).components
    out["cyclic_nabla_r"] = _rel(cyc, nr)

    nA = f.nabla_A.value
    ident = eye(2 * n, mode)
    rhs15 = -k1 * (np.einsum("kx,y->xky", ident, u) + np.einsum("k,xy->xky", ubar, w))
    out["eq1_5"] = _rel(nA - rhs15, nA, rhs15)

    A2 = A @ A
    A3 = A2 @ A
    r2 = w @ A2
    r3 = w @ A3
    if f.nabla_u is not None:
        b = f.b.value
        nu = f.nabla_u.value
        rhs16 = -c * r2 + b * w
        out["eq1_6"] = _rel(nu - rhs16, nu, rhs16)
    if f.db is not None:
        db = f.db.value
        rhs18 = np.einsum("i,ix->x", ubar, r) / (n + 1)
        out["eq1_8"] = _rel(db - rhs18, db, rhs18)
    if f.nabla_db is not None:
        ndb = f.nabla_db.value
        rhs19 = (-k1 * np.einsum("x,y->xy", u, u) - c * r3 + f.b.value * r) / (n + 1)
        out["eq1_9"] = _rel(ndb - rhs19, ndb, rhs19)
    if data.nablaR is not None:
        out["local_symmetry"] = local_symmetry_residual(data)
    return out


def local_symmetry_residual(data: CurvatureData):
    """Relative size of ``nabla R``."""
    if data.nablaR is None:
        raise JetOrderError("local symmetry check needs nabla R (depth >= 1)")
    return relative(data.nablaR.max_abs(), data.R_low.components)


def auxiliary_residuals(data: CurvatureData, fields: RicciFields) -> dict:
    """Intermediate identities behind ``eq1_6``.

    ``curvature_on_A``: [R(X,Y), A] against the Ricci-type expression.
    ``endomorphism_B``: ``B = c A^2 + nabla ubar`` equals ``b Id``.
    """
    n = data.n
    mode = data.mode
    w = data.omega.matrix
    A = fields.A.value
    A2 = A @ A
    Rmat = np.moveaxis(data.R.components, 3, 2)  # [x, y, l, z]: matrix of R(e_x, e_y)
    comm = np.einsum("xylm,mz->xylz", Rmat, A) - np.einsum("lm,xymz->xylz", A, Rmat)
    ident = eye(2 * n, mode)
    # X (x) omega(A^2 Y, .) etc., as matrices [l, z]
    a2w = np.einsum("ky,kz->yz", A2, w)  # omega(A^2 e_y, e_z)
    expr = (np.einsum("lx,yz->xylz", ident, a2w) - np.einsum("ly,xz->xylz", ident, a2w)
            + np.einsum("ly,xz->xylz", A2, w) - np.einsum("lx,yz->xylz", A2, w))
    expr = expr * -_frac(1, 2 * (n + 1), mode)
    out = {"curvature_on_A": _rel(comm - expr, comm, expr), "endomorphism_B": None}
    if fields.nabla_ubar is not None:
        c = _frac(2 * n + 1, 2 * (n + 1), mode)
        B = c * A2 + fields.nabla_ubar.value.T
        out["endomorphism_B"] = _rel(B - fields.b.value * ident, B)
    return out


def frame_contraction_chain(nabla_r: np.ndarray, form: SymplecticForm,
                            frame: DarbouxFrame | None = None) -> dict:
    """Replay the frame-substitution argument on a given ``nabla r``.

    ``star``: cyclically summed, differentiated E-identity (zero for Ricci
    type).  ``substitution``: the frame-summed ``star`` minus twice the
    assembled five-term expression (zero for every ``nabla r`` symmetric in
    its last two slots).  ``factor``: cyclic sum of that expression minus
    ``(2n - 2)`` times the cyclic sum of ``nabla r`` (likewise always zero).
    """
    frame = frame or build_darboux_frame(form)
    n = form.n
    w = form.matrix
    nr = nabla_r
    s0 = (2 * np.einsum("yz,xtu->xyztu", w, nr)
          + np.einsum("yt,xzu->xyztu", w, nr)
          + np.einsum("yu,xzt->xyztu", w, nr)
          - np.einsum("zt,xyu->xyztu", w, nr)
          - np.einsum("zu,xyt->xyztu", w, nr))
    star = cyclic_sum(Tensor.covariant(s0), (0, 1, 2)).components
    P, Q = frame.dual_pairs()
    substituted = np.einsum("ay,az,xyztu->xtu", P, Q, star)
    s = np.einsum("ai,aj,ijv->v", Q, P, nr)
    assembled = (2 * n * nr - np.einsum("txu->xtu", nr) - np.einsum("uxt->xtu", nr)
                 + np.einsum("xt,u->xtu", w, s) + np.einsum("xu,t->xtu", w, s))
    cyc_assembled = cyclic_sum(Tensor.covariant(assembled), (0, 1, 2)).components
    cyc_nr = cyclic_sum(Tensor.covariant(nr), (0, 1, 2)).components
    return {
        "star": _rel(star, nr),
        "substitution": _rel(substituted - 2 * assembled, substituted, assembled),
        "factor": _rel(cyc_assembled - (2 * n - 2) * cyc_nr, cyc_assembled, cyc_nr),
        "assembled": assembled,
        "cyclic_nabla_r": cyc_nr,
    }


def converse_residual(data: CurvatureData, u: np.ndarray) -> dict:
    """Converse direction: with ``nabla r`` replaced by the right side of the
    first identity, the cyclic sum of ``nabla E`` vanishes, so the cyclic sums
    of ``nabla W`` and ``nabla R`` agree."""
    form = data.omega
    n = form.n
    w = form.matrix
    k1 = _frac(1, 2 * n + 1, form.mode)
    nr = k1 * (np.einsum("xy,z->xyz", w, u) + np.einsum("xz,y->xyz", w, u))
    nE = np.stack([e_component(nr[x], form) for x in range(2 * n)])
    cyc_e = cyclic_sum(Tensor.covariant(nE), (0, 1, 2)).components
    return {"cyclic_nabla_E": _rel(cyc_e, nE)}


@dataclass
class RicciTypeReport:
    W_norm: object
    is_ricci_type: bool
    u: np.ndarray
    u_bar: np.ndarray
    b: object
    A: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    residuals: dict
    tol: float
    mode: str
    model: str = ""
    auxiliary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "mode": self.mode,
            "tol": self.tol,
            "W_norm": to_json_scalar(self.W_norm),
            "is_ricci_type": self.is_ricci_type,
            "u": to_json_array(self.u),
            "u_bar": to_json_array(self.u_bar),
            "b": None if self.b is None else to_json_scalar(self.b),
            "A": to_json_array(self.A),
            "r2": to_json_array(self.r2),
            "r3": to_json_array(self.r3),
            "residuals": {k: None if v is None else to_json_scalar(v) for k, v in self.residuals.items()},
            "auxiliary": {k: None if v is None else to_json_scalar(v) for k, v in self.auxiliary.items()},
        }

    def passed(self) -> bool:
        """Ricci type and every available identity within tolerance."""
        if not self.is_ricci_type:
            return False
        return all(v is None or is_zero(v, self.tol) for v in self.residuals.values())


def ricci_type_report(data: CurvatureData, tol: float = DEFAULT_TOL) -> RicciTypeReport:
    E, W = decompose(data)
    w_norm = relative(W.max_abs(), data.R_low.components)
    fields = ricci_fields(data)
    residuals = lemma_identity_residuals(data, fields)
    aux = auxiliary_residuals(data, fields)
    A = fields.A.value
    w = data.omega.matrix
    return RicciTypeReport(
        W_norm=w_norm,
        is_ricci_type=is_zero(w_norm, tol),
        u=fields.u.value,
        u_bar=fields.ubar.value,
        b=None if fields.b is None else fields.b.value[()],
        A=A,
        r2=w @ A @ A,
        r3=w @ A @ A @ A,
        residuals=residuals,
        tol=tol,
        mode=data.mode,
        model=data.model_name,
        auxiliary=aux,
    )
