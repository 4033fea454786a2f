"""Left-invariant symplectic connections on Lie algebras.

A model is a Lie algebra with structure constants ``c[k, i, j] = c^k_ij``
(``[e_i, e_j] = c^k_ij e_k``), an invariant symplectic form and the
connection map ``lam[k, i, j]``, the k-component of ``nabla_{e_i} e_j``.
All curvature quantities are constant, so every check is linear algebra.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import least_squares

from . import linalg
from .connection import CurvatureData, curvature_from_gamma
from .jets import Jet
from .models import ModelError, _parse_coeff
from .ricci import decompose, ricci_fields
from .scalars import (
    DEFAULT_TOL, EXACT, FLOAT, asarray, eye, is_zero, max_abs, relative, to_json_array,
    to_json_scalar, to_scalar, zeros,
)
from .symplectic import DegenerateFormError, SymplecticForm, sp_residual
from .tensors import Tensor, cyclic_sum

LABELS = ("locally_symmetric_or_zero", "case1_rank1_nilpotent", "case2_A3_rank1", "case3_mixed")


class UnclassifiableError(ValueError):
    """The endomorphism matches none of the dimension-4 cases."""


@dataclass(frozen=True)
class AlgebraicModel:
    n: int
    c: np.ndarray
    omega: SymplecticForm
    lam: np.ndarray
    name: str = "algebraic"

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def mode(self) -> str:
        return self.omega.mode

    def to_mode(self, mode: str) -> "AlgebraicModel":
        if mode == self.mode:
            return self
        return AlgebraicModel(self.n, asarray(self.c, mode), SymplecticForm(asarray(self.omega.matrix, mode), mode),
                              asarray(self.lam, mode), self.name)


def _bracket_omega(c, w):
    """``omega([e_x, e_y], e_z)``."""
    return np.einsum("kxy,kz->xyz", c, w)


def validate_algebraic_model(m: AlgebraicModel) -> dict:
    """Raw max-abs residuals of the four standing hypotheses."""
    c, lam, w = m.c, m.lam, m.omega.matrix
    jac = np.einsum("kxy,lkz->xyzl", c, c)
    return {
        "jacobi": cyclic_sum(Tensor.covariant(jac), (0, 1, 2)).max_abs(),
        "cocycle": cyclic_sum(Tensor.covariant(_bracket_omega(c, w)), (0, 1, 2)).max_abs(),
        "torsion": max_abs(lam - np.swapaxes(lam, 1, 2) - c),
        "nabla_omega": max_abs(np.einsum("kxy,kz->xyz", lam, w) + np.einsum("yk,kxz->xyz", w, lam)),
    }


def residuals_ok(residuals: dict, tol: float = DEFAULT_TOL, magnitude=0) -> bool:
    return all(is_zero(v, tol, magnitude) for v in residuals.values())


def _require_valid(m: AlgebraicModel, tol: float):
    res = validate_algebraic_model(m)
    scale = max(max_abs(m.c), max_abs(m.lam), max_abs(m.omega.matrix))
    bad = [k for k, v in res.items() if not is_zero(v, tol, scale)]
    if bad:
        raise ModelError("algebraic model violates: " + ", ".join(f"{k} (residual {res[k]})" for k in bad))


def invariant_connection(c, form: SymplecticForm, S=None) -> np.ndarray:
    """``lam`` with ``omega(lam(x, y), z) = (omega([x,y],z) + omega([x,z],y)) / 3 + s(x, y, z)``.

    ``S`` is an optional totally symmetric 3-tensor ``s``; any choice keeps
    the connection torsion free and symplectic when omega is a cocycle.
    """
    mode = form.mode
    bw = _bracket_omega(asarray(c, mode), form.matrix)
    third = to_scalar(1, mode) / 3
    low = (bw + np.swapaxes(bw, 1, 2)) * third
    if S is not None:
        S = asarray(S, mode)
        sym = max_abs(S - np.transpose(S, (1, 0, 2))) + max_abs(S - np.transpose(S, (0, 2, 1)))
        if not is_zero(sym, magnitude=max_abs(S)):
            raise ValueError("S must be totally symmetric")
        low = low + S
    return np.einsum("xyz,zk->kxy", low, form.inverse)


def algebraic_model(c, omega, lam=None, name: str = "algebraic", S=None, mode: str = EXACT) -> AlgebraicModel:
    form = omega if isinstance(omega, SymplecticForm) else SymplecticForm(asarray(omega, mode), mode)
    c = asarray(c, form.mode)
    lam = invariant_connection(c, form, S) if lam is None else asarray(lam, form.mode)
    return AlgebraicModel(form.n, c, form, lam, name)


def algebraic_curvature(m: AlgebraicModel, tol: float = DEFAULT_TOL) -> CurvatureData:
    """Curvature and its covariant derivatives of a validated model.

    ``R(x, y) = lam_x lam_y - lam_y lam_x - lam_[x,y]``.
    """
    _require_valid(m, tol)
    gamma = Jet.constant(m.lam, m.dim, m.mode)
    om = Jet.constant(m.omega.matrix, m.dim, m.mode)
    return curvature_from_gamma(gamma, om, (), depth=4, bracket=m.c, model_name=m.name)


# classification ----------------------------------------------------------------

@dataclass
class Classification:
    label: str
    rank_A: int
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label, "rank_A": self.rank_A,
                "details": {k: to_json_scalar(v) for k, v in self.details.items()}}


def _frac(p, q, mode):
    return to_scalar(p, mode) / q if mode == EXACT else p / q


def _nz(x, tol, scale):
    return not is_zero(x, tol, scale)


def classify_ricci_endomorphism(A, b, form: SymplecticForm, tol: float = DEFAULT_TOL) -> Classification:
    """Sort a dimension-4 Ricci endomorphism into the three cases (or zero)."""
    A = A.components if isinstance(A, Tensor) else asarray(A, form.mode)
    mode = form.mode
    b = to_scalar(b, mode) if not isinstance(b, (float, np.floating)) or mode == FLOAT else b
    if A.shape != (4, 4):
        raise ValueError("the classification is stated for dimension 4 only")
    scale = max_abs(A)
    if _nz(sp_residual(A, form), tol, scale):
        raise ValueError("A is not in sp(omega)")
    n = 2
    c = _frac(2 * n + 1, 2 * (n + 1), mode)
    rank_a = linalg.rank(A, tol)
    if max_abs(A) == 0 or rank_a == 0:
        return Classification("locally_symmetric_or_zero", 0)
    A2 = A @ A
    A3 = A2 @ A
    A4 = A3 @ A
    mag4 = scale ** 4
    if is_zero(max_abs(A4), tol, mag4):
        rank_a2 = linalg.rank(A2, tol) if _nz(max_abs(A2), tol, scale ** 2) else 0
        rank_a3 = linalg.rank(A3, tol) if _nz(max_abs(A3), tol, scale ** 3) else 0
        details = {"rank_A2": rank_a2, "rank_A3": rank_a3}
        if _nz(b, tol, 0) and rank_a2 == 0 and rank_a == 1:
            return Classification("case1_rank1_nilpotent", rank_a, details)
        if is_zero(b, tol) and rank_a3 == 1:
            return Classification("case2_A3_rank1", rank_a, details)
        raise UnclassifiableError(f"nilpotent A with b = {b}, rank A = {rank_a}, "
                                  f"rank A^3 = {rank_a3} matches no case")
    gen0 = 4 - linalg.rank(A4, tol)
    if gen0 != 2:
        raise UnclassifiableError(f"generalised 0-eigenspace has dimension {gen0}, expected 2")
    if is_zero(b, tol):
        raise UnclassifiableError("A has nonzero eigenvalues but b = 0")
    lam_sq = np.einsum("ij,ji->", A, A) / 2
    expected = _frac(2 * (1 + n), 1 + 2 * n, mode) * b
    if _nz(lam_sq - expected, tol, abs(expected)):
        raise UnclassifiableError(f"eigenvalue square {lam_sq} differs from 2(1+n)b/(1+2n) = {expected}")
    # ubar (x) u recovered from the b-equation: M X = u(X) ubar, omega(M X, X) = u(X)^2
    M = (2 * n + 1) * (c * A3 - b * A)
    w = form.matrix
    diag = [M[:, i] @ w[:, i] for i in range(4)]
    i = int(np.argmax([abs(float(d)) for d in diag]))
    if not _nz(diag[i], tol, max_abs(M)):
        raise UnclassifiableError("no nilpotent coupling: ubar (x) u vanishes")
    x = eye(4, mode)[i]
    mx = M @ x
    kernel = linalg.nullspace(A2, tol)
    pairings = [v @ w @ mx for v in kernel]
    j = int(np.argmax([abs(float(p)) for p in pairings]))
    v0 = kernel[j]
    if not _nz(pairings[j], tol, max_abs(M)):
        raise UnclassifiableError("kernel of A^2 is omega-orthogonal to ubar")
    p = (v0 @ w @ (A @ v0)) * diag[i] / pairings[j] ** 2
    target = _frac(1, 1 + 2 * n, mode)
    details = {"eigenvalue_sq": lam_sq, "p": p, "pb": p * b, "pb_residual": p * b - target}
    if _nz(p * b - target, tol, 1):
        raise UnclassifiableError(f"pb = {p * b}, expected {target}")
    return Classification("case3_mixed", rank_a, details)


# diagnostics -------------------------------------------------------------------

@dataclass
class HomogeneousDiagnostics:
    name: str
    mode: str
    W_norm: object
    is_ricci_type: bool
    locally_symmetric: bool
    hypotheses_hold: bool
    A: np.ndarray
    u: np.ndarray
    u_bar: np.ndarray
    b: object
    residual_2_1: object
    residual_2_2: object
    residual_2_3: object
    residual_2_4: object
    b_trace: object
    div_ubar: object
    div_identity: object
    b_agreement: object
    rank_A2: int
    classification: str | None
    classification_details: dict | None
    tol: float

    @property
    def residuals(self) -> dict:
        return {k: getattr(self, k) for k in ("residual_2_1", "residual_2_2", "residual_2_3", "residual_2_4")}

    def passed(self) -> bool:
        """The four homogeneous identities are only guaranteed under the hypotheses;
        otherwise only the structural identities are held to tolerance."""
        checks = [self.div_identity]
        if self.b_agreement is not None:
            checks.append(self.b_agreement)
        if self.hypotheses_hold:
            checks += list(self.residuals.values())
        return all(is_zero(v, self.tol) for v in checks)

    def to_dict(self) -> dict:
        s = to_json_scalar
        return {
            "name": self.name, "mode": self.mode, "tol": self.tol,
            "W_norm": s(self.W_norm), "is_ricci_type": self.is_ricci_type,
            "branch": "locally_symmetric" if self.locally_symmetric else "not_locally_symmetric",
            "hypotheses_hold": self.hypotheses_hold,
            "A": to_json_array(self.A), "u": to_json_array(self.u), "u_bar": to_json_array(self.u_bar),
            "b": s(self.b), "b_trace": s(self.b_trace), "div_ubar": s(self.div_ubar),
            "div_identity": s(self.div_identity),
            "b_agreement": None if self.b_agreement is None else s(self.b_agreement),
            "residuals": {k: s(v) for k, v in self.residuals.items()},
            "rank_A2": self.rank_A2,
            "classification": self.classification,
            "classification_details": self.classification_details,
        }


def b_trace(trace_a2, n: int, mode: str = EXACT):
    """``b = (2n+1) / (4n(n+1)) Trace A^2`` (valid when div ubar = 0)."""
    return _frac(2 * n + 1, 4 * n * (n + 1), mode) * trace_a2


def homogeneous_diagnostics(m: AlgebraicModel, tol: float = DEFAULT_TOL) -> HomogeneousDiagnostics:
    data = algebraic_curvature(m, tol)
    n, mode, w = m.n, m.mode, m.omega.matrix
    _, W = decompose(data)
    w_norm = relative(W.max_abs(), data.R_low.components)
    f = ricci_fields(data)
    A, u, ubar, b = f.A.value, f.u.value, f.ubar.value, f.b.value[()]
    r = f.r.value
    A2 = A @ A
    A3 = A2 @ A
    c = _frac(2 * n + 1, 2 * (n + 1), mode)
    k1 = _frac(1, 2 * n + 1, mode)
    uu = np.einsum("x,y->xy", u, u)
    ubu = np.einsum("k,y->ky", ubar, u)
    r3 = w @ A3
    res21 = ubar @ r
    res22 = k1 * uu + c * r3 - b * r
    res23 = k1 * ubu - c * A3 + b * A
    res24 = -c * (A3 @ A) + b * A2
    tr_a2 = np.einsum("ij,ji->", A, A)
    div = np.einsum("zz->", f.nabla_ubar.value)
    div_rhs = -c * tr_a2 + 2 * n * b
    bt = b_trace(tr_a2, n, mode)
    u_zero = is_zero(relative(max_abs(u), r), tol)
    ricci = is_zero(w_norm, tol)
    label = details = None
    if m.dim == 4 and ricci and not u_zero:
        try:
            cl = classify_ricci_endomorphism(A, b, m.omega, tol)
            label, details = cl.label, cl.to_dict()["details"]
        except UnclassifiableError as exc:
            label, details = "unclassifiable", {"reason": str(exc)}
    return HomogeneousDiagnostics(
        name=m.name, mode=mode, W_norm=w_norm, is_ricci_type=ricci, locally_symmetric=u_zero,
        hypotheses_hold=ricci and not u_zero, A=A, u=u, u_bar=ubar, b=b,
        residual_2_1=relative(max_abs(res21), r, ubar),
        residual_2_2=relative(max_abs(res22), uu, r3, r),
        residual_2_3=relative(max_abs(res23), ubu, A3, A),
        residual_2_4=relative(max_abs(res24), A3 @ A, A2),
        b_trace=bt, div_ubar=div, div_identity=relative(abs(div - div_rhs), div, div_rhs),
        b_agreement=relative(abs(b - bt), b, bt) if is_zero(div, tol) else None,
        rank_A2=linalg.rank(A2, tol) if not is_zero(max_abs(A2), tol) else 0,
        classification=label, classification_details=details, tol=tol,
    )


# residual search ---------------------------------------------------------------

def _sym_basis(dim):
    return [(a, b, c) for a in range(dim) for b in range(a, dim) for c in range(b, dim)]


def _sym_tensor(params, idx, dim):
    s = np.zeros((dim, dim, dim))
    for val, (a, b, c) in zip(params, idx):
        for p in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
            s[p] = val
    return s


@dataclass
class SearchResult:
    model: AlgebraicModel
    W_norm: float
    u_norm: float
    cost: float
    nfev: int
    success: bool

    def to_dict(self) -> dict:
        return {"W_norm": self.W_norm, "u_norm": self.u_norm, "cost": self.cost,
                "nfev": self.nfev, "success": self.success,
                "lambda": to_json_array(self.model.lam)}


def search_ricci_type(c, omega, seed: int = 0, max_nfev: int = 2000, scale: float = 1.0) -> SearchResult:
    """Least-squares search over the symmetric part of an invariant connection
    for a Ricci-type (W = 0) model.  Float mode; no witness is promised."""
    form = SymplecticForm(asarray(omega, FLOAT), FLOAT)
    c = asarray(c, FLOAT)
    dim = form.dim
    idx = _sym_basis(dim)

    def build(params):
        return algebraic_model(c, form, S=_sym_tensor(params, idx, dim), name="search", mode=FLOAT)

    def objective(params):
        m = build(params)
        gamma = Jet.constant(m.lam, dim, FLOAT)
        om = Jet.constant(form.matrix, dim, FLOAT)
        data = curvature_from_gamma(gamma, om, (), depth=1, bracket=c)
        _, W = decompose(data)
        return W.components.ravel()

    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-scale, scale, len(idx))
    sol = least_squares(objective, x0, max_nfev=max_nfev)
    m = build(sol.x)
    data = algebraic_curvature(m, tol=1e-6)
    _, W = decompose(data)
    f = ricci_fields(data)
    return SearchResult(m, float(relative(W.max_abs(), data.R_low.components)),
                        float(max_abs(f.u.value)), float(sol.cost), int(sol.nfev), bool(sol.success))


# built-ins and JSON ---------------------------------------------------------------

def abelian(n: int = 2, S=None, mode: str = EXACT) -> AlgebraicModel:
    dim = 2 * n
    return algebraic_model(zeros((dim, dim, dim), mode), SymplecticForm.standard(n, mode), S=S,
                           name="abelian", mode=mode)


def filiform4(S=None, mode: str = EXACT) -> AlgebraicModel:
    """``[e1, e2] = e3``, ``[e1, e3] = e4`` with ``omega = e^1 ^ e^4 + e^2 ^ e^3``."""
    c = zeros((4, 4, 4), mode)
    one = to_scalar(1, mode)
    c[2, 0, 1], c[2, 1, 0] = one, -one
    c[3, 0, 2], c[3, 2, 0] = one, -one
    w = zeros((4, 4), mode)
    w[0, 3], w[3, 0] = one, -one
    w[1, 2], w[2, 1] = one, -one
    return algebraic_model(c, SymplecticForm(w, mode), S=S, name="filiform4", mode=mode)


ALGEBRAIC_BUILTINS = ("abelian", "filiform4")


def builtin_algebraic(name: str, mode: str = EXACT, **params) -> AlgebraicModel:
    if name == "abelian":
        return abelian(int(params.get("n", 2)), mode=mode)
    if name == "filiform4":
        return filiform4(mode=mode)
    raise ModelError(f"unknown algebraic model {name!r}; expected one of {ALGEBRAIC_BUILTINS}")


def algebraic_model_from_dict(doc: dict, mode: str = EXACT) -> AlgebraicModel:
    """Parse ``{"kind": "algebraic", "n", "c", "omega", "lambda"?, "name"?}``.

    ``c`` lists ``[i, j, k, value]`` for ``c^k_ij`` (the ``j, i`` entry is
    implied); ``lambda`` is dense ``lambda[k][i][j]`` and defaults to the
    canonical invariant connection.  Rationals are ``"p/q"`` strings.
    """
    if doc.get("kind") != "algebraic":
        raise ModelError("algebraic model must have kind 'algebraic'")
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise ModelError("'n' must be a positive integer")
    dim = 2 * n
    c = np.full((dim, dim, dim), Fraction(0), dtype=object)
    for entry in doc.get("c", []):
        if not isinstance(entry, list) or len(entry) != 4:
            raise ModelError(f"structure constant entry {entry!r} must be [i, j, k, value]")
        i, j, k, v = entry
        if not all(isinstance(t, int) and 0 <= t < dim for t in (i, j, k)):
            raise ModelError(f"structure constant indices {entry[:3]} out of range for dimension {dim}")
        v = _parse_coeff(v)
        if i == j and v != 0:
            raise ModelError(f"c^{k}_{i}{j} must vanish (antisymmetry)")
        for (a, b_), val in (((i, j), v), ((j, i), -v)):
            if c[k, a, b_] not in (0, val):
                raise ModelError(f"conflicting structure constants at c^{k}_{a}{b_} (antisymmetry)")
            c[k, a, b_] = val
    omega = doc.get("omega")
    try:
        w = np.array([[_parse_coeff(x) for x in row] for row in omega], dtype=object)
    except (TypeError, ValueError) as exc:
        raise ModelError("'omega' must be a square matrix of coefficients") from exc
    if w.shape != (dim, dim):
        raise ModelError(f"'omega' must be {dim}x{dim}")
    try:
        form = SymplecticForm(asarray(w, mode), mode)
    except DegenerateFormError as exc:
        raise ModelError(f"omega invalid: {exc}") from exc
    lam = doc.get("lambda")
    if lam is not None:
        try:
            lam = np.array([[[_parse_coeff(x) for x in row] for row in plane] for plane in lam], dtype=object)
        except (TypeError, ValueError) as exc:
            raise ModelError("'lambda' must be a dense dim x dim x dim array") from exc
        if lam.shape != (dim, dim, dim):
            raise ModelError(f"'lambda' must have shape {(dim, dim, dim)}")
        lam = asarray(lam, mode)
    c = asarray(c, mode)
    base = validate_algebraic_model(AlgebraicModel(n, c, form, zeros((dim,) * 3, mode)))
    if not is_zero(base["jacobi"], magnitude=max_abs(c)):
        raise ModelError("structure constants violate the Jacobi identity")
    if not is_zero(base["cocycle"], magnitude=max_abs(c)):
        raise ModelError("omega is not closed (cocycle condition fails)")
    m = algebraic_model(c, form, lam, name=doc.get("name", "file"), mode=mode)
    _require_valid(m, DEFAULT_TOL)
    return m
