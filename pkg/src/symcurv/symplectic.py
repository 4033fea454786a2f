"""Linear symplectic primitives: the form, Darboux frames, sp(2n) membership
and the Ricci endomorphism."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .scalars import DEFAULT_TOL, asarray, is_zero, max_abs, mode_of, same_mode, to_scalar, zeros
from .tensors import DOWN, UP, Tensor


class DegenerateFormError(ValueError):
    pass


class SymplecticForm:
    """Constant antisymmetric nondegenerate matrix ``omega_ij`` with its inverse.

    ``omega(X, Y) = X^i omega_ij Y^j``.  A covector ``u`` raises to the vector
    ``ubar`` with ``u(X) = omega(ubar, X)``.
    """

    def __init__(self, matrix, mode: str | None = None):
        m = np.asarray(matrix)
        mode = mode or mode_of(m)
        m = asarray(m, mode)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DegenerateFormError(f"symplectic matrix must be square of even size, got {m.shape}")
        if max_abs(m + m.T) != 0 and not is_zero(max_abs(m + m.T), magnitude=max_abs(m)):
            raise DegenerateFormError("matrix is not antisymmetric")
        try:
            inv = linalg.inverse(m)
        except linalg.SingularMatrixError as exc:
            raise DegenerateFormError("form is degenerate") from exc
        self.matrix = m
        self.inverse = inv
        self.n = m.shape[0] // 2
        self.mode = mode

    @classmethod
    def standard(cls, n: int, mode: str, scale=1) -> "SymplecticForm":
        """``omega(e_a, e_{n+a}) = scale``."""
        m = zeros((2 * n, 2 * n), mode)
        s = to_scalar(scale, mode)
        for a in range(n):
            m[a, n + a] = s
            m[n + a, a] = -s
        return cls(m, mode)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def __call__(self, x, y):
        return np.asarray(x) @ self.matrix @ np.asarray(y)

    def tensor(self) -> Tensor:
        return Tensor.covariant(self.matrix)

    def lower(self, v: np.ndarray) -> np.ndarray:
        """Vector -> covector ``omega(v, .)``."""
        return np.asarray(v) @ self.matrix

    def raise_(self, u: np.ndarray) -> np.ndarray:
        """Covector -> vector ``ubar`` with ``u = omega(ubar, .)``."""
        return np.asarray(u) @ self.inverse

    def __repr__(self) -> str:
        return f"SymplecticForm(n={self.n}, mode={self.mode!r})"


@dataclass(frozen=True)
class DarbouxFrame:
    """Pairs ``(V_a, W_a)``, a = 1..n, with ``omega(V_a, W_b) = delta_ab`` and
    isotropic V- and W-spans.  Vectors are the rows of ``V`` and ``W``."""

    V: np.ndarray
    W: np.ndarray

    def dual_pairs(self):
        """2n-element frames ``(P, Q)`` with ``omega(P_a, Q_b) = delta_ab``.

        Built as ``P = (V, W)`` and ``Q = (W, -V)``, so that sum_a P_a (x) Q_a
        equals ``-omega^{-1}`` independent of the frame.
        """
        return np.concatenate([self.V, self.W]), np.concatenate([self.W, -self.V])

    def gram_residual(self, form: SymplecticForm):
        n = form.n
        eye = asarray(np.eye(n, dtype=int), form.mode)
        parts = [
            self.V @ form.matrix @ self.W.T - eye,
            self.V @ form.matrix @ self.V.T,
            self.W @ form.matrix @ self.W.T,
        ]
        return max(max_abs(p) for p in parts)


def build_darboux_frame(form: SymplecticForm, tol: float = DEFAULT_TOL) -> DarbouxFrame:
    """Symplectic Gram-Schmidt starting from the standard basis.

    At each step the lowest-index remaining vector is paired with the
    lowest-index remaining vector it pairs nontrivially with.
    """
    dim = form.dim
    mode = form.mode
    remaining = [(i, row) for i, row in enumerate(asarray(np.eye(dim, dtype=int), mode))]
    scale = max_abs(form.matrix)
    V, W = [], []
    while remaining:
        _, v = remaining[0]
        partner = None
        for k in range(1, len(remaining)):
            val = form(v, remaining[k][1])
            if not is_zero(val, tol, scale):
                partner = k
                break
        if partner is None:
            if all(is_zero(x, tol, scale) for x in v):
                remaining.pop(0)
                continue
            raise DegenerateFormError("no symplectic partner found; form is degenerate")
        w = remaining[partner][1] / form(v, remaining[partner][1])
        V.append(v)
        W.append(w)
        rest = [r for k, r in enumerate(remaining) if k not in (0, partner)]
        remaining = [(i, x - form(x, w) * v + form(x, v) * w) for i, x in rest]
        remaining = [(i, x) for i, x in remaining if not all(is_zero(c, tol, scale) for c in x)]
    if len(V) != form.n:
        raise DegenerateFormError("form is degenerate")
    return DarbouxFrame(np.array(V), np.array(W))


def ricci_endomorphism(r, form: SymplecticForm, tol: float = DEFAULT_TOL) -> Tensor:
    """``A`` with ``r(X, Y) = omega(X, A Y)``, i.e. ``A = omega^{-1} r``.

    Components ``A[k, y] = A^k_y`` (variance up, down).
    """
    r = r.components if isinstance(r, Tensor) else np.asarray(r)
    same_mode(r, form.matrix)
    asym = max_abs(r - r.T)
    if not is_zero(asym, tol, max_abs(r)):
        raise ValueError(f"Ricci tensor is not symmetric (defect {asym})")
    return Tensor(form.inverse @ r, (UP, DOWN))


def sp_residual(a, form: SymplecticForm):
    """max |omega(A X, Y) + omega(X, A Y)| over basis pairs; 0 iff A in sp."""
    a = a.components if isinstance(a, Tensor) else np.asarray(a)
    same_mode(a, form.matrix)
    return max_abs(a.T @ form.matrix + form.matrix @ a)
