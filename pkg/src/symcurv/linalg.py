"""Small dense linear algebra over both scalar modes.

Exact mode runs plain Gaussian elimination on mpq entries; float mode
defers to numpy/scipy with a singular-value rank threshold.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .scalars import EXACT, FLOAT, DEFAULT_TOL, eye, mode_of, to_scalar, zeros


class SingularMatrixError(ValueError):
    pass


def rref(m: np.ndarray, tol: float = DEFAULT_TOL):
    """Reduced row echelon form and pivot columns.

    Pivot choice is the first row with a nonzero entry (exact) or the
    largest entry (float), so the output is deterministic.
    """
    m = np.array(m, dtype=object if mode_of(m) == EXACT else float)
    exact = m.dtype == object
    rows, cols = m.shape
    scale = 0.0 if exact else max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        if exact:
            piv = next((i for i in range(r, rows) if m[i, c] != 0), None)
        else:
            i = r + int(np.argmax(np.abs(m[r:, c])))
            piv = i if abs(m[i, c]) > tol * scale else None
        if piv is None:
            continue
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] / m[r, c]
        for i in range(rows):
            if i != r and m[i, c] != 0:
                m[i] = m[i] - m[i, c] * m[r]
        pivots.append(c)
        r += 1
    if not exact:
        m[np.abs(m) <= tol * scale] = 0.0
    return m, pivots


def rank(m: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    if mode_of(m) == EXACT:
        return len(rref(m)[1])
    s = np.linalg.svd(m.astype(float), compute_uv=False)
    return int(np.sum(s > tol * max(s[0], 1e-300))) if s[0] > 0 else 0


def inverse(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    n = m.shape[0]
    if mode_of(m) == FLOAT:
        if np.linalg.cond(m) > 1e14:
            raise SingularMatrixError("matrix is numerically singular")
        return np.linalg.inv(m)
    aug = np.concatenate([m, eye(n, EXACT)], axis=1)
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return red[:, n:]


def solve(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a square system ``m x = b`` (``b`` may have extra columns)."""
    if mode_of(m) == FLOAT:
        return scipy.linalg.solve(m, b)
    return inverse(m) @ b


def det(m: np.ndarray):
    m = np.asarray(m)
    if mode_of(m) == FLOAT:
        return float(np.linalg.det(m))
    a = np.array(m, dtype=object)
    n = a.shape[0]
    d = to_scalar(1, EXACT)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i, c] != 0), None)
        if piv is None:
            return d * 0
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            d = -d
        d = d * a[c, c]
        for i in range(c + 1, n):
            if a[i, c] != 0:
                a[i] = a[i] - (a[i, c] / a[c, c]) * a[c]
    return d


def nullspace(m: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Basis of the right kernel, one vector per row."""
    m = np.asarray(m)
    mode = mode_of(m)
    cols = m.shape[1]
    red, piv = rref(m, tol)
    free = [c for c in range(cols) if c not in piv]
    basis = zeros((len(free), cols), mode)
    for k, f in enumerate(free):
        basis[k, f] = to_scalar(1, mode)
        for r, p in enumerate(piv):
            basis[k, p] = -red[r, f]
    return basis


def leading_minors(m: np.ndarray) -> list:
    return [det(m[:k, :k]) for k in range(1, m.shape[0] + 1)]
