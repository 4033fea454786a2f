"""Scalar backends.

Two modes exist: ``"exact"`` stores :class:`gmpy2.mpq` rationals in numpy
object arrays, ``"float"`` stores float64.  A pipeline picks one mode and
keeps it; mixing is an error.
"""
from __future__ import annotations

import os
from fractions import Fraction
from numbers import Rational

import numpy as np
from gmpy2 import mpq

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

DEFAULT_TOL = 1e-9


class ModeError(TypeError):
    """Raised when exact and float values meet in one computation."""


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown scalar mode {mode!r}; expected one of {MODES}")
    return mode


def default_mode() -> str:
    return check_mode(os.environ.get("SYMCURV_MODE", EXACT))


def to_scalar(x, mode: str):
    """Convert ``x`` (int, Fraction, mpq, ``"p/q"`` string or float) to ``mode``."""
    if mode == EXACT:
        if isinstance(x, str):
            return mpq(Fraction(x))
        if isinstance(x, float):
            if not x.is_integer():
                raise ModeError(f"refusing to coerce float {x!r} into exact mode")
            return mpq(int(x))
        if isinstance(x, (int, Rational)) or type(x).__name__ == "mpq":
            return mpq(x)
        if isinstance(x, np.integer):
            return mpq(int(x))
        raise ModeError(f"cannot represent {x!r} exactly")
    check_mode(mode)
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def asarray(x, mode: str) -> np.ndarray:
    """Array of scalars in ``mode`` (object array of mpq, or float64)."""
    if mode == FLOAT:
        a = np.asarray(x)
        if a.dtype == object:
            return np.vectorize(float, otypes=[float])(a) if a.size else a.astype(float)
        return a.astype(float)
    check_mode(mode)
    a = np.asarray(x, dtype=object)
    if a.dtype == object and a.size and all(type(v).__name__ == "mpq" for v in a.flat):
        return a.copy()
    if np.asarray(x).dtype.kind == "f":
        raise ModeError("float array passed where exact values are required")
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = to_scalar(v, EXACT)
    return out


def zeros(shape, mode: str) -> np.ndarray:
    if mode == FLOAT:
        return np.zeros(shape)
    out = np.empty(shape, dtype=object)
    out.fill(mpq(0))
    return out


def eye(dim: int, mode: str) -> np.ndarray:
    out = zeros((dim, dim), mode)
    one = to_scalar(1, mode)
    for i in range(dim):
        out[i, i] = one
    return out


def mode_of(a: np.ndarray) -> str:
    return EXACT if np.asarray(a).dtype == object else FLOAT


def same_mode(*arrays: np.ndarray) -> str:
    modes = {mode_of(a) for a in arrays}
    if len(modes) != 1:
        raise ModeError("exact and float values mixed in one computation")
    return modes.pop()


def max_abs(a) -> object:
    """Largest absolute entry; zero for empty arrays."""
    a = np.asarray(a)
    if a.size == 0:
        return mpq(0) if a.dtype == object else 0.0
    if a.dtype == object:
        return max(abs(v) for v in a.flat)
    return float(np.max(np.abs(a)))


def relative(raw, *operands) -> object:
    """``raw / (1 + max|operands|)``: the scale-free residual used everywhere."""
    scale = max((max_abs(o) for o in operands), default=0)
    return raw / (1 + scale)


def is_zero(x, tol: float = DEFAULT_TOL, magnitude=0) -> bool:
    """Exact zero in exact mode, ``|x| <= tol (1 + magnitude)`` otherwise."""
    if type(x).__name__ == "mpq" or isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) <= tol * (1 + abs(float(magnitude)))


def to_json_scalar(x):
    """mpq -> ``"p/q"`` string (or integer string); floats pass through."""
    if type(x).__name__ == "mpq" or isinstance(x, Fraction):
        q = Fraction(int(x.numerator), int(x.denominator))
        return str(q)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def to_json_array(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return to_json_scalar(a.item() if a.dtype != object else a[()])
    return [to_json_array(v) for v in a]
