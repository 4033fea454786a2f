"""Truncated multivariate Taylor jets with tensor-valued coefficients.

A :class:`Jet` holds the Taylor coefficients ``f_alpha = d^alpha f / alpha!``
of a (tensor of) function(s) of ``dim`` variables, for every multi-index
``|alpha| <= order``.  Coefficients live on the last array axis in graded
lexicographic order, so truncating to a lower order is a prefix slice.

``order=None`` marks a constant field: one coefficient, all derivatives
vanish identically.  Constants mix freely with finite-order jets.
"""
from __future__ import annotations

import itertools
import string
from functools import lru_cache
from math import comb

import numpy as np

from . import linalg
from .scalars import EXACT, asarray, mode_of, same_mode, to_scalar, zeros


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple:
    """All multi-indices of total degree <= order, graded lex (x1 > x2 > ...)."""
    out = []
    for deg in range(order + 1):
        level = [a for a in itertools.product(range(deg, -1, -1), repeat=dim) if sum(a) == deg]
        level.sort(reverse=True)
        out.extend(level)
    return tuple(out)


def n_coeffs(dim: int, order: int | None) -> int:
    return 1 if order is None else comb(dim + order, order)


@lru_cache(maxsize=None)
def _index(dim: int, order: int) -> dict:
    return {a: i for i, a in enumerate(multi_indices(dim, order))}


@lru_cache(maxsize=None)
def _pair_table(dim: int, order: int):
    """(left, right, starts) such that product coefficient c is the sum of
    left[j]*right[j] over the j-block beginning at starts[c]."""
    mis = multi_indices(dim, order)
    idx = _index(dim, order)
    triples = []
    for ia, a in enumerate(mis):
        da = sum(a)
        for ib, b in enumerate(mis):
            if da + sum(b) > order:
                continue
            triples.append((idx[tuple(x + y for x, y in zip(a, b))], ia, ib))
    triples.sort()
    c = np.array([t[0] for t in triples])
    left = np.array([t[1] for t in triples])
    right = np.array([t[2] for t in triples])
    starts = np.searchsorted(c, np.arange(len(mis)))
    return left, right, starts


@lru_cache(maxsize=None)
def _partial_table(dim: int, order: int):
    """For each variable i: source coefficient indices and factors alpha_i + 1."""
    low = multi_indices(dim, order - 1)
    idx = _index(dim, order)
    src = np.empty((dim, len(low)), dtype=int)
    fac = np.empty((dim, len(low)), dtype=int)
    for i in range(dim):
        for j, a in enumerate(low):
            b = list(a)
            b[i] += 1
            src[i, j] = idx[tuple(b)]
            fac[i, j] = a[i] + 1
    return src, fac


def _min_order(*orders):
    finite = [o for o in orders if o is not None]
    return min(finite) if finite else None


class JetOrderError(ValueError):
    """A derivative was requested beyond the available jet order."""


class Jet:
    """Tensor of truncated Taylor series in ``dim`` variables."""

    __slots__ = ("coeffs", "dim", "order")

    def __init__(self, coeffs: np.ndarray, dim: int, order: int | None):
        coeffs = np.asarray(coeffs)
        if coeffs.shape[-1:] != (n_coeffs(dim, order),):
            raise ValueError(
                f"jet of order {order} in {dim} variables needs "
                f"{n_coeffs(dim, order)} coefficients, got trailing axis {coeffs.shape[-1:]}"
            )
        self.coeffs = coeffs
        self.dim = dim
        self.order = order

    # construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, dim: int, mode: str | None = None) -> "Jet":
        value = np.asarray(value) if mode is None else asarray(value, mode)
        return cls(value[..., None], dim, None)

    @classmethod
    def variable(cls, i: int, point, order: int, mode: str) -> "Jet":
        """The coordinate function ``x_i`` expanded at ``point``."""
        dim = len(point)
        c = zeros(n_coeffs(dim, order), mode)
        c[0] = to_scalar(point[i], mode) if mode == EXACT else float(point[i])
        if order >= 1:
            c[1 + i] = to_scalar(1, mode)
        return cls(c, dim, order)

    @classmethod
    def monomials(cls, alphas, point, order: int, mode: str) -> "Jet":
        """Jets of ``x^alpha`` for each alpha, stacked along a leading axis."""
        dim = len(point)
        xs = [cls.variable(i, point, order, mode) for i in range(dim)]
        one = cls.constant(to_scalar(1, mode), dim).truncate(order)
        powers = {}

        def power(i, p):
            if (i, p) not in powers:
                powers[i, p] = xs[i] if p == 1 else power(i, p - 1) * xs[i]
            return powers[i, p]

        monos = []
        for alpha in alphas:
            mono = one
            for i, p in enumerate(alpha):
                if p:
                    mono = power(i, p) if mono is one else mono * power(i, p)
            monos.append(mono)
        if not monos:
            return cls(zeros((0, n_coeffs(dim, order)), mode), dim, order)
        return cls.stack(monos)

    @classmethod
    def polynomial(cls, terms, point, order: int, mode: str) -> "Jet":
        """Jet of ``sum coeff * x^alpha`` for ``terms = [(coeff, alpha), ...]``."""
        terms = list(terms)
        dim = len(point)
        if not terms:
            return cls(zeros(n_coeffs(dim, order), mode), dim, order)
        monos = cls.monomials([a for _, a in terms], point, order, mode)
        coeffs = asarray([c for c, _ in terms], mode)
        return cls(coeffs @ monos.coeffs, dim, order)

    @classmethod
    def stack(cls, jets, shape=None) -> "Jet":
        """Assemble scalar or tensor jets into one tensor jet (leading axes)."""
        jets = list(jets)
        order = _min_order(*(j.order for j in jets))
        dim = jets[0].dim
        parts = [j.truncate(order).coeffs if order is not None else j.coeffs for j in jets]
        c = np.stack(parts, axis=0)
        if shape is not None:
            c = c.reshape(tuple(shape) + c.shape[1:])
        return cls(c, dim, order)

    # basic properties -------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def mode(self) -> str:
        return mode_of(self.coeffs)

    @property
    def value(self) -> np.ndarray:
        """Value at the expansion point."""
        return self.coeffs[..., 0]

    def is_constant(self) -> bool:
        return self.order is None

    def truncate(self, order: int | None) -> "Jet":
        if order is None or self.order is None:
            if order is None:
                return self
            # constants extend to any finite order with zero derivatives
            c = zeros(self.shape + (n_coeffs(self.dim, order),), self.mode)
            c[..., 0] = self.coeffs[..., 0]
            return Jet(c, self.dim, order)
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.coeffs[..., : n_coeffs(self.dim, order)], self.dim, order)

    def derivative(self, alpha) -> np.ndarray:
        """Partial derivative ``d^alpha`` at the expansion point."""
        if self.order is None:
            return self.value if not any(alpha) else self.value * 0
        if sum(alpha) > self.order:
            raise JetOrderError(f"derivative of degree {sum(alpha)} exceeds order {self.order}")
        fact = 1
        for a in alpha:
            for m in range(2, a + 1):
                fact *= m
        return self.coeffs[..., _index(self.dim, self.order)[tuple(alpha)]] * fact

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.coeffs[key + (Ellipsis, slice(None))] if Ellipsis not in key
                   else self.coeffs[key], self.dim, self.order)

    def transpose(self, *axes) -> "Jet":
        return Jet(np.transpose(self.coeffs, tuple(axes) + (len(axes),)), self.dim, self.order)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order}, mode={self.mode})"

    # arithmetic -------------------------------------------------------

    def _coerce(self, other):
        """Align ``other`` with ``self``: finite orders truncated to the
        smaller one, constants left constant."""
        if not isinstance(other, Jet):
            other = np.asarray(other)
            if self.mode == EXACT:
                if other.dtype.kind == "f":
                    raise TypeError("float constant in exact jet arithmetic")
                other = asarray(other, EXACT)
            else:
                other = asarray(other, self.mode)
            other = Jet.constant(other, self.dim)
        if other.dim != self.dim:
            raise ValueError("jets over different numbers of variables")
        same_mode(self.coeffs, other.coeffs)
        order = _min_order(self.order, other.order)
        a = self if self.order is None else self.truncate(order)
        b = other if other.order is None else other.truncate(order)
        return a, b, order

    def __add__(self, other) -> "Jet":
        a, b, order = self._coerce(other)
        if (a.order is None) == (b.order is None):
            return Jet(a.coeffs + b.coeffs, self.dim, order)
        if a.order is None:
            a, b = b, a
        shape = np.broadcast_shapes(a.shape, b.shape)
        c = np.broadcast_to(a.coeffs, shape + a.coeffs.shape[-1:]).copy()
        c[..., 0] = c[..., 0] + b.coeffs[..., 0]
        return Jet(c, self.dim, order)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs, self.dim, self.order)

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        a, b, order = self._coerce(other)
        if a.order is None or b.order is None:
            # a constant factor scales every coefficient
            return Jet(a.coeffs * b.coeffs, self.dim, order)
        left, right, starts = _pair_table(self.dim, order)
        prod = a.coeffs[..., left] * b.coeffs[..., right]
        return Jet(np.add.reduceat(prod, starts, axis=-1), self.dim, order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if self.mode == EXACT:
            other = to_scalar(other, EXACT)
        return Jet(self.coeffs / other, self.dim, self.order)

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, p: int) -> "Jet":
        if p < 0:
            return self.reciprocal() ** (-p)
        if p == 0:
            return Jet.constant(asarray(np.ones(self.shape, dtype=int), self.mode), self.dim)
        out = self
        for _ in range(p - 1):
            out = out * self
        return out

    def compose(self, series) -> "Jet":
        """Apply a univariate function elementwise.

        ``series(v0, m)`` must return the m-th Taylor coefficient of the
        function at the values ``v0`` (an array shaped like ``self``).
        """
        if self.order is None:
            return Jet(series(self.value, 0)[..., None], self.dim, None)
        v0 = self.value
        h = self - Jet.constant(v0, self.dim)
        out = Jet.constant(series(v0, 0), self.dim).truncate(self.order)
        hp = None
        for m in range(1, self.order + 1):
            hp = h if hp is None else hp * h
            out = out + hp * Jet.constant(series(v0, m), self.dim)
        return out

    def reciprocal(self) -> "Jet":
        def series(v0, m):
            return np.vectorize(lambda v: (-1) ** m / v ** (m + 1), otypes=[v0.dtype])(v0)

        if np.any(self.value == 0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.compose(series)

    def partial(self) -> "Jet":
        """Gradient: a new leading axis indexing the variable, order drops by one."""
        if self.order is None:
            return Jet(np.broadcast_to(self.coeffs * 0, (self.dim,) + self.coeffs.shape).copy(),
                       self.dim, None)
        if self.order == 0:
            raise JetOrderError("cannot differentiate an order-0 jet")
        src, fac = _partial_table(self.dim, self.order)
        c = self.coeffs[..., src]  # shape (*shape, dim, ncoef_low)
        c = np.moveaxis(c, -2, 0)
        if self.mode == EXACT:
            c = c * asarray(fac.reshape((self.dim,) + (1,) * len(self.shape) + (fac.shape[1],)), EXACT)
        else:
            c = c * fac.reshape((self.dim,) + (1,) * len(self.shape) + (fac.shape[1],))
        return Jet(c, self.dim, self.order - 1)


def _coef_letter(spec: str) -> str:
    for ch in string.ascii_letters[::-1]:
        if ch not in spec:
            return ch
    raise ValueError("einsum spec uses every letter")


def einsum(spec: str, *jets: Jet) -> Jet:
    """``numpy.einsum`` over the tensor axes with jet multiplication of entries.

    Only the tensor axes appear in ``spec``; the coefficient axis is handled
    internally.  More than two operands are contracted left to right.
    """
    inputs, output = spec.split("->")
    inputs = inputs.split(",")
    if len(inputs) != len(jets):
        raise ValueError("operand count does not match einsum spec")
    if len(jets) == 1:
        z = _coef_letter(spec)
        j = jets[0]
        return Jet(np.einsum(f"{inputs[0]}{z}->{output}{z}", j.coeffs), j.dim, j.order)
    if len(jets) > 2:
        # contract the first two keeping every index still needed later
        later = set("".join(inputs[2:]) + output)
        keep = "".join(dict.fromkeys(ch for ch in inputs[0] + inputs[1] if ch in later))
        first = einsum(f"{inputs[0]},{inputs[1]}->{keep}", jets[0], jets[1])
        return einsum(",".join([keep] + inputs[2:]) + "->" + output, first, *jets[2:])
    a, b = jets
    if a.dim != b.dim:
        raise ValueError("jets over different numbers of variables")
    same_mode(a.coeffs, b.coeffs)
    z = _coef_letter(spec)
    order = _min_order(a.order, b.order)
    if a.order is None or b.order is None:
        if order is None:
            return Jet(np.einsum(f"{inputs[0]}{z},{inputs[1]}{z}->{output}{z}", a.coeffs, b.coeffs),
                       a.dim, None)
        if a.order is None:
            c = np.einsum(f"{inputs[0]},{inputs[1]}{z}->{output}{z}", a.coeffs[..., 0], b.coeffs)
        else:
            c = np.einsum(f"{inputs[0]}{z},{inputs[1]}->{output}{z}", a.coeffs, b.coeffs[..., 0])
        return Jet(c, a.dim, order)
    a, b = a.truncate(order), b.truncate(order)
    left, right, starts = _pair_table(a.dim, order)
    prod = np.einsum(f"{inputs[0]}{z},{inputs[1]}{z}->{output}{z}",
                     a.coeffs[..., left], b.coeffs[..., right])
    return Jet(np.add.reduceat(prod, starts, axis=-1), a.dim, order)


def inverse(m: Jet) -> Jet:
    """Inverse of a square-matrix-valued jet (Neumann series about the value)."""
    m0inv = linalg.inverse(m.value)
    inv0 = Jet.constant(m0inv, m.dim)
    if m.order is None:
        return inv0
    nil = m - Jet.constant(m.value, m.dim)
    step = -einsum("ij,jk->ik", inv0, nil)
    out = inv0.truncate(m.order)
    term = inv0.truncate(m.order)
    for _ in range(m.order):
        term = einsum("ij,jk->ik", step, term)
        out = out + term
    return out
