"""Curvature of symplectic connections from Christoffel jets.

Conventions (used throughout the package):

* ``gamma[l, i, j] = Gamma^l_ij`` with ``nabla_{e_i} e_j = Gamma^l_ij e_l``;
* ``R[x, y, z, l]`` is the l-component of ``R(e_x, e_y) e_z`` where
  ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]``;
* ``R_low[x, y, z, t] = omega(R(e_x, e_y) e_z, e_t)``;
* ``r[x, y] = trace(Z -> R(e_x, Z) e_y)``;
* covariant derivatives put the differentiating direction first, so
  ``nabla_r[x, y, z] = (nabla_{e_x} r)(e_y, e_z)``.

The same formulas serve coordinate charts (holonomic frames, ``gamma`` a
finite-order jet) and left-invariant frames on Lie groups (``gamma`` a
constant jet, with the bracket term added to the curvature).
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .jets import Jet, JetOrderError, einsum
from .scalars import DEFAULT_TOL, EXACT, asarray, default_mode, max_abs, relative
from .symplectic import SymplecticForm
from .tensors import DOWN, UP, Tensor, cyclic_sum


@dataclass(frozen=True)
class ChartModel:
    """A symplectic connection on one chart.

    ``gamma(point, order, mode)`` returns the Christoffel jet (shape
    ``(2n, 2n, 2n)``) and ``omega(point, order, mode)`` the jet of the
    symplectic matrix.  Darboux models return a constant ``omega`` jet.
    """

    n: int
    gamma: Callable
    omega: Callable
    name: str
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class CurvatureData:
    """Curvature at a point plus the jets needed to differentiate further.

    ``depth`` is the jet order available on the Ricci tensor (how many
    more covariant derivatives of ``r`` can be taken).
    """

    point: tuple
    n: int
    mode: str
    omega: SymplecticForm
    R: Tensor
    R_low: Tensor
    r: Tensor
    depth: int
    nablaR: Tensor | None = None
    nabla_r: Tensor | None = None
    gamma: Jet | None = field(default=None, repr=False)
    omega_jet: Jet | None = field(default=None, repr=False)
    r_jet: Jet | None = field(default=None, repr=False)
    model_name: str = ""

    @property
    def dim(self) -> int:
        return 2 * self.n


def covariant_derivative(gamma: Jet, t: Jet, variance, order: int | None = None) -> Jet:
    """``nabla T`` with the new direction slot first.

    One Christoffel correction per slot: minus for down slots, plus for up.
    ``order`` truncates the result (and the inputs, to save work).
    """
    variance = tuple(variance)
    if len(variance) != len(t.shape):
        raise ValueError("variance length does not match tensor arity")
    if order is not None:
        if t.order is not None:
            if t.order < order + 1:
                raise JetOrderError(f"field of order {t.order} cannot give a derivative of order {order}")
            t = t.truncate(order + 1)
        if gamma.order is not None:
            gamma = gamma.truncate(order)
    if t.order is not None and t.order < 1:
        raise JetOrderError("field jet has no derivative information")
    out = t.partial()
    letters = string.ascii_lowercase
    a, m = "A", "M"
    slots = letters[: len(variance)]
    for s, v in enumerate(variance):
        moved = slots[:s] + m + slots[s + 1:]
        if v == DOWN:
            term = einsum(f"{m}{a}{slots[s]},{moved}->{a}{slots}", gamma, t)
            out = out - term
        elif v == UP:
            term = einsum(f"{slots[s]}{a}{m},{moved}->{a}{slots}", gamma, t)
            out = out + term
        else:
            raise ValueError(f"bad variance entry {v!r}")
    if order is not None and out.order is not None and out.order > order:
        out = out.truncate(order)
    return out


def _low(gamma: Jet) -> Jet:
    """Gamma truncated to the order its first derivative keeps."""
    return gamma if gamma.order is None else gamma.truncate(gamma.order - 1)


def _curvature_jet(gamma: Jet, bracket=None) -> Jet:
    g = _low(gamma)
    quad = einsum("lxm,myz->xyzl", g, g)
    quad = quad - quad.transpose(1, 0, 2, 3)
    if bracket is not None:
        # non-holonomic frame: subtract nabla_[x,y]
        quad = quad - einsum("kxy,lkz->xyzl", Jet.constant(bracket, g.dim), g)
    if g.order is None:
        return quad
    dg = gamma.partial()
    lin = einsum("xlyz->xyzl", dg)
    lin = lin - lin.transpose(1, 0, 2, 3)
    return lin + quad


def _ricci_jet(gamma: Jet, bracket=None) -> Jet:
    g = _low(gamma)
    out = einsum("lxm,mly->xy", g, g) - einsum("llm,mxy->xy", g, g)
    if bracket is not None:
        out = out - einsum("kxl,lky->xy", Jet.constant(bracket, g.dim), g)
    if g.order is None:
        return out
    dg = gamma.partial()
    return einsum("xlly->xy", dg) - einsum("llxy->xy", dg) + out


def curvature_from_gamma(
    gamma: Jet,
    omega_jet: Jet,
    point,
    depth: int,
    bracket=None,
    model_name: str = "",
) -> CurvatureData:
    """Assemble :class:`CurvatureData` from a Christoffel jet of order ``depth + 1``
    (or a constant jet for invariant models, where ``bracket`` holds the
    structure constants ``c[k, i, j]``)."""
    dim = gamma.shape[0]
    if gamma.order is not None and gamma.order < depth + 1:
        raise JetOrderError(f"depth {depth} needs Christoffel jets of order {depth + 1}")
    r_order = None if gamma.order is None else depth
    g_r = gamma if gamma.order is None else gamma.truncate(depth + 1)
    r_jet = _ricci_jet(g_r, bracket)
    if r_order is not None:
        r_jet = r_jet.truncate(r_order)
    R_order = None if gamma.order is None else min(depth, 1)
    g_R = gamma if gamma.order is None else gamma.truncate(R_order + 1)
    R_jet = _curvature_jet(g_R, bracket)
    om = omega_jet if omega_jet.order is None or R_order is None else omega_jet.truncate(R_order)
    R_low_jet = einsum("xyzl,lt->xyzt", R_jet, om)
    form = SymplecticForm(omega_jet.value)
    nablaR = nabla_r = None
    if depth >= 1:
        nablaR = Tensor.covariant(
            covariant_derivative(gamma, R_low_jet, (DOWN,) * 4, order=0).value)
        nabla_r = Tensor.covariant(covariant_derivative(gamma, r_jet, (DOWN, DOWN), order=0).value)
    return CurvatureData(
        point=tuple(point),
        n=dim // 2,
        mode=form.mode,
        omega=form,
        R=Tensor(R_jet.value, (DOWN, DOWN, DOWN, UP)),
        R_low=Tensor.covariant(R_low_jet.value),
        r=Tensor.covariant(r_jet.value),
        depth=depth,
        nablaR=nablaR,
        nabla_r=nabla_r,
        gamma=gamma,
        omega_jet=omega_jet,
        r_jet=r_jet,
        model_name=model_name,
    )


def curvature_at(model: ChartModel, point, depth: int = 1, mode: str | None = None) -> CurvatureData:
    """Curvature, Ricci tensor and their covariant derivatives at ``point``.

    Christoffel jets are taken to order ``depth + 1``.
    """
    mode = mode or default_mode()
    if depth < 0:
        raise ValueError("depth must be non-negative")
    point = tuple(asarray(point, mode))
    if len(point) != model.dim:
        raise ValueError(f"point has {len(point)} coordinates, model needs {model.dim}")
    gamma = model.gamma(point, depth + 1, mode)
    omega_jet = model.omega(point, depth + 1, mode)
    return curvature_from_gamma(gamma, omega_jet, point, depth, model_name=model.name)


def check_model_invariants(model: ChartModel, point, mode: str | None = None, order: int = 2) -> dict:
    """Torsion and ``nabla omega`` residuals over every jet coefficient."""
    mode = mode or default_mode()
    point = tuple(asarray(point, mode))
    gamma = model.gamma(point, order, mode)
    omega_jet = model.omega(point, order + 1, mode)
    torsion = max_abs(gamma.coeffs - np.swapaxes(gamma.coeffs, 1, 2))
    nabla_omega = covariant_derivative(gamma, omega_jet, (DOWN, DOWN))
    antisym = max_abs(omega_jet.coeffs + np.swapaxes(omega_jet.coeffs, 0, 1))
    return {
        "torsion": torsion,
        "nabla_omega": max_abs(nabla_omega.coeffs),
        "omega_antisymmetry": antisym,
    }


def bianchi_residuals(data: CurvatureData):
    """(first, second): raw max-abs of the cyclic sums of ``R_low`` over its
    first three slots and of ``nablaR`` over ``(X, Y, Z)``."""
    if data.nablaR is None:
        raise ValueError("second Bianchi residual needs curvature data of depth >= 1")
    first = cyclic_sum(data.R_low, (0, 1, 2)).max_abs()
    second = cyclic_sum(data.nablaR, (0, 1, 2)).max_abs()
    return first, second


def relative_bianchi(data: CurvatureData):
    first, second = bianchi_residuals(data)
    return relative(first, data.R_low.components), relative(second, data.nablaR.components)


def symmetry_residuals(data: CurvatureData) -> dict:
    R = data.R_low.components
    return {
        "antisymmetric_12": max_abs(R + np.swapaxes(R, 0, 1)),
        "symmetric_34": max_abs(R - np.swapaxes(R, 2, 3)),
        "ricci_symmetric": max_abs(data.r.components - data.r.components.T),
    }


def perturbed(data: CurvatureData, index, amount) -> CurvatureData:
    """Copy of ``data`` with one ``R_low`` component shifted (negative controls)."""
    comps = data.R_low.components.copy()
    comps[index] = comps[index] + (asarray(amount, EXACT)[()] if data.mode == EXACT else amount)
    return replace(data, R_low=Tensor.covariant(comps))


__all__ = [
    "ChartModel",
    "CurvatureData",
    "bianchi_residuals",
    "check_model_invariants",
    "covariant_derivative",
    "curvature_at",
    "curvature_from_gamma",
    "perturbed",
    "relative_bianchi",
    "symmetry_residuals",
    "DEFAULT_TOL",
]
