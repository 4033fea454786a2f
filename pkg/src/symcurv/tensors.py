"""Dense tensors with a variance signature.

Slots are ``"up"`` (vector) or ``"down"`` (covector).  Component arrays use
slot order equal to argument order, e.g. the lowered curvature
``R_low[x, y, z, t] = omega(R(e_x, e_y) e_z, e_t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scalars import max_abs, mode_of, same_mode

UP = "up"
DOWN = "down"


class VarianceError(ValueError):
    pass


@dataclass(frozen=True)
class Tensor:
    components: np.ndarray
    variance: tuple

    def __post_init__(self):
        comps = np.asarray(self.components)
        variance = tuple(self.variance)
        if any(v not in (UP, DOWN) for v in variance):
            raise VarianceError(f"variance entries must be 'up' or 'down': {variance}")
        if comps.ndim != len(variance):
            raise VarianceError(f"{comps.ndim} axes but variance of length {len(variance)}")
        if comps.ndim and len(set(comps.shape)) != 1:
            raise VarianceError(f"all axes must share one dimension, got {comps.shape}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", variance)

    @classmethod
    def covariant(cls, comps) -> "Tensor":
        comps = np.asarray(comps)
        return cls(comps, (DOWN,) * comps.ndim)

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.components.ndim else 0

    @property
    def arity(self) -> int:
        return len(self.variance)

    @property
    def mode(self) -> str:
        return mode_of(self.components)

    def __add__(self, other: "Tensor") -> "Tensor":
        if self.variance != other.variance:
            raise VarianceError("cannot add tensors of different variance")
        same_mode(self.components, other.components)
        return Tensor(self.components + other.components, self.variance)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + other * -1

    def __mul__(self, a) -> "Tensor":
        return Tensor(self.components * a, self.variance)

    __rmul__ = __mul__

    def max_abs(self):
        return max_abs(self.components)

    def permute(self, perm) -> "Tensor":
        """New tensor whose slot k is the old slot ``perm[k]``."""
        return Tensor(np.transpose(self.components, perm), tuple(self.variance[p] for p in perm))


def _check_slot(t: Tensor, s: int):
    if not 0 <= s < t.arity:
        raise IndexError(f"slot {s} out of range for arity {t.arity}")


def contract(t: Tensor, slot_i: int, slot_j: int) -> Tensor:
    """Trace over one up slot and one down slot."""
    _check_slot(t, slot_i)
    _check_slot(t, slot_j)
    if slot_i == slot_j:
        raise VarianceError("cannot contract a slot with itself")
    if {t.variance[slot_i], t.variance[slot_j]} != {UP, DOWN}:
        raise VarianceError("contraction needs one up slot and one down slot")
    comps = np.trace(t.components, axis1=slot_i, axis2=slot_j)
    variance = tuple(v for k, v in enumerate(t.variance) if k not in (slot_i, slot_j))
    return Tensor(comps, variance)


def cyclic_sum(t: Tensor, slots) -> Tensor:
    """``T + T o s + T o s^2`` for the cyclic permutation s of three slots."""
    slots = tuple(slots)
    if len(slots) != 3 or len(set(slots)) != 3:
        raise ValueError("cyclic_sum needs three distinct slots")
    for s in slots:
        _check_slot(t, s)
    if len({t.variance[s] for s in slots}) != 1:
        raise VarianceError("cyclically summed slots must share one variance")
    a, b, c = slots
    # T(X,Y,Z) + T(Y,Z,X) + T(Z,X,Y) evaluated with (X,Y,Z) in slots (a,b,c)
    p1 = list(range(t.arity))
    p1[a], p1[b], p1[c] = b, c, a
    p2 = list(range(t.arity))
    p2[a], p2[b], p2[c] = c, a, b
    x = t.components
    return Tensor(x + np.transpose(x, p1) + np.transpose(x, p2), t.variance)


def raise_lower(t: Tensor, slot: int, form, direction: str) -> Tensor:
    """Musical isomorphism through ``form`` on one slot.

    Lowering sends a vector v to the covector ``omega(v, .)``; raising is
    its inverse, so a covector u becomes the vector ``ubar`` with
    ``u(X) = omega(ubar, X)``.
    """
    _check_slot(t, slot)
    if direction == "lower":
        if t.variance[slot] != UP:
            raise VarianceError("can only lower an up slot")
        mat, new = form.matrix, DOWN
    elif direction == "raise":
        if t.variance[slot] != DOWN:
            raise VarianceError("can only raise a down slot")
        mat, new = form.inverse, UP
    else:
        raise ValueError("direction must be 'raise' or 'lower'")
    same_mode(t.components, mat)
    # contract the slot against the first index of mat; result index goes back in place
    comps = np.tensordot(t.components, mat, axes=([slot], [0]))
    comps = np.moveaxis(comps, -1, slot)
    variance = t.variance[:slot] + (new,) + t.variance[slot + 1:]
    return Tensor(comps, variance)
