"""A small exact exterior calculus on a moving coframe.

Scalars are polynomials with rational coefficients in named symbols; some
symbols may carry a square rule (``u**2 -> q``).  Forms are dictionaries
from increasing index tuples to scalars.  Frame derivatives of unknown
functions are opaque symbols ``e_k(f)``; iterated derivatives are kept in
nondecreasing order using ``[e_k, e_l] = sum_m c^m_kl e_m`` with
``c^m_kl = -de^m(e_k, e_l)``.
"""
from __future__ import annotations

from fractions import Fraction

_CATEGORY = {"u": 0, "b": 1, "a": 2, "g": 3, "beta": 4, "delta": 5, "D": 6}


def sym_key(s: tuple):
    if s[0] == "D":
        return (_CATEGORY["D"], sym_key(s[1]), len(s[2]), s[2])
    return (_CATEGORY.get(s[0], 9), s[0]) + tuple(s[1:])


def sym_name(s: tuple) -> str:
    if s[0] == "D":
        return "".join(f"e{k + 1}" for k in reversed(s[2])) + f"({sym_name(s[1])})"
    if len(s) == 1:
        return s[0]
    return f"{s[0]}{s[1] + 1}"


def _mono_key(m: tuple):
    return (sum(e for _, e in m), tuple((sym_key(s), e) for s, e in m))


class Ring:
    """Rewrite rules ``s**2 -> value`` for square-root-like symbols."""

    def __init__(self, squares: dict | None = None):
        self.squares = {k: Fraction(v) for k, v in (squares or {}).items()}

    def poly(self, terms=None) -> "Poly":
        return Poly(self, terms or {})

    def const(self, c) -> "Poly":
        c = Fraction(c)
        return Poly(self, {(): c} if c else {})

    def sym(self, s: tuple, coeff=1) -> "Poly":
        return Poly(self, {((s, 1),): Fraction(coeff)})

    def zero(self) -> "Poly":
        return Poly(self, {})

    def _normalize(self, mono: dict):
        coeff = Fraction(1)
        out = []
        for s, e in sorted(mono.items(), key=lambda t: sym_key(t[0])):
            if s in self.squares and e >= 2:
                coeff *= self.squares[s] ** (e // 2)
                e %= 2
            if e:
                out.append((s, e))
        return coeff, tuple(out)


class Poly:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict):
        self.ring = ring
        self.terms = {m: Fraction(c) for m, c in terms.items() if c != 0}

    # arithmetic ---------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            f = Fraction(other)
            return Poly(self.ring, {m: c * f for m, c in self.terms.items()})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                merged = dict(m1)
                for s, e in m2:
                    merged[s] = merged.get(s, 0) + e
                k, m = self.ring._normalize(merged)
                out[m] = out.get(m, 0) + c1 * c2 * k
        return Poly(self.ring, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def __eq__(self, other):
        other = self._lift(other)
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda t: _mono_key(t[0]))))

    # queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def symbols(self) -> set:
        return {s for m in self.terms for s, _ in m}

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a rational constant")
        return self.terms.get((), Fraction(0))

    def degree_in(self, s: tuple) -> int:
        return max((e for m in self.terms for t, e in m if t == s), default=0)

    def coefficient(self, s: tuple) -> "Poly":
        """Coefficient of ``s**1`` (the polynomial must be at most linear in ``s``)."""
        out = {}
        for m, c in self.terms.items():
            rest = tuple((t, e) for t, e in m if t != s)
            if len(rest) != len(m):
                out[rest] = out.get(rest, 0) + c
        return Poly(self.ring, out)

    def without(self, s: tuple) -> "Poly":
        return Poly(self.ring, {m: c for m, c in self.terms.items() if all(t != s for t, _ in m)})

    def inverse(self) -> "Poly":
        """Inverse of ``p + q s`` with ``s`` a square-rule symbol (or a constant)."""
        syms = self.symbols()
        if not syms:
            v = self.constant_value()
            if v == 0:
                raise ZeroDivisionError("inverse of zero")
            return self.ring.const(1 / v)
        if len(syms) != 1 or next(iter(syms)) not in self.ring.squares:
            raise ValueError(f"cannot invert {self}")
        s = next(iter(syms))
        p = self.without(s).constant_value()
        q = self.coefficient(s).constant_value()
        norm = p * p - q * q * self.ring.squares[s]
        if norm == 0:
            raise ZeroDivisionError(f"{self} is not invertible")
        return (self.ring.const(p) - self.ring.sym(s, q)) * (1 / norm)

    def subs(self, mapping: dict) -> "Poly":
        if not mapping or not (self.symbols() & mapping.keys()):
            return self
        out = self.ring.zero()
        for m, c in self.terms.items():
            term = self.ring.const(c)
            keep = {}
            for s, e in m:
                if s in mapping:
                    for _ in range(e):
                        term = term * mapping[s]
                else:
                    keep[s] = e
            if keep:
                term = term * Poly(self.ring, {tuple(sorted(keep.items(), key=lambda t: sym_key(t[0]))): 1})
            out = out + term
        return out

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_mono_key):
            c = self.terms[m]
            mono = "*".join(sym_name(s) + (f"^{e}" if e > 1 else "") for s, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


# forms ----------------------------------------------------------------------

def _sort_sign(idx: tuple):
    """Sign of the sorting permutation, or 0 on a repeated index."""
    if len(set(idx)) != len(idx):
        return 0, None
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class Form:
    """Homogeneous differential form ``sum f_I e^I`` on a frame of size ``dim``."""

    __slots__ = ("ring", "dim", "degree", "comps")

    def __init__(self, ring: Ring, dim: int, degree: int, comps: dict | None = None):
        self.ring = ring
        self.dim = dim
        self.degree = degree
        self.comps = {}
        for idx, f in (comps or {}).items():
            sign, key = _sort_sign(tuple(idx))
            if sign == 0:
                continue
            if len(key) != degree:
                raise ValueError("component index does not match form degree")
            f = f if isinstance(f, Poly) else ring.const(f)
            self.comps[key] = self.comps.get(key, ring.zero()) + f * sign
        self.comps = {k: v for k, v in self.comps.items() if not v.is_zero()}

    @classmethod
    def basis(cls, ring, dim, i, coeff=1) -> "Form":
        return cls(ring, dim, 1, {(i,): coeff if isinstance(coeff, Poly) else ring.const(coeff)})

    @classmethod
    def scalar(cls, ring, dim, f) -> "Form":
        return cls(ring, dim, 0, {(): f})

    def zero_like(self) -> "Form":
        return Form(self.ring, self.dim, self.degree)

    def __add__(self, other: "Form") -> "Form":
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        c = dict(self.comps)
        for k, v in other.comps.items():
            c[k] = c.get(k, self.ring.zero()) + v
        return Form(self.ring, self.dim, self.degree, c)

    def __neg__(self) -> "Form":
        return self * -1

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, f) -> "Form":
        return Form(self.ring, self.dim, self.degree, {k: v * f for k, v in self.comps.items()})

    __rmul__ = __mul__

    def wedge(self, other: "Form") -> "Form":
        out = {}
        for i, f in self.comps.items():
            for j, g in other.comps.items():
                sign, key = _sort_sign(i + j)
                if sign:
                    out[key] = out.get(key, self.ring.zero()) + f * g * sign
        return Form(self.ring, self.dim, self.degree + other.degree, out)

    __xor__ = wedge

    def __getitem__(self, idx) -> Poly:
        sign, key = _sort_sign(tuple(idx))
        if sign == 0:
            return self.ring.zero()
        return self.comps.get(key, self.ring.zero()) * sign

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other) -> bool:
        return isinstance(other, Form) and (self - other).is_zero()

    def __hash__(self):
        return hash((self.degree, tuple(sorted(self.comps))))

    def symbols(self) -> set:
        out = set()
        for v in self.comps.values():
            out |= v.symbols()
        return out

    def map(self, fn) -> "Form":
        return Form(self.ring, self.dim, self.degree, {k: fn(v) for k, v in self.comps.items()})

    def subs(self, mapping: dict) -> "Form":
        return self.map(lambda p: p.subs(mapping))

    def coefficients(self) -> list:
        return [self.comps[k] for k in sorted(self.comps)]

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for k in sorted(self.comps):
            basis = "^".join(f"e{i + 1}" for i in k) or "1"
            parts.append(f"({self.comps[k]}) {basis}")
        return " + ".join(parts)

    __repr__ = __str__


# frame calculus ---------------------------------------------------------------

class FrameCalculus:
    """Exterior derivative on a frame with structure ``de^k`` given as 2-forms.

    ``constants`` are symbols with vanishing frame derivatives; every other
    non-derivative symbol is an unknown function.
    """

    def __init__(self, ring: Ring, de: list, constants=("u", "b", "a", "g")):
        self.ring = ring
        self.dim = len(de)
        self.de = de
        self.constants = set(constants)
        # [e_k, e_l] = sum_m c[m][k][l] e_m
        self.c = [[[-de[m][(k, l)] for l in range(self.dim)] for k in range(self.dim)] for m in range(self.dim)]
        self._cache: dict = {}

    def _is_const(self, s: tuple) -> bool:
        return s[0] in self.constants

    def derive_symbol(self, k: int, s: tuple) -> Poly:
        """``e_k(s)`` in canonical form."""
        key = (k, s)
        if key in self._cache:
            return self._cache[key]
        if self._is_const(s):
            out = self.ring.zero()
        elif s[0] != "D":
            out = self.ring.sym(("D", s, (k,)))
        else:
            base, path = s[1], s[2]
            last = path[-1]
            if last <= k:
                out = self.ring.sym(("D", base, path + (k,)))
            else:
                # e_k e_last g = e_last e_k g + [e_k, e_last] g
                g = ("D", base, path[:-1]) if len(path) > 1 else base
                out = self.derive(last, self.derive_symbol(k, g))
                for m in range(self.dim):
                    cm = self.c[m][k][last]
                    if not cm.is_zero():
                        out = out + cm * self.derive_symbol(m, g)
        self._cache[key] = out
        return out

    def derive(self, k: int, p: Poly) -> Poly:
        """Frame derivation ``e_k`` (Leibniz rule)."""
        out = self.ring.zero()
        for m, c in p.terms.items():
            for s, e in m:
                ds = self.derive_symbol(k, s)
                if ds.is_zero():
                    continue
                rest = dict(m)
                rest[s] = e - 1
                if rest[s] == 0:
                    del rest[s]
                _, mono = self.ring._normalize(rest)
                out = out + ds * Poly(self.ring, {mono: c * e})
        return out

    def d_scalar(self, f: Poly) -> Form:
        return Form(self.ring, self.dim, 1, {(k,): self.derive(k, f) for k in range(self.dim)})

    def d(self, form: Form) -> Form:
        out = Form(self.ring, self.dim, form.degree + 1)
        for idx, f in form.comps.items():
            basis = Form(self.ring, self.dim, form.degree, {idx: self.ring.const(1)})
            out = out + self.d_scalar(f).wedge(basis)
            # d(e^{i1} ^ ... ^ e^{ip})
            for s, i in enumerate(idx):
                left = Form(self.ring, self.dim, s, {idx[:s]: self.ring.const(1)})
                right = Form(self.ring, self.dim, len(idx) - s - 1, {idx[s + 1:]: self.ring.const(1)})
                out = out + left.wedge(self.de[i]).wedge(right) * (f * (-1) ** s)
        return out


# linear solving -----------------------------------------------------------------

class NonlinearError(ValueError):
    pass


def solve_linear(equations, unknowns):
    """Gaussian elimination of ``eq = 0`` for the listed unknown symbols.

    Coefficients of unknowns must be invertible constants of the ring (for
    instance ``p + q u``).  Returns ``(solution, remainders, free)`` where
    ``remainders`` are the nonzero equations left without unknowns.
    """
    unknowns = list(unknowns)
    uset = set(unknowns)
    solution: dict = {}
    remainders = []
    for eq in equations:
        eq = eq.subs(solution)
        if eq.is_zero():
            continue
        pivot = None
        for x in unknowns:
            if x in solution or eq.degree_in(x) == 0:
                continue
            if eq.degree_in(x) > 1:
                raise NonlinearError(f"equation is not linear in {sym_name(x)}")
            coeff = eq.coefficient(x)
            if coeff.symbols() & uset:
                raise NonlinearError(f"coefficient of {sym_name(x)} involves other unknowns")
            try:
                inv = coeff.inverse()
            except ValueError:
                continue
            pivot = (x, coeff, inv)
            break
        if pivot is None:
            if eq.symbols() & uset:
                raise NonlinearError("no invertible pivot in an equation with unknowns")
            remainders.append(eq)
            continue
        x, coeff, inv = pivot
        value = -(eq - coeff * Poly(eq.ring, {((x, 1),): 1})) * inv
        solution = {k: v.subs({x: value}) for k, v in solution.items()}
        solution[x] = value
    free = [x for x in unknowns if x not in solution]
    return solution, remainders, free
