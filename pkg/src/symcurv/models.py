"""Built-in chart models and the JSON model-file format.

Chart model files look like::

    {"kind": "chart", "n": 2,
     "gamma": {"0,0,1": [["3/2", [1, 0, 0, 0]], [-1, [0, 0, 0, 0]]], ...}}

where key ``"k,i,j"`` holds the polynomial ``Gamma_kij = omega_kl Gamma^l_ij``
in Darboux coordinates (standard omega).  The lowered coefficients must be
totally symmetric; missing permutations are filled in, conflicting ones
rejected.
"""
from __future__ import annotations

import itertools
import json
from fractions import Fraction

import numpy as np

from .connection import ChartModel
from .jets import Jet, n_coeffs, multi_indices
from .scalars import EXACT, asarray, to_scalar, zeros
from .symplectic import SymplecticForm


class ModelError(ValueError):
    """Malformed model definition; the message names the violated invariant."""


def _constant_omega(form_matrix):
    def omega(point, order, mode):
        return Jet.constant(asarray(form_matrix, mode), len(point))

    return omega


def flat(n: int = 2) -> ChartModel:
    dim = 2 * n

    def gamma(point, order, mode):
        return Jet.constant(asarray(np.zeros((dim,) * 3, dtype=int), mode), dim)

    std = SymplecticForm.standard(n, EXACT).matrix
    return ChartModel(n, gamma, _constant_omega(std), "flat", {"n": n})


def _lowered_polynomial_model(n: int, table: dict, name: str, params: dict) -> ChartModel:
    """Model from polynomials ``Gamma_kij`` keyed by sorted index triples."""
    dim = 2 * n
    std = SymplecticForm.standard(n, EXACT)

    alphas = sorted({a for terms in table.values() for _, a in terms}, key=lambda a: (sum(a), a))
    col = {a: i for i, a in enumerate(alphas)}
    # coefficient of monomial m in the entry (k, i, j)
    coef = np.zeros((dim, dim, dim, len(alphas)), dtype=object)
    coef[...] = 0
    for key, terms in table.items():
        for c, a in terms:
            for k, i, j in set(itertools.permutations(key)):
                coef[k, i, j, col[a]] += c

    def gamma(point, order, mode):
        monos = Jet.monomials(alphas, point, order, mode).coeffs
        low = np.einsum("kijm,mZ->kijZ", asarray(coef, mode), monos)
        winv = asarray(std.inverse, mode)
        # Gamma^l_ij = (omega^-1)_lk Gamma_kij
        return Jet(np.einsum("lk,kijZ->lijZ", winv, low), dim, order)

    return ChartModel(n, gamma, _constant_omega(std.matrix), name, params)


def random_model(n: int = 2, seed: int = 0, degree: int = 2, coeff_range: int = 2) -> ChartModel:
    """Random symplectic connection: each sorted triple gets a polynomial of
    total degree <= ``degree`` with integer coefficients in [-range, range]."""
    if degree < 0:
        raise ModelError("polynomial degree must be >= 0")
    rng = np.random.default_rng(seed)
    dim = 2 * n
    monos = multi_indices(dim, degree)
    table = {}
    for key in itertools.combinations_with_replacement(range(dim), 3):
        coeffs = rng.integers(-coeff_range, coeff_range + 1, size=len(monos))
        table[key] = [(int(c), m) for c, m in zip(coeffs, monos) if c]
    return _lowered_polynomial_model(n, table, "random", {"n": n, "seed": seed, "degree": degree})


def constant_model(n: int, lowered) -> ChartModel:
    """Point-independent Christoffel symbols from a totally symmetric
    lowered 3-tensor ``lowered[k, i, j]``."""
    lowered = np.asarray(lowered, dtype=object)
    dim = 2 * n
    table = {}
    for key in itertools.combinations_with_replacement(range(dim), 3):
        vals = {lowered[p] for p in itertools.permutations(key)}
        if len(vals) != 1:
            raise ModelError(f"lowered Christoffel symbols not totally symmetric at {key}")
        v = vals.pop()
        if v != 0:
            table[key] = [(v, (0,) * dim)]
    return _lowered_polynomial_model(n, table, "constant", {"n": n})


# Fubini-Study ----------------------------------------------------------------
#
# Affine chart z = x + i y of CP^n, potential lam * log(1 + |z|^2).  The
# Hermitian form is h(xi, eta) = lam [(xi . conj eta)/s - (zbar . xi)(z . conj eta)/s^2]
# with s = 1 + |z|^2; the Riemannian metric is Re h and omega = -Im h, so both
# are the identity / standard form at the origin.  The Levi-Civita connection
# is complex bilinear, Gamma(xi, eta)^a = -(xi_a (zbar . eta) + eta_a (zbar . xi)) / s.

def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _fs_pieces(point, order, mode):
    dim = len(point)
    n = dim // 2
    xs = [Jet.variable(i, point, order, mode) for i in range(dim)]
    one = to_scalar(1, mode)
    s = xs[0] * xs[0] + one
    for v in xs[1:]:
        s = s + v * v
    inv_s = s.reciprocal()
    # unit complex direction of real basis vector e_i
    xi = [(a, (one, 0 * one)) if a < n else (a - n, (0 * one, one)) for a in range(dim)]
    # w_i = zbar . xi_i
    w = []
    for a, (ca, unit) in enumerate(xi):
        zbar = (xs[ca], -xs[ca + n])
        w.append(_cmul(zbar, (Jet.constant(asarray(unit[0], mode), dim), Jet.constant(asarray(unit[1], mode), dim))))
    return n, xs, inv_s, xi, w


def _fs_gamma(point, order, mode):
    dim = len(point)
    n, xs, inv_s, xi, w = _fs_pieces(point, order, mode)
    zero = Jet(zeros(n_coeffs(dim, order), mode), dim, order)
    comps = [[[zero] * dim for _ in range(dim)] for _ in range(dim)]
    for i in range(dim):
        ai, ui = xi[i]
        for j in range(dim):
            aj, uj = xi[j]
            # complex vector -(xi_i w_j + xi_j w_i)/s, supported on indices ai, aj
            acc = {}
            for a, u, ww in ((ai, ui, w[j]), (aj, uj, w[i])):
                term = _cmul((Jet.constant(asarray(u[0], mode), dim), Jet.constant(asarray(u[1], mode), dim)), ww)
                if a in acc:
                    acc[a] = (acc[a][0] + term[0], acc[a][1] + term[1])
                else:
                    acc[a] = term
            for a, (re, im) in acc.items():
                comps[a][i][j] = -(re * inv_s)
                comps[a + n][i][j] = -(im * inv_s)
    flat_list = [comps[l][i][j] for l in range(dim) for i in range(dim) for j in range(dim)]
    return Jet.stack(flat_list, (dim, dim, dim))


def _fs_hermitian(point, order, mode, lam):
    """Real and imaginary parts of h(e_i, e_j) as jets."""
    dim = len(point)
    n, xs, inv_s, xi, w = _fs_pieces(point, order, mode)
    inv_s2 = inv_s * inv_s
    lam = to_scalar(lam, mode)
    re_parts, im_parts = [], []
    for i in range(dim):
        ai, ui = xi[i]
        for j in range(dim):
            aj, uj = xi[j]
            # xi_i . conj(xi_j)
            if ai == aj:
                c = _cmul(ui, (uj[0], -uj[1]))
            else:
                c = (0 * lam, 0 * lam)
            wj_conj = (w[j][0], -w[j][1])
            prod = _cmul(w[i], wj_conj)
            re = (inv_s * c[0]) - prod[0] * inv_s2
            im = (inv_s * c[1]) - prod[1] * inv_s2
            re_parts.append(re * lam)
            im_parts.append(im * lam)
    return Jet.stack(re_parts, (dim, dim)), Jet.stack(im_parts, (dim, dim))


def fubini_study_metric(point, order, mode, lam=1) -> Jet:
    """Riemannian metric ``Re h`` of the Fubini-Study model (for cross-checks)."""
    return _fs_hermitian(point, order, mode, lam)[0]


def fubini_study(n: int = 1, lam=1) -> ChartModel:
    """Levi-Civita connection of ``lam`` times the Fubini-Study metric on
    the affine chart of CP^n, with omega its Kahler form."""
    if n < 1:
        raise ModelError("fubini_study needs n >= 1")

    def omega(point, order, mode):
        return -_fs_hermitian(point, order, mode, lam)[1]

    return ChartModel(n, _fs_gamma, omega, "fubini_study", {"n": n, "lam": str(Fraction(lam)) if not isinstance(lam, float) else lam})


# products --------------------------------------------------------------------

def _embed(j: Jet, dim: int, offset: int) -> Jet:
    """Jet in ``j.dim`` variables viewed as a jet in ``dim`` variables
    (its own variables placed at ``offset``)."""
    if j.order is None:
        return Jet(j.coeffs, dim, None)
    src = multi_indices(j.dim, j.order)
    dst = {a: k for k, a in enumerate(multi_indices(dim, j.order))}
    c = zeros(j.shape + (n_coeffs(dim, j.order),), j.mode)
    for k, a in enumerate(src):
        full = [0] * dim
        full[offset: offset + j.dim] = a
        c[..., dst[tuple(full)]] = j.coeffs[..., k]
    return Jet(c, dim, j.order)


def product(m1: ChartModel, m2: ChartModel) -> ChartModel:
    """Product connection: block-diagonal omega and Christoffel symbols,
    coordinates of ``m1`` first."""
    d1, d2 = m1.dim, m2.dim
    dim = d1 + d2

    def split(point):
        return point[:d1], point[d1:]

    def block(j1: Jet, j2: Jet, rank: int) -> Jet:
        e1, e2 = _embed(j1, dim, 0), _embed(j2, dim, d1)
        order = e1.order if e2.order is None else e2.order if e1.order is None else min(e1.order, e2.order)
        e1, e2 = e1.truncate(order), e2.truncate(order)
        c = zeros((dim,) * rank + e1.coeffs.shape[-1:], e1.mode)
        c[(slice(0, d1),) * rank] = e1.coeffs
        c[(slice(d1, dim),) * rank] = e2.coeffs
        return Jet(c, dim, order)

    def gamma(point, order, mode):
        p1, p2 = split(point)
        return block(m1.gamma(p1, order, mode), m2.gamma(p2, order, mode), 3)

    def omega(point, order, mode):
        p1, p2 = split(point)
        return block(m1.omega(p1, order, mode), m2.omega(p2, order, mode), 2)

    return ChartModel(m1.n + m2.n, gamma, omega, f"product({m1.name},{m2.name})",
                      {"factors": [m1.params, m2.params]})


BUILTINS = ("flat", "fubini_study", "product", "random")


def builtin_model(name: str, **params) -> ChartModel:
    """``flat(n)``, ``fubini_study(n, lam)``, ``product(m1, m2)`` (models or
    names of factors, default two ``fubini_study(1)``), ``random(n, seed, degree)``."""
    if name == "flat":
        return flat(int(params.get("n", 2)))
    if name == "fubini_study":
        return fubini_study(int(params.get("n", 1)), params.get("lam", 1))
    if name == "random":
        return random_model(int(params.get("n", 2)), int(params.get("seed", 0)), int(params.get("degree", 2)))
    if name == "product":
        m1 = params.get("m1", "fubini_study")
        m2 = params.get("m2", "fubini_study")
        m1 = builtin_model(m1, n=1) if isinstance(m1, str) else m1
        m2 = builtin_model(m2, n=1) if isinstance(m2, str) else m2
        return product(m1, m2)
    raise ModelError(f"unknown built-in model {name!r}; expected one of {BUILTINS}")


# JSON ------------------------------------------------------------------------

def _parse_coeff(c):
    if isinstance(c, bool) or not isinstance(c, (int, str, float)):
        raise ModelError(f"bad coefficient {c!r}")
    if isinstance(c, float):
        if not c.is_integer():
            raise ModelError(f"non-integer float coefficient {c!r}; write rationals as 'p/q' strings")
        return Fraction(int(c))
    try:
        return Fraction(c)
    except ValueError as exc:
        raise ModelError(f"bad coefficient {c!r}") from exc


def chart_model_from_dict(doc: dict) -> ChartModel:
    if doc.get("kind") != "chart":
        raise ModelError("chart model must have kind 'chart'")
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise ModelError("'n' must be a positive integer")
    dim = 2 * n
    raw = doc.get("gamma", {})
    if not isinstance(raw, dict):
        raise ModelError("'gamma' must be an object keyed by 'k,i,j'")
    entries = {}
    for key, terms in raw.items():
        try:
            idx = tuple(int(s) for s in key.split(","))
        except ValueError as exc:
            raise ModelError(f"bad gamma key {key!r}") from exc
        if len(idx) != 3 or not all(0 <= i < dim for i in idx):
            raise ModelError(f"gamma key {key!r} out of range for dimension {dim}")
        poly = {}
        for term in terms:
            if len(term) != 2 or len(term[1]) != dim or any((not isinstance(p, int)) or p < 0 for p in term[1]):
                raise ModelError(f"bad term {term!r} under key {key!r}")
            mono = tuple(term[1])
            poly[mono] = poly.get(mono, 0) + _parse_coeff(term[0])
        entries[idx] = {m: c for m, c in poly.items() if c != 0}
    table = {}
    for key in itertools.combinations_with_replacement(range(dim), 3):
        given = [entries[p] for p in set(itertools.permutations(key)) if p in entries]
        if not given:
            continue
        if any(g != given[0] for g in given[1:]):
            raise ModelError(f"lowered Christoffel symbols not totally symmetric at {key} "
                             "(torsion-free and nabla omega = 0 require it)")
        if given[0]:
            table[key] = [(c, m) for m, c in sorted(given[0].items())]
    return _lowered_polynomial_model(n, table, doc.get("name", "file"), {"n": n})


def load_model(path):
    """Chart or algebraic model from a JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("model file must hold a JSON object")
    kind = doc.get("kind")
    if kind == "chart":
        return chart_model_from_dict(doc)
    if kind == "algebraic":
        from .homogeneous import algebraic_model_from_dict

        return algebraic_model_from_dict(doc)
    raise ModelError(f"unknown model kind {kind!r}")
