import json
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq

from conftest import rational_point
from oracles import (
    fd_covariant_derivative_1form, fd_curvature, fs_gamma_float, fs_metric_symbolic, levi_civita_curvature,
)
from symcurv.connection import (
    bianchi_residuals, check_model_invariants, covariant_derivative, curvature_at, curvature_from_gamma, perturbed,
    symmetry_residuals,
)
from symcurv.jets import Jet, JetOrderError
from symcurv.models import (
    ModelError, builtin_model, constant_model, flat, fubini_study, fubini_study_metric, load_model, product,
    random_model,
)
from symcurv.scalars import EXACT, FLOAT, asarray, max_abs
from symcurv.tensors import DOWN


@pytest.mark.parametrize("n, point", [
    (1, ["1/4", "-1/2"]),
    (2, ["1/4", "-1/8", "0", "1/2"]),
])
def test_fubini_study_matches_levi_civita_oracle(n, point):
    pt = [Fraction(p) for p in point]
    coords, G, W = fs_metric_symbolic(n)
    gam, R = levi_civita_curvature(coords, G, pt)
    data = curvature_at(fubini_study(n), [mpq(p) for p in pt], depth=0, mode=EXACT)
    assert all(mpq(a) == b for a, b in zip(gam.flat, data.gamma.value.flat))
    assert all(mpq(a) == b for a, b in zip(R.flat, data.R.components.flat))
    w = W.subs(dict(zip(coords, pt)))
    assert all(mpq(Fraction(str(w[i, j]))) == data.omega.matrix[i, j] for i in range(2 * n) for j in range(2 * n))


def test_fubini_study_origin():
    m = fubini_study(1)
    origin = [mpq(0), mpq(0)]
    g = fubini_study_metric(origin, 0, EXACT).value
    assert np.array_equal(g, asarray(np.eye(2, dtype=int), EXACT))
    data = curvature_at(m, origin, depth=0, mode=EXACT)
    assert max_abs(data.gamma.value) == 0
    assert max_abs(data.R.components) != 0
    fd = fd_curvature(lambda p: fs_gamma_float(p, 1), [0.0, 0.0])
    assert np.max(np.abs(fd - data.R.components.astype(float))) < 1e-6


def test_fubini_study_finite_differences_off_origin():
    pt = [0.3, -0.2, 0.1, 0.4]
    data = curvature_at(fubini_study(2), pt, depth=0, mode=FLOAT)
    fd = fd_curvature(lambda p: fs_gamma_float(p, 2), pt)
    assert np.max(np.abs(fd - data.R.components)) < 1e-6


def test_constant_gamma_gives_commutator():
    rng = np.random.default_rng(4)
    s = rng.integers(-3, 4, size=(4, 4, 4))
    low = (s + s.transpose(0, 2, 1) + s.transpose(1, 0, 2) + s.transpose(1, 2, 0)
           + s.transpose(2, 0, 1) + s.transpose(2, 1, 0))
    m = constant_model(2, low)
    data = curvature_at(m, [mpq(1, 3)] * 4, depth=1, mode=EXACT)
    g = data.gamma.value
    expect = np.zeros((4,) * 4, dtype=object)
    for x, y, z, l in np.ndindex(4, 4, 4, 4):
        expect[x, y, z, l] = sum(g[l, x, k] * g[k, y, z] - g[l, y, k] * g[k, x, z] for k in range(4))
    assert np.array_equal(data.R.components, expect)
    assert bianchi_residuals(data) == (0, 0)


def test_covariant_derivative_finite_differences():
    m = random_model(2, seed=3, degree=2)
    rng = np.random.default_rng(9)
    coeffs = rng.integers(-3, 4, size=(4, 3))  # u_y = c0 + c1 x_y^2 + c2 x_0 x_1

    def u_poly(y):
        a = [0] * 4
        a[y] = 2
        return [(int(coeffs[y, 0]), (0, 0, 0, 0)), (int(coeffs[y, 1]), tuple(a)), (int(coeffs[y, 2]), (1, 1, 0, 0))]

    def u_float(p):
        return np.array([coeffs[y, 0] + coeffs[y, 1] * p[y] ** 2 + coeffs[y, 2] * p[0] * p[1] for y in range(4)])

    def gamma_float(p):
        return m.gamma(list(p), 0, FLOAT).value

    pt = [0.25, -0.375, 0.125, 0.5]
    u = Jet.stack([Jet.polynomial(u_poly(y), pt, 2, FLOAT) for y in range(4)])
    got = covariant_derivative(m.gamma(pt, 2, FLOAT), u, (DOWN,), order=0).value
    fd = fd_covariant_derivative_1form(u_float, gamma_float, pt)
    assert np.max(np.abs(got - fd)) < 1e-6


def test_bianchi_exact_random_n2():
    for seed in range(3):
        m = random_model(2, seed=seed)
        data = curvature_at(m, rational_point(4, seed), depth=1, mode=EXACT)
        assert bianchi_residuals(data) == (0, 0)
        assert all(v == 0 for v in symmetry_residuals(data).values())


def test_flat_and_perturbation():
    data = curvature_at(flat(2), [mpq(0)] * 4, depth=1, mode=EXACT)
    assert bianchi_residuals(data) == (0, 0)
    bad = perturbed(data, (0, 1, 2, 3), 1)
    assert bianchi_residuals(bad)[0] >= 1


def test_random_model_invariants_exact():
    m = random_model(2, seed=1, degree=2)
    for k in range(10):
        res = check_model_invariants(m, rational_point(4, 100 + k), EXACT)
        assert all(v == 0 for v in res.values()), res


def test_fubini_study_invariants():
    res = check_model_invariants(fubini_study(2), rational_point(4, 1), EXACT)
    assert all(v == 0 for v in res.values()), res


def test_product_is_block_diagonal():
    m = product(fubini_study(1), fubini_study(1))
    data = curvature_at(m, rational_point(4, 2), depth=1, mode=EXACT)
    R = data.R_low.components
    assert max_abs(R[:2, :2, 2:, :]) == 0 and max_abs(R[2:, 2:, :2, :]) == 0
    assert max_abs(R[:2, :2, :2, :2]) != 0 and max_abs(R[2:, 2:, 2:, 2:]) != 0
    assert bianchi_residuals(data) == (0, 0)


def test_depth_needs_christoffel_order():
    m = fubini_study(1)
    pt = [mpq(0), mpq(0)]
    gamma = m.gamma(pt, 1, EXACT)
    with pytest.raises(JetOrderError):
        curvature_from_gamma(gamma, m.omega(pt, 1, EXACT), pt, depth=2)


def test_builtin_names():
    assert builtin_model("fubini_study", n=2).n == 2
    assert builtin_model("product").n == 2
    with pytest.raises(ModelError):
        builtin_model("sphere")


def test_chart_model_file(tmp_path):
    doc = {"kind": "chart", "n": 1, "name": "toy",
           "gamma": {"0,0,1": [["1/2", [1, 0]]], "1,0,0": [["1/2", [1, 0]]], "0,1,0": [["1/2", [1, 0]]]}}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    m = load_model(path)
    assert m.name == "toy"
    assert all(v == 0 for v in check_model_invariants(m, [mpq(1, 2), mpq(1, 3)], EXACT).values())
    data = curvature_at(m, [mpq(1, 2), mpq(1, 3)], depth=1, mode=EXACT)
    assert bianchi_residuals(data) == (0, 0)


@pytest.mark.parametrize("doc, msg", [
    ({"kind": "chart", "n": 1, "gamma": {"0,0,1": [[1, [0, 0]]], "1,0,0": [[2, [0, 0]]]}}, "totally symmetric"),
    ({"kind": "chart", "n": 0}, "positive integer"),
    ({"kind": "chart", "n": 1, "gamma": {"0,0,5": [[1, [0, 0]]]}}, "out of range"),
    ({"kind": "chart", "n": 1, "gamma": {"0,0,0": [[0.5, [0, 0]]]}}, "p/q"),
    ({"kind": "torus"}, "unknown model kind"),
])
def test_chart_model_file_errors(tmp_path, doc, msg):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelError, match=msg):
        load_model(path)


def test_malformed_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    with pytest.raises(ModelError, match="malformed"):
        load_model(path)
