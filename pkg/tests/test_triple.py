import numpy as np
import pytest
from gmpy2 import mpq

from conftest import rational_point
from symcurv import linalg
from symcurv.connection import bianchi_residuals, curvature_at, perturbed
from symcurv.models import flat, fubini_study, random_model
from symcurv.scalars import EXACT, FLOAT, max_abs
from symcurv.triple import (
    NotLocallySymmetricError, b_dot_r, build_triple, holonomy_span, jacobi_tensor, killing_certificate, killing_form,
    relative_residuals, symmetric_space_curvature, triple_residuals,
)


def fs_data(n, seed=0, mode=EXACT):
    pt = rational_point(2 * n, seed) if mode == EXACT else [0.1 * (k + 1) for k in range(2 * n)]
    return curvature_at(fubini_study(n), pt, depth=1, mode=mode)


def killing_signature(t):
    ev = np.linalg.eigvalsh(killing_form(t).astype(float))
    return int(np.sum(ev > 1e-9)), int(np.sum(ev < -1e-9))


@pytest.mark.parametrize("n, hol", [(1, 1), (2, 4)])
def test_holonomy_dimension(n, hol):
    assert holonomy_span(fs_data(n)).dim == hol
    origin = curvature_at(fubini_study(n), [mpq(0)] * (2 * n), depth=1, mode=EXACT)
    assert holonomy_span(origin).dim == hol


@pytest.mark.parametrize("n", [1, 2])
def test_fubini_study_triple_exact(n):
    data = fs_data(n, seed=n)
    t = build_triple(data)
    assert t.dim == n * n + 2 * n
    assert all(v == 0 for v in triple_residuals(t, data).values())
    assert killing_certificate(t).nondegenerate


def test_killing_determinants_pinned():
    origin1 = curvature_at(fubini_study(1), [mpq(0)] * 2, depth=1, mode=EXACT)
    origin2 = curvature_at(fubini_study(2), [mpq(0)] * 4, depth=1, mode=EXACT)
    d1 = killing_certificate(build_triple(origin1)).determinant
    d2 = killing_certificate(build_triple(origin2)).determinant
    assert d1 == linalg.det(killing_form(build_triple(origin1)))
    assert (d1, d2) == (-128, 35831808)


def test_ttt_jacobi_is_first_bianchi():
    data = fs_data(2, seed=5)
    t = build_triple(data)
    assert bianchi_residuals(data)[0] == 0
    assert max_abs(jacobi_tensor(t.structure_constants)[:4, :4, :4]) == 0
    bad = perturbed(data, (0, 1, 2, 3), 1)
    tb = build_triple(bad, force=True)
    assert max_abs(jacobi_tensor(tb.structure_constants)[:4, :4, :4]) != 0


def test_flat_triple_is_abelian():
    data = curvature_at(flat(2), [mpq(0)] * 4, depth=1, mode=EXACT)
    t = build_triple(data)
    assert (t.dim, t.hol_dim) == (4, 0)
    assert all(v == 0 for v in triple_residuals(t, data).values())
    assert holonomy_span(data).dim == 0


def test_gate_rejects_non_symmetric_data():
    data = curvature_at(random_model(2, seed=1), rational_point(4, 1), depth=1, mode=EXACT)
    with pytest.raises(NotLocallySymmetricError):
        build_triple(data)
    with pytest.raises(NotLocallySymmetricError):
        holonomy_span(data)


@pytest.mark.parametrize("mode", [EXACT, FLOAT])
def test_perturbed_curvature_is_detected(mode):
    data = fs_data(2, seed=3, mode=mode)
    bad = perturbed(data, (0, 1, 0, 2), mpq(1, 1000) if mode == EXACT else 1e-3)
    t = build_triple(bad, force=True)
    res = triple_residuals(t, bad)
    assert max(res["jacobi"], res["B_dot_R"]) >= 1e-4


def test_float_triple():
    data = fs_data(2, mode=FLOAT)
    t = build_triple(data)
    assert t.dim == 8
    assert all(v <= 1e-9 for v in relative_residuals(t, data).values())


@pytest.mark.parametrize("n", [1, 2])
def test_sign_choice_and_recovered_curvature(n):
    data = fs_data(n, seed=2)
    R = data.R.components
    assert np.array_equal(symmetric_space_curvature(build_triple(data)), -R)
    dual = build_triple(data, curvature_sign=-1)
    assert np.array_equal(symmetric_space_curvature(dual), R)
    assert killing_certificate(dual).definite == "negative"
    assert all(v == 0 for v in triple_residuals(dual, data).values())
    assert killing_signature(dual) == (0, dual.dim)


def test_b_dot_r_vanishes_on_symmetric_data():
    data = fs_data(2, seed=4)
    assert all(np.all(x == 0) for x in b_dot_r(build_triple(data), data).flat)


@pytest.mark.xfail(strict=True, reason="literal bracket [X,Y] = R(X,Y) gives the noncompact dual for positive curvature")
def test_literal_triple_killing_definite():
    assert killing_certificate(build_triple(fs_data(1))).definite is not None


def test_serialization():
    doc = build_triple(fs_data(1)).to_dict()
    assert doc["dim"] == 3 and doc["hol_dim"] == 1
    assert all(isinstance(e[3], str) for e in doc["structure_constants"])
