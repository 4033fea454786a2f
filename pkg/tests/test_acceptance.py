"""Acceptance suite: one recorded verdict per criterion (see the summary
section at the end of the pytest run)."""
import itertools
import json
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy
from gmpy2 import mpq

from coframe_data import case2_input
from conftest import rational_point
from symcurv.coframe import GRAM, adapted_frame, verify_section4
from symcurv.connection import bianchi_residuals, curvature_at, relative_bianchi
from symcurv.homogeneous import (
    abelian, b_trace, classify_ricci_endomorphism, filiform4, homogeneous_diagnostics,
)
from symcurv.models import fubini_study, product, random_model
from symcurv.ricci import (
    DimensionError, decompose, extract_u, lemma_identity_residuals, local_symmetry_residual, ricci_trace,
)
from symcurv.scalars import EXACT, FLOAT, asarray, max_abs, relative, zeros
from symcurv.symplectic import SymplecticForm
from symcurv.triple import build_triple, killing_certificate, triple_residuals

TOL = 1e-9
SIX = ("eq1_1", "cyclic_nabla_r", "eq1_5", "eq1_6", "eq1_8", "eq1_9")


def sample_models():
    """25 connections with n = 2 and 25 with n = 3, degrees 0..2, 5 points each."""
    for n in (2, 3):
        for seed in range(25):
            yield n, random_model(n, seed=seed, degree=seed % 3), [rational_point(2 * n, 1000 * n + 10 * seed + k)
                                                                   for k in range(5)]


@pytest.fixture(scope="module")
def bianchi_sample():
    start = time.perf_counter()
    exact, floats = [], []
    for n, m, pts in sample_models():
        for p in pts:
            exact.append(curvature_at(m, p, depth=1, mode=EXACT))
            floats.append(curvature_at(m, [float(x) for x in p], depth=1, mode=FLOAT))
    return exact, floats, time.perf_counter() - start


def test_criterion_01_bianchi(bianchi_sample, verdict):
    exact, floats, build = bianchi_sample
    start = time.perf_counter()
    worst_exact = max(max(bianchi_residuals(d)) for d in exact)
    worst_float = max(max(relative_bianchi(d)) for d in floats)
    elapsed = build + time.perf_counter() - start
    verdict(1, {
        "50 connections x 5 points": len(exact) == 250,
        "exact residuals 0": worst_exact == 0,
        "float relative <= 1e-9": worst_float <= TOL,
        "runtime <= 60 s": elapsed <= 60,
    }, f"exact worst {worst_exact}, float worst {worst_float:.1e}, {elapsed:.1f} s")


def test_criterion_02_decomposition_traces(bianchi_sample, verdict):
    exact, _, _ = bianchi_sample
    e_ok = w_ok = True
    for d in exact:
        E, W = decompose(d)
        e_ok &= bool(np.array_equal(ricci_trace(E, d.omega), d.r.components))
        w_ok &= max_abs(ricci_trace(W, d.omega)) == 0
    verdict(2, {"Ricci(E) = r": e_ok, "Ricci(W) = 0": w_ok}, f"{len(exact)} exact samples")


def _fs_checks(n, mode):
    pts = [rational_point(2 * n, 50 + k) for k in range(5)]
    if mode == FLOAT:
        pts = [[float(x) for x in p] for p in pts]
    worst = {"W": 0, "nabla_R": 0, "u": 0, "identities": 0}
    for p in pts:
        d = curvature_at(fubini_study(n), p, depth=4, mode=mode)
        _, W = decompose(d)
        res = lemma_identity_residuals(d)
        worst["W"] = max(worst["W"], relative(W.max_abs(), d.R_low.components))
        worst["nabla_R"] = max(worst["nabla_R"], local_symmetry_residual(d))
        worst["u"] = max(worst["u"], relative(max_abs(extract_u(d)), d.R_low.components))
        worst["identities"] = max(worst["identities"], max(res[k] for k in SIX))
    return worst


@pytest.mark.slow
def test_criterion_03_fubini_study(verdict):
    checks = {}
    notes = []
    for n in (2, 3):
        for mode in (EXACT, FLOAT):
            worst = _fs_checks(n, mode)
            for k, v in worst.items():
                checks[f"n={n} {mode} {k}"] = v <= TOL
            notes.append(f"n={n} {mode} max {float(max(worst.values())):.1e}")
    d1 = curvature_at(fubini_study(1), rational_point(2, 3), depth=1, mode=EXACT)
    checks["n=1 locally symmetric"] = local_symmetry_residual(d1) == 0
    try:
        decompose(d1)
        checks["n=1 excluded from decomposition"] = False
    except DimensionError:
        checks["n=1 excluded from decomposition"] = True
    verdict(3, checks, "; ".join(notes))


def test_criterion_04_negative_control(verdict):
    d = curvature_at(random_model(2, seed=2), rational_point(4, 2), depth=3, mode=EXACT)
    _, W = decompose(d)
    w = relative(W.max_abs(), d.R_low.components)
    eq11 = lemma_identity_residuals(d)["eq1_1"]
    verdict(4, {"W > 1e-3": w > 1e-3, "eq1_1 > 1e-3": eq11 > 1e-3}, f"W {float(w):.3f}, eq1_1 {float(eq11):.3f}")


def test_criterion_05_product(verdict):
    m = product(fubini_study(1), fubini_study(1))
    ws = []
    for k in range(5):
        d = curvature_at(m, rational_point(4, 70 + k), depth=0, mode=EXACT)
        _, W = decompose(d)
        ws.append(relative(W.max_abs(), d.R_low.components))
    verdict(5, {"W > 1e-2 at all points": min(ws) > 1e-2}, f"min W {float(min(ws)):.3f}")


def _sym3(seed):
    rng = np.random.default_rng(seed)
    s = rng.integers(-2, 3, size=(4, 4, 4))
    return asarray(sum(np.transpose(s, p) for p in itertools.permutations(range(3))), EXACT)


def test_criterion_06_homogeneous_constants(verdict):
    checks = {"b = 1 from trace 24/5": b_trace(mpq(24, 5), 2) == 1}
    for name, m in (("abelian", abelian(2, S=_sym3(6))), ("filiform", filiform4(S=_sym3(7)))):
        d = homogeneous_diagnostics(m)
        rhs = -mpq(5, 6) * np.trace(d.A @ d.A) + 4 * d.b
        checks[f"divergence identity ({name})"] = d.div_ubar == rhs and d.div_identity == 0
    std = SymplecticForm.standard(2, EXACT)
    e1 = asarray([1, 0, 0, 0], EXACT)
    c1 = classify_ricci_endomorphism(np.outer(e1, e1 @ std.matrix), mpq(1, 5), std)
    A2, _, form2 = case2_input()
    c2 = classify_ricci_endomorphism(A2, 0, form2)
    A3 = zeros((4, 4), EXACT)
    A3[0, 0], A3[2, 2], A3[3, 1] = mpq(1), mpq(-1), mpq(6, 25)
    c3 = classify_ricci_endomorphism(A3, mpq(5, 6), std)
    checks["case 1"] = c1.label == "case1_rank1_nilpotent"
    checks["case 2"] = c2.label == "case2_A3_rank1"
    checks["case 3"] = c3.label == "case3_mixed"
    checks["pb = 1/5"] = c3.details["pb"] == mpq(1, 5)
    verdict(6, checks, f"pb = {c3.details['pb']}")


def test_criterion_07_symmetric_triple(verdict):
    start = time.perf_counter()
    checks = {}
    for n, dim in ((2, 8), (1, 3)):
        d = curvature_at(fubini_study(n), rational_point(2 * n, 90 + n), depth=1, mode=EXACT)
        t = build_triple(d)
        res = triple_residuals(t, d)
        for k in ("jacobi", "sigma_automorphism", "omega_sigma_invariance", "omega_a_invariance", "B_dot_R"):
            checks[f"n={n} {k} = 0"] = res[k] == 0
        checks[f"n={n} dim = {dim}"] = t.dim == dim
        checks[f"n={n} Killing nondegenerate"] = killing_certificate(t).nondegenerate
    elapsed = time.perf_counter() - start
    checks["runtime <= 10 s"] = elapsed <= 10
    verdict(7, checks, f"{elapsed:.2f} s")


def test_criterion_08_obstruction(verdict):
    start = time.perf_counter()
    rep = verify_section4()
    bad = verify_section4(1)
    elapsed = time.perf_counter() - start
    verdict(8, {
        "coefficient 2/3": rep.obstruction_coefficient == Fraction(2, 3),
        "no unknown symbols": rep.unknown_symbols == [],
        "d beta constants 1/2, 1/6": rep.d_beta_constants == {"omega": Fraction(1, 2), "e1^e4": Fraction(1, 6)},
        "certificate passes": rep.passed,
        "mutation fails": not bad.passed and bad.obstruction_coefficient != Fraction(2, 3),
        "runtime <= 5 s": elapsed <= 5,
    }, f"coefficient {rep.obstruction_coefficient}, mutated {bad.obstruction_coefficient}, {elapsed:.2f} s")


def test_criterion_09_adapted_frame(verdict):
    A, u, form = case2_input()
    fr = adapted_frame(A, u, form)
    verdict(9, {
        "Gram matrix": fr.gram == sympy.Matrix(GRAM),
        "u(e1)^2 = 25/6": fr.u_e1 ** 2 == sympy.Rational(25, 6),
    }, f"u(e1) = {fr.u_e1}")


def _cli(args, out):
    proc = subprocess.run([sys.executable, "-m", "symcurv", *args, "-o", str(out)], capture_output=True, text=True)
    return proc.returncode, out.read_bytes() if out.exists() else b""


def test_criterion_10_cli(tmp_path, verdict):
    runs = {
        "criterion 3 exact": (["diagnose", "--model", "fubini_study", "--n", "2", "--points", "5"], 0),
        "criterion 3 float": (["diagnose", "--model", "fubini_study", "--n", "3", "--points", "5",
                               "--mode", "float", "--tol", "1e-9"], 0),
        "criterion 4": (["diagnose", "--model", "random", "--seed", "2", "--n", "2"], 2),
        "criterion 8": (["coframe4"], 0),
        "criterion 8 mutated": (["coframe4", "--mutate-dbeta", "1"], 2),
    }
    checks = {}
    for label, (args, expected) in runs.items():
        code_a, a = _cli(args, tmp_path / f"{len(checks)}a.json")
        code_b, b = _cli(args, tmp_path / f"{len(checks)}b.json")
        checks[f"{label} exit {expected}"] = code_a == code_b == expected
        checks[f"{label} deterministic"] = a == b and len(a) > 0
    doc = json.loads(a)
    checks["mutated report fails"] = doc["summary"]["pass"] is False
    verdict(10, checks, f"{len(runs)} commands run twice")
