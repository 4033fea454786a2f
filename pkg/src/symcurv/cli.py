"""``symcurv`` command line: axioms, diagnose, homogeneous, triple, coframe4.

Exit status: 0 when every residual is within tolerance, 2 on a residual
failure, 1 on usage or model errors.  Reports are JSON with one schema for
every subcommand.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from .connection import (
    ChartModel, bianchi_residuals, check_model_invariants, curvature_at, relative_bianchi, symmetry_residuals,
)
from .jets import JetOrderError
from .models import BUILTINS, ModelError, builtin_model, load_model
from .ricci import DimensionError, frame_contraction_chain, ricci_type_report
from .scalars import DEFAULT_TOL, EXACT, FLOAT, MODES, ModeError, is_zero, to_json_scalar
from .symplectic import DegenerateFormError

EXIT_OK, EXIT_USAGE, EXIT_RESIDUAL = 0, 1, 2


class UsageError(Exception):
    pass


def _homogeneous():
    from . import homogeneous

    return homogeneous


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("model")
    src.add_argument("--model", help="built-in model name")
    src.add_argument("--model-file", help="JSON model file (chart or algebraic)")
    src.add_argument("--n", type=int, default=None, help="half dimension for built-in models")
    src.add_argument("--seed", type=int, default=0, help="seed for random models and sample points")
    src.add_argument("--degree", type=int, default=2, help="polynomial degree of random models")
    src.add_argument("--lam", default="1", help="scale of the Fubini-Study form")
    run = common.add_argument_group("run")
    run.add_argument("--points", type=int, default=5, help="number of sample points")
    run.add_argument("--tol", type=float, default=DEFAULT_TOL, help="float-mode tolerance")
    run.add_argument("--mode", choices=MODES, default=None, help="scalar mode (SYMCURV_MODE wins when set)")
    run.add_argument("--output", "-o", help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="symcurv", description="Curvature diagnostics for symplectic connections.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("axioms", parents=[common], help="model invariants and Bianchi identities")
    d = sub.add_parser("diagnose", parents=[common], help="Ricci-type report per point")
    d.add_argument("--depth", type=int, default=4, help="jet depth of the Ricci tensor (4 = every identity)")
    h = sub.add_parser("homogeneous", parents=[common], help="diagnostics of a left-invariant model")
    h.add_argument("--search", action="store_true", help="least-squares search for a Ricci-type connection")
    h.add_argument("--max-nfev", type=int, default=500)
    t = sub.add_parser("triple", parents=[common], help="symmetric symplectic triple from the curvature")
    t.add_argument("--curvature-sign", type=int, choices=(1, -1), default=1)
    c = sub.add_parser("coframe4", parents=[common], help="dimension-4 frame derivation")
    c.add_argument("--mutate-dbeta", default=None, help="replace the omega coefficient of d(beta)")
    return p


def resolve_mode(args) -> str:
    env = os.environ.get("SYMCURV_MODE")
    mode = env or args.mode or EXACT
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}")
    return mode


def sample_points(dim: int, count: int, seed: int, mode: str) -> list:
    """Uniform grid points k/64, |k| <= 32, in the cube [-1/2, 1/2]^dim."""
    rng = np.random.default_rng(seed)
    raw = rng.integers(-32, 33, size=(count, dim))
    if mode == EXACT:
        return [[mpq(int(k), 64) for k in row] for row in raw]
    return [[int(k) / 64 for k in row] for row in raw]


def _model_params(args) -> dict:
    params = {"seed": args.seed, "degree": args.degree}
    if args.n is not None:
        params["n"] = args.n
    try:
        params["lam"] = Fraction(args.lam)
    except ValueError as exc:
        raise UsageError(f"bad --lam {args.lam!r}") from exc
    return params


def load(args, mode: str):
    """Chart model, algebraic model, or ``None`` when no model was given."""
    if args.model and args.model_file:
        raise UsageError("give either --model or --model-file, not both")
    if args.model_file:
        m = load_model(args.model_file)
        return m.to_mode(mode) if hasattr(m, "to_mode") else m
    if not args.model:
        return None
    hom = _homogeneous()
    params = _model_params(args)
    if args.model in hom.ALGEBRAIC_BUILTINS:
        return hom.builtin_algebraic(args.model, mode=mode, **params)
    if args.model not in BUILTINS:
        raise UsageError(f"unknown model {args.model!r}; built-ins: {', '.join(BUILTINS + hom.ALGEBRAIC_BUILTINS)}")
    if args.model == "fubini_study":
        lam = params["lam"]
        params["lam"] = int(lam) if lam.denominator == 1 else lam
    return builtin_model(args.model, **params)


def _scalar_ok(v, tol) -> bool:
    return v is None or is_zero(v, tol)


def _worst(values) -> object:
    vals = [v for v in values if v is not None]
    return max(vals, key=lambda v: abs(float(v))) if vals else 0


class Runner:
    def __init__(self, args, mode: str):
        self.args = args
        self.mode = mode
        self.tol = args.tol
        self.points = []
        self.all_residuals = []
        self.passed = True

    def add(self, coords, residuals: dict, report, ok: bool):
        self.points.append({
            "coords": [to_json_scalar(c) for c in coords],
            "residuals": {k: None if v is None else to_json_scalar(v) for k, v in residuals.items()},
            "report": report,
        })
        self.all_residuals.extend(residuals.values())
        self.passed &= bool(ok)

    def document(self, model_name: str) -> dict:
        return {
            "command": self.args.command,
            "model": model_name,
            "mode": self.mode,
            "tol": self.tol if self.mode == FLOAT else None,
            "points": self.points,
            "summary": {"pass": self.passed, "worst_residual": to_json_scalar(_worst(self.all_residuals))},
        }


def _chart_points(model: ChartModel, args, mode):
    return sample_points(model.dim, args.points, args.seed, mode)


def cmd_axioms(args, mode, model, run: Runner) -> str:
    hom = _homogeneous()
    if isinstance(model, hom.AlgebraicModel):
        res = hom.validate_algebraic_model(model)
        data = hom.algebraic_curvature(model, run.tol) if hom.residuals_ok(res, run.tol) else None
        if data is not None:
            first, second = bianchi_residuals(data)
            res.update({"bianchi_first": first, "bianchi_second": second})
        run.add([], res, None, all(_scalar_ok(v, run.tol) for v in res.values()) and data is not None)
        return model.name
    for pt in _chart_points(model, args, mode):
        inv = check_model_invariants(model, pt, mode)
        data = curvature_at(model, pt, depth=1, mode=mode)
        first, second = relative_bianchi(data)
        res = dict(inv)
        res.update({"bianchi_first": first, "bianchi_second": second})
        res.update(symmetry_residuals(data))
        run.add(pt, res, None, all(_scalar_ok(v, run.tol) for v in res.values()))
    return model.name


def cmd_diagnose(args, mode, model, run: Runner) -> str:
    hom = _homogeneous()
    if isinstance(model, hom.AlgebraicModel):
        datas = [([], hom.algebraic_curvature(model, run.tol))]
    else:
        datas = [(pt, curvature_at(model, pt, depth=args.depth, mode=mode)) for pt in _chart_points(model, args, mode)]
    for pt, data in datas:
        rep = ricci_type_report(data, run.tol)
        res = {"W_norm": rep.W_norm, **rep.residuals}
        chain = frame_contraction_chain(data.nabla_r.components, data.omega)
        doc = rep.to_dict()
        doc["frame_chain"] = {k: to_json_scalar(chain[k]) for k in ("star", "substitution", "factor")}
        run.add(pt, res, doc, rep.passed())
    return datas and datas[0][1].model_name or getattr(model, "name", "")


def cmd_homogeneous(args, mode, model, run: Runner) -> str:
    hom = _homogeneous()
    if not isinstance(model, hom.AlgebraicModel):
        raise UsageError("homogeneous needs an algebraic model (--model abelian|filiform4 or an algebraic file)")
    diag = hom.homogeneous_diagnostics(model, run.tol)
    doc = diag.to_dict()
    res = dict(diag.residuals)
    res["div_identity"] = diag.div_identity
    if args.search:
        found = hom.search_ricci_type(model.c, model.omega.matrix, seed=args.seed, max_nfev=args.max_nfev)
        doc["search"] = found.to_dict()
    run.add([], res, doc, diag.passed())
    return model.name


def cmd_triple(args, mode, model, run: Runner) -> str:
    from . import triple as tr

    if not isinstance(model, ChartModel):
        raise UsageError("triple needs a chart model")
    for pt in _chart_points(model, args, mode):
        data = curvature_at(model, pt, depth=1, mode=mode)
        try:
            t = tr.build_triple(data, curvature_sign=args.curvature_sign)
        except tr.NotLocallySymmetricError as exc:
            run.add(pt, {"nabla_R": tr.local_symmetry_residual(data)}, {"error": str(exc)}, False)
            continue
        res = tr.relative_residuals(t, data)
        kc = tr.killing_certificate(t, run.tol)
        doc = {"triple": t.to_dict(), "killing": kc.to_dict()}
        run.add(pt, res, doc, all(_scalar_ok(v, run.tol) for v in res.values()))
    return model.name


def cmd_coframe4(args, mode, model, run: Runner) -> str:
    from .coframe import verify_section4

    rep = verify_section4(args.mutate_dbeta)
    coeff = rep.obstruction_coefficient
    res = {"obstruction_defect": None if coeff is None else coeff - Fraction(2, rep.n + 1)}
    run.add([], {k: (None if v is None else str(v)) for k, v in res.items()}, rep.to_dict(), rep.passed)
    run.all_residuals = [float(v) for v in res.values() if v is not None]
    return "coframe4"


COMMANDS = {
    "axioms": cmd_axioms,
    "diagnose": cmd_diagnose,
    "homogeneous": cmd_homogeneous,
    "triple": cmd_triple,
    "coframe4": cmd_coframe4,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        mode = resolve_mode(args)
        if args.points < 1:
            raise UsageError("--points must be at least 1")
        if mode == FLOAT and not args.tol > 0:
            raise UsageError("--tol must be positive in float mode")
        model = load(args, mode)
        if model is None and args.command != "coframe4":
            raise UsageError("a model is required (--model or --model-file)")
        runner = Runner(args, mode)
        name = COMMANDS[args.command](args, mode, model, runner)
        doc = runner.document(name)
    except (UsageError, ModelError, JetOrderError, DimensionError, DegenerateFormError, ModeError,
            OSError, ValueError) as exc:
        print(f"symcurv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if doc["summary"]["pass"] else EXIT_RESIDUAL


def main() -> None:
    sys.exit(run())
