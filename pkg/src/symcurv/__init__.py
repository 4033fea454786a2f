"""Curvature of symplectic connections: jets, Ricci-type diagnostics,
homogeneous models, symmetric triples and the dimension-4 frame calculus."""
from .scalars import DEFAULT_TOL, EXACT, FLOAT, ModeError, default_mode
from .jets import Jet, JetOrderError
from .tensors import Tensor, VarianceError
from .symplectic import DegenerateFormError, SymplecticForm
from .connection import ChartModel, CurvatureData, curvature_at
from .models import ModelError, builtin_model, load_model
from .ricci import DimensionError, RicciTypeReport, decompose, ricci_type_report
from .homogeneous import AlgebraicModel, algebraic_model, classify_ricci_endomorphism, homogeneous_diagnostics
from .triple import NotLocallySymmetricError, SymmetricTriple, build_triple, killing_certificate
from .coframe import adapted_frame, verify_section4

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "EXACT", "FLOAT", "ModeError", "default_mode",
    "Jet", "JetOrderError", "Tensor", "VarianceError",
    "DegenerateFormError", "SymplecticForm",
    "ChartModel", "CurvatureData", "curvature_at",
    "ModelError", "builtin_model", "load_model",
    "DimensionError", "RicciTypeReport", "decompose", "ricci_type_report",
    "AlgebraicModel", "algebraic_model", "classify_ricci_endomorphism", "homogeneous_diagnostics",
    "NotLocallySymmetricError", "SymmetricTriple", "build_triple", "killing_certificate",
    "adapted_frame", "verify_section4",
]
