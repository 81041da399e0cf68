"""Finite-scale experiments on growth, isoperimetry and separation of graphs."""

__version__ = "0.1.0"

from .errors import CoarseLabError, InputError, NumericError, ResourceError
from .graph import BoundedDegreeGraph, VertexSet
from .generators import GrowthCurve, SpaceSpec, build, cayley_ball, dyadic_hyperbolic_ball, growth_function, horoball
from .profiles import ProfileCurve, ProfilePoint
from .isoperimetry import exact_isoperimetric_profile, family_isoperimetric_lowerbound
from .separation import CutResult, cut_exact, cut_spectral, separation_profile
from .regmap import FiniteGraphMap, RegularMapReport, compose, horospherical_embedding, verify_regular
from .pipeline import PipelineConfig, theorem_pipeline
from .analysis import classify_growth, compare_models, fit_power

__all__ = [
    "BoundedDegreeGraph",
    "CoarseLabError",
    "CutResult",
    "FiniteGraphMap",
    "GrowthCurve",
    "InputError",
    "NumericError",
    "PipelineConfig",
    "ProfileCurve",
    "ProfilePoint",
    "RegularMapReport",
    "ResourceError",
    "SpaceSpec",
    "VertexSet",
    "build",
    "classify_growth",
    "compare_models",
    "fit_power",
    "cayley_ball",
    "compose",
    "cut_exact",
    "cut_spectral",
    "dyadic_hyperbolic_ball",
    "exact_isoperimetric_profile",
    "family_isoperimetric_lowerbound",
    "growth_function",
    "horoball",
    "horospherical_embedding",
    "separation_profile",
    "theorem_pipeline",
    "verify_regular",
]
