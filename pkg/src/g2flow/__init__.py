"""Octonionic curve flows in R^7, Schroedinger maps into S^6 and the three-field NLS system."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BlowUpError,
    DegenerateRotationError,
    G2FlowError,
    InvalidInputError,
    NonUnitSpeedError,
    SingularDataError,
    VanishingCurvatureError,
)
from .octonion import Octonion, cross, inner, oct_mul, random_g2  # noqa: E402
from .curves import CurveState, circle, helix, line, perturbed_circle, random_curve  # noqa: E402
from .frame import build_g2_frame, complexify_frame, curve_to_fields, hasimoto_fields  # noqa: E402
from .flow import FlowConfig, SphereMapState, evolve, rhs_binormal, rhs_modified, rhs_schrodinger_s6  # noqa: E402
from .nlss import NlssConfig, NlssState, cross_validate, evolve_nlss, nlss_rhs, nlss_variant_rhs  # noqa: E402
from .surface import associative_plane_check, rotate_frame, second_fundamental_form  # noqa: E402

__all__ = [
    "__version__",
    "BlowUpError",
    "DegenerateRotationError",
    "G2FlowError",
    "InvalidInputError",
    "NonUnitSpeedError",
    "SingularDataError",
    "VanishingCurvatureError",
    "Octonion",
    "cross",
    "inner",
    "oct_mul",
    "random_g2",
    "CurveState",
    "circle",
    "helix",
    "line",
    "perturbed_circle",
    "random_curve",
    "build_g2_frame",
    "complexify_frame",
    "curve_to_fields",
    "hasimoto_fields",
    "FlowConfig",
    "SphereMapState",
    "evolve",
    "rhs_binormal",
    "rhs_modified",
    "rhs_schrodinger_s6",
    "NlssConfig",
    "NlssState",
    "cross_validate",
    "evolve_nlss",
    "nlss_rhs",
    "nlss_variant_rhs",
    "associative_plane_check",
    "rotate_frame",
    "second_fundamental_form",
]
