"""
Developability Checks

One check per module, all sharing BaseCheck's run() wrapper.
"""

from .base import BaseCheck, CheckStatus
from .convergence import ConvergenceCheck, convergence_ratio, richardson
from .coplanarity import RulingCoplanarityCheck, helix_ruling_functions, ruling_functions
from .curvature import ParametricFlatnessCheck, sphere_point_function
from .homogeneity import HomogeneityCheck
from .implicit import ImplicitDevelopabilityCheck, implicit_curvature, parse_implicit_spec
from .isometry import IsometryTriangleCheck

__all__ = [
    "BaseCheck",
    "CheckStatus",
    "ConvergenceCheck",
    "HomogeneityCheck",
    "ImplicitDevelopabilityCheck",
    "IsometryTriangleCheck",
    "ParametricFlatnessCheck",
    "RulingCoplanarityCheck",
    "convergence_ratio",
    "helix_ruling_functions",
    "implicit_curvature",
    "parse_implicit_spec",
    "richardson",
    "ruling_functions",
    "sphere_point_function",
]
