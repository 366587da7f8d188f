"""Coplanarity of neighbouring rulings"""

from typing import Callable, Tuple

import numpy as np

from ..constants import RESIDUAL_FLOOR
from ..curve_model import AngleProfile, DirectrixCurve, Helix, interpolate_samples
from ..report import Residual
from ..tangent_dev import ruling_direction
from .base import BaseCheck

CurveFunction = Callable[[np.ndarray], np.ndarray]


def ruling_functions(curve: DirectrixCurve, profile: AngleProfile) -> Tuple[CurveFunction, CurveFunction]:
    """Base point and ruling direction of the tangent developable, interpolated in tau"""

    def base(tau):
        return interpolate_samples(curve.tau, curve.position, tau)

    def ruling(tau):
        zeta = interpolate_samples(profile.tau, profile.zeta, tau)
        theta = interpolate_samples(profile.tau, profile.theta, tau)
        return ruling_direction(zeta, theta)

    return base, ruling


def helix_ruling_functions(helix: Helix) -> Tuple[CurveFunction, CurveFunction]:
    """Closed-form base point and tangent ruling of a helix"""
    return helix.position, lambda tau: ruling_direction(*helix.angles(tau))


def coplanarity_residual(base: CurveFunction, ruling: CurveFunction, tau: np.ndarray, h: float) -> np.ndarray:
    """
    Sine of the angle between the chord V(tau) -> V(tau + h) and the plane
    of the rulings at tau and tau + h; zero for parallel rulings.
    """
    r1, r2 = ruling(tau), ruling(tau + h)
    chord = base(tau + h) - base(tau)
    normal = np.cross(r1, r2)
    normal_size = np.linalg.norm(normal, axis=-1)
    chord_size = np.linalg.norm(chord, axis=-1)
    triple = np.abs(np.sum(normal * chord, axis=-1))
    residual = triple / np.maximum(normal_size * chord_size, RESIDUAL_FLOOR)
    return np.where(normal_size == 0, 0.0, residual)


class RulingCoplanarityCheck(BaseCheck):
    """Neighbouring rulings of a developable meet or are parallel"""

    normalization = "sin(chord, ruling plane)"

    def __init__(self, tolerance: float = 1e-4, check_id: str = "coplanarity"):
        super().__init__(check_id=check_id, tolerance=tolerance)

    def execute(self, base: CurveFunction, ruling: CurveFunction, tau: np.ndarray, h: float) -> Residual:
        """
        Args:
            base: tau -> point on the base curve
            ruling: tau -> unit ruling direction
            tau: Parameters checked; tau + h must stay in range
            h: Parameter offset of the neighbouring ruling

        Returns:
            Largest normalised triple product
        """
        tau = np.asarray(tau, dtype=float)
        return Residual.from_array(coplanarity_residual(base, ruling, tau, h), {"tau": tau})
