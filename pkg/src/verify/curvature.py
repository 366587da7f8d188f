"""Flatness of parametric surfaces: |K| L^2 on a sample grid"""

from typing import Optional

import numpy as np

from ..report import Residual
from ..tangent_dev import PointFunction, gaussian_curvature_estimate
from .base import BaseCheck


def sphere_point_function(radius: float = 1.0) -> PointFunction:
    """Sphere by longitude tau and latitude s; curvature 1 / radius^2"""

    def point(tau, s):
        tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
        return radius * np.stack([np.cos(tau) * np.cos(s), np.sin(tau) * np.cos(s), np.sin(s)], axis=-1)

    return point


class ParametricFlatnessCheck(BaseCheck):
    """Gaussian curvature of a parametric surface, scaled by a length squared"""

    def __init__(self, tolerance: float = 1e-6, seed: Optional[int] = None, check_id: str = "curvature"):
        super().__init__(check_id=check_id, tolerance=tolerance, seed=seed)

    def execute(
        self,
        surface: PointFunction,
        tau: np.ndarray,
        s: np.ndarray,
        h: float = 1e-3,
        scale: float = 1.0,
        min_s: Optional[float] = None,
    ) -> Residual:
        """
        Args:
            surface: (tau, s) -> (x, y, z)
            tau: Sample parameters, broadcast against s
            s: Sample ruling distances
            h: Difference step
            scale: Length scale L
            min_s: Lower bound on s keeping samples off the edge of regression
        """
        tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
        curvature = gaussian_curvature_estimate(surface, tau, s, h, min_s=min_s)
        return Residual.from_array(np.abs(curvature) * scale ** 2, {"tau": tau, "s": s})
