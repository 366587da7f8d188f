"""Elementary-triangle isometry between a surface and its development"""

from typing import Callable, Tuple

import numpy as np

from ..constants import RESIDUAL_FLOOR
from ..report import Residual
from .base import BaseCheck

PointFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _sides(points: Tuple[np.ndarray, np.ndarray, np.ndarray]) -> np.ndarray:
    a, b, c = points
    return np.stack([
        np.linalg.norm(b - a, axis=-1),
        np.linalg.norm(c - a, axis=-1),
        np.linalg.norm(c - b, axis=-1),
    ], axis=-1)


class IsometryTriangleCheck(BaseCheck):
    """
    Compares the triangle {P(tau, s), P(tau, s + h), P(tau + h, s)} on the
    surface with its image in the plane, side by side.
    """

    def __init__(self, tolerance: float = 1e-6, seed: int = 0, check_id: str = "isometry"):
        super().__init__(check_id=check_id, tolerance=tolerance, seed=seed)

    def execute(
        self,
        surface: PointFunction,
        development: PointFunction,
        tau_range: Tuple[float, float],
        s_range: Tuple[float, float],
        samples: int,
        h: float,
    ) -> Residual:
        """
        Args:
            surface: (tau, s) -> (x, y, z)
            development: (tau, s) -> (T, U)
            tau_range: Parameter range; samples keep a margin h
            s_range: Ruling-distance range; samples keep a margin h
            samples: Number of random triangles
            h: Triangle leg in parameter space

        Returns:
            Largest relative side-length mismatch
        """
        rng = np.random.default_rng(self.seed)
        tau = rng.uniform(tau_range[0], tau_range[1] - h, samples)
        s = rng.uniform(s_range[0], s_range[1] - h, samples)

        corners = ((tau, s), (tau, s + h), (tau + h, s))
        space = _sides(tuple(surface(*corner) for corner in corners))
        plane = _sides(tuple(development(*corner) for corner in corners))
        mismatch = np.abs(space - plane) / np.maximum(space, RESIDUAL_FLOOR)
        return Residual.from_array(np.max(mismatch, axis=1), {"tau": tau, "s": s})
