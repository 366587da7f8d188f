"""Degree-one homogeneity of a height function, the criterion for cones with apex at the origin"""

from typing import Callable, Sequence

import numpy as np

from ..constants import RESIDUAL_FLOOR
from ..report import Residual
from .base import BaseCheck

DEFAULT_SCALES = (0.5, 2.0, 3.0)


class HomogeneityCheck(BaseCheck):
    """f(k x, k y) = k f(x, y) for the configured scale factors k"""

    def __init__(self, tolerance: float = 1e-8, seed=None, check_id: str = "homogeneity"):
        super().__init__(check_id=check_id, tolerance=tolerance, seed=seed)

    def execute(
        self,
        function: Callable[[np.ndarray, np.ndarray], np.ndarray],
        points: np.ndarray,
        scales: Sequence[float] = DEFAULT_SCALES,
    ) -> Residual:
        points = np.asarray(points, dtype=float)
        x, y = points[:, 0], points[:, 1]
        base = np.asarray(function(x, y), dtype=float)

        worst = np.zeros(len(points))
        for factor in scales:
            scaled = np.asarray(function(factor * x, factor * y), dtype=float)
            expected = factor * base
            worst = np.maximum(worst, np.abs(scaled - expected) / (np.abs(expected) + RESIDUAL_FLOOR))
        return Residual.from_array(worst, {"x": x, "y": y})
