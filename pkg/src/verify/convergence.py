"""
Convergence Harness

A residual that behaves like C h^p shrinks by 2^p when h is halved. Passing
inputs of smooth checks are expected to show an order between one and two,
so the ratio residual(h) / residual(h / 2) must lie in [1.7, 4.5].
"""

from typing import Callable
import logging
import math

from ..constants import RESIDUAL_FLOOR
from ..errors import DegenerateError
from ..report import Residual
from .base import BaseCheck

logger = logging.getLogger(__name__)

CONVERGENCE_LOW = 1.7
CONVERGENCE_HIGH = 4.5


def convergence_ratio(residual: Callable[[float], float], h: float) -> float:
    """residual(h) / residual(h / 2)"""
    coarse = float(residual(h))
    fine = float(residual(h / 2))
    if not fine > RESIDUAL_FLOOR:
        raise DegenerateError(f"Residual at h={h / 2:g} is zero; no convergence order to measure")
    ratio = coarse / fine
    logger.debug(f"Residual {coarse:.3e} at h={h:g}, {fine:.3e} at h={h / 2:g}: ratio {ratio:.3f}")
    return ratio


def observed_order(ratio: float) -> float:
    return math.log2(ratio)


def richardson(coarse: float, fine: float, order: float = 2.0) -> float:
    """Extrapolated value from results at N and 2N samples of an order-p scheme"""
    factor = 2.0 ** order
    return (factor * fine - coarse) / (factor - 1.0)


def richardson_error(coarse: float, fine: float, order: float = 2.0) -> float:
    """Estimated error of the fine result, relative to its magnitude"""
    return abs(fine - richardson(coarse, fine, order)) / (abs(fine) + RESIDUAL_FLOOR)


def band_residual(ratio: float, low: float = CONVERGENCE_LOW, high: float = CONVERGENCE_HIGH) -> float:
    """|ln(ratio / sqrt(low high))|; at most ln(sqrt(high / low)) exactly inside the band"""
    if not ratio > 0:
        return float("inf")
    return abs(math.log(ratio / math.sqrt(low * high)))


def band_tolerance(low: float = CONVERGENCE_LOW, high: float = CONVERGENCE_HIGH) -> float:
    return math.log(math.sqrt(high / low))


class ConvergenceCheck(BaseCheck):
    """Two-grid ratio of a residual function inside [low, high]"""

    def __init__(self, low: float = CONVERGENCE_LOW, high: float = CONVERGENCE_HIGH, check_id: str = "convergence"):
        super().__init__(check_id=check_id, tolerance=band_tolerance(low, high))
        self.low = low
        self.high = high

    def execute(self, residual: Callable[[float], float], h: float) -> Residual:
        """
        Args:
            residual: Step -> maximum residual of the underlying check
            h: Coarse step

        Returns:
            Band residual, with the measured ratio as argmax location
        """
        ratio = convergence_ratio(residual, h)
        return Residual(value=band_residual(ratio, self.low, self.high), argmax={"h": h, "ratio": ratio}, samples=2)
