"""
Implicit Surface Curvature Module

Gaussian curvature of a level set F(x, y, z) = 0 from the gradient and the
adjugate of the Hessian:

    K = grad(F)^T adj(H) grad(F) / |grad(F)|^4

Derivatives use five-point central stencils (fourth order), so polynomial
surfaces up to degree four per variable are differentiated exactly up to
rounding.
"""

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Sequence, Union
import json
import logging

import numpy as np

from ..constants import RESIDUAL_FLOOR
from ..errors import SampleError, SpecError
from ..expr import Expression
from ..report import Residual
from .base import BaseCheck

logger = logging.getLogger(__name__)

ImplicitFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

# Offsets and weights of the five-point stencils
_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_FIRST = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_SECOND = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

ON_SURFACE_TOLERANCE = 1e-9


def gradient_and_hessian(function: ImplicitFunction, points: np.ndarray, h: float):
    """
    Five-point finite-difference gradient (n, 3) and Hessian (n, 3, 3).

    Args:
        function: Vectorised F(x, y, z)
        points: (n, 3) evaluation points
        h: Stencil step
    """
    points = np.asarray(points, dtype=float)
    axes = np.eye(3)

    def at(shift: np.ndarray) -> np.ndarray:
        moved = points + h * shift
        return np.asarray(function(moved[:, 0], moved[:, 1], moved[:, 2]), dtype=float)

    gradient = np.zeros((len(points), 3))
    hessian = np.zeros((len(points), 3, 3))
    for i in range(3):
        values = [at(k * axes[i]) for k in _OFFSETS]
        gradient[:, i] = sum(w * v for w, v in zip(_FIRST, values)) / h
        hessian[:, i, i] = sum(w * v for w, v in zip(_SECOND, values)) / h ** 2
        for j in range(i + 1, 3):
            mixed = np.zeros(len(points))
            for a, wa in zip(_OFFSETS, _FIRST):
                if wa == 0:
                    continue
                for b, wb in zip(_OFFSETS, _FIRST):
                    if wb == 0:
                        continue
                    mixed += wa * wb * at(a * axes[i] + b * axes[j])
            hessian[:, i, j] = hessian[:, j, i] = mixed / h ** 2
    return gradient, hessian


def level_set_curvature(gradient: np.ndarray, hessian: np.ndarray) -> np.ndarray:
    """
    Gaussian curvature of the level set through each point.

    Raises:
        SampleError: gradient vanishes (singular point of the surface)
    """
    size = np.linalg.norm(gradient, axis=1)
    scale = np.max(np.abs(hessian), axis=(1, 2)) + 1.0
    bad = np.flatnonzero(size <= 1e-12 * scale)
    if bad.size:
        raise SampleError("Gradient vanishes; the point is singular on the surface", int(bad[0]))

    h1, h2, h3 = hessian[:, 0, :], hessian[:, 1, :], hessian[:, 2, :]
    adjugate = np.stack([np.cross(h2, h3), np.cross(h3, h1), np.cross(h1, h2)], axis=1)
    numerator = np.einsum("ni,nij,nj->n", gradient, adjugate, gradient)
    return numerator / size ** 4


def implicit_curvature(function: ImplicitFunction, points: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Gaussian curvature of F = 0 at each of the (n, 3) points"""
    gradient, hessian = gradient_and_hessian(function, points, h)
    return level_set_curvature(gradient, hessian)


def length_scale(points: np.ndarray) -> float:
    """Diagonal of the points' bounding box, at least 1"""
    points = np.asarray(points, dtype=float)
    return max(float(np.linalg.norm(np.ptp(points, axis=0))), 1.0)


class ImplicitDevelopabilityCheck(BaseCheck):
    """
    Largest |K| L^2 over points of an implicit surface.

    Points must lie on the surface: |F| / (|grad F| L) above
    on_surface_tolerance is reported as a sample error.
    """

    def __init__(self, tolerance: float = 1e-5, seed: Optional[int] = None,
                 on_surface_tolerance: float = ON_SURFACE_TOLERANCE, check_id: str = "implicit_curvature"):
        super().__init__(check_id=check_id, tolerance=tolerance, seed=seed)
        self.on_surface_tolerance = on_surface_tolerance

    def execute(self, function: ImplicitFunction, points: np.ndarray, h: float = 1e-3,
                scale: Optional[float] = None) -> Residual:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3:
            raise SampleError(f"Expected (n, 3) points, got shape {points.shape}")
        scale = length_scale(points) if scale is None else float(scale)

        gradient, hessian = gradient_and_hessian(function, points, h)
        values = np.asarray(function(points[:, 0], points[:, 1], points[:, 2]), dtype=float)
        distance = np.abs(values) / (np.linalg.norm(gradient, axis=1) * scale + RESIDUAL_FLOOR)
        off = np.flatnonzero(~(distance <= self.on_surface_tolerance))
        if off.size:
            raise SampleError(f"Point is not on the surface (scaled |F| = {distance[off[0]]:.3e})", int(off[0]))

        curvature = level_set_curvature(gradient, hessian)
        self.logger.debug(f"Curvature range [{curvature.min():.3e}, {curvature.max():.3e}] at scale {scale:.6g}")
        return Residual.from_array(np.abs(curvature) * scale ** 2,
                                   {"x": points[:, 0], "y": points[:, 1], "z": points[:, 2]})


@dataclass(frozen=True)
class ImplicitSpec:
    """F(x, y, z) with sample points on F = 0 and an optional length scale"""
    expression: Expression
    points: np.ndarray
    scale: Optional[float] = None

    def function(self, x, y, z):
        return self.expression(x=x, y=y, z=z)


def parse_implicit_spec(document: Union[str, Mapping[str, Any]]) -> ImplicitSpec:
    """
    Read {"expression": "...", "points": [[x, y, z], ...], "scale": L}.

    Raises:
        SpecError: malformed document, naming the key
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise SpecError(f"Invalid JSON: {e.msg} at line {e.lineno} column {e.colno}") from e
    if not isinstance(document, Mapping):
        raise SpecError("Implicit surface spec must be a JSON object")

    text = document.get("expression")
    if not isinstance(text, str):
        raise SpecError("Missing or non-string expression", "expression")
    expression = Expression.parse(text, variables=("x", "y", "z"))

    try:
        points = np.asarray(document.get("points"), dtype=float)
    except (TypeError, ValueError) as e:
        raise SpecError(f"Points must be numbers: {e}", "points") from e
    if points.ndim != 2 or points.shape[1] != 3 or len(points) == 0:
        raise SpecError("Points must be a non-empty list of [x, y, z] triples", "points")
    if not np.all(np.isfinite(points)):
        raise SpecError("Points must be finite", "points")

    scale = document.get("scale")
    if scale is not None:
        if isinstance(scale, bool) or not isinstance(scale, (int, float)) or not scale > 0:
            raise SpecError(f"Scale must be a positive number, got {scale!r}", "scale")
        scale = float(scale)
    return ImplicitSpec(expression=expression, points=points, scale=scale)


def sphere_function(x, y, z):
    return x ** 2 + y ** 2 + z ** 2 - 1.0


def sphere_points(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform points on the unit sphere"""
    points = rng.normal(size=(count, 3))
    return points / np.linalg.norm(points, axis=1)[:, None]


def plane_points(rng: np.random.Generator, count: int, normal: Sequence[float] = (1.0, 1.0, 1.0),
                 offset: float = 1.0) -> np.ndarray:
    """Points of the plane normal . p = offset"""
    normal = np.asarray(normal, dtype=float)
    points = rng.uniform(-1.0, 1.0, (count, 3))
    return points + ((offset - points @ normal) / (normal @ normal))[:, None] * normal
