"""
Tangent Developable Module

Surface swept by the tangent lines of a directrix:

    x = t - s sin(theta) sin(zeta)
    y = u - s sin(theta) cos(zeta)
    z = v - s cos(theta)

s is the distance from the directrix point measured backward along the
tangent; s = 0 is the edge of regression.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple
import logging

import numpy as np

from .constants import EPS_SING
from .curve_model import AngleProfile, DirectrixCurve, Helix, interpolate_samples
from .errors import DegenerateError, GridMismatchError, ParameterRangeError

logger = logging.getLogger(__name__)

PointFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SurfacePoint:
    """Point of the surface with its (tau, s) provenance"""
    x: float
    y: float
    z: float
    tau: float
    s: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class SurfaceMesh:
    """Row-major (n_tau x n_s) grid of surface vertices"""
    tau: np.ndarray
    s: np.ndarray
    vertices: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.tau), len(self.s)

    @property
    def s_range(self) -> Tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])

    @property
    def vertex_count(self) -> int:
        return len(self.tau) * len(self.s)

    def flat_vertices(self) -> np.ndarray:
        return self.vertices.reshape(-1, 3)

    def provenance(self) -> np.ndarray:
        tau, s = np.meshgrid(self.tau, self.s, indexing="ij")
        return np.stack([tau.ravel(), s.ravel()], axis=1)

    def faces(self) -> np.ndarray:
        """Quads as 0-based vertex indices"""
        n_tau, n_s = self.shape
        i, j = np.meshgrid(np.arange(n_tau - 1), np.arange(n_s - 1), indexing="ij")
        a = (i * n_s + j).ravel()
        return np.stack([a, a + n_s, a + n_s + 1, a + 1], axis=1)


def ruling_direction(zeta, theta) -> np.ndarray:
    """Unit direction (sin theta sin zeta, sin theta cos zeta, cos theta)"""
    zeta = np.asarray(zeta, dtype=float)
    theta = np.asarray(theta, dtype=float)
    sin_theta = np.sin(theta)
    return np.stack([sin_theta * np.sin(zeta), sin_theta * np.cos(zeta), np.cos(theta)], axis=-1)


def _check_profile(curve: DirectrixCurve, profile: AngleProfile) -> None:
    if curve.samples != profile.samples or not np.array_equal(curve.tau, profile.tau):
        raise GridMismatchError("Curve and angle profile are sampled on different grids")


def _points(base: np.ndarray, zeta, theta, s) -> np.ndarray:
    return base - np.asarray(s, dtype=float)[..., None] * ruling_direction(zeta, theta)


def surface_function(curve: DirectrixCurve, profile: AngleProfile) -> PointFunction:
    """Vectorised (tau, s) -> (x, y, z) using linear interpolation between samples"""
    _check_profile(curve, profile)

    def point(tau, s):
        tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
        base = interpolate_samples(curve.tau, curve.position, tau)
        zeta = interpolate_samples(profile.tau, profile.zeta, tau)
        theta = interpolate_samples(profile.tau, profile.theta, tau)
        return _points(base, zeta, theta, s)

    return point


def tangent_point_function(helix: Helix) -> PointFunction:
    """Closed-form tangent developable of a helix, smooth in tau"""

    def point(tau, s):
        tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
        zeta, theta = helix.angles(tau)
        return _points(helix.position(tau), zeta, theta, s)

    return point


def surface_point(curve: DirectrixCurve, profile: AngleProfile, tau: float, s: float) -> SurfacePoint:
    """
    Evaluate the surface at one (tau, s).

    Args:
        curve: Sampled directrix
        profile: Angles on the same grid
        tau: Parameter inside the sampled range
        s: Distance along the ruling; negative values give the other sheet

    Returns:
        SurfacePoint with provenance
    """
    if not np.isfinite(s):
        raise ParameterRangeError(f"Ruling distance must be finite, got {s}")
    x, y, z = surface_function(curve, profile)(tau, s)
    return SurfacePoint(x=float(x), y=float(y), z=float(z), tau=float(tau), s=float(s))


def surface_grid(
    curve: DirectrixCurve,
    profile: AngleProfile,
    s_range: Tuple[float, float],
    n_tau: int,
    n_s: int,
    tau_range: Optional[Tuple[float, float]] = None,
) -> SurfaceMesh:
    """
    Tabulate the surface on a regular (tau, s) grid.

    Raises:
        ParameterRangeError: s_min <= 0, fewer than 2 rows or columns, or tau outside the curve
    """
    s_min, s_max = s_range
    if not s_min > 0:
        raise ParameterRangeError(f"Mesh s-range must start above the edge of regression, got s_min={s_min}")
    if not s_max > s_min:
        raise ParameterRangeError(f"Empty s-range [{s_min}, {s_max}]")
    if n_tau < 2 or n_s < 2:
        raise ParameterRangeError(f"Grid needs at least 2x2 vertices, got {n_tau}x{n_s}")

    tau_lo, tau_hi = tau_range if tau_range is not None else (curve.tau[0], curve.tau[-1])
    tau = np.linspace(tau_lo, tau_hi, n_tau)
    s = np.linspace(s_min, s_max, n_s)
    tau_grid, s_grid = np.meshgrid(tau, s, indexing="ij")
    vertices = surface_function(curve, profile)(tau_grid, s_grid)

    logger.debug(f"Surface grid {n_tau}x{n_s} on tau [{tau_lo:.6g}, {tau_hi:.6g}], s [{s_min}, {s_max}]")
    return SurfaceMesh(tau=tau, s=s, vertices=vertices)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def gaussian_curvature_estimate(
    surface: PointFunction,
    tau,
    s,
    h: float,
    min_s: Optional[float] = None,
):
    """
    Gaussian curvature K = (LN - M^2) / (EG - F^2) by central differences.

    Args:
        surface: Vectorised point function of (tau, s)
        tau: Parameter value(s)
        s: Ruling distance(s); must be >= min_s when given
        h: Difference step in both parameters
        min_s: Lower bound keeping samples off the edge of regression

    Returns:
        K at each (tau, s), float for scalar input

    Raises:
        DegenerateError: EG - F^2 below EPS_SING
    """
    tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
    if min_s is not None and np.any(s < min_s):
        raise ParameterRangeError(f"Curvature sample below s_min={min_s}")

    center = surface(tau, s)
    east, west = surface(tau + h, s), surface(tau - h, s)
    north, south = surface(tau, s + h), surface(tau, s - h)

    p_u = (east - west) / (2 * h)
    p_v = (north - south) / (2 * h)
    p_uu = (east - 2 * center + west) / h ** 2
    p_vv = (north - 2 * center + south) / h ** 2
    p_uv = (surface(tau + h, s + h) - surface(tau + h, s - h)
            - surface(tau - h, s + h) + surface(tau - h, s - h)) / (4 * h ** 2)

    e, f, g = _dot(p_u, p_u), _dot(p_u, p_v), _dot(p_v, p_v)
    det = e * g - f ** 2
    if np.any(det < EPS_SING):
        raise DegenerateError(
            "First fundamental form is degenerate (EG - F^2 ~ 0); sample is on the edge of regression")

    normal = np.cross(p_u, p_v)
    normal = normal / np.linalg.norm(normal, axis=-1)[..., None]
    big_l, big_m, big_n = _dot(p_uu, normal), _dot(p_uv, normal), _dot(p_vv, normal)
    curvature = (big_l * big_n - big_m ** 2) / det
    if curvature.ndim == 0:
        return float(curvature)
    return curvature


def finite_relations_residual(curve: DirectrixCurve, profile: AngleProfile, tau, s) -> np.ndarray:
    """
    Residuals of the three relations that hold once s is eliminated.

        x cos(zeta) - y sin(zeta) = t cos(zeta) - u sin(zeta)
        x sin(zeta) + y cos(zeta) = t sin(zeta) + u cos(zeta) - s sin(theta)
        (x sin(zeta) + y cos(zeta)) cos(theta) - z sin(theta)
            = (t sin(zeta) + u cos(zeta)) cos(theta) - v sin(theta)

    Returns:
        Array (..., 3) of absolute residuals
    """
    tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
    x, y, z = np.moveaxis(surface_function(curve, profile)(tau, s), -1, 0)
    t, u, v = np.moveaxis(interpolate_samples(curve.tau, curve.position, tau), -1, 0)
    zeta = interpolate_samples(profile.tau, profile.zeta, tau)
    theta = interpolate_samples(profile.tau, profile.theta, tau)
    cz, sz, ct, st = np.cos(zeta), np.sin(zeta), np.cos(theta), np.sin(theta)

    first = (x * cz - y * sz) - (t * cz - u * sz)
    second = (x * sz + y * cz) - (t * sz + u * cz - s * st)
    third = ((x * sz + y * cz) * ct - z * st) - ((t * sz + u * cz) * ct - v * st)
    return np.abs(np.stack([first, second, third], axis=-1))
