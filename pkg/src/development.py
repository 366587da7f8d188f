"""
Development Module

Isometric unfolding of a tangent developable onto the plane.

    d(omega) = sqrt(d(zeta)^2 sin(theta)^2 + d(theta)^2)
    pd = integral dt sin(omega) / (sin(zeta) sin(theta))
    qd = integral dt cos(omega) / (sin(zeta) sin(theta))
    T  = pd - s sin(omega)
    U  = qd - s cos(omega)

The development is fixed up to a rigid motion by omega[0] = 0 and
(pd, qd)[0] = (0, 0).
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple
import logging

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .constants import EPS_SING
from .curve_model import AngleProfile, DirectrixCurve, interpolate_samples
from .errors import GridMismatchError, ParameterRangeError, SingularityError
from .tangent_dev import SurfaceMesh, surface_grid

logger = logging.getLogger(__name__)

FlatFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DevelopedDirectrix:
    """Planar image of the directrix"""
    tau: np.ndarray
    pd: np.ndarray
    qd: np.ndarray
    omega: np.ndarray
    sigma: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.stack([self.pd, self.qd], axis=1)

    @property
    def developed_length(self) -> float:
        """Length of the developed polyline"""
        return float(np.sum(np.hypot(np.diff(self.pd), np.diff(self.qd))))


@dataclass(frozen=True)
class DevelopmentMap:
    """Grid vertices paired with their planar images"""
    mesh: SurfaceMesh
    flat: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.mesh.shape

    def table(self) -> Dict[str, np.ndarray]:
        """Columns tau, s, x, y, z, T, U, one row per vertex"""
        provenance = self.mesh.provenance()
        vertices = self.mesh.flat_vertices()
        flat = self.flat.reshape(-1, 2)
        return {
            "tau": provenance[:, 0],
            "s": provenance[:, 1],
            "x": vertices[:, 0],
            "y": vertices[:, 1],
            "z": vertices[:, 2],
            "T": flat[:, 0],
            "U": flat[:, 1],
        }


def _monotone(values: np.ndarray) -> bool:
    steps = np.diff(values)
    return bool(np.all(steps >= 0) or np.all(steps <= 0))


def _closed_form_omega(profile: AngleProfile) -> Optional[np.ndarray]:
    """
    omega without quadrature when one angle is constant and the other monotone.

    theta constant gives omega = sin(theta) |zeta - zeta0|, zeta constant gives
    omega = |theta - theta0|; both constant gives exact zeros.
    """
    zeta, theta = profile.zeta, profile.theta
    if np.all(theta == theta[0]) and _monotone(zeta):
        return np.sin(theta[0]) * np.abs(zeta - zeta[0])
    if np.all(zeta == zeta[0]) and _monotone(theta):
        return np.abs(theta - theta[0])
    return None


def omega_profile(profile: AngleProfile) -> AngleProfile:
    """
    Fill in the accumulated development angle.

    Args:
        profile: zeta and theta on a common grid

    Returns:
        Copy of the profile with omega, omega[0] = 0 and non-decreasing
    """
    omega = _closed_form_omega(profile)
    if omega is None:
        d_zeta = np.gradient(profile.zeta, profile.tau, edge_order=2)
        d_theta = np.gradient(profile.theta, profile.tau, edge_order=2)
        rate = np.sqrt(d_zeta ** 2 * np.sin(profile.theta) ** 2 + d_theta ** 2)
        omega = cumulative_trapezoid(rate, profile.tau, initial=0.0)
    logger.debug(f"Development angle spans {omega[-1]:.6g} rad over {profile.samples} samples")
    return profile.with_omega(omega)


def arc_element(curve: DirectrixCurve, profile: AngleProfile) -> np.ndarray:
    """
    dt / (sin(zeta) sin(theta)) per unit tau.

    Equals the curve speed, with negative sign where the angle fold reversed
    the differential.
    """
    denominator = np.sin(profile.zeta) * np.sin(profile.theta)
    bad = np.flatnonzero(np.abs(denominator) < EPS_SING)
    if bad.size:
        raise SingularityError("sin(zeta) sin(theta) vanishes; developed coordinates unbounded", int(bad[0]))
    return curve.differential[:, 0] / denominator


def plane_directrix(curve: DirectrixCurve, profile: AngleProfile) -> DevelopedDirectrix:
    """
    Developed directrix (pd, qd) by cumulative trapezoid from the origin.

    Args:
        curve: Sampled directrix
        profile: Angles with omega filled in

    Returns:
        DevelopedDirectrix sharing the curve's arc length
    """
    if not profile.has_omega:
        profile = omega_profile(profile)
    if curve.samples != profile.samples or not np.array_equal(curve.tau, profile.tau):
        raise GridMismatchError("Curve and angle profile are sampled on different grids")

    element = arc_element(curve, profile)
    planar = _planar_image(curve, profile)
    if planar is not None:
        pd, qd = planar
    else:
        pd = cumulative_trapezoid(element * np.sin(profile.omega), curve.tau, initial=0.0)
        qd = cumulative_trapezoid(element * np.cos(profile.omega), curve.tau, initial=0.0)
    return DevelopedDirectrix(tau=curve.tau, pd=pd, qd=qd, omega=profile.omega, sigma=curve.sigma)


def _planar_image(curve: DirectrixCurve, profile: AngleProfile) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Exact development of a directrix lying in a plane v = const.

    With theta = pi/2 and omega = +-(zeta - zeta0) the integrals for pd, qd
    reduce to a rotation (or reflection) of (t - t0, u - u0) by zeta0.
    """
    zeta = profile.zeta
    if not np.all(curve.differential[:, 2] == 0.0) or not _monotone(zeta):
        return None
    sign = 1.0 if zeta[-1] >= zeta[0] else -1.0
    if not np.array_equal(profile.omega, sign * (zeta - zeta[0])):
        return None
    dt = curve.t - curve.t[0]
    du = curve.u - curve.u[0]
    cos0, sin0 = np.cos(zeta[0]), np.sin(zeta[0])
    logger.debug("Planar directrix: development is a rigid motion of the curve")
    return sign * (cos0 * dt - sin0 * du), sin0 * dt + cos0 * du


def development_function(dev: DevelopedDirectrix) -> FlatFunction:
    """Vectorised (tau, s) -> (T, U) with linear interpolation of pd, qd, omega"""

    def flat(tau, s):
        tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
        pd = interpolate_samples(dev.tau, dev.pd, tau)
        qd = interpolate_samples(dev.tau, dev.qd, tau)
        omega = interpolate_samples(dev.tau, dev.omega, tau)
        return np.stack([pd - s * np.sin(omega), qd - s * np.cos(omega)], axis=-1)

    return flat


def develop_point(dev: DevelopedDirectrix, tau: float, s: float) -> Tuple[float, float]:
    """Planar image (T, U) of the surface point at (tau, s)"""
    if not np.isfinite(s):
        raise ParameterRangeError(f"Ruling distance must be finite, got {s}")
    big_t, big_u = development_function(dev)(tau, s)
    return float(big_t), float(big_u)


def developed_curvature(dev: DevelopedDirectrix) -> np.ndarray:
    """Curvature d(omega)/d(sigma) of the developed directrix per sample"""
    if len(dev.tau) < 3:
        raise ParameterRangeError("Developed curvature needs at least 3 samples")
    return np.gradient(dev.omega, dev.sigma, edge_order=2)


def radius_of_curvature(dev: DevelopedDirectrix) -> np.ndarray:
    """d(sigma)/d(omega); infinite where the directrix is locally straight"""
    curvature = developed_curvature(dev)
    with np.errstate(divide="ignore"):
        return np.where(curvature == 0, np.inf, 1.0 / curvature)


def fit_circle(points: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """
    Algebraic least-squares circle through planar points.

    Returns:
        (center, radius, max radial deviation)
    """
    x, y = points[:, 0], points[:, 1]
    design = np.stack([x, y, np.ones_like(x)], axis=1)
    (a, b, c), *_ = np.linalg.lstsq(design, x ** 2 + y ** 2, rcond=None)
    center = np.array([a / 2, b / 2])
    radius = float(np.sqrt(c + center @ center))
    deviation = float(np.max(np.abs(np.hypot(x - center[0], y - center[1]) - radius)))
    return center, radius, deviation


def development_grid(
    curve: DirectrixCurve,
    profile: AngleProfile,
    dev: DevelopedDirectrix,
    s_range: Tuple[float, float],
    n_tau: int,
    n_s: int,
    tau_range: Optional[Tuple[float, float]] = None,
) -> DevelopmentMap:
    """Surface grid and its planar image on the same (tau, s) vertices"""
    mesh = surface_grid(curve, profile, s_range, n_tau, n_s, tau_range=tau_range)
    tau, s = np.meshgrid(mesh.tau, mesh.s, indexing="ij")
    flat = development_function(dev)(tau, s)
    return DevelopmentMap(mesh=mesh, flat=flat)


def develop(curve: DirectrixCurve, profile: AngleProfile) -> Tuple[AngleProfile, DevelopedDirectrix]:
    """omega_profile followed by plane_directrix"""
    profile = omega_profile(profile)
    dev = plane_directrix(curve, profile)
    logger.info(
        f"Developed directrix: length {abs(curve.length):.6g}, developed {dev.developed_length:.6g}, "
        f"omega span {dev.omega[-1]:.6g}"
    )
    return profile, dev
