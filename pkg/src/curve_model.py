"""
Curve Model Module

The directrix curve (t, u, v), its angle profile (zeta, theta, omega) and the
conversions between the two forms:

    tan(zeta) = dt/du
    cos(theta) = dv / |(dt, du, dv)|
    u = integral dt / tan(zeta)
    v = integral dt / (sin(zeta) tan(theta))

Any regular parametrisation tau is accepted; t is just the first coordinate.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple, Union
import json
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from scipy.integrate import cumulative_trapezoid

from .constants import EPS_SING, MAX_SAMPLES, MIN_CURVE_SAMPLES
from .errors import (
    ExpressionError,
    ParameterRangeError,
    RegularityError,
    SingularityError,
    SpecError,
)
from .expr import Expression

logger = logging.getLogger(__name__)


class CurveFamily(str, Enum):
    """Supported ways of describing a directrix"""
    HELIX = "helix"
    EXPRESSIONS = "expressions"
    SAMPLED = "sampled"
    ANGLES = "angles"


# Variable each family's expressions are written in
FAMILY_VARIABLE = {
    CurveFamily.EXPRESSIONS: "tau",
    CurveFamily.ANGLES: "t",
}

FAMILY_EXPRESSIONS = {
    CurveFamily.EXPRESSIONS: ("t", "u", "v"),
    CurveFamily.ANGLES: ("zeta", "theta"),
}


# ============================================================
# Spec documents
# ============================================================

def spec_error_from_validation(exc: ValidationError) -> SpecError:
    """Turn the first pydantic error into a SpecError naming its key"""
    first = exc.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or None
    return SpecError(first["msg"], key)


def read_spec_document(text: str) -> Dict[str, Any]:
    """Decode a JSON spec document into a dict"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"Malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise SpecError("Spec document must be a JSON object")
    return document


class CurveSpecDocument(BaseModel):
    """Schema of a curve-spec file"""
    model_config = ConfigDict(extra="forbid")

    family: CurveFamily
    params: Dict[str, Any] = Field(default_factory=dict)
    range: Tuple[float, float]
    samples: Optional[int] = Field(default=None, ge=MIN_CURVE_SAMPLES, le=MAX_SAMPLES)

    @field_validator("range")
    @classmethod
    def _ordered_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = value
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("range bounds must be finite")
        if not lo < hi:
            raise ValueError(f"range must satisfy lo < hi, got [{lo}, {hi}]")
        return value


@dataclass(frozen=True)
class CurveSpec:
    """Validated curve description with its expressions parsed"""
    family: CurveFamily
    params: Mapping[str, Any]
    tau_range: Tuple[float, float]
    samples: int
    expressions: Mapping[str, Expression] = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.tau_range[0], self.tau_range[1], self.samples)


def _positive_number(params: Mapping[str, Any], key: str, default: float) -> float:
    value = params.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise SpecError("must be a finite number", f"params.{key}")
    if value <= 0:
        raise SpecError("must be positive", f"params.{key}")
    return float(value)


def _parse_family_expressions(family: CurveFamily, params: Mapping[str, Any]) -> Dict[str, Expression]:
    names = FAMILY_EXPRESSIONS[family]
    variable = FAMILY_VARIABLE[family]
    extra = sorted(set(params) - set(names))
    if extra:
        raise SpecError(f"unexpected parameter for family '{family.value}'", f"params.{extra[0]}")

    expressions = {}
    for name in names:
        key = f"params.{name}"
        if name not in params:
            raise SpecError(f"family '{family.value}' requires expressions {', '.join(names)}", key)
        text = params[name]
        if not isinstance(text, str):
            raise SpecError("expression must be a string", key)
        try:
            expressions[name] = Expression.parse(text, variables=[variable])
        except ExpressionError as e:
            raise SpecError(str(e), key) from e
    return expressions


def parse_curve_spec(document: Union[str, Mapping[str, Any]]) -> CurveSpec:
    """
    Validate a curve-spec document.

    Args:
        document: JSON text or an already-decoded mapping

    Returns:
        CurveSpec with expressions parsed

    Raises:
        SpecError: naming the offending key
    """
    raw = read_spec_document(document) if isinstance(document, str) else dict(document)
    try:
        doc = CurveSpecDocument.model_validate(raw)
    except ValidationError as e:
        raise spec_error_from_validation(e) from e

    params = dict(doc.params)
    expressions: Dict[str, Expression] = {}
    samples = doc.samples

    if doc.family is CurveFamily.HELIX:
        extra = sorted(set(params) - {"radius", "pitch"})
        if extra:
            raise SpecError("unexpected parameter for family 'helix'", f"params.{extra[0]}")
        params["radius"] = _positive_number(params, "radius", 1.0)
        pitch = params.get("pitch", 1.0)
        if isinstance(pitch, bool) or not isinstance(pitch, (int, float)) or not np.isfinite(pitch):
            raise SpecError("must be a finite number", "params.pitch")
        params["pitch"] = float(pitch)

    elif doc.family is CurveFamily.SAMPLED:
        points = params.get("points")
        try:
            array = np.asarray(points, dtype=float)
        except (TypeError, ValueError) as e:
            raise SpecError("points must be a list of [t, u, v] triples", "params.points") from e
        if array.ndim != 2 or array.shape[1] != 3:
            raise SpecError("points must be a list of [t, u, v] triples", "params.points")
        if not np.all(np.isfinite(array)):
            raise SpecError("points must be finite", "params.points")
        if samples is None:
            samples = len(array)
        if len(array) != samples:
            raise SpecError(f"expected {samples} points, got {len(array)}", "params.points")
        if samples < MIN_CURVE_SAMPLES:
            raise SpecError(f"need at least {MIN_CURVE_SAMPLES} points", "params.points")
        params = {"points": array}

    else:
        expressions = _parse_family_expressions(doc.family, params)

    if samples is None:
        raise SpecError(f"required for family '{doc.family.value}'", "samples")

    logger.debug(f"Parsed {doc.family.value} curve spec with {samples} samples on {doc.range}")
    return CurveSpec(
        family=doc.family,
        params=params,
        tau_range=(float(doc.range[0]), float(doc.range[1])),
        samples=samples,
        expressions=expressions,
    )


# ============================================================
# Curve and profile types
# ============================================================

def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DirectrixCurve:
    """Sampled space curve with per-unit-tau differentials and arc length"""
    tau: np.ndarray
    position: np.ndarray
    differential: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        for name in ("tau", "position", "differential", "sigma"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def samples(self) -> int:
        return len(self.tau)

    @property
    def t(self) -> np.ndarray:
        return self.position[:, 0]

    @property
    def u(self) -> np.ndarray:
        return self.position[:, 1]

    @property
    def v(self) -> np.ndarray:
        return self.position[:, 2]

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.differential, axis=1)

    @property
    def length(self) -> float:
        return float(self.sigma[-1])


@dataclass(frozen=True)
class AngleProfile:
    """Per-sample zeta, theta and (once developed) omega"""
    tau: np.ndarray
    zeta: np.ndarray
    theta: np.ndarray
    omega: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("tau", "zeta", "theta", "omega"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value))
        if not (len(self.tau) == len(self.zeta) == len(self.theta)):
            raise ValueError("tau, zeta and theta must have equal lengths")

    @property
    def samples(self) -> int:
        return len(self.tau)

    @property
    def has_omega(self) -> bool:
        return self.omega is not None

    def with_omega(self, omega: np.ndarray) -> "AngleProfile":
        return replace(self, omega=omega)


@dataclass(frozen=True)
class Helix:
    """(R cos tau, R sin tau, c tau) with closed-form derivatives"""
    radius: float = 1.0
    pitch: float = 1.0

    @classmethod
    def from_spec(cls, spec: CurveSpec) -> "Helix":
        return cls(radius=spec.params["radius"], pitch=spec.params["pitch"])

    def position(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.stack([self.radius * np.cos(tau), self.radius * np.sin(tau), self.pitch * tau], axis=-1)

    def velocity(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.stack(
            [-self.radius * np.sin(tau), self.radius * np.cos(tau), np.full_like(tau, self.pitch)], axis=-1
        )

    @property
    def speed(self) -> float:
        return float(np.hypot(self.radius, self.pitch))

    @property
    def curvature(self) -> float:
        return self.radius / (self.radius ** 2 + self.pitch ** 2)

    def angles(self, tau) -> Tuple[np.ndarray, np.ndarray]:
        return fold_angles(self.velocity(tau))


# ============================================================
# Conversions
# ============================================================

def fold_angles(differential: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    zeta and theta of a differential triple, with zeta in [0, pi].

    Where dt < 0 the whole triple is reversed first, so the direction
    (sin zeta sin theta, cos zeta sin theta, cos theta) stays on the tangent line.
    """
    d = np.asarray(differential, dtype=float)
    d = np.where(d[..., :1] < 0, -d, d)
    norm = np.linalg.norm(d, axis=-1)
    zeta = np.arctan2(d[..., 0], d[..., 1])
    theta = np.arccos(np.clip(d[..., 2] / norm, -1.0, 1.0))
    return zeta, theta


def _check_regular(differential: np.ndarray) -> None:
    speed = np.linalg.norm(differential, axis=1)
    bad = np.flatnonzero(~(speed > 0))
    if bad.size:
        raise RegularityError("Curve differential vanishes", int(bad[0]))


def _arc_length(tau: np.ndarray, differential: np.ndarray) -> np.ndarray:
    return cumulative_trapezoid(np.linalg.norm(differential, axis=1), tau, initial=0.0)


def sample_curve(spec: CurveSpec) -> DirectrixCurve:
    """
    Sample a helix, expression or point-list curve.

    Helix differentials are closed form; the other families use central
    differences with second-order one-sided stencils at the ends.
    """
    tau = spec.grid

    if spec.family is CurveFamily.HELIX:
        helix = Helix.from_spec(spec)
        position = helix.position(tau)
        differential = helix.velocity(tau)
    elif spec.family is CurveFamily.EXPRESSIONS:
        columns = [np.broadcast_to(spec.expressions[name](tau=tau), tau.shape) for name in ("t", "u", "v")]
        position = np.stack(columns, axis=1)
        differential = np.gradient(position, tau, axis=0, edge_order=2)
    elif spec.family is CurveFamily.SAMPLED:
        position = np.asarray(spec.params["points"], dtype=float)
        differential = np.gradient(position, tau, axis=0, edge_order=2)
    else:
        raise SpecError("angle-family specs have no positions; use curve_from_angles", "family")

    _check_regular(differential)
    curve = DirectrixCurve(tau=tau, position=position, differential=differential,
                           sigma=_arc_length(tau, differential))
    logger.debug(f"Sampled {spec.family.value} curve: {curve.samples} samples, length {curve.length:.6g}")
    return curve


def angles_from_curve(curve: DirectrixCurve) -> AngleProfile:
    """
    Angle profile of a regular curve; omega is left unset.

    Raises:
        SingularityError: sin(zeta) or sin(theta) below EPS_SING at some sample
    """
    _check_regular(curve.differential)
    zeta, theta = fold_angles(curve.differential)

    bad = np.flatnonzero(np.abs(np.sin(zeta)) < EPS_SING)
    if bad.size:
        raise SingularityError("sin(zeta) vanishes: ruling projection degenerate (dt = 0)", int(bad[0]))
    bad = np.flatnonzero(np.abs(np.sin(theta)) < EPS_SING)
    if bad.size:
        raise SingularityError("sin(theta) vanishes: tangent is vertical", int(bad[0]))

    # The fold must apply everywhere or nowhere, or the rulings swap sheets mid-curve
    reversed_ = curve.differential[:, 0] < 0
    flips = np.flatnonzero(reversed_ != reversed_[0])
    if flips.size:
        index = int(flips[0])
        raise SingularityError(
            f"dt changes sign between tau={curve.tau[index - 1]:.17g} and tau={curve.tau[index]:.17g}; "
            f"split the range there",
            index,
        )

    return AngleProfile(tau=curve.tau, zeta=zeta, theta=theta)


def curve_from_angles(profile: AngleProfile) -> DirectrixCurve:
    """
    Integrate an angle profile over its abscissa grid.

    u and v start at 0; the abscissa itself is the profile's tau.
    """
    t = profile.tau
    sin_zeta = np.sin(profile.zeta)
    denominator = sin_zeta * np.sin(profile.theta)

    bad = np.flatnonzero(np.abs(sin_zeta) < EPS_SING)
    if bad.size:
        raise SingularityError("Integrand 1/tan(zeta) unbounded", int(bad[0]))
    bad = np.flatnonzero(np.abs(denominator) < EPS_SING)
    if bad.size:
        raise SingularityError("Integrand 1/(sin(zeta) tan(theta)) unbounded", int(bad[0]))

    du = np.cos(profile.zeta) / sin_zeta
    dv = np.cos(profile.theta) / denominator
    differential = np.stack([np.ones_like(t), du, dv], axis=1)
    position = np.stack(
        [t, cumulative_trapezoid(du, t, initial=0.0), cumulative_trapezoid(dv, t, initial=0.0)], axis=1
    )
    return DirectrixCurve(tau=t, position=position, differential=differential,
                          sigma=_arc_length(t, differential))


def sample_angles(spec: CurveSpec) -> AngleProfile:
    """Evaluate an angles-family spec on its grid"""
    if spec.family is not CurveFamily.ANGLES:
        raise SpecError(f"family '{spec.family.value}' is not an angle profile", "family")
    t = spec.grid
    zeta = np.broadcast_to(spec.expressions["zeta"](t=t), t.shape)
    theta = np.broadcast_to(spec.expressions["theta"](t=t), t.shape)
    outside = np.flatnonzero((zeta <= 0) | (zeta >= np.pi) | (theta <= 0) | (theta >= np.pi))
    if outside.size:
        raise SingularityError("Angles must lie in the open interval (0, pi)", int(outside[0]))
    return AngleProfile(tau=t, zeta=zeta, theta=theta)


def curve_from_spec(spec: CurveSpec) -> Tuple[DirectrixCurve, AngleProfile]:
    """Curve and angle profile for any family"""
    if spec.family is CurveFamily.ANGLES:
        profile = sample_angles(spec)
        return curve_from_angles(profile), profile
    curve = sample_curve(spec)
    return curve, angles_from_curve(curve)


def interpolate_samples(grid: np.ndarray, values: np.ndarray, tau) -> np.ndarray:
    """
    Linear interpolation of per-sample values (1-D or N x k) at tau.

    Raises:
        ParameterRangeError: tau outside [grid[0], grid[-1]]
    """
    tau = np.asarray(tau, dtype=float)
    lo, hi = grid[0], grid[-1]
    if np.any(tau < lo) or np.any(tau > hi) or not np.all(np.isfinite(tau)):
        raise ParameterRangeError(f"Parameter outside sampled range [{lo:.17g}, {hi:.17g}]")
    if values.ndim == 1:
        return np.interp(tau, grid, values)
    return np.stack([np.interp(tau, grid, values[:, k]) for k in range(values.shape[1])], axis=-1)


def random_angle_profile(rng: np.random.Generator, samples: int) -> AngleProfile:
    """
    Seeded smooth angle profile on t in [0, 1].

    zeta increases strictly and both angles stay well inside (0, pi), so the
    development angle grows at every sample.
    """
    t = np.linspace(0.0, 1.0, samples)
    zeta0, slope = rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0)
    wobble, freq, phase = rng.uniform(0.0, 0.1), rng.uniform(1.0, 3.0), rng.uniform(0.0, 2 * np.pi)
    theta0, swing = rng.uniform(1.0, 2.0), rng.uniform(0.0, 0.3)
    theta_freq, theta_phase = rng.uniform(1.0, 3.0), rng.uniform(0.0, 2 * np.pi)
    zeta = zeta0 + slope * t + wobble * np.sin(freq * t + phase)
    theta = theta0 + swing * np.sin(theta_freq * t + theta_phase)
    return AngleProfile(tau=t, zeta=zeta, theta=theta)


def profile_table(profile: AngleProfile) -> Dict[str, np.ndarray]:
    """Column table tau, zeta, theta[, omega] for CSV export"""
    table = {"tau": profile.tau, "zeta": profile.zeta, "theta": profile.theta}
    if profile.has_omega:
        table["omega"] = profile.omega
    return table
