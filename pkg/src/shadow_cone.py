"""
Shadow Cone Module

Developable surfaces spanned by two parallel plane sections. Corresponding
points have equal tangent slope phi, and each ruling joins them:

    section A (x = 0):  T(phi), U(phi) with dU = phi dT
    section B (x = a):  t(phi), u(phi) with du = phi dt
    y = T - x (T - t) / a,   z = U - x (U - u) / a

Any such surface has the form y = P + Q x, z = R + S x with the
developability condition dS dP = dQ dR.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from scipy.integrate import cumulative_trapezoid

from .constants import MAX_SAMPLES, MIN_CURVE_SAMPLES, RESIDUAL_FLOOR
from .curve_model import read_spec_document, spec_error_from_validation
from .errors import (
    DegenerateError,
    DevelopabilityError,
    ExpressionDomainError,
    ExpressionError,
    GridMismatchError,
    ParameterRangeError,
    SampleError,
    SpecError,
)
from .expr import Expression
from .tangent_dev import SurfaceMesh

logger = logging.getLogger(__name__)

DEVELOPABILITY_TOLERANCE = 1e-9
CYLINDER_ANGLE_TOLERANCE = 1e-10
CONE_APEX_TOLERANCE = 1e-8


# ============================================================
# Sections
# ============================================================

@dataclass(frozen=True)
class ShadowSection:
    """
    Plane section parametrised by tangent slope phi.

    rate holds d(abscissa)/d(phi); the ordinate's rate is phi * rate.
    """
    phi: np.ndarray
    abscissa: np.ndarray
    ordinate: np.ndarray
    rate: np.ndarray
    offset: float = 0.0

    @property
    def samples(self) -> int:
        return len(self.phi)

    @property
    def points(self) -> np.ndarray:
        return np.stack([self.abscissa, self.ordinate], axis=1)

    def at(self, phi) -> Tuple[np.ndarray, np.ndarray]:
        """Interpolated (abscissa, ordinate) at phi"""
        phi = np.asarray(phi, dtype=float)
        if np.any(phi < self.phi[0]) or np.any(phi > self.phi[-1]) or not np.all(np.isfinite(phi)):
            raise ParameterRangeError(f"phi outside section range [{self.phi[0]:.17g}, {self.phi[-1]:.17g}]")
        return np.interp(phi, self.phi, self.abscissa), np.interp(phi, self.phi, self.ordinate)


def profile_from_slope(
    abscissa: Union[Callable[[np.ndarray], np.ndarray], np.ndarray],
    phi: np.ndarray,
    rate: Optional[np.ndarray] = None,
    ordinate0: float = 0.0,
    offset: float = 0.0,
) -> ShadowSection:
    """
    Recover the ordinate from the abscissa by U = U0 + integral phi dT.

    Args:
        abscissa: Samples T(phi) or a vectorised callable
        phi: Strictly increasing slope grid
        rate: dT/dphi when known; central differences otherwise
        ordinate0: U at phi[0]
        offset: Axial position of the section plane

    Returns:
        ShadowSection on the given grid
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1 or len(phi) < 2 or np.any(np.diff(phi) <= 0):
        raise GridMismatchError("phi grid must be strictly increasing with at least 2 samples")
    values = abscissa(phi) if callable(abscissa) else abscissa
    values = np.broadcast_to(np.asarray(values, dtype=float), phi.shape).copy()
    if rate is None:
        rate = np.gradient(values, phi, edge_order=2 if len(phi) > 2 else 1)
    rate = np.broadcast_to(np.asarray(rate, dtype=float), phi.shape).copy()
    ordinate = ordinate0 + cumulative_trapezoid(phi * rate, phi, initial=0.0)
    return ShadowSection(phi=phi, abscissa=values, ordinate=ordinate, rate=rate, offset=float(offset))


def circle_section(radius: float, phi: np.ndarray, center: Tuple[float, float] = (0.0, 0.0),
                   offset: float = 0.0) -> ShadowSection:
    """Upper arc of a circle, T = cT - r phi / sqrt(1 + phi^2)"""
    phi = np.asarray(phi, dtype=float)
    root = np.sqrt(1.0 + phi ** 2)
    return profile_from_slope(
        center[0] - radius * phi / root,
        phi,
        rate=-radius / root ** 3,
        ordinate0=center[1] + radius / root[0],
        offset=offset,
    )


def ellipse_section(semi_t: float, semi_u: float, phi: np.ndarray,
                    center: Tuple[float, float] = (0.0, 0.0), offset: float = 0.0) -> ShadowSection:
    """Upper arc of T^2/a^2 + U^2/b^2 = 1, T = cT - a^2 phi / sqrt(a^2 phi^2 + b^2)"""
    phi = np.asarray(phi, dtype=float)
    root = np.sqrt(semi_t ** 2 * phi ** 2 + semi_u ** 2)
    return profile_from_slope(
        center[0] - semi_t ** 2 * phi / root,
        phi,
        rate=-(semi_t ** 2) * semi_u ** 2 / root ** 3,
        ordinate0=center[1] + semi_u ** 2 / root[0],
        offset=offset,
    )


def section_from_points(points: np.ndarray, offset: float = 0.0) -> ShadowSection:
    """
    Convert an (abscissa, ordinate) point list to slope form.

    phi = dU/dT is estimated by central differences and must be strictly
    monotone (a convex arc).
    """
    points = np.asarray(points, dtype=float)
    order = np.argsort(points[:, 0], kind="stable")
    abscissa, ordinate = points[order, 0], points[order, 1]
    if np.any(np.diff(abscissa) == 0):
        raise SampleError("Repeated abscissa in section points", int(np.flatnonzero(np.diff(abscissa) == 0)[0]))
    phi = np.gradient(ordinate, abscissa, edge_order=2)
    step = np.diff(phi)
    if not (np.all(step > 0) or np.all(step < 0)):
        bad = np.flatnonzero(np.sign(step) != np.sign(step[0]))
        raise SampleError("Slope is not monotone; section is not convex", int(order[bad[0] + 1]))
    if step[0] < 0:
        phi, abscissa, ordinate = phi[::-1], abscissa[::-1], ordinate[::-1]
    return profile_from_slope(abscissa, phi, ordinate0=ordinate[0], offset=offset)


def resample(section: ShadowSection, phi: np.ndarray) -> ShadowSection:
    """Section on a new phi grid inside its range"""
    phi = np.asarray(phi, dtype=float)
    abscissa, ordinate = section.at(phi)
    rate = np.interp(phi, section.phi, section.rate)
    return profile_from_slope(abscissa, phi, rate=rate, ordinate0=float(ordinate[0]), offset=section.offset)


def shadow_point(section_a: ShadowSection, section_b: ShadowSection, gap: float, phi, x) -> np.ndarray:
    """
    Point (x, y, z) on the ruling joining the two sections at slope phi.

    Raises:
        GridMismatchError: sections not on a common phi grid
        ParameterRangeError: gap <= 0 or phi outside the grid
    """
    _check_pair(section_a, section_b, gap)
    phi, x = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(x, dtype=float))
    big_t, big_u = section_a.at(phi)
    small_t, small_u = section_b.at(phi)
    y = big_t - x * (big_t - small_t) / gap
    z = big_u - x * (big_u - small_u) / gap
    return np.stack([x, y, z], axis=-1)


def _check_pair(section_a: ShadowSection, section_b: ShadowSection, gap: float) -> None:
    if not gap > 0:
        raise ParameterRangeError(f"Section gap must be positive, got {gap}")
    if len(section_a.phi) != len(section_b.phi) or not np.array_equal(section_a.phi, section_b.phi):
        raise GridMismatchError("Sections are not sampled on a common phi grid; resample first")


def shadow_grid(section_a: ShadowSection, section_b: ShadowSection, gap: float, n_x: int,
                x_range: Optional[Tuple[float, float]] = None) -> SurfaceMesh:
    """Mesh over (phi, x) with phi on the section grid"""
    _check_pair(section_a, section_b, gap)
    lo, hi = x_range if x_range is not None else (0.0, gap)
    x = np.linspace(lo, hi, n_x)
    phi_grid, x_grid = np.meshgrid(section_a.phi, x, indexing="ij")
    return SurfaceMesh(tau=section_a.phi, s=x, vertices=shadow_point(section_a, section_b, gap, phi_grid, x_grid))


# ============================================================
# Section spec documents
# ============================================================

class SectionFamily(str, Enum):
    CIRCLE = "circle"
    ELLIPSE = "ellipse"
    EXPRESSIONS = "expressions"
    SAMPLED = "sampled"


class SectionSpecDocument(BaseModel):
    """Schema of a section-spec file"""
    model_config = ConfigDict(extra="forbid")

    family: SectionFamily
    params: Dict[str, Any] = Field(default_factory=dict)
    range: Optional[Tuple[float, float]] = None
    samples: Optional[int] = Field(default=None, ge=MIN_CURVE_SAMPLES, le=MAX_SAMPLES)
    offset: float = 0.0

    @field_validator("range")
    @classmethod
    def _ordered_range(cls, value):
        if value is not None:
            lo, hi = value
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"range must be finite with lo < hi, got [{lo}, {hi}]")
        return value


@dataclass(frozen=True)
class SectionSpec:
    family: SectionFamily
    params: Mapping[str, Any]
    phi_range: Optional[Tuple[float, float]]
    samples: Optional[int]
    offset: float = 0.0
    expressions: Mapping[str, Expression] = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.phi_range[0], self.phi_range[1], self.samples)


def _number(params: Mapping[str, Any], key: str, default: Optional[float] = None, positive: bool = False) -> float:
    if key not in params and default is None:
        raise SpecError("required", f"params.{key}")
    value = params.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise SpecError("must be a finite number", f"params.{key}")
    if positive and value <= 0:
        raise SpecError("must be positive", f"params.{key}")
    return float(value)


def _center(params: Mapping[str, Any]) -> Tuple[float, float]:
    center = params.get("center", [0.0, 0.0])
    try:
        cx, cy = (float(c) for c in center)
    except (TypeError, ValueError) as e:
        raise SpecError("center must be [abscissa, ordinate]", "params.center") from e
    return cx, cy


def parse_section_spec(document: Union[str, Mapping[str, Any]]) -> SectionSpec:
    """
    Validate a section-spec document.

    Raises:
        SpecError: naming the offending key
    """
    raw = read_spec_document(document) if isinstance(document, str) else dict(document)
    try:
        doc = SectionSpecDocument.model_validate(raw)
    except ValidationError as e:
        raise spec_error_from_validation(e) from e

    allowed = {
        SectionFamily.CIRCLE: {"radius", "center"},
        SectionFamily.ELLIPSE: {"a", "b", "center"},
        SectionFamily.EXPRESSIONS: {"abscissa", "ordinate0"},
        SectionFamily.SAMPLED: {"points"},
    }[doc.family]
    extra = sorted(set(doc.params) - allowed)
    if extra:
        raise SpecError(f"unexpected parameter for family '{doc.family.value}'", f"params.{extra[0]}")

    params: Dict[str, Any] = {}
    expressions: Dict[str, Expression] = {}
    if doc.family is SectionFamily.CIRCLE:
        params = {"radius": _number(doc.params, "radius", positive=True), "center": _center(doc.params)}
    elif doc.family is SectionFamily.ELLIPSE:
        params = {
            "a": _number(doc.params, "a", positive=True),
            "b": _number(doc.params, "b", positive=True),
            "center": _center(doc.params),
        }
    elif doc.family is SectionFamily.EXPRESSIONS:
        text = doc.params.get("abscissa")
        if not isinstance(text, str):
            raise SpecError("expression string required", "params.abscissa")
        try:
            expressions["abscissa"] = Expression.parse(text, variables=["phi"])
        except ExpressionError as e:
            raise SpecError(str(e), "params.abscissa") from e
        params = {"ordinate0": _number(doc.params, "ordinate0", default=0.0)}
    else:
        try:
            points = np.asarray(doc.params.get("points"), dtype=float)
        except (TypeError, ValueError) as e:
            raise SpecError("points must be a list of [abscissa, ordinate] pairs", "params.points") from e
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < MIN_CURVE_SAMPLES:
            raise SpecError(f"need at least {MIN_CURVE_SAMPLES} [abscissa, ordinate] pairs", "params.points")
        if not np.all(np.isfinite(points)):
            raise SpecError("points must be finite", "params.points")
        params = {"points": points}

    if doc.family is not SectionFamily.SAMPLED:
        if doc.range is None:
            raise SpecError(f"required for family '{doc.family.value}'", "range")
        if doc.samples is None:
            raise SpecError(f"required for family '{doc.family.value}'", "samples")

    return SectionSpec(family=doc.family, params=params, phi_range=doc.range, samples=doc.samples,
                       offset=doc.offset, expressions=expressions)


def section_from_spec(spec: SectionSpec) -> ShadowSection:
    if spec.family is SectionFamily.CIRCLE:
        return circle_section(spec.params["radius"], spec.grid, spec.params["center"], spec.offset)
    if spec.family is SectionFamily.ELLIPSE:
        return ellipse_section(spec.params["a"], spec.params["b"], spec.grid, spec.params["center"], spec.offset)
    if spec.family is SectionFamily.EXPRESSIONS:
        component = ExpressionComponent(spec.expressions["abscissa"])
        phi = spec.grid
        return profile_from_slope(component.value(phi), phi, rate=component.derivative(phi),
                                  ordinate0=spec.params["ordinate0"], offset=spec.offset)
    return section_from_points(spec.params["points"], offset=spec.offset)


# ============================================================
# Profile quads
# ============================================================

class MonomialComponent:
    """c * phi^e with exact derivative"""

    def __init__(self, coefficient: float, exponent: Fraction):
        self.coefficient = float(coefficient)
        self.exponent = Fraction(exponent)

    def _power(self, phi: np.ndarray, exponent: Fraction) -> np.ndarray:
        if exponent == 0:
            return np.ones_like(phi)
        if exponent.denominator != 1 and np.any(phi < 0):
            raise ExpressionDomainError(f"phi^{exponent} undefined for negative phi")
        if exponent < 0 and np.any(phi == 0):
            raise ExpressionDomainError(f"phi^{exponent} undefined at phi = 0")
        return np.power(phi, float(exponent))

    def value(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return self.coefficient * self._power(phi, self.exponent)

    def derivative(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if self.exponent == 0:
            return np.zeros_like(phi)
        return self.coefficient * float(self.exponent) * self._power(phi, self.exponent - 1)

    def __repr__(self) -> str:
        return f"MonomialComponent({self.coefficient!r} * phi^{self.exponent})"


class ExpressionComponent:
    """Expression in phi; derivative by the five-point central stencil"""

    def __init__(self, expression: Expression, step: float = 1e-3):
        if not expression.free_variables <= {"phi"}:
            extra = sorted(expression.free_variables - {"phi"})[0]
            raise SpecError(f"profile expressions may only use 'phi', found '{extra}'")
        self.expression = expression
        self.step = step

    @classmethod
    def parse(cls, text: str) -> "ExpressionComponent":
        return cls(Expression.parse(text, variables=["phi"]))

    def value(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.broadcast_to(np.asarray(self.expression(phi=phi), dtype=float), phi.shape).copy()

    def derivative(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        h = self.step * np.maximum(1.0, np.abs(phi))
        return (-self.value(phi + 2 * h) + 8 * self.value(phi + h)
                - 8 * self.value(phi - h) + self.value(phi - 2 * h)) / (12 * h)

    def __repr__(self) -> str:
        return f"ExpressionComponent({self.expression.text!r})"


class SampledComponent:
    """Samples on a phi grid, linearly interpolated"""

    def __init__(self, phi: np.ndarray, values: np.ndarray, rate: Optional[np.ndarray] = None):
        self.phi = np.asarray(phi, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.rate = (np.asarray(rate, dtype=float) if rate is not None
                     else np.gradient(self.values, self.phi, edge_order=2))

    def _check(self, phi: np.ndarray) -> None:
        if np.any(phi < self.phi[0]) or np.any(phi > self.phi[-1]):
            raise ParameterRangeError(f"phi outside sampled range [{self.phi[0]:.17g}, {self.phi[-1]:.17g}]")

    def value(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        self._check(phi)
        return np.interp(phi, self.phi, self.values)

    def derivative(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        self._check(phi)
        return np.interp(phi, self.phi, self.rate)

    def __repr__(self) -> str:
        return f"SampledComponent({len(self.phi)} samples)"


Component = Union[MonomialComponent, ExpressionComponent, SampledComponent]


def developability_violation(p: Component, q: Component, r: Component, s: Component, phi) -> np.ndarray:
    """|S'P' - Q'R'| relative to |S'P'| + |Q'R'|"""
    left = s.derivative(phi) * p.derivative(phi)
    right = q.derivative(phi) * r.derivative(phi)
    return np.abs(left - right) / np.maximum(np.abs(left) + np.abs(right), RESIDUAL_FLOOR)


class ProfileQuad:
    """
    Surface y = P + Q x, z = R + S x over the parameter phi.

    Construction checks dS dP = dQ dR on the given grid.
    """

    def __init__(self, p: Component, q: Component, r: Component, s: Component, phi: np.ndarray,
                 tolerance: float = DEVELOPABILITY_TOLERANCE):
        self.p, self.q, self.r, self.s = p, q, r, s
        self.phi = np.asarray(phi, dtype=float)
        self.tolerance = tolerance

        violation = developability_violation(p, q, r, s, self.phi)
        worst = int(np.argmax(violation))
        self.max_violation = float(violation[worst])
        if not self.max_violation <= tolerance:
            raise DevelopabilityError(
                f"dS*dP != dQ*dR: relative violation {self.max_violation:.3e} at phi={self.phi[worst]:.17g}",
                parameter=float(self.phi[worst]),
            )
        self.logger = logging.getLogger(f"{__name__}.ProfileQuad")
        self.logger.debug(f"Quad accepted on {len(self.phi)} samples, max violation {self.max_violation:.3e}")

    def point(self, phi, x) -> np.ndarray:
        phi, x = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(x, dtype=float))
        y = self.p.value(phi) + self.q.value(phi) * x
        z = self.r.value(phi) + self.s.value(phi) * x
        return np.stack([x, y, z], axis=-1)

    def point_function(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        return self.point

    def __repr__(self) -> str:
        return f"ProfileQuad(P={self.p!r}, Q={self.q!r}, R={self.r!r}, S={self.s!r})"


def pqrs_surface(quad: ProfileQuad, phi, x) -> np.ndarray:
    """(x, P + Q x, R + S x)"""
    return quad.point(phi, x)


def quad_from_sections(section_a: ShadowSection, section_b: ShadowSection, gap: float) -> ProfileQuad:
    """P = T, Q = (t - T)/a, R = U, S = (u - U)/a with derivatives from the section rates"""
    _check_pair(section_a, section_b, gap)
    phi = section_a.phi
    rate_q = (section_b.rate - section_a.rate) / gap
    return ProfileQuad(
        SampledComponent(phi, section_a.abscissa, section_a.rate),
        SampledComponent(phi, (section_b.abscissa - section_a.abscissa) / gap, rate_q),
        SampledComponent(phi, section_a.ordinate, phi * section_a.rate),
        SampledComponent(phi, (section_b.ordinate - section_a.ordinate) / gap, phi * rate_q),
        phi,
    )


def complete_quad(p: Component, q: Component, r: Component, phi: np.ndarray, s0: float = 0.0) -> ProfileQuad:
    """
    Solve dS = dQ dR / dP for S on the grid, S(phi[0]) = s0.

    Raises:
        DegenerateError: dP vanishes on the grid
    """
    phi = np.asarray(phi, dtype=float)
    dp = p.derivative(phi)
    bad = np.flatnonzero(dp == 0)
    if bad.size:
        raise DegenerateError(f"dP vanishes at phi={phi[bad[0]]:.17g}; S is not determined")
    rate = q.derivative(phi) * r.derivative(phi) / dp
    values = s0 + cumulative_trapezoid(rate, phi, initial=0.0)
    return ProfileQuad(p, q, r, SampledComponent(phi, values, rate), phi)


@dataclass(frozen=True)
class MonomialParams:
    """Coefficient generators f, g, h, k and exponent generators"""
    f: float
    g: float
    h: float
    k: float
    kappa_m: Fraction
    lambda_m: Fraction
    mu_m: Fraction
    nu_m: Fraction

    def __post_init__(self):
        for name in ("kappa_m", "lambda_m", "mu_m", "nu_m"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @property
    def exponents(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        """(alpha, beta, gamma, delta)"""
        return (self.kappa_m + self.lambda_m, self.kappa_m + self.mu_m,
                self.lambda_m + self.nu_m, self.mu_m + self.nu_m)

    @property
    def coefficients(self) -> Tuple[float, float, float, float]:
        """(a, b, c, d)"""
        alpha, beta, gamma, delta = self.exponents
        for name, value in zip(("alpha", "beta", "gamma", "delta"), (alpha, beta, gamma, delta)):
            if value == 0:
                raise DegenerateError(f"Exponent sum {name} is zero; coefficient recipe divides by it")
        return (self.f * self.g / float(alpha), self.f * self.h / float(beta),
                self.g * self.k / float(gamma), self.h * self.k / float(delta))


def monomial_family(params: MonomialParams, phi: Optional[np.ndarray] = None) -> ProfileQuad:
    """
    P = a phi^alpha, Q = b phi^beta, R = c phi^gamma, S = d phi^delta.

    Asserts beta - alpha = delta - gamma exactly and
    b beta / (a alpha) = d delta / (c gamma) to 1e-12.
    """
    alpha, beta, gamma, delta = params.exponents
    a, b, c, d = params.coefficients
    if beta - alpha != delta - gamma:
        raise DevelopabilityError(f"Exponent condition fails: {beta - alpha} != {delta - gamma}")
    lhs = b * float(beta) / (a * float(alpha))
    rhs = d * float(delta) / (c * float(gamma))
    if abs(lhs - rhs) > 1e-12 * max(abs(lhs), abs(rhs), 1.0):
        raise DevelopabilityError(f"Coefficient condition fails: {lhs!r} != {rhs!r}")

    if phi is None:
        integral = all(e.denominator == 1 for e in (alpha, beta, gamma, delta))
        phi = np.linspace(-2.0, 2.0, 65) if integral else np.linspace(0.25, 2.0, 64)
    return ProfileQuad(
        MonomialComponent(a, alpha),
        MonomialComponent(b, beta),
        MonomialComponent(c, gamma),
        MonomialComponent(d, delta),
        phi,
    )


class QuadKind(str, Enum):
    PLANE = "plane"
    CONE = "cone"
    CYLINDER = "cylinder"
    GENERAL = "general"


def classify_quad(quad: ProfileQuad, tolerance: float = 1e-12) -> QuadKind:
    """Plane if P = Q = 0 or R = S = 0, cone if P and R are constant, cylinder if Q and S are"""
    phi = quad.phi

    def vanishes(component: Component) -> bool:
        return bool(np.all(np.abs(component.value(phi)) <= tolerance))

    def constant(component: Component) -> bool:
        return bool(np.all(np.abs(component.derivative(phi)) <= tolerance))

    if (vanishes(quad.p) and vanishes(quad.q)) or (vanishes(quad.r) and vanishes(quad.s)):
        return QuadKind.PLANE
    if constant(quad.p) and constant(quad.r):
        return QuadKind.CONE
    if constant(quad.q) and constant(quad.s):
        return QuadKind.CYLINDER
    return QuadKind.GENERAL


# ============================================================
# Worked implicit example
# ============================================================

QUARTIC_PARAMS = MonomialParams(f=1.0, g=2.0, h=6.0, k=1.0, kappa_m=1, lambda_m=0, mu_m=1, nu_m=2)


def quartic_quad() -> ProfileQuad:
    """y = 2 phi + 3 phi^2 x, z = phi^2 + 2 phi^3 x"""
    return monomial_family(QUARTIC_PARAMS)


def _quartic_terms(x, y, z) -> Tuple[np.ndarray, ...]:
    return (-4 * x * y ** 3, -(y ** 2), 18 * x * y * z, 27 * x ** 2 * z ** 2, 4 * z)


def quartic_function(x, y, z):
    """-4 x y^3 - y^2 + 18 x y z + 27 x^2 z^2 + 4 z"""
    return sum(_quartic_terms(x, y, z))


def quartic_scale(x, y, z):
    """Largest term magnitude, at least 1"""
    terms = [np.abs(term) for term in _quartic_terms(x, y, z)]
    return np.maximum.reduce(terms + [np.ones_like(np.asarray(x, dtype=float))])


def quartic_residual(phi, x):
    """Scaled |F(x, y, z)| on the parametrised surface"""
    point = quartic_quad().point(phi, x)
    x, y, z = point[..., 0], point[..., 1], point[..., 2]
    residual = np.abs(quartic_function(x, y, z)) / quartic_scale(x, y, z)
    return float(residual) if np.ndim(residual) == 0 else residual


def uncorrected_quartic_function(x, y, z):
    """Known-bad elimination result: 4 x y^3 + 72 x^2 y^2 z - y^2 - 18 x y z + 27 x^2 z^2 + 2 z"""
    return 4 * x * y ** 3 + 72 * x ** 2 * y ** 2 * z - y ** 2 - 18 * x * y * z + 27 * x ** 2 * z ** 2 + 2 * z


def uncorrected_quartic_residual(phi, x):
    """Scaled |G(x, y, z)| for the known-bad equation; non-zero on the surface"""
    point = quartic_quad().point(phi, x)
    x, y, z = point[..., 0], point[..., 1], point[..., 2]
    terms = (4 * x * y ** 3, 72 * x ** 2 * y ** 2 * z, y ** 2, 18 * x * y * z, 27 * x ** 2 * z ** 2, 2 * z)
    scale = np.maximum.reduce([np.abs(t) for t in terms] + [np.ones_like(x)])
    residual = np.abs(uncorrected_quartic_function(x, y, z)) / scale
    return float(residual) if np.ndim(residual) == 0 else residual


def quartic_sample_points(rng: np.random.Generator, count: int) -> np.ndarray:
    """Points of the quartic surface away from its cuspidal edge x = -1/(3 phi)"""
    phi = rng.uniform(0.5, 1.5, count)
    x = rng.uniform(0.0, 1.0, count)
    return quartic_quad().point(phi, x)


# ============================================================
# Ruling classification
# ============================================================

class RulingKind(str, Enum):
    CYLINDER = "cylinder"
    CONE = "cone"
    GENERAL = "general"


@dataclass(frozen=True)
class RulingClassification:
    kind: RulingKind
    apex: Optional[np.ndarray]
    angular_spread: float
    apex_miss: float
    diameter: float
    directions: np.ndarray
    bases: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "apex": None if self.apex is None else [float(c) for c in self.apex],
            "angular_spread": self.angular_spread,
            "apex_miss": self.apex_miss,
            "diameter": self.diameter,
        }


def classify_ruling_family(
    section_a: ShadowSection,
    section_b: ShadowSection,
    gap: float,
    angle_tolerance: float = CYLINDER_ANGLE_TOLERANCE,
    apex_tolerance: float = CONE_APEX_TOLERANCE,
) -> RulingClassification:
    """
    Cylinder, cone (with apex) or general developable.

    Cylinder when all rulings are parallel within angle_tolerance radians;
    cone when the least-squares common point lies within
    apex_tolerance * diameter of every ruling.

    Raises:
        DegenerateError: all section points coincide
    """
    _check_pair(section_a, section_b, gap)
    transverse = np.concatenate([section_a.points, section_b.points])
    diameter = float(np.linalg.norm(np.ptp(transverse, axis=0)))
    if diameter == 0:
        raise DegenerateError("Section points all coincide")

    zeros = np.zeros_like(section_a.phi)
    bases = np.stack([zeros, section_a.abscissa, section_a.ordinate], axis=1)
    ends = np.stack([zeros + gap, section_b.abscissa, section_b.ordinate], axis=1)
    directions = ends - bases
    directions /= np.linalg.norm(directions, axis=1)[:, None]

    mean = np.sum(directions, axis=0)
    mean /= np.linalg.norm(mean)
    sines = np.linalg.norm(np.cross(directions, mean), axis=1)
    spread = float(np.max(np.arcsin(np.clip(sines, 0.0, 1.0))))

    if spread <= angle_tolerance:
        logger.info(f"Rulings parallel within {spread:.3e} rad: cylinder")
        return RulingClassification(RulingKind.CYLINDER, None, spread, float("inf"), diameter, directions, bases)

    identity = np.eye(3)
    projectors = identity[None, :, :] - directions[:, :, None] * directions[:, None, :]
    system = np.sum(projectors, axis=0)
    rhs = np.einsum("nij,nj->i", projectors, bases)
    apex, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    miss = float(np.max(np.linalg.norm(np.einsum("nij,nj->ni", projectors, apex[None, :] - bases), axis=1)))

    if miss <= apex_tolerance * diameter:
        logger.info(f"Rulings concurrent within {miss:.3e}: cone with apex {apex}")
        return RulingClassification(RulingKind.CONE, apex, spread, miss, diameter, directions, bases)
    logger.info(f"Rulings neither parallel nor concurrent (miss {miss:.3e}): general developable")
    return RulingClassification(RulingKind.GENERAL, None, spread, miss, diameter, directions, bases)


def cone_surface_function(classification: RulingClassification) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """
    Axial coordinate of the apex-translated cone as a function of (y, z).

    Along the transverse polar angle psi the cone is x = rho(psi) * sqrt(y^2 + z^2),
    with rho interpolated between rulings; it is homogeneous of degree one.
    """
    if classification.kind is not RulingKind.CONE:
        raise DegenerateError(f"Rulings form a {classification.kind.value}, not a cone")
    d = classification.directions * np.sign(classification.directions[:, :1])
    psi = np.arctan2(d[:, 2], d[:, 1])
    rho = d[:, 0] / np.hypot(d[:, 1], d[:, 2])
    order = np.argsort(psi)
    psi, rho = psi[order], rho[order]

    def height(y, z):
        y, z = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(z, dtype=float))
        angle = np.arctan2(z, y)
        if np.any(angle < psi[0]) or np.any(angle > psi[-1]):
            raise ParameterRangeError("Point lies outside the angular range covered by the rulings")
        return np.interp(angle, psi, rho) * np.hypot(y, z)

    return height


def cone_angular_range(classification: RulingClassification) -> Tuple[float, float]:
    d = classification.directions * np.sign(classification.directions[:, :1])
    psi = np.arctan2(d[:, 2], d[:, 1])
    return float(np.min(psi)), float(np.max(psi))
