"""
Frame Sextet Module

The six functions l, m, n, lambda, mu, nu expressing dx, dy, dz through the
developed coordinates:

    dx = l dT + lambda dU,  dy = m dT + mu dU,  dz = n dT + nu dU

Built from the direction cosines dc = (sin zeta sin theta, cos zeta sin theta,
cos theta) and their derivative with respect to omega:

    l      = dc1 sin(omega) + cos(omega) d(dc1)/d(omega)
    lambda = dc1 cos(omega) - sin(omega) d(dc1)/d(omega)

and likewise for (m, mu) from dc2 and (n, nu) from dc3.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
from time import perf_counter
import logging

import numpy as np

from .config import Tolerances
from .constants import EPS_SING, RESIDUAL_FLOOR
from .curve_model import AngleProfile, DirectrixCurve, fold_angles
from .development import DevelopedDirectrix
from .errors import DegenerateError, GridMismatchError
from .report import Residual, VerificationReport, timed_entry
from .tangent_dev import ruling_direction

logger = logging.getLogger(__name__)

DEFAULT_S_VALUES = (0.5, 1.0, 2.0)

# Rows dropped at each end, where one-sided stencils break the central-difference error pattern
END_TRIM = 2

# Report label of check_tangent_relation: cross-multiplied by cos(omega), one scale per pair
TANGENT_RELATION_NORMALIZATION = "|dlambda cos(omega) + dl sin(omega)| / max(|dl| + |dlambda|)"


@dataclass(frozen=True)
class DirectionCosines:
    """Unit ruling direction per sample"""
    tau: np.ndarray
    values: np.ndarray

    @property
    def dc1(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def dc2(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def dc3(self) -> np.ndarray:
        return self.values[:, 2]

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.sum(self.values ** 2, axis=1) - 1.0)))

    def differential_residual(self, omega: np.ndarray) -> np.ndarray:
        """|d(dc)|^2 - d(omega)^2 per sample, relative to d(omega)^2"""
        d_dc = np.gradient(self.values, self.tau, axis=0, edge_order=2)
        d_omega = np.gradient(omega, self.tau, edge_order=2)
        return np.abs(np.sum(d_dc ** 2, axis=1) - d_omega ** 2) / np.maximum(d_omega ** 2, RESIDUAL_FLOOR)


@dataclass(frozen=True)
class FrameSextet:
    """(l, m, n) and (lambda, mu, nu) per sample"""
    tau: np.ndarray
    omega: np.ndarray
    first: np.ndarray
    second: np.ndarray

    @property
    def l(self) -> np.ndarray:  # noqa: E743
        return self.first[:, 0]

    @property
    def m(self) -> np.ndarray:
        return self.first[:, 1]

    @property
    def n(self) -> np.ndarray:
        return self.first[:, 2]

    @property
    def lam(self) -> np.ndarray:
        return self.second[:, 0]

    @property
    def mu(self) -> np.ndarray:
        return self.second[:, 1]

    @property
    def nu(self) -> np.ndarray:
        return self.second[:, 2]

    def algebraic_residuals(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Residuals of the three algebraic conditions.

        Returns:
            (|l^2 + m^2 + n^2 - 1|, |lambda^2 + mu^2 + nu^2 - 1|, |l lambda + m mu + n nu|)
        """
        return (
            np.abs(np.sum(self.first ** 2, axis=1) - 1.0),
            np.abs(np.sum(self.second ** 2, axis=1) - 1.0),
            np.abs(np.sum(self.first * self.second, axis=1)),
        )

    def split(self) -> np.ndarray:
        """l sin(omega) + lambda cos(omega) etc.; equals the direction cosines"""
        return self.first * np.sin(self.omega)[:, None] + self.second * np.cos(self.omega)[:, None]


def direction_cosines(profile: AngleProfile) -> DirectionCosines:
    return DirectionCosines(tau=profile.tau, values=ruling_direction(profile.zeta, profile.theta))


def sextet(profile: AngleProfile) -> FrameSextet:
    """
    Build the six functions from an angle profile with omega.

    d(dc)/d(omega) is taken as the unit vector along the component of
    d(dc)/d(tau) orthogonal to dc; its length is 1 because |d(dc)| = d(omega).

    Raises:
        DegenerateError: the ruling direction does not turn at some sample
    """
    if not profile.has_omega:
        raise DegenerateError("Angle profile has no development angle; run omega_profile first")

    dc = direction_cosines(profile).values
    tau = profile.tau
    d_tau = np.gradient(dc, tau, axis=0, edge_order=2)
    d_perp = d_tau - np.sum(d_tau * dc, axis=1)[:, None] * dc
    size = np.linalg.norm(d_perp, axis=1)

    span = tau[-1] - tau[0]
    d_zeta = np.abs(np.gradient(profile.zeta, tau, edge_order=2))
    d_theta = np.abs(np.gradient(profile.theta, tau, edge_order=2))
    threshold = EPS_SING * np.maximum(np.maximum(d_zeta, d_theta), 1.0 / span)
    bad = np.flatnonzero(size <= threshold)
    if bad.size:
        raise DegenerateError(
            f"degenerate: d(omega) = 0 at sample {int(bad[0])} (straight directrix), "
            f"d(.)/d(omega) is indeterminate"
        )

    direction = np.sign(np.gradient(profile.omega, tau, edge_order=2))
    direction[direction == 0] = 1.0
    derivative = direction[:, None] * d_perp / size[:, None]

    sin_w = np.sin(profile.omega)[:, None]
    cos_w = np.cos(profile.omega)[:, None]
    first = dc * sin_w + derivative * cos_w
    second = dc * cos_w - derivative * sin_w
    return FrameSextet(tau=tau, omega=profile.omega, first=first, second=second)


def check_tangent_relation(frame: FrameSextet, trim: int = END_TRIM) -> Residual:
    """
    Largest violation of d(lambda)/d(l) = -tan(omega), and of the (m, mu), (n, nu) pairs.

    Evaluated as |d(lambda) cos(omega) + dl sin(omega)| over the pair's largest
    |dl| + |d(lambda)|, with central differences. Samples where both
    differentials fall below EPS_SING are skipped.

    Raises:
        DegenerateError: every sample skipped (constant frame)
    """
    d_first = np.gradient(frame.first, axis=0)
    d_second = np.gradient(frame.second, axis=0)
    rows = slice(trim, len(frame.tau) - trim)
    cos_w = np.cos(frame.omega)[rows]
    sin_w = np.sin(frame.omega)[rows]
    tau = frame.tau[rows]

    best: Optional[Residual] = None
    tested = 0
    for pair in range(3):
        dl = d_first[rows, pair]
        dlam = d_second[rows, pair]
        keep = (np.abs(dl) >= EPS_SING) | (np.abs(dlam) >= EPS_SING)
        if not np.any(keep):
            continue
        scale = np.max((np.abs(dl) + np.abs(dlam))[keep])
        residual = np.abs(dlam * cos_w + dl * sin_w)[keep] / scale
        found = Residual.from_array(residual, {"tau": tau[keep], "pair": float(pair)})
        tested += found.samples
        if best is None or not found.value <= best.value:
            best = found

    if best is None:
        raise DegenerateError("degenerate: constant frame")
    return Residual(value=best.value, argmax=best.argmax, samples=tested)


def _uniform_stride(tau: np.ndarray, h: float) -> Tuple[int, float]:
    spacing = np.diff(tau)
    delta = spacing[0]
    if not np.allclose(spacing, delta, rtol=1e-9, atol=0.0):
        raise GridMismatchError("Condition checks need a uniform tau grid")
    stride = int(round(h / delta))
    if stride < 1 or abs(stride * delta - h) > 1e-6 * h:
        raise GridMismatchError(f"Step h={h:g} is not a multiple of the sample spacing {delta:.17g}")
    if 2 * stride >= len(tau):
        raise GridMismatchError(f"Step h={h:g} spans the whole grid")
    return stride, stride * delta


def check_conditions(
    frame: FrameSextet,
    curve: DirectrixCurve,
    dev: DevelopedDirectrix,
    h: float,
    s_values: Sequence[float] = DEFAULT_S_VALUES,
    tolerances: Optional[Tolerances] = None,
) -> VerificationReport:
    """
    Verify the six conditions and the derived identities on the sample grid.

    IV-VI are algebraic. I-III are checked through the differential
    consistency dx = l dT + lambda dU (and for y, z) with central displacements
    of size h in the tau, s and diagonal directions; h must be a multiple of
    the sample spacing so every stencil point is a sample.

    Args:
        frame: Six functions on the curve grid
        curve: Directrix the frame was built from
        dev: Developed directrix on the same grid
        h: Difference step
        s_values: Ruling distances checked
        tolerances: Pass thresholds

    Returns:
        VerificationReport with entries sextet.I ... sextet.VI, sextet.split,
        sextet.integral and sextet.omega_function
    """
    tolerances = tolerances or Tolerances()
    for other, name in ((curve.tau, "curve"), (dev.tau, "development")):
        if len(other) != len(frame.tau) or not np.array_equal(other, frame.tau):
            raise GridMismatchError(f"Sextet and {name} are sampled on different grids")

    report = VerificationReport()
    tau = frame.tau
    dc = ruling_direction(*fold_angles(curve.differential))

    started = perf_counter()
    for check, values in zip(("IV", "V", "VI"), frame.algebraic_residuals()):
        report.add(timed_entry(f"sextet.{check}", tolerances.conditions_algebraic,
                               Residual.from_array(values, {"tau": tau}), started))

    started = perf_counter()
    split = np.max(np.abs(frame.split() - dc), axis=1)
    report.add(timed_entry("sextet.split", tolerances.frame_split, Residual.from_array(split, {"tau": tau}), started))

    # Differential consistency
    started = perf_counter()
    stride, step = _uniform_stride(tau, h)
    s = np.asarray(s_values, dtype=float)
    index = np.arange(stride, len(tau) - stride)

    def surface(i, s_):
        return curve.position[i][:, None, :] - s_[None, :, None] * dc[i][:, None, :]

    def flat(i, s_):
        pd = dev.pd[i][:, None] - s_[None, :] * np.sin(dev.omega[i])[:, None]
        qd = dev.qd[i][:, None] - s_[None, :] * np.cos(dev.omega[i])[:, None]
        return pd, qd

    worst = np.zeros((len(index), len(s), 3))
    for a, b in ((1, 0), (0, 1), (1, 1)):
        hi, lo = index + a * stride, index - a * stride
        d_point = surface(hi, s + b * step) - surface(lo, s - b * step)
        t_hi, u_hi = flat(hi, s + b * step)
        t_lo, u_lo = flat(lo, s - b * step)
        d_t, d_u = t_hi - t_lo, u_hi - u_lo
        predicted = (frame.first[index][:, None, :] * d_t[..., None]
                     + frame.second[index][:, None, :] * d_u[..., None])
        size = np.maximum(np.linalg.norm(d_point, axis=-1), RESIDUAL_FLOOR)
        worst = np.maximum(worst, np.abs(d_point - predicted) / size[..., None])

    coordinates = {"tau": tau[index][:, None], "s": s[None, :]}
    for axis, check in enumerate(("I", "II", "III")):
        report.add(timed_entry(f"sextet.{check}", tolerances.conditions_differential,
                               Residual.from_array(worst[..., axis], coordinates), started))

    # Integral of l dT + lambda dU along tau against x - x0, as a Stieltjes sum
    # with the frame averaged over each interval; exact when the frame is constant
    started = perf_counter()
    first_mid = 0.5 * (frame.first[1:] + frame.first[:-1])
    second_mid = 0.5 * (frame.second[1:] + frame.second[:-1])
    deviations = []
    for s_ in s:
        big_t = dev.pd - s_ * np.sin(dev.omega)
        big_u = dev.qd - s_ * np.cos(dev.omega)
        steps = first_mid * np.diff(big_t)[:, None] + second_mid * np.diff(big_u)[:, None]
        integral = np.concatenate([np.zeros((1, 3)), np.cumsum(steps, axis=0)])
        points = curve.position - s_ * dc
        target = points - points[0]
        scale = max(float(np.max(np.abs(target))), RESIDUAL_FLOOR)
        deviations.append(np.max(np.abs(integral - target), axis=1) / scale)
    report.add(timed_entry("sextet.integral", tolerances.integral,
                           Residual.from_array(np.stack(deviations, axis=1),
                                               {"tau": tau[:, None], "s": s[None, :]}), started))

    # T - U tan(omega) must not depend on s
    started = perf_counter()
    usable = np.abs(np.cos(dev.omega)) >= 1e-3
    tan_w = np.tan(dev.omega[usable])
    big_t = dev.pd[usable][:, None] - s[None, :] * np.sin(dev.omega[usable])[:, None]
    big_u = dev.qd[usable][:, None] - s[None, :] * np.cos(dev.omega[usable])[:, None]
    omega_fn = big_t - big_u * tan_w[:, None]
    scale = np.abs(big_t) + np.abs(big_u * tan_w[:, None]) + 1.0
    spread = np.abs(omega_fn - omega_fn[:, :1]) / scale
    if spread.size:
        residual = Residual.from_array(spread, {"tau": tau[usable][:, None], "s": s[None, :]})
    else:
        residual = Residual(value=0.0, samples=0)
    report.add(timed_entry("sextet.omega_function", tolerances.omega_function, residual, started))

    logger.info(f"Condition checks on {len(tau)} samples, h={step:g}: "
                f"{'pass' if report.passed else 'FAIL'}")
    return report

