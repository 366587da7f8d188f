"""
Acceptance Suite

One function per acceptance criterion. Each returns the report entries it
produced; a criterion passes when all of them pass.
"""

from time import perf_counter
from typing import Callable, Dict, List, Optional, TextIO, Tuple
import logging
import sys

import numpy as np

from ..config import Tolerances
from ..constants import DEFAULT_SEED
from ..curve_model import (
    AngleProfile,
    Helix,
    angles_from_curve,
    curve_from_angles,
    parse_curve_spec,
    profile_table,
    random_angle_profile,
    sample_curve,
)
from ..development import (
    develop,
    developed_curvature,
    development_function,
    development_grid,
    fit_circle,
    omega_profile,
)
from ..frame_sextet import TANGENT_RELATION_NORMALIZATION, check_conditions, check_tangent_relation, sextet
from ..geom_io import export_csv, export_obj, export_report_json, export_svg, flat_document, mesh_document, read_csv
from ..report import ReportEntry, Residual, VerificationReport, timed_entry
from ..shadow_cone import (
    RulingKind,
    circle_section,
    classify_ruling_family,
    cone_angular_range,
    cone_surface_function,
    quartic_quad,
    quartic_residual,
)
from ..tangent_dev import surface_function, tangent_point_function
from ..verify import (
    ConvergenceCheck,
    HomogeneityCheck,
    IsometryTriangleCheck,
    ParametricFlatnessCheck,
    sphere_point_function,
)

logger = logging.getLogger(__name__)

HELIX_RANGE = (0.3, 2.8)
RANDOM_PROFILES = 100
RUNTIME_LIMIT = 60.0

Criterion = Callable[["SelfTest"], List[ReportEntry]]


def _helix_spec(samples: int):
    return parse_curve_spec({
        "family": "helix",
        "params": {"radius": 1.0, "pitch": 1.0},
        "range": list(HELIX_RANGE),
        "samples": samples,
    })


def _combine(residuals: List[Residual], label: str) -> Residual:
    """Largest of several residuals, tagging its argmax with the index in label"""
    worst = max(range(len(residuals)), key=lambda k: (np.isnan(residuals[k].value), residuals[k].value))
    argmax = dict(residuals[worst].argmax or {})
    argmax[label] = float(worst)
    return Residual(value=residuals[worst].value, argmax=argmax, samples=sum(r.samples for r in residuals))


def _flag(check: str, ok: bool, started: float, message: str) -> ReportEntry:
    """Pass/fail entry for properties without a numeric residual"""
    return ReportEntry(check=check, tolerance=0.0, max_residual=0.0 if ok else 1.0,
                       ms=(perf_counter() - started) * 1000.0, error=None if ok else message)


class SelfTest:
    """Runs the acceptance criteria with shared tolerances and seed"""

    def __init__(self, tolerances: Optional[Tolerances] = None, seed: int = DEFAULT_SEED):
        self.tolerances = tolerances or Tolerances()
        self.seed = seed
        self._profiles: Dict[int, List[AngleProfile]] = {}

    def random_profiles(self, samples: int) -> List[AngleProfile]:
        """The same seeded family of profiles at any resolution, omega filled in"""
        if samples not in self._profiles:
            rng = np.random.default_rng(self.seed)
            self._profiles[samples] = [
                omega_profile(random_angle_profile(rng, samples)) for _ in range(RANDOM_PROFILES)
            ]
        return self._profiles[samples]

    def quartic_substitution(self) -> List[ReportEntry]:
        started = perf_counter()
        phi, x = np.meshgrid(np.linspace(-2.0, 2.0, 100), np.linspace(-2.0, 2.0, 100), indexing="ij")
        residual = Residual.from_array(quartic_residual(phi, x), {"phi": phi, "x": x})
        return [timed_entry("selftest.quartic", self.tolerances.quartic, residual, started)]

    def sextet_algebraic(self) -> List[ReportEntry]:
        started = perf_counter()
        residuals = []
        for profile in self.random_profiles(1024):
            values = np.max(np.stack(sextet(profile).algebraic_residuals()), axis=0)
            residuals.append(Residual.from_array(values, {"tau": profile.tau}))
        return [timed_entry("selftest.algebraic", self.tolerances.conditions_algebraic,
                            _combine(residuals, "profile"), started, seed=self.seed)]

    def tangent_relation(self) -> List[ReportEntry]:
        started = perf_counter()

        def worst(samples: int) -> Residual:
            return _combine([check_tangent_relation(sextet(p)) for p in self.random_profiles(samples)], "profile")

        fine = worst(4096)
        entries = [timed_entry("selftest.relation", self.tolerances.tangent_relation, fine, started, seed=self.seed,
                               normalization=TANGENT_RELATION_NORMALIZATION)]
        convergence = ConvergenceCheck(self.tolerances.convergence_low, self.tolerances.convergence_high,
                                       check_id="selftest.convergence")
        entries.append(convergence.run(residual=lambda h: worst(int(round(1.0 / h))).value, h=1.0 / 2048))
        return entries

    def differential_consistency(self) -> List[ReportEntry]:
        curve = sample_curve(_helix_spec(25001))
        profile, dev = develop(curve, angles_from_curve(curve))
        frame = sextet(profile)
        entries = []
        for h, tolerance, label in ((1e-3, self.tolerances.conditions_differential, "coarse"),
                                    (1e-4, self.tolerances.conditions_differential / 100, "fine")):
            started = perf_counter()
            report = check_conditions(frame, curve, dev, h, tolerances=self.tolerances)
            worst = _combine([Residual(e.max_residual, e.argmax, e.samples)
                              for e in (report.get(f"sextet.{c}") for c in ("I", "II", "III"))], "condition")
            entries.append(timed_entry(f"selftest.differential_{label}", tolerance, worst, started))
        return entries

    def helix_development(self) -> List[ReportEntry]:
        started = perf_counter()
        helix = Helix(1.0, 1.0)
        curve = sample_curve(_helix_spec(10_000))
        _, dev = develop(curve, angles_from_curve(curve))
        curvature = developed_curvature(dev)
        relative = np.abs(curvature - helix.curvature) / helix.curvature
        entries = [timed_entry("selftest.curvature", self.tolerances.curvature,
                               Residual.from_array(relative, {"tau": dev.tau}), started)]

        started = perf_counter()
        _, radius, deviation = fit_circle(dev.points)
        misfit = max(deviation, abs(radius - 1.0 / helix.curvature))
        entries.append(timed_entry("selftest.circle", self.tolerances.circle_fit,
                                   Residual(value=misfit, argmax={"radius": radius}, samples=dev.tau.size), started))
        return entries

    def isometry(self) -> List[ReportEntry]:
        curve = sample_curve(_helix_spec(10_001))
        profile, dev = develop(curve, angles_from_curve(curve))
        check = IsometryTriangleCheck(tolerance=self.tolerances.isometry, seed=self.seed, check_id="selftest.isometry")
        return [check.run(
            surface=surface_function(curve, profile),
            development=development_function(dev),
            tau_range=HELIX_RANGE,
            s_range=(0.5, 2.0),
            samples=1000,
            h=1e-4,
        )]

    def curvature_flatness(self) -> List[ReportEntry]:
        h = 1e-3
        tau, s = np.meshgrid(np.linspace(0.5, 2.6, 22), np.linspace(0.5, 2.0, 16), indexing="ij")
        tangent = ParametricFlatnessCheck(self.tolerances.curvature, check_id="selftest.tangent")
        entries = [tangent.run(surface=tangent_point_function(Helix(1.0, 1.0)), tau=tau, s=s, h=h, min_s=0.5)]

        phi, x = np.meshgrid(np.linspace(0.5, 1.5, 21), np.linspace(0.5, 1.0, 11), indexing="ij")
        quad = ParametricFlatnessCheck(self.tolerances.curvature, check_id="selftest.pqrs")
        entries.append(quad.run(surface=quartic_quad().point_function(), tau=phi, s=x, h=h, min_s=0.5))

        started = perf_counter()
        longitude, latitude = np.meshgrid(np.linspace(0.0, 6.0, 13), np.linspace(-1.0, 1.0, 9), indexing="ij")
        sphere = ParametricFlatnessCheck(self.tolerances.curvature, check_id="sphere")
        flat = sphere.run(surface=sphere_point_function(), tau=longitude, s=latitude, h=h)
        # |K| L^2 with L = 1 is |K| itself
        near_one = Residual(value=abs(flat.max_residual - 1.0), argmax=flat.argmax, samples=flat.samples)
        entry = timed_entry("selftest.sphere", 1e-3, near_one, started)
        if flat.passed:
            entry.error = "unit sphere reported developable"
        entries.append(entry)
        return entries

    def shadow_classification(self) -> List[ReportEntry]:
        phi = np.linspace(-2.0, 2.0, 81)
        entries = []

        started = perf_counter()
        cylinder = classify_ruling_family(circle_section(1.0, phi), circle_section(1.0, phi, offset=1.0), 1.0,
                                          self.tolerances.cylinder_angle, self.tolerances.cone_apex)
        entry = timed_entry("selftest.cylinder", self.tolerances.cylinder_angle,
                            Residual(value=cylinder.angular_spread, samples=len(phi)), started)
        if cylinder.kind is not RulingKind.CYLINDER:
            entry.error = f"classified as {cylinder.kind.value}"
        entries.append(entry)

        started = perf_counter()
        cone = classify_ruling_family(circle_section(1.0, phi), circle_section(2.0, phi, offset=1.0), 1.0,
                                      self.tolerances.cylinder_angle, self.tolerances.cone_apex)
        if cone.kind is not RulingKind.CONE:
            entries.append(ReportEntry(check="selftest.cone", tolerance=self.tolerances.cone_apex,
                                       max_residual=float("nan"), error=f"classified as {cone.kind.value}"))
            return entries
        entries.append(timed_entry("selftest.cone", self.tolerances.cone_apex,
                                   Residual(value=abs(cone.apex[0] + 1.0), argmax={"apex_x": float(cone.apex[0])},
                                            samples=len(phi)), started))

        rng = np.random.default_rng(self.seed)
        lo, hi = cone_angular_range(cone)
        angle = rng.uniform(lo + 1e-6, hi - 1e-6, 500)
        radius = rng.uniform(0.5, 2.0, 500)
        points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        homogeneity = HomogeneityCheck(self.tolerances.homogeneity, seed=self.seed, check_id="selftest.homogeneity")
        entries.append(homogeneity.run(function=cone_surface_function(cone), points=points))
        return entries

    def round_trips(self) -> List[ReportEntry]:
        started = perf_counter()
        rng = np.random.default_rng(self.seed)
        residuals = []
        for _ in range(10):
            profile = random_angle_profile(rng, 4096)
            curve = curve_from_angles(profile)
            back = angles_from_curve(curve)
            again = curve_from_angles(back)
            scale = 1.0 + float(np.max(np.abs(curve.position)))
            values = np.maximum.reduce([
                np.abs(back.zeta - profile.zeta),
                np.abs(back.theta - profile.theta),
                np.max(np.abs(again.position - curve.position), axis=1) / scale,
            ])
            residuals.append(Residual.from_array(values, {"tau": profile.tau}))
        entries = [timed_entry("selftest.angles", self.tolerances.round_trip, _combine(residuals, "profile"),
                               started, seed=self.seed)]

        started = perf_counter()
        table = profile_table(omega_profile(random_angle_profile(rng, 4096)))
        parsed = read_csv(export_csv(table))
        bitwise = parsed.keys() == table.keys() and all(
            np.array_equal(np.asarray(table[k], dtype=float).view(np.int64), parsed[k].view(np.int64)) for k in table
        )
        entries.append(_flag("selftest.csv", bitwise, started, "CSV round trip changed values"))

        started = perf_counter()
        first, second = self._exports(), self._exports()
        entries.append(_flag("selftest.deterministic", first == second, started,
                             "repeated exports differ: " + ", ".join(k for k in first if first[k] != second[k])))
        return entries

    def _exports(self) -> Dict[str, bytes]:
        curve = sample_curve(_helix_spec(200))
        profile, dev = develop(curve, angles_from_curve(curve))
        development = development_grid(curve, profile, dev, (0.5, 2.0), 20, 5)
        report = VerificationReport()
        check = IsometryTriangleCheck(tolerance=self.tolerances.isometry, seed=self.seed)
        entry = check.run(surface=surface_function(curve, profile), development=development_function(dev),
                          tau_range=HELIX_RANGE, s_range=(0.5, 2.0), samples=100, h=1e-3)
        entry.ms = 0.0
        report.add(entry)
        return {
            "obj": export_obj(mesh_document(development.mesh)),
            "svg": export_svg(flat_document(dev, development)),
            "csv": export_csv(development.table()),
            "report": export_report_json(report),
        }

    def criteria(self) -> List[Tuple[str, str, Criterion]]:
        return [
            ("quartic", "quartic surface substitution", SelfTest.quartic_substitution),
            ("algebraic", "sextet algebraic conditions", SelfTest.sextet_algebraic),
            ("relation", "tangent relation and convergence", SelfTest.tangent_relation),
            ("differential", "differential consistency", SelfTest.differential_consistency),
            ("helix", "helix development", SelfTest.helix_development),
            ("isometry", "isometry", SelfTest.isometry),
            ("flatness", "curvature flatness", SelfTest.curvature_flatness),
            ("shadow", "shadow classification", SelfTest.shadow_classification),
            ("round_trip", "round trips and determinism", SelfTest.round_trips),
        ]

    def run(self, stream: TextIO = sys.stdout) -> VerificationReport:
        """
        Run every criterion and print one PASS/FAIL line per criterion.

        Returns:
            Report holding every entry, plus selftest.runtime
        """
        report = VerificationReport(metadata={"seed": self.seed})
        suite_started = perf_counter()
        for number, (key, title, criterion) in enumerate(self.criteria(), start=1):
            started = perf_counter()
            try:
                entries = criterion(self)
            except Exception as e:
                logger.exception(f"Criterion {key} raised")
                entries = [ReportEntry(check=f"selftest.{key}", tolerance=0.0, max_residual=float("nan"),
                                       ms=(perf_counter() - started) * 1000.0, error=str(e))]
            for entry in entries:
                report.add(entry)
            _print_line(stream, number, title, entries)

        elapsed = perf_counter() - suite_started
        runtime = ReportEntry(check="selftest.runtime", tolerance=RUNTIME_LIMIT, max_residual=elapsed,
                              samples=1, ms=elapsed * 1000.0)
        report.add(runtime)
        _print_line(stream, number + 1, "full suite runtime", [runtime])
        return report


def _print_line(stream: TextIO, number: int, title: str, entries: List[ReportEntry]) -> None:
    passed = all(entry.passed for entry in entries)
    worst = [f"{entry.check}={entry.max_residual:.3e}/{entry.tolerance:.1e}" for entry in entries]
    failures = [f"{entry.check}: {entry.error}" for entry in entries if entry.error]
    detail = "; ".join(failures) if failures else ", ".join(worst)
    print(f"{'PASS' if passed else 'FAIL'} {number:2d} {title} ({detail})", file=stream)


def run_selftest(tolerances: Optional[Tolerances] = None, seed: int = DEFAULT_SEED,
                 stream: TextIO = sys.stdout) -> VerificationReport:
    return SelfTest(tolerances, seed).run(stream)
