"""
Tests for the developability checks.

This test suite validates:
- Input validation and error capture in BaseCheck.run()
- Passing and failing cases of every check
- The convergence harness
- Implicit surface specs
"""

import dataclasses
import math

import numpy as np
import pytest

from src.curve_model import Helix, angles_from_curve
from src.development import development_function
from src.errors import SpecError
from src.shadow_cone import quartic_function, quartic_sample_points
from src.tangent_dev import surface_function, tangent_point_function
from src.verify import (
    CheckStatus,
    ConvergenceCheck,
    HomogeneityCheck,
    ImplicitDevelopabilityCheck,
    IsometryTriangleCheck,
    ParametricFlatnessCheck,
    RulingCoplanarityCheck,
    convergence_ratio,
    helix_ruling_functions,
    implicit_curvature,
    parse_implicit_spec,
    richardson,
    ruling_functions,
    sphere_point_function,
)
from src.verify.convergence import band_residual, band_tolerance
from src.verify.implicit import plane_points, sphere_function, sphere_points


def _flat_surface(tau, s):
    tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
    return np.stack([tau, s, np.zeros_like(tau)], axis=-1)


def _flat_development(tau, s):
    tau, s = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(s, dtype=float))
    return np.stack([tau, s], axis=-1)


class TestBaseCheck:
    """Test suite for the shared run() wrapper"""

    def test_missing_input(self):
        """A required argument left out gives an error entry, not an exception"""
        check = HomogeneityCheck()
        entry = check.run(function=np.hypot)
        assert math.isnan(entry.max_residual)
        assert "Invalid input data" in entry.error
        assert not entry.passed
        assert check.status is CheckStatus.ERROR

    def test_optional_input_may_be_none(self):
        """Arguments with defaults are not required"""
        points = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        entry = ImplicitDevelopabilityCheck().run(function=lambda x, y, z: z, points=points, scale=None)
        assert entry.error is None

    def test_exception_captured(self):
        def broken(x, y):
            raise RuntimeError("boom")

        check = HomogeneityCheck(check_id="broken")
        entry = check.run(function=broken, points=np.ones((3, 2)))
        assert entry.check == "broken"
        assert entry.error == "boom"
        assert math.isnan(entry.max_residual)
        assert check.status is CheckStatus.ERROR

    def test_status_follows_result(self):
        check = HomogeneityCheck()
        check.run(function=np.hypot, points=np.array([[1.0, 2.0], [3.0, -1.0]]))
        assert check.status is CheckStatus.PASSED
        check.run(function=lambda x, y: x * x + y * y, points=np.array([[1.0, 2.0]]))
        assert check.status is CheckStatus.FAILED

    def test_entry_records_seed(self):
        entry = HomogeneityCheck(seed=7).run(function=np.hypot, points=np.array([[1.0, 2.0]]))
        assert entry.seed == 7
        assert entry.ms >= 0.0


class TestIsometry:
    """Test suite for the triangle isometry check"""

    def test_identity_map(self):
        check = IsometryTriangleCheck(seed=3)
        entry = check.run(surface=_flat_surface, development=_flat_development,
                          tau_range=(0.0, 1.0), s_range=(0.5, 2.0), samples=200, h=1e-3)
        assert entry.passed
        assert entry.max_residual == pytest.approx(0.0, abs=1e-9)
        assert entry.samples == 200
        assert set(entry.argmax) == {"tau", "s"}

    def test_stretch_fails(self):
        """Doubling tau doubles one triangle leg"""
        check = IsometryTriangleCheck(seed=3)
        entry = check.run(surface=_flat_surface, development=lambda tau, s: _flat_development(2 * tau, s),
                          tau_range=(0.0, 1.0), s_range=(0.5, 2.0), samples=50, h=1e-3)
        assert entry.max_residual == pytest.approx(1.0, rel=1e-6)
        assert not entry.passed

    def test_doubled_omega_fails(self, helix_curve, helix_developed):
        """Rulings turned twice as fast in the plane no longer match the surface"""
        profile, dev = helix_developed
        twisted = dataclasses.replace(dev, omega=2.0 * dev.omega)
        entry = IsometryTriangleCheck(seed=5).run(surface=surface_function(helix_curve, profile),
                                                  development=development_function(twisted),
                                                  tau_range=(0.3, 2.8), s_range=(0.5, 2.0), samples=200, h=1e-3)
        assert not entry.passed
        assert entry.max_residual > 1e-3

    def test_seed_is_reproducible(self):
        runs = [IsometryTriangleCheck(seed=11).run(surface=_flat_surface,
                                                   development=lambda tau, s: _flat_development(2 * tau, s),
                                                   tau_range=(0.0, 1.0), s_range=(0.5, 2.0), samples=20, h=1e-3)
                for _ in range(2)]
        assert runs[0].argmax == runs[1].argmax


class TestCoplanarity:
    """Test suite for neighbouring-ruling coplanarity"""

    def test_helix_closed_form(self):
        base, ruling = helix_ruling_functions(Helix())
        entry = RulingCoplanarityCheck().run(base=base, ruling=ruling, tau=np.linspace(0.5, 2.5, 50), h=1e-3)
        assert entry.passed
        assert entry.max_residual < 1e-5

    def test_entry_names_sine_normalization(self):
        base, ruling = helix_ruling_functions(Helix())
        entry = RulingCoplanarityCheck().run(base=base, ruling=ruling, tau=np.linspace(0.5, 2.5, 10), h=1e-3)
        assert entry.normalization == "sin(chord, ruling plane)"
        assert entry.to_dict()["normalization"] == "sin(chord, ruling plane)"

    def test_sampled_helix(self, helix_curve):
        base, ruling = ruling_functions(helix_curve, angles_from_curve(helix_curve))
        h = float(helix_curve.tau[1] - helix_curve.tau[0])
        tau = helix_curve.tau[helix_curve.tau + h <= helix_curve.tau[-1]]
        entry = RulingCoplanarityCheck().run(base=base, ruling=ruling, tau=tau, h=h)
        assert entry.error is None
        assert entry.passed

    def test_skew_rulings(self):
        """Rulings of a hyperboloid of one sheet are skew"""

        def base(tau):
            return np.stack([np.cos(tau), np.sin(tau), np.zeros_like(tau)], axis=-1)

        def ruling(tau):
            return np.stack([-np.sin(tau), np.cos(tau), np.ones_like(tau)], axis=-1) / np.sqrt(2.0)

        entry = RulingCoplanarityCheck().run(base=base, ruling=ruling, tau=np.linspace(0.0, 3.0, 20), h=1e-3)
        assert entry.max_residual == pytest.approx(1 / np.sqrt(2.0), rel=1e-3)
        assert not entry.passed

    def test_parallel_rulings(self):
        """A cylinder's rulings are parallel and count as coplanar"""

        def ruling(tau):
            return np.broadcast_to([0.0, 0.0, 1.0], np.shape(tau) + (3,))

        base, _ = helix_ruling_functions(Helix())
        entry = RulingCoplanarityCheck().run(base=base, ruling=ruling, tau=np.linspace(0.0, 1.0, 10), h=0.1)
        assert entry.max_residual == 0.0


class TestHomogeneity:
    """Test suite for degree-one homogeneity"""

    def test_norm_is_homogeneous(self):
        points = np.array([[1.0, 2.0], [-0.5, 0.25], [3.0, -4.0]])
        entry = HomogeneityCheck().run(function=np.hypot, points=points)
        assert entry.passed
        assert entry.samples == 3

    def test_square_is_not(self):
        entry = HomogeneityCheck().run(function=lambda x, y: x * x + y * y, points=np.array([[1.0, 1.0]]))
        # scale 3 gives 9 f against 3 f
        assert entry.max_residual == pytest.approx(2.0)

    def test_custom_scales(self):
        entry = HomogeneityCheck().run(function=lambda x, y: x * x, points=np.array([[1.0, 0.0]]), scales=(1.0,))
        assert entry.max_residual == 0.0


class TestParametricFlatness:
    """Test suite for |K| L^2 on parametric surfaces"""

    def test_tangent_developable(self):
        tau, s = np.meshgrid(np.linspace(0.5, 2.5, 11), np.linspace(0.5, 2.0, 7), indexing="ij")
        entry = ParametricFlatnessCheck().run(surface=tangent_point_function(Helix()), tau=tau, s=s, min_s=0.5)
        assert entry.passed

    def test_sphere_scaled(self):
        """Radius 2 has K = 1/4; with L = 2 the residual is 1"""
        entry = ParametricFlatnessCheck().run(surface=sphere_point_function(2.0), tau=np.linspace(0.0, 6.0, 7),
                                              s=0.3, scale=2.0)
        assert entry.max_residual == pytest.approx(1.0, abs=1e-4)
        assert not entry.passed

    def test_sample_off_edge_of_regression(self):
        entry = ParametricFlatnessCheck().run(surface=tangent_point_function(Helix()), tau=1.0, s=0.1, min_s=0.5)
        assert entry.error is not None


class TestImplicit:
    """Test suite for curvature of level sets"""

    def test_plane_is_flat(self, rng):
        points = plane_points(rng, 50)
        entry = ImplicitDevelopabilityCheck().run(function=lambda x, y, z: x + y + z - 1.0, points=points)
        assert entry.passed
        assert set(entry.argmax) == {"x", "y", "z"}

    def test_sphere_curvature(self, rng):
        curvature = implicit_curvature(sphere_function, sphere_points(rng, 20))
        np.testing.assert_allclose(curvature, 1.0, rtol=1e-5)

    def test_sphere_fails(self, rng):
        entry = ImplicitDevelopabilityCheck().run(function=sphere_function, points=sphere_points(rng, 20), scale=1.0)
        assert entry.max_residual == pytest.approx(1.0, rel=1e-5)
        assert not entry.passed

    def test_quartic_is_developable(self, rng):
        entry = ImplicitDevelopabilityCheck().run(function=quartic_function, points=quartic_sample_points(rng, 200))
        assert entry.error is None
        assert entry.max_residual < 1e-5

    def test_points_off_surface(self):
        entry = ImplicitDevelopabilityCheck().run(function=sphere_function, points=np.array([[0.0, 0.0, 0.5]]))
        assert "not on the surface" in entry.error

    def test_bad_point_shape(self):
        entry = ImplicitDevelopabilityCheck().run(function=sphere_function, points=np.ones((4, 2)))
        assert "(n, 3)" in entry.error

    def test_singular_point(self):
        """The cone x^2 + y^2 - z^2 = 0 has a vanishing gradient at its apex"""
        entry = ImplicitDevelopabilityCheck().run(function=lambda x, y, z: x * x + y * y - z * z,
                                                  points=np.array([[0.0, 0.0, 0.0]]))
        assert "singular" in entry.error


class TestImplicitSpec:
    """Test suite for implicit surface documents"""

    def test_data_file(self, test_data_dir):
        spec = parse_implicit_spec((test_data_dir / "plane_implicit.json").read_text())
        assert spec.points.shape == (8, 3)
        assert spec.scale == 4.0
        np.testing.assert_allclose(spec.function(*spec.points.T), 0.0, atol=1e-15)

    def test_data_file_passes(self, test_data_dir):
        spec = parse_implicit_spec((test_data_dir / "plane_implicit.json").read_text())
        entry = ImplicitDevelopabilityCheck().run(function=spec.function, points=spec.points, scale=spec.scale)
        assert entry.passed

    @pytest.mark.parametrize("document, key", [
        ({"points": [[0, 0, 0]]}, "expression"),
        ({"expression": "x", "points": [[0, 0]]}, "points"),
        ({"expression": "x", "points": []}, "points"),
        ({"expression": "x", "points": [[0, 0, 0]], "scale": -1}, "scale"),
        ({"expression": "x", "points": [[0, 0, 0]], "scale": True}, "scale"),
    ])
    def test_invalid(self, document, key):
        with pytest.raises(SpecError) as info:
            parse_implicit_spec(document)
        assert info.value.key == key

    def test_malformed_json(self):
        with pytest.raises(SpecError):
            parse_implicit_spec("{")


class TestConvergence:
    """Test suite for the two-grid convergence harness"""

    def test_ratio(self):
        assert convergence_ratio(lambda h: h ** 2, 0.1) == pytest.approx(4.0)

    def test_second_order_passes(self):
        entry = ConvergenceCheck().run(residual=lambda h: 3.0 * h ** 2, h=0.01)
        assert entry.passed
        assert entry.argmax["ratio"] == pytest.approx(4.0)

    def test_third_order_fails(self):
        entry = ConvergenceCheck().run(residual=lambda h: h ** 3, h=0.01)
        assert not entry.passed

    def test_zero_residual(self):
        entry = ConvergenceCheck().run(residual=lambda h: 0.0, h=0.01)
        assert "no convergence order" in entry.error

    def test_band(self):
        """The band edges sit exactly at the tolerance"""
        assert band_residual(math.sqrt(1.7 * 4.5)) == pytest.approx(0.0, abs=1e-15)
        assert band_residual(1.7) == pytest.approx(band_tolerance())
        assert band_residual(4.5) == pytest.approx(band_tolerance())
        assert band_residual(-1.0) == float("inf")

    def test_richardson(self):
        """Second-order error is removed exactly"""
        h = 0.1
        assert richardson(1.0 + h ** 2, 1.0 + (h / 2) ** 2) == pytest.approx(1.0, rel=1e-14)
