"""
Tests for the frame sextet and its conditions.
"""

import numpy as np
import pytest

from src.config import Tolerances
from src.curve_model import (
    AngleProfile,
    angles_from_curve,
    curve_from_angles,
    parse_curve_spec,
    random_angle_profile,
    sample_curve,
)
from src.development import develop, omega_profile
from src.errors import DegenerateError, GridMismatchError
from src.frame_sextet import (
    TANGENT_RELATION_NORMALIZATION,
    FrameSextet,
    check_conditions,
    check_tangent_relation,
    direction_cosines,
    sextet,
)


@pytest.fixture(scope="module")
def helix_frame(helix_developed):
    profile, _ = helix_developed
    return sextet(profile)


class TestSextet:
    """Test suite for building the six functions"""

    def test_algebraic_conditions(self, helix_frame):
        """Both triples are unit vectors and orthogonal"""
        for residual in helix_frame.algebraic_residuals():
            assert np.max(residual) < 1e-12

    def test_split_recovers_direction_cosines(self, helix_developed, helix_frame):
        profile, _ = helix_developed
        dc = direction_cosines(profile)
        np.testing.assert_allclose(helix_frame.split(), dc.values, atol=1e-14)
        assert dc.norm_drift() < 1e-15

    def test_random_profiles(self, rng):
        """Algebraic conditions hold for generic profiles"""
        for _ in range(5):
            frame = sextet(omega_profile(random_angle_profile(rng, 512)))
            assert max(np.max(r) for r in frame.algebraic_residuals()) < 1e-12

    def test_named_components(self, helix_frame):
        np.testing.assert_array_equal(helix_frame.l, helix_frame.first[:, 0])
        np.testing.assert_array_equal(helix_frame.nu, helix_frame.second[:, 2])

    def test_derivative_length_matches_omega(self, helix_developed):
        """|d(dc)| = d(omega)"""
        profile, _ = helix_developed
        residual = direction_cosines(profile).differential_residual(profile.omega)
        assert np.max(residual[2:-2]) < 1e-6

    def test_requires_omega(self, rng):
        with pytest.raises(DegenerateError, match="development angle"):
            sextet(random_angle_profile(rng, 64))

    def test_straight_directrix(self):
        """A directrix that does not turn has no d(.)/d(omega)"""
        tau = np.linspace(0.0, 1.0, 64)
        profile = omega_profile(AngleProfile(tau=tau, zeta=np.full(64, 1.0), theta=np.full(64, 1.2)))
        with pytest.raises(DegenerateError, match="straight directrix"):
            sextet(profile)

    def test_planar_frame(self):
        """theta = pi/2 with omega = zeta gives the fixed frame (1, 0, 0), (0, 1, 0)"""
        tau = np.linspace(0.0, 1.0, 101)
        zeta = 0.5 + tau
        profile = AngleProfile(tau=tau, zeta=zeta, theta=np.full(101, np.pi / 2), omega=zeta)
        frame = sextet(profile)
        np.testing.assert_allclose(frame.first, np.tile([1.0, 0.0, 0.0], (101, 1)), atol=1e-12)
        np.testing.assert_allclose(frame.second, np.tile([0.0, 1.0, 0.0], (101, 1)), atol=1e-12)


class TestTangentRelation:
    """Test suite for d(lambda)/d(l) = -tan(omega)"""

    def test_helix(self, helix_frame):
        residual = check_tangent_relation(helix_frame)
        assert residual.value < 1e-5
        assert residual.samples > 0
        assert set(residual.argmax) == {"tau", "pair"}

    def test_converges(self, rng):
        """Doubling the resolution shrinks the residual"""
        seed_state = rng.bit_generator.state
        coarse = check_tangent_relation(sextet(omega_profile(random_angle_profile(rng, 1024))))
        rng.bit_generator.state = seed_state
        fine = check_tangent_relation(sextet(omega_profile(random_angle_profile(rng, 2048))))
        assert fine.value < coarse.value


class TestConditions:
    """Test suite for the full condition report"""

    def test_report_entries(self, helix_curve, helix_developed, helix_frame):
        _, dev = helix_developed
        spacing = helix_curve.tau[1] - helix_curve.tau[0]
        report = check_conditions(helix_frame, helix_curve, dev, 10 * spacing)
        checks = [entry.check for entry in report.entries]
        assert checks == sorted(checks)
        assert set(checks) == {f"sextet.{name}" for name in
                               ("I", "II", "III", "IV", "V", "VI", "split", "integral", "omega_function")}
        for name in ("IV", "V", "VI", "split", "omega_function"):
            assert report.get(f"sextet.{name}").passed
        for name in ("I", "II", "III", "integral"):
            assert report.get(f"sextet.{name}").max_residual < 1e-3

    def test_differential_residual_shrinks_with_step(self, helix_curve, helix_developed, helix_frame):
        _, dev = helix_developed
        spacing = helix_curve.tau[1] - helix_curve.tau[0]
        coarse = check_conditions(helix_frame, helix_curve, dev, 40 * spacing).get("sextet.I")
        fine = check_conditions(helix_frame, helix_curve, dev, 10 * spacing).get("sextet.I")
        assert fine.max_residual < coarse.max_residual

    def test_tolerances_apply(self, helix_curve, helix_developed, helix_frame):
        """A tighter tolerance turns a passing entry into a failure"""
        _, dev = helix_developed
        spacing = helix_curve.tau[1] - helix_curve.tau[0]
        report = check_conditions(helix_frame, helix_curve, dev, 10 * spacing,
                                  tolerances=Tolerances(conditions_differential=1e-300))
        assert not report.get("sextet.I").passed
        assert not report.passed

    def test_step_must_match_grid(self, helix_curve, helix_developed, helix_frame):
        _, dev = helix_developed
        spacing = helix_curve.tau[1] - helix_curve.tau[0]
        with pytest.raises(GridMismatchError, match="multiple"):
            check_conditions(helix_frame, helix_curve, dev, 2.5 * spacing)

    def test_step_too_large(self, helix_curve, helix_developed, helix_frame):
        _, dev = helix_developed
        with pytest.raises(GridMismatchError):
            check_conditions(helix_frame, helix_curve, dev, 2.0)

    def test_grid_mismatch(self, helix_curve, helix_developed, rng):
        profile = random_angle_profile(rng, 128)
        _, dev = develop(curve_from_angles(profile), profile)
        frame = sextet(omega_profile(profile))
        with pytest.raises(GridMismatchError):
            check_conditions(frame, helix_curve, dev, 0.01)

    def test_planar_directrix_is_exact(self):
        """A curve in the plane v = 0 develops by a rigid motion, so every identity holds to rounding"""
        spec = parse_curve_spec({"family": "expressions", "params": {"t": "tau", "u": "tau^2", "v": "0"},
                                 "range": [0.2, 1.2], "samples": 1001})
        curve = sample_curve(spec)
        profile, dev = develop(curve, angles_from_curve(curve))
        spacing = curve.tau[1] - curve.tau[0]
        report = check_conditions(sextet(profile), curve, dev, 10 * spacing)
        for entry in report.entries:
            assert entry.max_residual <= 1e-12, entry.check
        assert report.passed

    def test_planar_frame_has_no_tangent_relation(self):
        spec = parse_curve_spec({"family": "expressions", "params": {"t": "tau", "u": "tau^2", "v": "0"},
                                 "range": [0.2, 1.2], "samples": 201})
        curve = sample_curve(spec)
        profile, _ = develop(curve, angles_from_curve(curve))
        with pytest.raises(DegenerateError, match="constant frame"):
            check_tangent_relation(sextet(profile))

    def test_flipped_lambda_breaks_orthogonality(self, helix_curve, helix_developed, helix_frame):
        """Negating lambda alone leaves l lambda + m mu + n nu = -2 l lambda"""
        _, dev = helix_developed
        second = helix_frame.second.copy()
        second[:, 0] *= -1.0
        broken = FrameSextet(tau=helix_frame.tau, omega=helix_frame.omega, first=helix_frame.first, second=second)
        spacing = helix_curve.tau[1] - helix_curve.tau[0]
        report = check_conditions(broken, helix_curve, dev, 10 * spacing)
        entry = report.get("sextet.VI")
        assert not entry.passed
        assert entry.max_residual == pytest.approx(np.max(np.abs(2.0 * helix_frame.l * helix_frame.lam)), rel=1e-9)
        assert report.get("sextet.IV").passed and report.get("sextet.V").passed


class TestNormalizationLabel:
    """Test suite for the tangent relation's report label"""

    def test_names_the_scale(self):
        assert "max(|dl| + |dlambda|)" in TANGENT_RELATION_NORMALIZATION
        assert "cos(omega)" in TANGENT_RELATION_NORMALIZATION
