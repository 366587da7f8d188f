"""
Tests for curve specs, sampling and angle profiles.
"""

import json

import numpy as np
import pytest

from src.curve_model import (
    CurveFamily,
    Helix,
    angles_from_curve,
    curve_from_angles,
    curve_from_spec,
    fold_angles,
    interpolate_samples,
    parse_curve_spec,
    profile_table,
    random_angle_profile,
    sample_angles,
    sample_curve,
)
from src.errors import ParameterRangeError, RegularityError, SingularityError, SpecError


def _expressions(t, u, v, samples=1001, lo=0.3, hi=2.8):
    return parse_curve_spec({
        "family": "expressions",
        "params": {"t": t, "u": u, "v": v},
        "range": [lo, hi],
        "samples": samples,
    })


class TestCurveSpec:
    """Test suite for curve-spec validation"""

    def test_helix_defaults(self):
        """Radius and pitch default to 1"""
        spec = parse_curve_spec('{"family": "helix", "range": [0, 1], "samples": 16}')
        assert spec.family is CurveFamily.HELIX
        assert spec.params == {"radius": 1.0, "pitch": 1.0}
        assert spec.tau_range == (0.0, 1.0)
        assert len(spec.grid) == 16

    def test_data_files_parse(self, test_data_dir):
        """Every curve spec shipped in data/ is valid"""
        for name in ("helix.json", "helix_expressions.json", "angles_profile.json", "twisted_cubic.json"):
            spec = parse_curve_spec((test_data_dir / name).read_text())
            assert spec.samples >= 8

    def test_samples_required(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "helix", "range": [0, 1]})
        assert info.value.key == "samples"

    def test_reversed_range(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "helix", "range": [1, 0], "samples": 16})
        assert info.value.key == "range"

    def test_unknown_top_level_key(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "helix", "range": [0, 1], "samples": 16, "bogus": 1})
        assert info.value.key == "bogus"

    def test_unknown_family(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "spiral", "range": [0, 1], "samples": 16})
        assert info.value.key == "family"

    def test_negative_radius(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "helix", "params": {"radius": -1}, "range": [0, 1], "samples": 16})
        assert info.value.key == "params.radius"

    def test_missing_expression(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "expressions", "params": {"t": "tau", "u": "tau"},
                              "range": [0, 1], "samples": 16})
        assert info.value.key == "params.v"

    def test_expression_syntax_error_names_key(self):
        """A bad expression is reported against its parameter"""
        with pytest.raises(SpecError) as info:
            _expressions("tau", "sin(tau", "tau")
        assert info.value.key == "params.u"

    def test_wrong_variable(self):
        """Expressions of the expressions family are written in tau"""
        with pytest.raises(SpecError) as info:
            _expressions("t", "tau", "tau")
        assert info.value.key == "params.t"

    def test_malformed_json(self):
        with pytest.raises(SpecError, match="Malformed JSON"):
            parse_curve_spec('{"family": ')

    def test_sampled_points_shape(self):
        with pytest.raises(SpecError) as info:
            parse_curve_spec({"family": "sampled", "params": {"points": [[0, 1]] * 10}, "range": [0, 1]})
        assert info.value.key == "params.points"

    def test_sampled_count_mismatch(self):
        points = [[k, k * k, 0.0] for k in range(10)]
        with pytest.raises(SpecError):
            parse_curve_spec({"family": "sampled", "params": {"points": points}, "range": [0, 1], "samples": 12})


class TestAngles:
    """Test suite for the angle fold and conversions"""

    def test_fold_reverses_negative_dt(self):
        """A triple with dt < 0 is reversed before the angles are taken"""
        zeta, theta = fold_angles(np.array([-1.0, -1.0, 1.0]))
        assert zeta == pytest.approx(np.pi / 4)
        assert theta == pytest.approx(np.arccos(-1.0 / np.sqrt(3.0)))

    def test_fold_keeps_positive_dt(self):
        zeta, theta = fold_angles(np.array([1.0, 0.0, 0.0]))
        assert zeta == pytest.approx(np.pi / 2)
        assert theta == pytest.approx(np.pi / 2)

    def test_helix_angles_closed_form(self, helix_curve):
        """Unit helix: zeta = pi - tau and theta = 3 pi / 4"""
        profile = angles_from_curve(helix_curve)
        np.testing.assert_allclose(profile.zeta, np.pi - helix_curve.tau, atol=1e-12)
        np.testing.assert_allclose(profile.theta, 3 * np.pi / 4, atol=1e-12)
        zeta, theta = Helix().angles(helix_curve.tau)
        np.testing.assert_allclose(profile.zeta, zeta, atol=1e-15)
        np.testing.assert_allclose(profile.theta, theta, atol=1e-15)

    def test_dt_sign_change_is_singular(self):
        """Past tau = pi the helix's dt turns positive and the fold would stop mid-curve"""
        spec = parse_curve_spec({"family": "helix", "range": [0.3, 3.5], "samples": 1001})
        curve = sample_curve(spec)
        with pytest.raises(SingularityError, match="changes sign") as info:
            angles_from_curve(curve)
        index = info.value.index
        assert curve.tau[index - 1] < np.pi < curve.tau[index]
        assert f"(sample {index})" in str(info.value)

    def test_round_trip(self, rng):
        """Angles -> curve -> angles recovers the profile"""
        profile = random_angle_profile(rng, 2048)
        back = angles_from_curve(curve_from_angles(profile))
        np.testing.assert_allclose(back.zeta, profile.zeta, atol=1e-12)
        np.testing.assert_allclose(back.theta, profile.theta, atol=1e-12)

    def test_curve_from_angles_starts_at_origin(self, rng):
        curve = curve_from_angles(random_angle_profile(rng, 256))
        assert curve.u[0] == 0.0 and curve.v[0] == 0.0
        np.testing.assert_array_equal(curve.t, curve.tau)

    def test_angle_spec(self, test_data_dir):
        spec = parse_curve_spec((test_data_dir / "angles_profile.json").read_text())
        profile = sample_angles(spec)
        np.testing.assert_allclose(profile.zeta, np.pi - spec.grid)
        np.testing.assert_allclose(profile.theta, 3 * np.pi / 4)
        curve, same = curve_from_spec(spec)
        assert same.samples == curve.samples == spec.samples

    def test_angle_spec_outside_open_interval(self):
        spec = parse_curve_spec({"family": "angles", "params": {"zeta": "t", "theta": "1"},
                                 "range": [-1, 1], "samples": 16})
        with pytest.raises(SingularityError):
            sample_angles(spec)

    def test_profile_table_columns(self, helix_developed):
        profile, _ = helix_developed
        assert list(profile_table(profile)) == ["tau", "zeta", "theta", "omega"]


class TestSampling:
    """Test suite for curve sampling"""

    def test_helix_length(self, helix_curve):
        """Arc length of the unit helix is sqrt(2) per unit tau"""
        assert helix_curve.length == pytest.approx(np.sqrt(2.0) * 2.5, rel=1e-12)
        np.testing.assert_allclose(helix_curve.speed, np.sqrt(2.0))

    def test_expressions_match_helix(self, helix_curve):
        """Finite-difference differentials agree with the closed form"""
        spec = _expressions("cos(tau)", "sin(tau)", "tau", samples=4001)
        curve = sample_curve(spec)
        np.testing.assert_allclose(curve.position, helix_curve.position, atol=1e-14)
        np.testing.assert_allclose(curve.differential, helix_curve.differential, atol=1e-6)

    def test_constant_curve_is_irregular(self):
        with pytest.raises(RegularityError):
            sample_curve(_expressions("1", "2", "3"))

    def test_zero_dt_is_singular(self):
        """A curve in a plane t = const has no defined zeta fold"""
        with pytest.raises(SingularityError) as info:
            angles_from_curve(sample_curve(_expressions("0 * tau", "tau", "tau")))
        assert info.value.index == 0

    def test_arrays_are_read_only(self, helix_curve):
        with pytest.raises(ValueError):
            helix_curve.position[0, 0] = 1.0

    def test_interpolation_range(self, helix_curve):
        with pytest.raises(ParameterRangeError):
            interpolate_samples(helix_curve.tau, helix_curve.position, 10.0)
        np.testing.assert_allclose(interpolate_samples(helix_curve.tau, helix_curve.position, helix_curve.tau[7]),
                                   helix_curve.position[7])

    def test_spec_from_text(self, test_data_dir):
        document = json.loads((test_data_dir / "helix.json").read_text())
        assert parse_curve_spec(document).samples == 25001
