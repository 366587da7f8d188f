"""
Tests for the development workflow graph and the acceptance suite.
"""

import io

import pytest

from src.curve_model import parse_curve_spec
from src.frame_sextet import TANGENT_RELATION_NORMALIZATION
from src.workflow import DevelopmentWorkflow, SelfTest


@pytest.fixture(scope="module")
def workflow():
    return DevelopmentWorkflow()


class TestDevelopmentWorkflow:
    """Test suite for the LangGraph development workflow"""

    def test_graph_has_stages(self, workflow):
        assert {"directrix", "angles", "development", "verification"} <= set(workflow.graph.nodes)

    def test_full_run(self, workflow, helix_spec):
        state = workflow.invoke(helix_spec, {"grid": (10, 3), "checks": ("isometry",), "samples": 20})
        assert state["errors"] == []
        assert state["development_map"].flat.shape == (10, 3, 2)
        assert state["metadata"]["family"] == "helix"
        assert state["metadata"]["developed_length"] == pytest.approx(state["metadata"]["length"], rel=1e-6)
        assert [entry.check for entry in state["report"].entries] == ["isometry"]

    def test_no_grid_no_map(self, workflow, helix_spec):
        state = workflow.invoke(helix_spec)
        assert state["development_map"] is None
        assert state["report"].entries == []

    def test_angle_spec(self, workflow, test_data_dir):
        """Angle specs skip the angles stage and integrate their directrix"""
        spec = parse_curve_spec((test_data_dir / "angles_profile.json").read_text())
        state = workflow.invoke(spec)
        assert state["errors"] == []
        assert state["curve"].samples == spec.samples
        assert state["profile"].has_omega

    def test_errors_stop_later_stages(self, workflow):
        spec = parse_curve_spec({"family": "expressions", "params": {"t": "1", "u": "2", "v": "3"},
                                 "range": [0, 1], "samples": 16})
        state = workflow.invoke(spec, {"grid": (4, 2), "checks": ("isometry", "conditions")})
        assert len(state["errors"]) == 1
        assert state["errors"][0].startswith("directrix:")
        assert state["developed"] is None
        assert state["report"].entries == []

    def test_conditions(self, workflow, helix_spec):
        state = workflow.invoke(helix_spec, {"checks": ("conditions",)})
        assert state["errors"] == []
        assert state["frame"] is not None
        checks = [entry.check for entry in state["report"].entries]
        assert "sextet.tangent_relation" in checks
        assert "surface.finite_relations" in checks
        assert state["report"].get("surface.finite_relations").passed

    def test_tangent_relation_names_its_scale(self, workflow, helix_spec):
        state = workflow.invoke(helix_spec, {"checks": ("conditions",)})
        entry = state["report"].get("sextet.tangent_relation")
        assert entry.normalization == TANGENT_RELATION_NORMALIZATION
        assert entry.to_dict()["normalization"] == TANGENT_RELATION_NORMALIZATION


class TestSelfTest:
    """Test suite for the acceptance suite runner"""

    def test_quartic(self):
        entries = SelfTest().quartic_substitution()
        assert [entry.check for entry in entries] == ["selftest.quartic"]
        assert entries[0].passed

    def test_shadow(self):
        entries = SelfTest().shadow_classification()
        assert {entry.check for entry in entries} == {"selftest.cylinder", "selftest.cone", "selftest.homogeneity"}
        assert all(entry.passed for entry in entries)

    def test_same_profiles_at_any_resolution(self):
        suite = SelfTest(seed=3)
        coarse, fine = suite.random_profiles(64), suite.random_profiles(128)
        assert len(coarse) == len(fine)
        assert coarse[0].zeta[0] == fine[0].zeta[0]
        assert suite.random_profiles(64) is coarse

    def test_run_prints_one_line_per_criterion(self, monkeypatch):
        def broken(suite):
            raise RuntimeError("boom")

        monkeypatch.setattr(SelfTest, "criteria", lambda self: [
            ("quartic", "quartic surface substitution", SelfTest.quartic_substitution),
            ("broken", "always raises", broken),
        ])
        stream = io.StringIO()
        report = SelfTest().run(stream)
        lines = stream.getvalue().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("PASS  1 quartic surface substitution")
        assert lines[1].startswith("FAIL  2 always raises")
        assert "boom" in lines[1]
        assert lines[2].startswith("PASS  3 full suite runtime")
        assert report.get("selftest.broken").error == "boom"
        assert report.get("selftest.runtime") is not None
        assert not report.passed
