"""
Tests for report entries and run configuration.
"""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.config import RunConfig, Tolerances, load_environment
from src.constants import DEFAULT_SEED
from src.errors import DegenerateError
from src.report import ReportEntry, Residual, VerificationReport


class TestResidual:
    """Test suite for reducing per-sample residuals"""

    def test_argmax_location(self):
        residual = Residual.from_array([0.1, 0.5, 0.2], {"tau": [1.0, 2.0, 3.0]})
        assert residual.value == 0.5
        assert residual.argmax == {"tau": 2.0}
        assert residual.samples == 3

    def test_nan_wins(self):
        """An undefined sample is reported, not skipped"""
        residual = Residual.from_array([0.1, np.nan, 5.0], {"tau": [1.0, 2.0, 3.0]})
        assert math.isnan(residual.value)
        assert residual.argmax == {"tau": 2.0}

    def test_broadcast_coordinates(self):
        tau, s = np.meshgrid([0.0, 1.0], [10.0, 20.0, 30.0], indexing="ij")
        residual = Residual.from_array(tau + s / 100, {"tau": tau[:, :1], "s": s[:1, :]})
        assert residual.argmax == {"tau": 1.0, "s": 30.0}
        assert residual.samples == 6

    def test_empty(self):
        with pytest.raises(DegenerateError):
            Residual.from_array([])


class TestReport:
    """Test suite for VerificationReport"""

    def _entry(self, check, value, tolerance=1.0, **kwargs):
        return ReportEntry(check=check, tolerance=tolerance, max_residual=value, **kwargs)

    def test_sorted_by_check(self):
        report = VerificationReport()
        for name in ("zeta", "alpha", "mid"):
            report.add(self._entry(name, 0.0))
        assert [entry.check for entry in report.entries] == ["alpha", "mid", "zeta"]

    def test_pass_and_failures(self):
        report = VerificationReport()
        report.add(self._entry("ok", 0.5))
        assert report.passed
        report.add(self._entry("bad", 2.0))
        assert not report.passed
        assert [entry.check for entry in report.failures] == ["bad"]

    def test_nan_and_error_fail(self):
        assert not self._entry("nan", float("nan")).passed
        assert not self._entry("err", 0.0, error="boom").passed

    def test_tolerance_is_inclusive(self):
        assert self._entry("edge", 1.0).passed

    def test_get(self):
        report = VerificationReport()
        report.add(self._entry("a", 0.0))
        assert report.get("a").check == "a"
        assert report.get("b") is None

    def test_extend(self):
        first, second = VerificationReport(), VerificationReport()
        first.add(self._entry("b", 0.0))
        second.add(self._entry("a", 0.0))
        first.extend(second)
        assert [entry.check for entry in first.entries] == ["a", "b"]

    def test_json_document(self):
        """Numpy scalars and non-finite values serialise as strict JSON"""
        report = VerificationReport(metadata={"vertices": np.int64(12), "span": np.float64(np.inf)})
        report.add(self._entry("a", np.float64(0.25), argmax={"tau": 1.5}, samples=4, seed=7, ms=1.0))
        document = json.loads(report.to_json())
        assert document["pass"] is True
        assert document["metadata"] == {"vertices": 12, "span": None}
        assert document["entries"][0] == {
            "check": "a", "tolerance": 1.0, "max_residual": 0.25, "argmax": {"tau": 1.5},
            "samples": 4, "seed": 7, "pass": True, "ms": 1.0,
        }

    def test_no_metadata_key_when_empty(self):
        assert "metadata" not in VerificationReport().to_dict()

    def test_normalization_only_when_set(self):
        assert "normalization" not in self._entry("a", 0.0).to_dict()
        entry = ReportEntry.from_residual("b", 1.0, Residual(value=0.5, samples=3), normalization="relative")
        assert entry.to_dict()["normalization"] == "relative"


class TestTolerances:
    """Test suite for tolerance settings"""

    def test_defaults(self):
        tolerances = Tolerances()
        assert tolerances.quartic == 1e-9
        assert tolerances.tangent_relation == 1e-5
        assert (tolerances.convergence_low, tolerances.convergence_high) == (1.7, 4.5)

    def test_flag_names(self):
        names = Tolerances.flag_names()
        assert "tangent-relation" in names
        assert "quartic" in names
        assert len(names) == len(Tolerances.model_fields)

    def test_must_be_positive(self):
        with pytest.raises(ValidationError):
            Tolerances(isometry=0.0)

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            Tolerances(bogus=1.0)


class TestRunConfig:
    """Test suite for command-line settings"""

    def test_defaults(self):
        config = RunConfig(subcommand="unfold")
        assert config.grid == (100, 20)
        assert config.s_range == (0.5, 2.0)
        assert config.seed == DEFAULT_SEED
        assert config.log_level == "WARNING"

    def test_string_pairs(self):
        config = RunConfig(subcommand="surface", grid="50X10", s_range="0.25:3")
        assert config.grid == (50, 10)
        assert config.s_range == (0.25, 3.0)

    @pytest.mark.parametrize("grid", ["1x5", "5", "axb", "5x5x5"])
    def test_bad_grid(self, grid):
        with pytest.raises(ValidationError):
            RunConfig(subcommand="surface", grid=grid)

    @pytest.mark.parametrize("s_range", ["0:1", "2:1", "-1:1", "1"])
    def test_bad_s_range(self, s_range):
        """The range must stay strictly off the edge of regression"""
        with pytest.raises(ValidationError):
            RunConfig(subcommand="surface", s_range=s_range)

    def test_too_many_vertices(self):
        with pytest.raises(ValidationError, match="exceeds"):
            RunConfig(subcommand="surface", grid="10000x10000")

    def test_log_level(self):
        assert RunConfig(subcommand="surface", log_level="debug").log_level == "DEBUG"
        with pytest.raises(ValidationError):
            RunConfig(subcommand="surface", log_level="LOUD")

    def test_output_directory(self, tmp_path):
        assert RunConfig(subcommand="surface", out=tmp_path / "mesh.obj").out == tmp_path / "mesh.obj"
        with pytest.raises(ValidationError, match="not writable"):
            RunConfig(subcommand="surface", out=tmp_path / "missing" / "mesh.obj")

    def test_positive_step_and_gap(self):
        with pytest.raises(ValidationError):
            RunConfig(subcommand="unfold", step=0.0)
        with pytest.raises(ValidationError):
            RunConfig(subcommand="shadow", gap=-1.0)


class TestEnvironment:
    """Test suite for environment overrides"""

    def test_reads_variables(self, monkeypatch):
        monkeypatch.setenv("DEVSURF_LOG_LEVEL", "info")
        monkeypatch.setenv("DEVSURF_SEED", "0x10")
        assert load_environment() == {"log_level": "info", "seed": 16}

    def test_decimal_seed(self, monkeypatch):
        monkeypatch.delenv("DEVSURF_LOG_LEVEL", raising=False)
        monkeypatch.setenv("DEVSURF_SEED", "42")
        assert load_environment() == {"seed": 42}

    def test_unset(self, monkeypatch):
        monkeypatch.delenv("DEVSURF_LOG_LEVEL", raising=False)
        monkeypatch.delenv("DEVSURF_SEED", raising=False)
        assert load_environment() == {}
