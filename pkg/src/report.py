"""
Verification Report Module

Report entries produced by checks and their JSON form:

    {check, tolerance, max_residual, argmax, samples, seed, pass, ms[, error][, normalization]}
"""

from dataclasses import dataclass, field
from json import JSONEncoder
from typing import Any, Dict, List, Mapping, Optional
from time import perf_counter
import json
import logging
import math

import numpy as np

from .errors import DegenerateError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Residual:
    """Maximum residual of a check with where it occurred"""
    value: float
    argmax: Optional[Dict[str, float]] = None
    samples: int = 0

    @classmethod
    def from_array(cls, residuals, coordinates: Optional[Mapping[str, Any]] = None) -> "Residual":
        """
        Reduce per-sample residuals to their maximum.

        Args:
            residuals: Array of residuals; NaN counts as the maximum
            coordinates: Name to array broadcastable to residuals, reported at the argmax
        """
        residuals = np.asarray(residuals, dtype=float)
        if residuals.size == 0:
            raise DegenerateError("No samples to evaluate")
        flat = residuals.ravel()
        nan = np.flatnonzero(np.isnan(flat))
        index = int(nan[0]) if nan.size else int(np.argmax(flat))
        argmax = None
        if coordinates:
            argmax = {
                name: float(np.broadcast_to(np.asarray(values, dtype=float), residuals.shape).ravel()[index])
                for name, values in coordinates.items()
            }
        return cls(value=float(flat[index]), argmax=argmax, samples=int(residuals.size))


@dataclass
class ReportEntry:
    """One check's outcome"""
    check: str
    tolerance: float
    max_residual: float
    argmax: Optional[Dict[str, float]] = None
    samples: int = 0
    seed: Optional[int] = None
    ms: float = 0.0
    error: Optional[str] = None
    normalization: Optional[str] = None

    @classmethod
    def from_residual(cls, check: str, tolerance: float, residual: Residual, ms: float = 0.0,
                      seed: Optional[int] = None, error: Optional[str] = None,
                      normalization: Optional[str] = None) -> "ReportEntry":
        return cls(check=check, tolerance=tolerance, max_residual=residual.value, argmax=residual.argmax,
                   samples=residual.samples, seed=seed, ms=ms, error=error, normalization=normalization)

    @property
    def passed(self) -> bool:
        # NaN compares false, so an undefined residual fails
        return self.error is None and self.max_residual <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        document = {
            "check": self.check,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "argmax": self.argmax,
            "samples": self.samples,
            "seed": self.seed,
            "pass": self.passed,
            "ms": self.ms,
        }
        if self.error is not None:
            document["error"] = self.error
        if self.normalization is not None:
            document["normalization"] = self.normalization
        return document


@dataclass
class VerificationReport:
    """Collection of report entries, kept sorted by check id"""
    entries: List[ReportEntry] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add(self, entry: ReportEntry) -> None:
        self.entries.append(entry)
        self.entries.sort(key=lambda e: e.check)

    def extend(self, other: "VerificationReport") -> None:
        for entry in other.entries:
            self.add(entry)

    def get(self, check: str) -> Optional[ReportEntry]:
        return next((entry for entry in self.entries if entry.check == check), None)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def failures(self) -> List[ReportEntry]:
        return [entry for entry in self.entries if not entry.passed]

    def to_dict(self) -> Dict[str, Any]:
        document = {
            "pass": self.passed,
            "entries": [entry.to_dict() for entry in self.entries],
        }
        if self.metadata:
            document["metadata"] = self.metadata
        return document

    def to_json(self) -> str:
        return json.dumps(_finite_only(self.to_dict()), cls=ReportEncoder, indent=2) + "\n"


class ReportEncoder(JSONEncoder):
    """JSON encoder that understands numpy scalars and arrays"""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _finite_only(obj: Any) -> Any:
    """Replace NaN and infinities with None so the document is strict JSON"""
    if isinstance(obj, dict):
        return {key: _finite_only(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_only(item) for item in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return None
    return obj


def timed_entry(check: str, tolerance: float, residual: Residual, started: float,
                seed: Optional[int] = None, normalization: Optional[str] = None) -> ReportEntry:
    """Entry whose wall time runs from the perf_counter() value started"""
    return ReportEntry.from_residual(check, tolerance, residual, ms=(perf_counter() - started) * 1000.0, seed=seed,
                                     normalization=normalization)
