"""
Base Check Module

Defines the foundational check classes and types for developability
certification.
"""

from abc import ABC, abstractmethod
from enum import Enum
from time import perf_counter
from typing import Any, Dict, Optional
import inspect
import logging

from ..report import ReportEntry, Residual

logger = logging.getLogger(__name__)


class CheckStatus(Enum):
    """Enumeration of possible check states"""
    READY = "ready"
    RUNNING = "running"
    PASSED = "passed"
    FAILED = "failed"
    ERROR = "error"


class BaseCheck(ABC):
    """
    Abstract base class for all verification checks.

    Subclasses compute a residual in execute(); run() wraps it with input
    validation, timing and error capture and turns it into a ReportEntry.
    A failing residual never raises.
    """

    # How the residual is scaled, recorded in the entry when set
    normalization: Optional[str] = None

    def __init__(self, check_id: str, tolerance: float, seed: Optional[int] = None):
        """
        Initialize the base check.

        Args:
            check_id: Identifier used as the report entry's check name
            tolerance: Pass threshold on the maximum residual
            seed: Seed of the sample generator, recorded in the entry
        """
        self.check_id = check_id
        self.tolerance = tolerance
        self.seed = seed
        self.status = CheckStatus.READY
        self.logger = logging.getLogger(f"{__name__}.{check_id}")

    def validate_input(self, inputs: Dict[str, Any]) -> bool:
        """
        Validate inputs before execution.

        Args:
            inputs: Keyword arguments passed to run()

        Returns:
            True when every argument without a default is given and not None
        """
        required = [name for name, parameter in inspect.signature(self.execute).parameters.items()
                    if parameter.default is parameter.empty
                    and parameter.kind in (parameter.POSITIONAL_OR_KEYWORD, parameter.KEYWORD_ONLY)]
        return all(inputs.get(name) is not None for name in required)

    @abstractmethod
    def execute(self, **inputs: Any) -> Residual:
        """
        Compute the check's residual.

        Returns:
            Residual with maximum, location and sample count
        """

    def run(self, **inputs: Any) -> ReportEntry:
        """
        Main entry point with validation and error handling.

        Returns:
            ReportEntry; exceptions are recorded in its error field
        """
        started = perf_counter()
        if not self.validate_input(inputs):
            error_msg = f"Invalid input data for {self.check_id}"
            self.logger.error(error_msg)
            self.status = CheckStatus.ERROR
            return self._entry(Residual(value=float("nan")), started, error=error_msg)

        self.status = CheckStatus.RUNNING
        try:
            residual = self.execute(**inputs)
        except Exception as e:
            self.logger.exception(f"Error in {self.check_id}")
            self.status = CheckStatus.ERROR
            return self._entry(Residual(value=float("nan")), started, error=str(e))

        entry = self._entry(residual, started)
        self.status = CheckStatus.PASSED if entry.passed else CheckStatus.FAILED
        self.logger.info(
            f"{self.check_id}: max residual {entry.max_residual:.3e} "
            f"(tolerance {self.tolerance:.1e}) {self.status.value}"
        )
        return entry

    def _entry(self, residual: Residual, started: float, error: Optional[str] = None) -> ReportEntry:
        return ReportEntry.from_residual(self.check_id, self.tolerance, residual,
                                         ms=(perf_counter() - started) * 1000.0, seed=self.seed, error=error,
                                         normalization=self.normalization)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(check_id='{self.check_id}', status='{self.status.value}')"
