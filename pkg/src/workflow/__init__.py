"""LangGraph development workflow and the acceptance self-test"""

from .graph import DevelopmentState, DevelopmentWorkflow
from .selftest import SelfTest, run_selftest

__all__ = ["DevelopmentState", "DevelopmentWorkflow", "SelfTest", "run_selftest"]
