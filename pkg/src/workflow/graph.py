"""LangGraph workflow from a curve spec to a verified development"""

from time import perf_counter
from typing import Any, Dict, Optional, TypedDict
import logging

import numpy as np
from langgraph.graph import StateGraph, END

from ..config import Tolerances
from ..constants import DEFAULT_SEED
from ..curve_model import (
    AngleProfile,
    CurveFamily,
    CurveSpec,
    DirectrixCurve,
    angles_from_curve,
    curve_from_angles,
    sample_angles,
    sample_curve,
)
from ..development import DevelopedDirectrix, DevelopmentMap, develop, development_function, development_grid
from ..frame_sextet import TANGENT_RELATION_NORMALIZATION, FrameSextet, check_conditions, check_tangent_relation, sextet
from ..report import ReportEntry, Residual, VerificationReport, timed_entry
from ..tangent_dev import finite_relations_residual, surface_function
from ..verify import IsometryTriangleCheck

logger = logging.getLogger(__name__)

ISOMETRY_STEP = 1e-4
ISOMETRY_SAMPLES = 1000
CONDITION_STRIDE = 10


class DevelopmentState(TypedDict):
    """State schema for the development workflow"""
    spec: CurveSpec
    options: Dict[str, Any]
    curve: Optional[DirectrixCurve]
    profile: Optional[AngleProfile]
    developed: Optional[DevelopedDirectrix]
    development_map: Optional[DevelopmentMap]
    frame: Optional[FrameSextet]
    report: VerificationReport
    metadata: Dict[str, Any]
    errors: list


class DevelopmentWorkflow:
    """
    directrix -> angles -> development -> verification.

    Nodes record failures in state["errors"] and later nodes skip once an
    error is present.
    """

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.graph = self._build_graph()
        self.compiled_graph = self.graph.compile()

    def _build_graph(self) -> StateGraph:
        workflow = StateGraph(DevelopmentState)

        workflow.add_node("directrix", self._directrix_node)
        workflow.add_node("angles", self._angles_node)
        workflow.add_node("development", self._development_node)
        workflow.add_node("verification", self._verification_node)

        workflow.set_entry_point("directrix")

        workflow.add_edge("directrix", "angles")
        workflow.add_edge("angles", "development")
        workflow.add_edge("development", "verification")
        workflow.add_edge("verification", END)

        logger.debug("Development workflow graph constructed")
        return workflow

    def _directrix_node(self, state: DevelopmentState) -> DevelopmentState:
        """Sample the directrix; angle-family specs are integrated from their profile"""
        spec = state["spec"]
        logger.info(f"Directrix node: {spec.family.value}, {spec.samples} samples")
        try:
            if spec.family is CurveFamily.ANGLES:
                state["profile"] = sample_angles(spec)
                state["curve"] = curve_from_angles(state["profile"])
            else:
                state["curve"] = sample_curve(spec)
            state["metadata"]["length"] = abs(state["curve"].length)
        except Exception as e:
            state["errors"].append(f"directrix: {e}")
            logger.error(f"Directrix sampling failed: {e}")
        return state

    def _angles_node(self, state: DevelopmentState) -> DevelopmentState:
        if state["errors"] or state["profile"] is not None:
            return state
        try:
            state["profile"] = angles_from_curve(state["curve"])
        except Exception as e:
            state["errors"].append(f"angles: {e}")
            logger.error(f"Angle profile failed: {e}")
        return state

    def _development_node(self, state: DevelopmentState) -> DevelopmentState:
        if state["errors"]:
            return state
        options = state["options"]
        try:
            profile, developed = develop(state["curve"], state["profile"])
            state["profile"] = profile
            state["developed"] = developed
            if options.get("grid") is not None:
                n_tau, n_s = options["grid"]
                state["development_map"] = development_grid(
                    state["curve"], profile, developed, options["s_range"], n_tau, n_s
                )
            state["metadata"]["developed_length"] = developed.developed_length
            state["metadata"]["omega_span"] = float(developed.omega[-1])
        except Exception as e:
            state["errors"].append(f"development: {e}")
            logger.error(f"Development failed: {e}")
        return state

    def _verification_node(self, state: DevelopmentState) -> DevelopmentState:
        if state["errors"]:
            return state
        checks = state["options"].get("checks", ())
        logger.info(f"Verification node: {', '.join(checks) or 'no checks'}")
        if "isometry" in checks:
            state["report"].add(self._isometry(state))
        if "conditions" in checks:
            try:
                state["report"].extend(self._conditions(state))
            except Exception as e:
                state["errors"].append(f"verification: {e}")
                logger.error(f"Condition checks failed: {e}")
        return state

    def _isometry(self, state: DevelopmentState) -> ReportEntry:
        options = state["options"]
        curve = state["curve"]
        check = IsometryTriangleCheck(tolerance=self.tolerances.isometry, seed=options.get("seed", DEFAULT_SEED))
        return check.run(
            surface=surface_function(curve, state["profile"]),
            development=development_function(state["developed"]),
            tau_range=(float(curve.tau[0]), float(curve.tau[-1])),
            s_range=options["s_range"],
            samples=options.get("samples") or ISOMETRY_SAMPLES,
            h=options.get("step") or ISOMETRY_STEP,
        )

    def _conditions(self, state: DevelopmentState) -> VerificationReport:
        options = state["options"]
        curve, profile = state["curve"], state["profile"]
        step = options.get("step") or CONDITION_STRIDE * float(curve.tau[1] - curve.tau[0])

        frame = state["frame"] = sextet(profile)
        report = check_conditions(frame, curve, state["developed"], step, tolerances=self.tolerances)

        started = perf_counter()
        # |dlambda + dl tan(omega)| multiplied through by cos(omega), over the
        # largest |dl| + |dlambda| of each pair rather than per sample
        relation = check_tangent_relation(frame)
        report.add(timed_entry("sextet.tangent_relation", self.tolerances.tangent_relation, relation, started,
                               normalization=TANGENT_RELATION_NORMALIZATION))

        started = perf_counter()
        s_lo, s_hi = options["s_range"]
        tau, s = np.meshgrid(curve.tau, np.linspace(s_lo, s_hi, 5), indexing="ij")
        residual = finite_relations_residual(curve, profile, tau, s)
        scale = 1.0 + float(np.max(np.abs(curve.position))) + s_hi
        report.add(timed_entry("surface.finite_relations", self.tolerances.conditions_algebraic,
                               Residual.from_array(np.max(residual, axis=-1) / scale, {"tau": tau, "s": s}), started))
        return report

    def invoke(self, spec: CurveSpec, options: Optional[Dict[str, Any]] = None) -> DevelopmentState:
        """
        Run the workflow on a curve spec.

        Args:
            spec: Validated curve spec
            options: grid, s_range, samples, step, seed and checks ("isometry", "conditions")

        Returns:
            Final state; errors lists the failed stages
        """
        options = {"s_range": (0.5, 2.0), **(options or {})}
        state: DevelopmentState = {
            "spec": spec,
            "options": options,
            "curve": None,
            "profile": None,
            "developed": None,
            "development_map": None,
            "frame": None,
            "report": VerificationReport(),
            "metadata": {"family": spec.family.value, "samples": spec.samples},
            "errors": [],
        }

        try:
            final_state = self.compiled_graph.invoke(state)
            logger.info("Workflow execution completed")
            return final_state
        except Exception as e:
            logger.error(f"Workflow execution failed: {str(e)}")
            state["errors"].append(f"Workflow execution failed: {str(e)}")
            return state
