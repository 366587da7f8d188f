"""
Main Application Entry Point

Command-line front end: parses flags into a RunConfig, configures logging
and dispatches one subcommand.

    python -m src.main unfold --spec data/helix.json --grid 200x20 --out flat.svg --report rep.json

Exit codes: 0 success, 1 a check failed (the report is still written),
2 usage or input error.
"""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import argparse
import logging
import sys

import numpy as np
from pydantic import ValidationError

from .config import LOG_LEVELS, RunConfig, Tolerances, load_environment
from .curve_model import Helix, CurveFamily, CurveSpec, curve_from_spec, parse_curve_spec, profile_table
from .development import DevelopmentMap
from .errors import DevsurfError, SpecError
from .geom_io import (
    export_csv,
    export_obj,
    export_report_json,
    export_svg,
    flat_document,
    mesh_document,
    write_output,
)
from .report import ReportEntry, Residual, VerificationReport
from .shadow_cone import (
    RulingKind,
    ShadowSection,
    classify_ruling_family,
    cone_angular_range,
    cone_surface_function,
    parse_section_spec,
    quad_from_sections,
    quartic_function,
    quartic_sample_points,
    quartic_scale,
    resample,
    section_from_spec,
    shadow_grid,
)
from .tangent_dev import surface_grid
from .verify import HomogeneityCheck, ImplicitDevelopabilityCheck, RulingCoplanarityCheck, parse_implicit_spec
from .verify.coplanarity import helix_ruling_functions, ruling_functions
from .verify.implicit import plane_points, sphere_function, sphere_points
from .workflow.graph import DevelopmentWorkflow
from .workflow.selftest import run_selftest

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

SUBCOMMANDS = {
    "surface": "curve spec -> tangent developable mesh (OBJ)",
    "unfold": "curve spec -> development (SVG, CSV) and isometry report",
    "sextet": "curve spec -> frame sextet condition report",
    "shadow": "two section specs -> shadow surface mesh (OBJ) and classification",
    "verify-implicit": "implicit surface -> curvature report",
    "selftest": "run the acceptance suite",
}

IMPLICIT_STEP = 1e-3
IMPLICIT_SAMPLES = 10_000


class UsageError(DevsurfError):
    """Flags that are valid on their own but not for the chosen subcommand"""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", "-s", action="append", dest="specs", metavar="PATH",
                        help="input spec file (repeat for shadow)")
    common.add_argument("--out", "-o", type=Path, help="geometry output (OBJ or SVG); standard output if omitted")
    common.add_argument("--csv", type=Path, help="table output")
    common.add_argument("--report", type=Path, help="JSON verification report")
    common.add_argument("--grid", metavar="AxB", help="mesh size, tau samples x ruling samples")
    common.add_argument("--s-range", metavar="LO:HI", help="ruling-distance range, 0 < LO < HI")
    common.add_argument("--samples", type=int, help="random samples per check")
    common.add_argument("--step", type=float, help="difference step h")
    common.add_argument("--seed", type=lambda text: int(text, 0), help="sampling seed")
    common.add_argument("--gap", type=float, help="distance between the two section planes")
    common.add_argument("--example", help="built-in implicit surface: quartic, sphere or plane")
    common.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper)
    for name in Tolerances.model_fields:
        common.add_argument(f"--tol-{name.replace('_', '-')}", dest=f"tol_{name}", type=float,
                            metavar="TOL", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="devsurf", description="Developable surfaces: build, unfold, verify.")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, summary in SUBCOMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=summary, description=summary)
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags override environment, environment overrides defaults"""
    settings: Dict[str, Any] = load_environment()
    tolerances = {name: getattr(args, f"tol_{name}") for name in Tolerances.model_fields
                  if getattr(args, f"tol_{name}") is not None}
    flags = {
        "specs": args.specs,
        "out": args.out,
        "csv": args.csv,
        "report": args.report,
        "grid": args.grid,
        "s_range": args.s_range,
        "samples": args.samples,
        "step": args.step,
        "seed": args.seed,
        "gap": args.gap,
        "example": args.example,
        "log_level": args.log_level,
    }
    settings.update({key: value for key, value in flags.items() if value is not None})
    return RunConfig(subcommand=args.subcommand, tolerances=Tolerances(**tolerances), **settings)


# ============================================================
# Subcommands
# ============================================================

def _read_text(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _single_spec(config: RunConfig) -> CurveSpec:
    if len(config.specs) != 1:
        raise UsageError(f"{config.subcommand} needs exactly one --spec, got {len(config.specs)}")
    path = config.specs[0]
    try:
        return parse_curve_spec(_read_text(path))
    except SpecError as e:
        raise SpecError(f"{path}: {e}") from e


def _emit(path: Optional[Path], data: bytes) -> bool:
    """Write to path, or to standard output when no path is given; True if stdout was used"""
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return True
    write_output(path, data)
    return False


def run_surface(config: RunConfig) -> Tuple[VerificationReport, bool]:
    spec = _single_spec(config)
    curve, profile = curve_from_spec(spec)
    n_tau, n_s = config.grid
    mesh = surface_grid(curve, profile, config.s_range, n_tau, n_s)

    report = VerificationReport(metadata={"family": spec.family.value, "vertices": mesh.vertex_count})
    check = RulingCoplanarityCheck(tolerance=config.tolerances.coplanarity)
    if spec.family is CurveFamily.HELIX:
        base, ruling = helix_ruling_functions(Helix.from_spec(spec))
        h = config.step or (curve.tau[1] - curve.tau[0])
    else:
        base, ruling = ruling_functions(curve, profile)
        h = curve.tau[1] - curve.tau[0]
    tau = curve.tau[curve.tau + h <= curve.tau[-1]]
    report.add(check.run(base=base, ruling=ruling, tau=tau, h=float(h)))

    used_stdout = _emit(config.out, export_obj(mesh_document(mesh)))
    return report, used_stdout


def _development_state(config: RunConfig, checks: Sequence[str]) -> Dict[str, Any]:
    spec = _single_spec(config)
    workflow = DevelopmentWorkflow(config.tolerances)
    state = workflow.invoke(spec, {
        "grid": config.grid,
        "s_range": config.s_range,
        "samples": config.samples,
        "step": config.step,
        "seed": config.seed,
        "checks": tuple(checks),
    })
    if state["errors"]:
        raise DevsurfError("; ".join(state["errors"]))
    state["report"].metadata.update(state["metadata"])
    return state


def run_unfold(config: RunConfig) -> Tuple[VerificationReport, bool]:
    state = _development_state(config, ("isometry",))
    development: DevelopmentMap = state["development_map"]
    used_stdout = _emit(config.out, export_svg(flat_document(state["developed"], development)))
    if config.csv is not None:
        write_output(config.csv, export_csv(development.table()))
    return state["report"], used_stdout


def run_sextet(config: RunConfig) -> Tuple[VerificationReport, bool]:
    state = _development_state(config, ("conditions",))
    if config.csv is not None:
        frame = state["frame"]
        table = profile_table(state["profile"])
        for column, name in enumerate(("l", "m", "n")):
            table[name] = frame.first[:, column]
        for column, name in enumerate(("lambda", "mu", "nu")):
            table[name] = frame.second[:, column]
        write_output(config.csv, export_csv(table))
    return state["report"], False


def _load_sections(config: RunConfig) -> Tuple[ShadowSection, ShadowSection, float]:
    if len(config.specs) != 2:
        raise UsageError(f"shadow needs two --spec section files, got {len(config.specs)}")
    sections = []
    for path in config.specs:
        try:
            sections.append(section_from_spec(parse_section_spec(_read_text(path))))
        except SpecError as e:
            raise SpecError(f"{path}: {e}") from e
    section_a, section_b = sections

    gap = config.gap if config.gap is not None else section_b.offset - section_a.offset
    if not gap > 0:
        raise UsageError("section gap must be positive: pass --gap or give the second section a larger offset")

    if not np.array_equal(section_a.phi, section_b.phi):
        lo = max(section_a.phi[0], section_b.phi[0])
        hi = min(section_a.phi[-1], section_b.phi[-1])
        if not lo < hi:
            raise UsageError("sections share no slope range")
        phi = np.linspace(lo, hi, min(section_a.samples, section_b.samples))
        logger.info(f"Resampling sections onto {len(phi)} slopes in [{lo:.6g}, {hi:.6g}]")
        section_a, section_b = resample(section_a, phi), resample(section_b, phi)
    return section_a, section_b, gap


def run_shadow(config: RunConfig) -> Tuple[VerificationReport, bool]:
    section_a, section_b, gap = _load_sections(config)
    tolerances = config.tolerances
    report = VerificationReport(metadata={"gap": gap})

    try:
        quad = quad_from_sections(section_a, section_b, gap)
        report.add(ReportEntry(check="shadow.developability", tolerance=tolerances.developability,
                               max_residual=quad.max_violation, samples=section_a.samples))
    except DevsurfError as e:
        report.add(ReportEntry(check="shadow.developability", tolerance=tolerances.developability,
                               max_residual=float("nan"), error=str(e)))

    classification = classify_ruling_family(section_a, section_b, gap,
                                            tolerances.cylinder_angle, tolerances.cone_apex)
    report.metadata["classification"] = classification.to_dict()
    if classification.kind is RulingKind.CONE:
        rng = np.random.default_rng(config.seed)
        lo, hi = cone_angular_range(classification)
        count = config.samples or 500
        angle = rng.uniform(lo + 1e-6, hi - 1e-6, count)
        radius = rng.uniform(0.5, 2.0, count)
        points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        check = HomogeneityCheck(tolerance=tolerances.homogeneity, seed=config.seed)
        report.add(check.run(function=cone_surface_function(classification), points=points))

    mesh = shadow_grid(section_a, section_b, gap, config.grid[1])
    used_stdout = _emit(config.out, export_obj(mesh_document(mesh)))
    return report, used_stdout


IMPLICIT_EXAMPLES: Dict[str, Tuple[Callable, Callable[[np.random.Generator, int], np.ndarray]]] = {
    "quartic": (quartic_function, quartic_sample_points),
    "sphere": (sphere_function, sphere_points),
    "plane": (lambda x, y, z: x + y + z - 1.0, plane_points),
}
IMPLICIT_EXAMPLES["e419"] = IMPLICIT_EXAMPLES["quartic"]


def run_verify_implicit(config: RunConfig) -> Tuple[VerificationReport, bool]:
    tolerances = config.tolerances
    h = config.step or IMPLICIT_STEP
    report = VerificationReport()

    if config.example is not None:
        if config.specs:
            raise UsageError("give either --example or --spec, not both")
        if config.example not in IMPLICIT_EXAMPLES:
            raise UsageError(f"unknown example '{config.example}'; choose from {', '.join(IMPLICIT_EXAMPLES)}")
        function, sampler = IMPLICIT_EXAMPLES[config.example]
        points = sampler(np.random.default_rng(config.seed), config.samples or IMPLICIT_SAMPLES)
        scale = None
        report.metadata["example"] = config.example
        if function is quartic_function:
            x, y, z = points.T
            substitution = np.abs(quartic_function(x, y, z)) / quartic_scale(x, y, z)
            entry = ReportEntry.from_residual("implicit.substitution", tolerances.quartic,
                                              Residual.from_array(substitution, {"x": x, "y": y, "z": z}),
                                              seed=config.seed)
            report.add(entry)
    elif len(config.specs) == 1:
        path = config.specs[0]
        try:
            spec = parse_implicit_spec(_read_text(path))
        except SpecError as e:
            raise SpecError(f"{path}: {e}") from e
        function, points, scale = spec.function, spec.points, spec.scale
        report.metadata["expression"] = spec.expression.text
    else:
        raise UsageError("verify-implicit needs --example NAME or one --spec file")

    check = ImplicitDevelopabilityCheck(tolerance=tolerances.implicit_curvature, seed=config.seed)
    report.add(check.run(function=function, points=points, h=h, scale=scale))
    return report, False


def run_selftest_command(config: RunConfig) -> Tuple[VerificationReport, bool]:
    # the suite prints its own PASS/FAIL lines
    return run_selftest(config.tolerances, config.seed, sys.stdout), True


HANDLERS: Dict[str, Callable[[RunConfig], Tuple[VerificationReport, bool]]] = {
    "surface": run_surface,
    "unfold": run_unfold,
    "sextet": run_sextet,
    "shadow": run_shadow,
    "verify-implicit": run_verify_implicit,
    "selftest": run_selftest_command,
}


# ============================================================
# Entry point
# ============================================================

def _summary(report: VerificationReport) -> List[str]:
    lines = []
    for entry in report.entries:
        status = "PASS" if entry.passed else "FAIL"
        detail = f" ({entry.error})" if entry.error else ""
        lines.append(f"{status} {entry.check} max_residual={entry.max_residual:.3e} "
                     f"tolerance={entry.tolerance:.1e}{detail}")
    return lines


def _validation_message(error: ValidationError) -> str:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"])
    return f"{key.replace('_', '-')}: {first['msg']}" if key else first["msg"]


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None

    Returns:
        Exit code 0, 1 or 2
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = build_config(args)
    except ValidationError as e:
        print(f"devsurf: error: {_validation_message(e)}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"devsurf: error: {e}", file=sys.stderr)
        return 2

    logging.basicConfig(level=config.log_level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    logger.info(f"devsurf {config.subcommand}")

    try:
        report, used_stdout = HANDLERS[config.subcommand](config)
    except (DevsurfError, OSError) as e:
        logger.debug("Input error", exc_info=True)
        print(f"devsurf: error: {e}", file=sys.stderr)
        return 2

    if config.report is not None:
        write_output(config.report, export_report_json(report))
        if not used_stdout:
            print(f"report written to {config.report}")
    if not used_stdout:
        for line in _summary(report):
            print(line)

    if not report.passed:
        for entry in report.failures:
            logger.error(f"Check {entry.check} failed: max residual {entry.max_residual:.3e} > {entry.tolerance:.1e}")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
