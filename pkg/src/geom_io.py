"""
Geometry I/O Module

Deterministic writers for meshes (OBJ), developments (SVG), tables (CSV)
and verification reports (JSON). Every number is written with 17
significant digits so binary64 values survive a round trip.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union
import io
import logging

import numpy as np
import pandas as pd
import svgwrite

from .constants import FLOAT_FORMAT
from .development import DevelopedDirectrix, DevelopmentMap
from .errors import GeomIOError
from .report import VerificationReport
from .tangent_dev import SurfaceMesh

logger = logging.getLogger(__name__)

OBJ_HEADER = "# devsurf OBJ export"
SVG_FLIP_NOTE = "Coordinates are (T, -U): SVG y grows downward, so the development's U axis is negated."


@dataclass
class Mesh3Doc:
    """Vertices with 1-based polygon faces, as written to OBJ"""
    vertices: np.ndarray
    faces: List[Tuple[int, ...]] = field(default_factory=list)
    provenance: Optional[np.ndarray] = None

    def vertex_array(self) -> np.ndarray:
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.size == 0:
            return vertices.reshape(0, 3)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise GeomIOError("Mesh vertices must be (x, y, z) triples")
        return vertices

    def validate(self) -> None:
        """
        Raises:
            GeomIOError: malformed vertices, NaN coordinates or face indices out of range
        """
        vertices = self.vertex_array()
        if not np.all(np.isfinite(vertices)):
            raise GeomIOError("Mesh has non-finite vertex coordinates")
        count = len(vertices)
        for number, face in enumerate(self.faces):
            if len(face) < 3:
                raise GeomIOError(f"Face {number + 1} has fewer than 3 vertices")
            if any(not 1 <= index <= count for index in face):
                raise GeomIOError(f"Face {number + 1} references a vertex outside 1..{count}")
        if self.provenance is not None and np.shape(self.provenance) != (count, 2):
            raise GeomIOError("Provenance must hold one (tau, s) pair per vertex")


@dataclass
class Flat2Doc:
    """Developed directrix polyline and ruling segments in the (T, U) plane"""
    directrix: np.ndarray
    rulings: List[Tuple[Tuple[float, float], Tuple[float, float]]] = field(default_factory=list)

    def points(self) -> np.ndarray:
        parts = [np.asarray(self.directrix, dtype=float).reshape(-1, 2)]
        if self.rulings:
            parts.append(np.asarray(self.rulings, dtype=float).reshape(-1, 2))
        return np.concatenate(parts)

    @property
    def bounding_box(self) -> Tuple[float, float, float, float]:
        """(min T, min U, max T, max U)"""
        points = self.points()
        if len(points) == 0:
            return 0.0, 0.0, 0.0, 0.0
        lo, hi = points.min(axis=0), points.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def validate(self) -> None:
        if not np.all(np.isfinite(self.points())):
            raise GeomIOError("Development has non-finite coordinates")
        if len(self.points()) == 0:
            raise GeomIOError("Development is empty")


def mesh_document(mesh: SurfaceMesh, provenance: bool = True) -> Mesh3Doc:
    """Quad mesh of a surface grid, faces shifted to 1-based indices"""
    faces = [tuple(int(i) + 1 for i in quad) for quad in mesh.faces()]
    return Mesh3Doc(
        vertices=mesh.flat_vertices(),
        faces=faces,
        provenance=mesh.provenance() if provenance else None,
    )


def flat_document(dev: DevelopedDirectrix, development: Optional[DevelopmentMap] = None) -> Flat2Doc:
    """Directrix polyline plus one ruling segment per grid row of the development map"""
    rulings = []
    if development is not None:
        for row in development.flat:
            rulings.append(((float(row[0, 0]), float(row[0, 1])), (float(row[-1, 0]), float(row[-1, 1]))))
    return Flat2Doc(directrix=dev.points, rulings=rulings)


def _number(value: float) -> str:
    return FLOAT_FORMAT % value


def export_obj(mesh: Mesh3Doc, include_provenance: bool = False) -> bytes:
    """
    ASCII OBJ: header comment, v lines in vertex order, then f lines.

    With include_provenance, (tau, s) is written as a vt line per vertex and
    faces reference it with the same index.
    """
    mesh.validate()
    lines = [OBJ_HEADER]
    vertices = mesh.vertex_array()
    for x, y, z in vertices:
        lines.append(f"v {_number(x)} {_number(y)} {_number(z)}")

    with_vt = include_provenance and mesh.provenance is not None
    if with_vt:
        for tau, s in mesh.provenance:
            lines.append(f"vt {_number(tau)} {_number(s)}")
    for face in mesh.faces:
        if with_vt:
            lines.append("f " + " ".join(f"{i}/{i}" for i in face))
        else:
            lines.append("f " + " ".join(str(i) for i in face))

    logger.debug(f"OBJ: {len(vertices)} vertices, {len(mesh.faces)} faces")
    return ("\n".join(lines) + "\n").encode("ascii")


def export_svg(
    flat: Flat2Doc,
    padding: float = 0.05,
    directrix_stroke: str = "black",
    ruling_stroke: str = "gray",
    stroke_width: Optional[float] = None,
) -> bytes:
    """
    Standalone SVG: one path for the directrix and one line per ruling.

    Args:
        flat: Development to draw
        padding: Margin around the bounding box, as a fraction of its larger side
        directrix_stroke: Colour of the directrix path
        ruling_stroke: Colour of the ruling lines
        stroke_width: Defaults to 1/500 of the larger side
    """
    flat.validate()
    t_min, u_min, t_max, u_max = flat.bounding_box
    extent = max(t_max - t_min, u_max - u_min) or 1.0
    margin = padding * extent
    width = stroke_width if stroke_width is not None else extent / 500.0

    # y-flip: SVG coordinates are (T, -U)
    view = (t_min - margin, -u_max - margin, t_max - t_min + 2 * margin, u_max - u_min + 2 * margin)
    dwg = svgwrite.Drawing(
        size=(_number(view[2]), _number(view[3])),
        viewBox=" ".join(_number(v) for v in view),
        debug=False,
    )
    dwg.set_desc(desc=SVG_FLIP_NOTE)

    directrix = np.asarray(flat.directrix, dtype=float).reshape(-1, 2)
    if len(directrix):
        commands = [f"M {_number(directrix[0, 0])} {_number(-directrix[0, 1])}"]
        commands += [f"L {_number(t)} {_number(-u)}" for t, u in directrix[1:]]
        dwg.add(dwg.path(d=" ".join(commands), fill="none", stroke=directrix_stroke,
                         stroke_width=_number(width)))

    for (t0, u0), (t1, u1) in flat.rulings:
        dwg.add(dwg.line(start=(_number(t0), _number(-u0)), end=(_number(t1), _number(-u1)),
                         stroke=ruling_stroke, stroke_width=_number(width)))

    buffer = io.StringIO()
    dwg.write(buffer)
    logger.debug(f"SVG: {len(directrix)} directrix points, {len(flat.rulings)} rulings")
    return (buffer.getvalue() + "\n").encode("utf-8")


def export_csv(table: Mapping[str, np.ndarray]) -> bytes:
    """
    Header row then data rows, LF line endings.

    Raises:
        GeomIOError: columns of different lengths
    """
    lengths = {name: len(np.atleast_1d(values)) for name, values in table.items()}
    if len(set(lengths.values())) > 1:
        raise GeomIOError(f"Ragged columns: {lengths}")
    frame = pd.DataFrame({name: np.atleast_1d(np.asarray(values, dtype=float)) for name, values in table.items()})
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n").encode("utf-8")


def read_csv(source: Union[bytes, str, Path]) -> Dict[str, np.ndarray]:
    """Parse a CSV written by export_csv back into float columns"""
    handle = io.BytesIO(source) if isinstance(source, bytes) else source
    try:
        frame = pd.read_csv(handle, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as e:
        raise GeomIOError(f"Cannot parse CSV: {e}") from e
    return {str(name): frame[name].to_numpy(dtype=float) for name in frame.columns}


def export_report_json(report: VerificationReport) -> bytes:
    return report.to_json().encode("utf-8")


def write_output(path: Union[str, Path], data: bytes) -> Path:
    """Write bytes, creating parent directories"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"Wrote {path} ({len(data)} bytes)")
    return path
