"""Reading and writing surfaces, scenes, reports, CSV tables and SVG figures."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .polyhedral import PolySurface, SurfaceError, validate
from .triangulation import ChartPolygon, TriangulationError


class InputError(ValueError):
    """Unreadable or malformed input; the CLI maps it to exit code 2."""


def _clean(obj):
    """Plain JSON types: tuples become lists, numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    write_atomic(path, dumps(obj))


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def digest(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_json(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


# ----------------------------------------------------------------------
# surfaces


def read_off(path) -> list[dict]:
    """Faces of a flat surface from an OFF file; polygons are fanned into triangles."""
    try:
        tokens = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].split()
            tokens.extend(line)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        if tokens[0] != "OFF":
            raise InputError(f"{path}: missing OFF header")
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4
        xyz = np.array([float(t) for t in tokens[pos:pos + 3 * nv]]).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            ids = [int(t) for t in tokens[pos + 1:pos + 1 + k]]
            pos += 1 + k
            for j in range(1, k - 1):
                tri = (ids[0], ids[j], ids[j + 1])
                ln = [float(np.linalg.norm(xyz[tri[i]] - xyz[tri[(i + 1) % 3]])) for i in range(3)]
                faces.append({"v": list(tri), "len": ln, "kappa": 0.0})
    except (IndexError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: malformed OFF data") from exc
    return faces


def read_surface(path) -> PolySurface:
    """Surface from native JSON (``{"faces": [...]}``) or, for ``.off`` files, OFF."""
    if str(path).lower().endswith(".off"):
        raw = read_off(path)
    else:
        data = _read_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("faces"), list):
            raise InputError(f"{path}: expected an object with a 'faces' list")
        raw = data["faces"]
    try:
        return validate(raw, provenance=f"file:{Path(path).name}")
    except SurfaceError as exc:
        raise InputError(f"{path}: " + "; ".join(exc.violations)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed face record ({exc})") from exc


def surface_json(surface: PolySurface, derived: bool = False) -> dict:
    return surface.to_dict(derived=derived)


# ----------------------------------------------------------------------
# scenes


def read_scene(path, kappa: float | None = None) -> tuple[ChartPolygon, list[ChartPolygon]]:
    """Parent triangle and family polygons in chart coordinates.

    Format: ``{"kappa": k, "parent": [[x, y] x 3], "family": [[[x, y], ...], ...]}``.
    """
    data = _read_json(path)
    if not isinstance(data, dict) or "parent" not in data:
        raise InputError(f"{path}: expected an object with 'parent' and 'family'")
    k = float(data.get("kappa", 0.0)) if kappa is None else kappa
    try:
        parent = ChartPolygon.from_points([complex(*xy) for xy in data["parent"]], k)
        family = [ChartPolygon.from_points([complex(*xy) for xy in poly], k) for poly in data.get("family", [])]
    except TriangulationError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed coordinates ({exc})") from exc
    if len(parent.vertices) != 3:
        raise InputError(f"{path}: parent must be a triangle")
    return parent, family


def scene_json(parent: ChartPolygon, family: Sequence[ChartPolygon]) -> dict:
    return {"kappa": parent.kappa, "parent": parent.to_list(), "family": [f.to_list() for f in family]}


# ----------------------------------------------------------------------
# SVG


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def refinement_svg(points: Sequence[complex], triangles: Sequence[Sequence[int]], owner: Sequence,
                   family: Sequence[ChartPolygon], size: int = 600) -> str:
    pts = np.array([[z.real, z.imag] for z in points])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 20

    def xy(z: complex) -> str:
        x = pad + (z.real - lo[0]) / span * (size - 2 * pad)
        y = size - pad - (z.imag - lo[1]) / span * (size - 2 * pad)
        return f"{x:.3f},{y:.3f}"

    palette = ["#8dd3c7", "#fdb462", "#bebada", "#fb8072", "#80b1d3", "#b3de69"]
    body = []
    for t, o in zip(triangles, owner):
        fill = "#f4f4f4" if o is None else palette[o % len(palette)]
        body.append(f'<polygon points="{" ".join(xy(points[i]) for i in t)}" fill="{fill}" '
                    f'stroke="#444" stroke-width="0.6"/>')
    for f in family:
        body.append(f'<polygon points="{" ".join(xy(v) for v in f.vertices)}" fill="none" '
                    f'stroke="black" stroke-width="2"/>')
    return _svg(size, size, body)


def profile_svg(r: np.ndarray, lam: np.ndarray, K: np.ndarray, kappa: float, delta: float,
                width: int = 640, height: int = 420) -> str:
    """Two stacked panels, conformal factor and curvature against log r."""
    x = np.log10(r)
    x0, x1 = float(x.min()), float(x.max())
    pad = 40
    panel = (height - 3 * pad) / 2

    def poly(y: np.ndarray, top: float, colour: str) -> list[str]:
        fin = np.isfinite(y)
        lo, hi = float(np.min(y[fin])), float(np.max(y[fin]))
        if hi - lo < 1e-300:
            hi = lo + 1.0
        X = pad + (x[fin] - x0) / (x1 - x0 or 1.0) * (width - 2 * pad)
        Y = top + panel - (y[fin] - lo) / (hi - lo) * panel
        path = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(X, Y))
        return [
            f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.5"/>',
            f'<text x="{pad}" y="{top - 6:.1f}" font-size="12">[{lo:.6g}, {hi:.6g}]</text>',
        ]

    xd = pad + (math.log10(delta) - x0) / (x1 - x0 or 1.0) * (width - 2 * pad)
    body = poly(lam, pad, "#1f77b4") + poly(K, 2 * pad + panel, "#d62728")
    body.append(f'<line x1="{xd:.2f}" y1="{pad}" x2="{xd:.2f}" y2="{height - pad}" stroke="#999" '
                f'stroke-dasharray="4 3"/>')
    body.append(f'<text x="{width - pad}" y="{height - 10}" font-size="12" text-anchor="end">'
                f'log10 r; kappa = {kappa:g}</text>')
    return _svg(width, height, body)
