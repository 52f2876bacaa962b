"""File formats: polygon and density CSV, measure JSON, SVG and JSON reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .geometry import AtomMeasure, DiscreteCouple, RasterDensity


class InputParseError(ValueError):
    """Malformed input file; carries the offending line and column (1-based)."""

    def __init__(self, message: str, source: str = "<input>", line: int = 0, column: int = 0):
        self.source = source
        self.line = line
        self.column = column
        where = f"{source}:{line}:{column}" if line > 0 else source
        super().__init__(f"{where}: {message}")


def fmt(x: float) -> str:
    """Shortest string that round-trips the float."""
    return repr(float(x))


def _read_rows(path: str | Path) -> list[tuple[int, list[str]]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputParseError(f"cannot read file: {exc.strerror}", str(path)) from None
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row) or row[0].lstrip().startswith("#"):
            continue
        rows.append((lineno, row))
    return rows


def _parse_float(cell: str, source: str, line: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise InputParseError(f"expected a number, got {cell.strip()!r}", source, line, column) from None
    if not math.isfinite(value):
        raise InputParseError("non-finite value", source, line, column)
    return value


def _is_header(row: list[str]) -> bool:
    try:
        float(row[0])
        return False
    except ValueError:
        return True


def read_polygon_csv(path: str | Path) -> DiscreteCouple:
    """Read ``x,y`` rows (one loop) or ``loop,x,y,u`` rows (several loops, with densities)."""
    src = str(path)
    rows = _read_rows(path)
    if rows and _is_header(rows[0][1]):
        header = [h.strip().lower() for h in rows[0][1]]
        rows = rows[1:]
    else:
        header = ["x", "y"] if rows and len(rows[0][1]) == 2 else ["loop", "x", "y", "u"]
    if not rows:
        raise InputParseError("no vertices", src, 1, 1)
    cols = {name: i for i, name in enumerate(header)}
    if "x" not in cols or "y" not in cols:
        raise InputParseError("header must name x and y columns", src, 1, 1)
    pts, dens, loops = [], [], []
    for line, row in rows:
        if len(row) != len(header):
            raise InputParseError(f"expected {len(header)} columns, got {len(row)}", src, line, len(row) + 1)
        pts.append([_parse_float(row[cols[c]], src, line, cols[c] + 1) for c in ("x", "y")])
        dens.append(_parse_float(row[cols["u"]], src, line, cols["u"] + 1) if "u" in cols else 0.0)
        loops.append(int(_parse_float(row[cols["loop"]], src, line, cols["loop"] + 1)) if "loop" in cols else 0)
    loops_arr = np.array(loops)
    order_changes = np.nonzero(np.diff(loops_arr))[0] + 1
    bounds = np.concatenate([[0], order_changes, [len(loops_arr)]])
    sizes = tuple(int(b - a) for a, b in zip(bounds[:-1], bounds[1:]))
    return DiscreteCouple(np.array(pts), np.array(dens), sizes)


def read_values_csv(path: str | Path) -> np.ndarray:
    """One number per row (an optional header line is skipped)."""
    src = str(path)
    rows = _read_rows(path)
    if rows and _is_header(rows[0][1]):
        rows = rows[1:]
    out = []
    for line, row in rows:
        if len(row) != 1:
            raise InputParseError(f"expected one value per row, got {len(row)}", src, line, 2)
        out.append(_parse_float(row[0], src, line, 1))
    return np.array(out)


def write_couple_csv(path: str | Path, c: DiscreteCouple) -> None:
    lines = ["loop,x,y,u"]
    for i, (pts, dens) in enumerate(c.loops()):
        lines.extend(f"{i},{fmt(x)},{fmt(y)},{fmt(u)}" for (x, y), u in zip(pts, dens))
    Path(path).write_text("\n".join(lines) + "\n")


def write_rows_csv(path: str | Path, header: list[str], rows: Iterable[Iterable[Any]]) -> None:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return fmt(v)
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def load_json(path_or_text: str | Path, is_text: bool = False) -> Any:
    src = "<string>" if is_text else str(path_or_text)
    try:
        text = str(path_or_text) if is_text else Path(path_or_text).read_text()
    except OSError as exc:
        raise InputParseError(f"cannot read file: {exc.strerror}", src) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputParseError(exc.msg, src, exc.lineno, exc.colno) from None


def measure_from_dict(data: dict, source: str = "<measure>", base_dir: Path | None = None) -> AtomMeasure:
    """Build an :class:`AtomMeasure` from ``{couple, atoms, raster}``.

    ``couple`` is either ``{"vertices": [[x, y], ...], "density": [...],
    "loop_sizes": [...]}`` or a path to a polygon CSV; ``atoms`` is a list of
    ``{"x", "y", "mass"}``.
    """
    if not isinstance(data, dict):
        raise InputParseError("measure must be a JSON object", source, 1, 1)
    carrier = None
    cdata = data.get("couple")
    try:
        if isinstance(cdata, str):
            path = Path(cdata)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            carrier = read_polygon_csv(path)
        elif isinstance(cdata, dict):
            verts = np.asarray(cdata["vertices"], dtype=float)
            dens = np.asarray(cdata.get("density", np.zeros(len(verts))), dtype=float)
            dens = np.broadcast_to(dens, (len(verts),)).copy()
            carrier = DiscreteCouple(verts, dens, tuple(cdata.get("loop_sizes", ())))
        atoms = np.array([[a["x"], a["y"], a["mass"]] for a in data.get("atoms", [])], dtype=float).reshape(-1, 3)
        raster = None
        if "raster" in data:
            r = data["raster"]
            raster = RasterDensity(float(r["x0"]), float(r["y0"]), float(r["dx"]), float(r["dy"]), np.asarray(r["values"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputParseError):
            raise
        raise InputParseError(f"invalid measure: {exc}", source, 1, 1) from None
    return AtomMeasure(carrier, atoms, raster)


def read_measure_json(path: str | Path) -> AtomMeasure:
    return measure_from_dict(load_json(path), str(path), Path(path).parent)


def measure_to_dict(mu: AtomMeasure) -> dict:
    out: dict[str, Any] = {"atoms": [{"x": float(x), "y": float(y), "mass": float(m)} for x, y, m in mu.atoms]}
    if mu.carrier is not None:
        out["couple"] = {
            "vertices": mu.carrier.vertices.tolist(),
            "density": mu.carrier.facet_density.tolist(),
            "loop_sizes": list(mu.carrier.loop_sizes),
        }
    if mu.raster is not None:
        r = mu.raster
        out["raster"] = {"x0": r.x0, "y0": r.y0, "dx": r.dx, "dy": r.dy, "values": r.values.tolist()}
    return out


def jsonable(obj: Any) -> Any:
    """Convert numpy values and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def report(command: str, config: dict, result: dict, tolerances: dict, provenance: dict | None = None) -> dict:
    return {
        "command": command,
        "config": config,
        "config_hash": config_hash({"command": command, **config}),
        "tolerances": tolerances,
        "result": result,
        "provenance": provenance or {},
    }


def dumps_report(rep: dict) -> str:
    return json.dumps(jsonable(rep), sort_keys=True, indent=2) + "\n"


def _color(value: float, lo: float, hi: float) -> str:
    t = 0.0 if hi <= lo else (value - lo) / (hi - lo)
    t = min(max(t, 0.0), 1.0)
    # blue (low) to red (high)
    r = int(round(40 + 200 * t))
    b = int(round(240 - 200 * t))
    return f"#{r:02x}50{b:02x}"


def write_svg(
    path: str | Path,
    couples: Iterable[DiscreteCouple],
    atoms: np.ndarray | None = None,
    size: int = 800,
    stroke: float = 1.0,
) -> None:
    """Edges coloured by facet density (blue low, red high); atoms as black dots."""
    couples = [c for c in couples if c is not None]
    boxes = [c.bounds() for c in couples]
    if atoms is not None and len(atoms):
        boxes.append((atoms[:, 0].min(), atoms[:, 1].min(), atoms[:, 0].max(), atoms[:, 1].max()))
    if not boxes:
        raise ValueError("nothing to draw")
    b = np.array(boxes)
    x0, y0, x1, y1 = b[:, 0].min(), b[:, 1].min(), b[:, 2].max(), b[:, 3].max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    pad = 0.05 * span
    scale = size / (span + 2 * pad)

    def tx(p):
        return (p[..., 0] - x0 + pad) * scale, (y1 + pad - p[..., 1]) * scale

    dens_all = np.concatenate([c.edge_densities() for c in couples]) if couples else np.zeros(1)
    lo, hi = float(dens_all.min()), float(dens_all.max())
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for c in couples:
        nxt = c.next_index()[: c.n_edges]
        px, py = tx(c.vertices)
        dens = c.edge_densities()
        # group consecutive edges with equal density into one polyline
        i = 0
        while i < c.n_edges:
            j = i
            while j + 1 < c.n_edges and dens[j + 1] == dens[i] and nxt[j] == j + 1:
                j += 1
            idx = list(range(i, j + 1)) + [int(nxt[j])]
            pts = " ".join(f"{px[q]:.3f},{py[q]:.3f}" for q in idx)
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{_color(dens[i], lo, hi)}" '
                f'stroke-width="{stroke}"/>'
            )
            i = j + 1
    if atoms is not None:
        for x, y, m in atoms:
            cx, cy = tx(np.array([x, y]))
            out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill="black"/>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
