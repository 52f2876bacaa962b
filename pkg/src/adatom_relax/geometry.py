"""Discrete couples: polygons whose edges carry an adatom density.

A :class:`DiscreteCouple` stores one or more closed loops. Edge ``i`` runs
from vertex ``i`` to the next vertex of the same loop and carries density
``facet_density[i]``. Outer loops are counterclockwise; holes are clockwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.interpolate import BSpline
from scipy.spatial import cKDTree

from ._validation import (
    DomainError,
    FrameError,
    GeometryError,
    as_points,
    as_vector,
    check_nonnegative,
)
from .density import EnergyDensity, Envelope, build_envelope, eval_envelope

Window = tuple[float, float, float, float]


class WindowBoundaryWarning(UserWarning):
    """A polygon vertex lies on the boundary of a probe window."""


@dataclass(frozen=True, eq=False)
class DiscreteCouple:
    vertices: np.ndarray
    facet_density: np.ndarray
    loop_sizes: tuple[int, ...] = ()
    closed: bool = True

    def __post_init__(self):
        v = as_points("vertices", self.vertices)
        d = as_vector("facet_density", self.facet_density, v.shape[0])
        if np.any(d < 0):
            raise DomainError("facet densities must be nonnegative")
        sizes = tuple(int(k) for k in self.loop_sizes) or (v.shape[0],)
        if sum(sizes) != v.shape[0] or min(sizes) < (3 if self.closed else 2):
            raise GeometryError(f"invalid loop sizes {sizes} for {v.shape[0]} vertices")
        if not self.closed and len(sizes) != 1:
            raise GeometryError("open polylines have exactly one component")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "facet_density", d)
        object.__setattr__(self, "loop_sizes", sizes)

    @classmethod
    def from_loops(cls, loops: Sequence[np.ndarray], densities: Sequence) -> "DiscreteCouple":
        if len(loops) == 0:
            raise GeometryError("need at least one loop")
        pts = [as_points("loop", lp, 3) for lp in loops]
        dens = [np.broadcast_to(np.asarray(d, dtype=float), (len(p),)) for p, d in zip(pts, densities)]
        return cls(np.vstack(pts), np.concatenate(dens), tuple(len(p) for p in pts))

    @classmethod
    def concat(cls, couples: Iterable["DiscreteCouple"]) -> "DiscreteCouple":
        couples = [c for c in couples if c is not None]
        if not couples:
            raise GeometryError("nothing to concatenate")
        return cls(
            np.vstack([c.vertices for c in couples]),
            np.concatenate([c.facet_density for c in couples]),
            tuple(s for c in couples for s in c.loop_sizes),
        )

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.n_vertices if self.closed else self.n_vertices - 1

    def loop_slices(self) -> Iterator[slice]:
        start = 0
        for size in self.loop_sizes:
            yield slice(start, start + size)
            start += size

    def loops(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for sl in self.loop_slices():
            yield self.vertices[sl], self.facet_density[sl]

    def next_index(self) -> np.ndarray:
        idx = np.arange(self.n_vertices) + 1
        if self.closed:
            start = 0
            for size in self.loop_sizes:
                idx[start + size - 1] = start
                start += size
        return idx

    def prev_index(self) -> np.ndarray:
        nxt = self.next_index()
        prev = np.empty_like(nxt)
        prev[nxt[: self.n_edges]] = np.arange(self.n_edges)
        if not self.closed:
            prev[0] = 0
        return prev

    def edge_vectors(self) -> np.ndarray:
        nxt = self.next_index()[: self.n_edges]
        return self.vertices[nxt] - self.vertices[: self.n_edges]

    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*self.edge_vectors().T)

    def edge_densities(self) -> np.ndarray:
        return self.facet_density[: self.n_edges]

    def signed_area(self) -> float:
        if not self.closed:
            return 0.0
        p = self.vertices
        q = p[self.next_index()]
        return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))

    def loop_areas(self) -> list[float]:
        out = []
        for pts, _ in self.loops():
            q = np.roll(pts, -1, axis=0)
            out.append(0.5 * float(np.sum(pts[:, 0] * q[:, 1] - q[:, 0] * pts[:, 1])))
        return out

    def boundary_mass(self) -> float:
        return float(np.dot(self.edge_lengths(), self.edge_densities()))

    def with_density(self, density) -> "DiscreteCouple":
        d = np.broadcast_to(np.asarray(density, dtype=float), (self.n_vertices,)).copy()
        return DiscreteCouple(self.vertices, d, self.loop_sizes, self.closed)

    def scaled(self, factor: float, center=(0.0, 0.0)) -> "DiscreteCouple":
        c = np.asarray(center, dtype=float)
        return DiscreteCouple(c + factor * (self.vertices - c), self.facet_density, self.loop_sizes, self.closed)

    def reversed_loops(self) -> "DiscreteCouple":
        """Flip the orientation of every loop, keeping edge densities attached."""
        verts, dens = [], []
        for pts, d in self.loops():
            verts.append(pts[::-1])
            # edge i (p_i -> p_{i+1}) becomes edge from p_{i+1} -> p_i
            dens.append(np.roll(d[::-1], -1))
        return DiscreteCouple(np.vstack(verts), np.concatenate(dens), self.loop_sizes, self.closed)

    def bounds(self) -> Window:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def polygon_loop(points, density=0.0, orient: bool = True) -> DiscreteCouple:
    """Single-loop couple, reoriented counterclockwise when ``orient`` is set."""
    pts = as_points("points", points, 3)
    dens = np.broadcast_to(np.asarray(density, dtype=float), (len(pts),)).copy()
    c = DiscreteCouple(pts, dens)
    if c.signed_area() == 0:
        raise GeometryError("polygon has zero area")
    if orient and c.signed_area() < 0:
        c = c.reversed_loops()
    return c


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), density=0.0, phase: float = 0.0) -> DiscreteCouple:
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    return polygon_loop(pts, density)


def is_simple(c: DiscreteCouple) -> bool:
    """True when every loop is simple and no two loops intersect."""
    from shapely.geometry import LinearRing, LineString

    rings = []
    for pts, _ in c.loops():
        ring = LinearRing(pts) if c.closed else LineString(pts)
        if not ring.is_simple:
            return False
        rings.append(ring)
    if len(rings) > 1:
        from shapely.strtree import STRtree

        tree = STRtree(rings)
        for i, ring in enumerate(rings):
            for j in tree.query(ring):
                if j > i and ring.intersects(rings[j]):
                    return False
    return True


def _clip_lengths(p: np.ndarray, q: np.ndarray, window: Window) -> np.ndarray:
    """Length of each segment ``p -> q`` inside an axis-aligned rectangle."""
    x0, y0, x1, y1 = window
    d = q - p
    t0 = np.zeros(len(p))
    t1 = np.ones(len(p))
    for axis, lo, hi in ((0, x0, x1), (1, y0, y1)):
        dd = d[:, axis]
        pp = p[:, axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (lo - pp) / dd
            tb = (hi - pp) / dd
        moving = dd != 0
        enter = np.where(moving, np.minimum(ta, tb), -np.inf)
        leave = np.where(moving, np.maximum(ta, tb), np.inf)
        outside = ~moving & ((pp < lo) | (pp > hi))
        t0 = np.maximum(t0, enter)
        t1 = np.minimum(t1, leave)
        t1 = np.where(outside, t0, t1)
    frac = np.clip(t1 - t0, 0.0, 1.0)
    return frac * np.hypot(d[:, 0], d[:, 1])


def _check_window(window) -> Window:
    x0, y0, x1, y1 = (float(v) for v in window)
    if not (x1 > x0 and y1 > y0):
        raise DomainError(f"window must satisfy x0 < x1 and y0 < y1, got {window!r}")
    return (x0, y0, x1, y1)


def vertices_on_window_boundary(c: DiscreteCouple, window: Window, tol: float = 1e-12) -> np.ndarray:
    x0, y0, x1, y1 = _check_window(window)
    x, y = c.vertices[:, 0], c.vertices[:, 1]
    scale = tol * max(1.0, abs(x0), abs(x1), abs(y0), abs(y1))
    inside_x = (x >= x0 - scale) & (x <= x1 + scale)
    inside_y = (y >= y0 - scale) & (y <= y1 + scale)
    on_x = (np.abs(x - x0) <= scale) | (np.abs(x - x1) <= scale)
    on_y = (np.abs(y - y0) <= scale) | (np.abs(y - y1) <= scale)
    return np.nonzero((on_x & inside_y) | (on_y & inside_x))[0]


def _edge_weights(c: DiscreteCouple, window: Window | None, weights: np.ndarray | None) -> float:
    p = c.vertices[: c.n_edges]
    q = c.vertices[c.next_index()[: c.n_edges]]
    if window is None:
        lengths = np.hypot(*(q - p).T)
    else:
        window = _check_window(window)
        if len(vertices_on_window_boundary(c, window)):
            warnings.warn(
                "a vertex lies on the window boundary; edges there are split by the clip",
                WindowBoundaryWarning,
                stacklevel=3,
            )
        lengths = _clip_lengths(p, q, window)
    if weights is None:
        return float(np.sum(lengths))
    return float(np.dot(lengths, weights))


def perimeter(c: DiscreteCouple, window: Window | None = None) -> float:
    """Total edge length, optionally restricted to a rectangle ``(x0, y0, x1, y1)``.

    A :class:`WindowBoundaryWarning` is issued when a vertex sits on the
    window edge.
    """
    return _edge_weights(c, window, None)


def boundary_mass(c: DiscreteCouple, window: Window | None = None) -> float:
    """Integral of the facet density, optionally restricted to a window."""
    return _edge_weights(c, window, c.edge_densities())


def facet_energy(c: DiscreteCouple, psi, window: Window | None = None) -> float:
    """``sum |edge| psi(u_edge)``; ``psi`` may be a density or an envelope."""
    vals = np.asarray(psi(c.edge_densities()), dtype=float)
    return _edge_weights(c, window, vals)


@dataclass(frozen=True)
class RasterDensity:
    """Piecewise constant density on a regular grid, lower-left corner ``(x0, y0)``."""

    x0: float
    y0: float
    dx: float
    dy: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise DomainError("raster values must be a finite nonnegative 2-d array")
        if not (self.dx > 0 and self.dy > 0):
            raise DomainError("raster cell sizes must be positive")
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape

    def mass(self) -> float:
        return float(np.sum(self.values) * self.dx * self.dy)

    def bounds(self) -> Window:
        ny, nx = self.values.shape
        return (self.x0, self.y0, self.x0 + nx * self.dx, self.y0 + ny * self.dy)

    def x_edges(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.shape[1] + 1)

    def y_edges(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.values.shape[0] + 1)


def uniform_raster(window: Window, value: float) -> RasterDensity:
    x0, y0, x1, y1 = _check_window(window)
    return RasterDensity(x0, y0, x1 - x0, y1 - y0, np.array([[float(value)]]))


@dataclass(frozen=True, eq=False)
class AtomMeasure:
    """A couple together with point atoms and an optional absolutely continuous part."""

    carrier: DiscreteCouple | None = None
    atoms: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    raster: RasterDensity | None = None

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(a)):
            raise DomainError("atoms must be finite")
        if np.any(a[:, 2] <= 0):
            raise DomainError("atom masses must be positive")
        object.__setattr__(self, "atoms", a)

    def singular_mass(self) -> float:
        out = float(np.sum(self.atoms[:, 2]))
        if self.raster is not None:
            out += self.raster.mass()
        return out

    def bounds(self) -> Window | None:
        boxes = []
        if self.carrier is not None:
            boxes.append(self.carrier.bounds())
        if len(self.atoms):
            lo, hi = self.atoms[:, :2].min(axis=0), self.atoms[:, :2].max(axis=0)
            boxes.append((lo[0], lo[1], hi[0], hi[1]))
        if self.raster is not None:
            boxes.append(self.raster.bounds())
        if not boxes:
            return None
        b = np.array(boxes)
        return (b[:, 0].min(), b[:, 1].min(), b[:, 2].max(), b[:, 3].max())


def mass(obj: DiscreteCouple | AtomMeasure, rho: float = 1.0) -> float:
    """``rho |E| + total adatom mass`` (bulk plus boundary plus singular parts)."""
    rho = check_nonnegative("rho", rho)
    if isinstance(obj, DiscreteCouple):
        return rho * obj.signed_area() + obj.boundary_mass()
    out = obj.singular_mass()
    if obj.carrier is not None:
        out += rho * obj.carrier.signed_area() + obj.carrier.boundary_mass()
    return out


@dataclass
class EnergyReport:
    perimeter: float
    area: float
    mass: float
    energy_F: float
    energy_Fbar: float
    singular_mass: float

    def to_dict(self):
        return dict(self.__dict__)


def energy(
    obj: DiscreteCouple | AtomMeasure,
    psi: EnergyDensity,
    rho: float = 1.0,
    env: Envelope | None = None,
) -> EnergyReport:
    """Perimeter, area, mass, unrelaxed and relaxed energies.

    The unrelaxed energy is infinite as soon as the measure has a part that is
    not carried by the boundary.
    """
    if env is None:
        env = build_envelope(psi)
    carrier = obj if isinstance(obj, DiscreteCouple) else obj.carrier
    singular = 0.0 if isinstance(obj, DiscreteCouple) else obj.singular_mass()
    if carrier is None:
        per = area = F = Fb = 0.0
    else:
        per = perimeter(carrier)
        area = carrier.signed_area()
        F = facet_energy(carrier, psi)
        Fb = facet_energy(carrier, lambda s: eval_envelope(env, s))
    if singular > 0:
        F = math.inf
    Fb += env.theta * singular
    return EnergyReport(per, area, mass(obj, rho), F, Fb, singular)


# --- distances ---------------------------------------------------------------

_CUBIC = BSpline.basis_element(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]))
_CUBIC_INT = _CUBIC.antiderivative()
_CUBIC_PEAK = 2.0 / 3.0


def _bump(t: np.ndarray) -> np.ndarray:
    inside = np.abs(t) < 2.0
    return np.where(inside, _CUBIC(np.where(inside, t, 0.0)), 0.0) / _CUBIC_PEAK


def _bump_integral(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integral of the normalised bump over ``[a, b]`` (in bump units)."""

    def F(t):
        return _CUBIC_INT(np.clip(t, -2.0, 2.0)) - _CUBIC_INT(-2.0)

    return (F(b) - F(a)) / _CUBIC_PEAK


class BumpDictionary:
    """Tensor-product cubic B-spline bumps on three dyadic scales over a frame.

    Scale ``j`` uses a ``2^(j+1) x 2^(j+1)`` grid of centres, so 4 + 16 + 64
    bumps in total, weighted by ``2^-j``.
    """

    def __init__(self, frame: Window, levels: int = 3):
        self.frame = _check_window(frame)
        self.levels = int(levels)
        x0, y0, x1, y1 = self.frame
        self.scales = []
        for j in range(self.levels):
            n = 2 ** (j + 1)
            hx, hy = (x1 - x0) / n, (y1 - y0) / n
            cx = x0 + hx * (np.arange(n) + 0.5)
            cy = y0 + hy * (np.arange(n) + 0.5)
            # support of each bump spans two grid cells per axis
            self.scales.append((cx, cy, hx / 2.0, hy / 2.0, 2.0**-j))

    @property
    def finest(self) -> float:
        cx, cy, hx, hy, _ = self.scales[-1]
        return min(hx, hy)

    def __len__(self):
        return sum(len(s[0]) * len(s[1]) for s in self.scales)

    def _check_inside(self, box: Window | None):
        if box is None:
            return
        x0, y0, x1, y1 = self.frame
        tol = 1e-12 * max(1.0, *(abs(v) for v in self.frame))
        if box[0] < x0 - tol or box[1] < y0 - tol or box[2] > x1 + tol or box[3] > y1 + tol:
            raise FrameError(f"measure support {box} leaves the frame {self.frame}")

    def _points_moments(self, pts: np.ndarray, w: np.ndarray) -> np.ndarray:
        out = []
        for cx, cy, hx, hy, _ in self.scales:
            bx = _bump((pts[:, 0:1] - cx[None, :]) / hx)
            by = _bump((pts[:, 1:2] - cy[None, :]) / hy)
            out.append(((bx * w[:, None]).T @ by).ravel())
        return np.concatenate(out) if out else np.zeros(0)

    def _edge_points(self, c: DiscreteCouple, order: int = 4):
        p = c.vertices[: c.n_edges]
        q = c.vertices[c.next_index()[: c.n_edges]]
        lengths = np.hypot(*(q - p).T)
        pieces = np.maximum(1, np.ceil(lengths / (self.finest / 4.0)).astype(int))
        edge = np.repeat(np.arange(len(p)), pieces)
        first = np.repeat(np.cumsum(pieces) - pieces, pieces)
        local = np.arange(len(edge)) - first
        a = local / pieces[edge]
        b = (local + 1) / pieces[edge]
        xg, wg = np.polynomial.legendre.leggauss(order)
        tt = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * xg[None, :]
        ww = (0.5 * (b - a) * lengths[edge])[:, None] * wg[None, :]
        pts = p[edge][:, None, :] + tt[..., None] * (q - p)[edge][:, None, :]
        dens = c.edge_densities()[edge][:, None] * ww
        return pts.reshape(-1, 2), dens.reshape(-1)

    def _raster_moments(self, r: RasterDensity) -> np.ndarray:
        xe, ye = r.x_edges(), r.y_edges()
        out = []
        for cx, cy, hx, hy, _ in self.scales:
            ix = _bump_integral((xe[:-1, None] - cx[None, :]) / hx, (xe[1:, None] - cx[None, :]) / hx) * hx
            iy = _bump_integral((ye[:-1, None] - cy[None, :]) / hy, (ye[1:, None] - cy[None, :]) / hy) * hy
            # values[y, x]; moments[cx, cy]
            out.append((ix.T @ r.values.T @ iy).ravel())
        return np.concatenate(out)

    def moments(self, obj) -> np.ndarray:
        """Integrals of every bump against the adatom part of ``obj``."""
        total = np.zeros(len(self))
        carrier = obj if isinstance(obj, DiscreteCouple) else obj.carrier
        if carrier is not None:
            self._check_inside(carrier.bounds())
            pts, w = self._edge_points(carrier)
            total += self._points_moments(pts, w)
        if isinstance(obj, AtomMeasure):
            if len(obj.atoms):
                self._check_inside(AtomMeasure(None, obj.atoms).bounds())
                total += self._points_moments(obj.atoms[:, :2], obj.atoms[:, 2])
            if obj.raster is not None:
                self._check_inside(obj.raster.bounds())
                total += self._raster_moments(obj.raster)
        return total

    def weights(self) -> np.ndarray:
        return np.concatenate([np.full(len(s[0]) * len(s[1]), s[4]) for s in self.scales])

    def distance(self, a, b) -> float:
        return float(np.max(self.weights() * np.abs(self.moments(a) - self.moments(b))))


def _union_bounds(*objs) -> Window:
    boxes = [o.bounds() for o in objs]
    boxes = [b for b in boxes if b is not None]
    if not boxes:
        raise DomainError("cannot build a frame around empty measures")
    b = np.array(boxes)
    x0, y0, x1, y1 = b[:, 0].min(), b[:, 1].min(), b[:, 2].max(), b[:, 3].max()
    pad = 0.1 * max(x1 - x0, y1 - y0, 1e-12)
    return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)


def weakstar_distance(a, b, frame: Window | None = None, levels: int = 3) -> float:
    """Dual distance between adatom measures over a fixed bump dictionary.

    With no ``frame`` the padded joint bounding box is used, which makes values
    comparable only for pairs sharing that box.
    """
    if frame is None:
        frame = _union_bounds(a, b)
    return BumpDictionary(frame, levels).distance(a, b)


def _point_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    ap = points - a
    denom = np.sum(ab * ab, axis=-1)
    t = np.clip(np.sum(ap * ab, axis=-1) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    return np.hypot(*(ap - t[..., None] * ab).T)


def _subdivide(c: DiscreteCouple, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Points along every edge no farther than ``spacing / 2`` from any edge point, with owning edge."""
    p = c.vertices[: c.n_edges]
    q = c.vertices[c.next_index()[: c.n_edges]]
    pieces = np.maximum(1, np.ceil(np.hypot(*(q - p).T) / spacing).astype(np.int64))
    edge = np.repeat(np.arange(len(p)), pieces)
    first = np.repeat(np.cumsum(pieces) - pieces, pieces)
    t = (np.arange(len(edge)) - first + 0.5) / pieces[edge]
    return p[edge] + t[:, None] * (q - p)[edge], edge


def _segment_distances(points: np.ndarray, c: DiscreteCouple, chunk: int = 20_000) -> np.ndarray:
    """Exact distance from each point to the polygon boundary.

    Helper points every ``s`` along the edges give an upper bound ``d_h``; the
    nearest boundary point then has a helper within ``d_h + s / 2``, so only the
    edges owning those helpers need an exact point-to-segment test.
    """
    p = c.vertices[: c.n_edges]
    q = c.vertices[c.next_index()[: c.n_edges]]
    lengths = np.hypot(*(q - p).T)
    s = max(float(np.median(lengths)), 1e-300)
    helpers, owner = _subdivide(c, s)
    tree = cKDTree(helpers)
    out = np.empty(len(points))
    for lo in range(0, len(points), chunk):
        pts = points[lo : lo + chunk]
        d_h, _ = tree.query(pts)
        hits = tree.query_ball_point(pts, d_h + 0.5 * s + 1e-12 * (1.0 + d_h))
        counts = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
        flat = np.fromiter((i for h in hits for i in h), dtype=np.int64, count=int(counts.sum()))
        row = np.repeat(np.arange(len(pts)), counts)
        e = owner[flat]
        d = _point_segment(pts[row], p[e], q[e])
        best = np.full(len(pts), np.inf)
        np.minimum.at(best, row, d)
        out[lo : lo + chunk] = best
    return out


def hausdorff_distance(a: DiscreteCouple, b: DiscreteCouple, spacing: float | None = None) -> float:
    """Hausdorff distance between the two boundaries.

    Distances to a polyline are exact; each boundary is sampled at its
    vertices and at points ``spacing`` apart along its edges (default: the
    median edge length of that boundary). Distance functions are 1-Lipschitz,
    so the result is at most ``spacing / 2`` below the exact value.
    """

    def samples(c):
        h = spacing if spacing is not None else float(np.median(c.edge_lengths()))
        pts, _ = _subdivide(c, max(h, 1e-300))
        return np.vstack([c.vertices, pts])

    return float(max(_segment_distances(samples(a), b).max(), _segment_distances(samples(b), a).max()))


def set_distance(a: DiscreteCouple, b: DiscreteCouple) -> float:
    """Area of the symmetric difference of the enclosed regions (even-odd rule)."""
    from shapely.geometry import Polygon

    def region(c):
        out = None
        for pts, _ in c.loops():
            poly = Polygon(pts).buffer(0)
            out = poly if out is None else out.symmetric_difference(poly)
        return out

    return float(region(a).symmetric_difference(region(b)).area)
