"""Length-multiplying wriggles of polygonal boundaries.

Each boundary arc is displaced along its normal field by
``phi(s) sin(t (x - c).v) / k`` where ``v`` is the chord direction of the arc,
``c`` its chord midpoint, ``phi`` a quintic cutoff vanishing at the arc ends
and ``t`` the frequency for which the arc length is multiplied by the target
factor. The displacement never exceeds ``1/k``, so the result stays in the
``1/k`` tube around the input.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from ._validation import (
    DomainError,
    FrequencyError,
    GeometryError,
    as_points,
    as_vector,
    check_positive,
)
from .geometry import DiscreteCouple, is_simple

GL_NODES = 16
FREQ_RTOL = 1e-10
SAMPLES_PER_WAVE = 128
CORNER_ANGLE = math.pi / 6
MAX_TURN = math.pi / 4
MAX_RETRIES = 8

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)


def thread_count() -> int:
    """Worker threads, capped by the ``RELAX_THREADS`` environment variable."""
    cap = os.environ.get("RELAX_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise DomainError(f"RELAX_THREADS must be an integer, got {cap!r}") from exc
    return n


def _map(fn, items):
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def smoothstep5(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


def smoothstep5_deriv(x):
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x * x * (1.0 - x) ** 2, 0.0)


class _Arc:
    """Polyline geometry shared by the frequency solver and the resampler."""

    def __init__(self, points: np.ndarray):
        pts = as_points("segment", points, 2)
        e = np.diff(pts, axis=0)
        lengths = np.hypot(*e.T)
        if np.any(lengths <= 0):
            raise GeometryError("arc has a zero-length edge")
        self.points = pts
        self.lengths = lengths
        self.s = np.concatenate([[0.0], np.cumsum(lengths)])
        self.L = float(self.s[-1])
        self.tangents = e / lengths[:, None]
        chord = pts[-1] - pts[0]
        cl = math.hypot(*chord)
        if cl <= 1e-12 * self.L:
            mean = self.tangents.T @ lengths
            chord = mean
            cl = math.hypot(*chord)
            if cl == 0:
                raise GeometryError("arc has no usable chord direction")
        self.v = chord / cl
        self.center = 0.5 * (pts[0] + pts[-1])
        self.p = (pts - self.center) @ self.v
        self.c = self.tangents @ self.v
        span = pts.max(axis=0) - pts.min(axis=0)
        self.diam = float(max(math.hypot(*span), 1e-300))


def _cutoff(s, L, w):
    if w <= 0:
        return np.ones_like(s), np.zeros_like(s)
    lo = s / w
    hi = (L - s) / w
    phi = smoothstep5(lo) * smoothstep5(hi)
    dphi = smoothstep5_deriv(lo) / w * smoothstep5(hi) - smoothstep5(lo) * smoothstep5_deriv(hi) / w
    return phi, dphi


def _length_integral(arc: _Arc, t: float, k: float, collar: float | None) -> float:
    """Length of the wriggled arc predicted from the tangential slope only."""
    if t == 0:
        return arc.L
    edges = np.arange(len(arc.lengths))
    a = arc.s[:-1]
    b = arc.s[1:]
    if collar:
        # split edges at the collar boundaries so panels never straddle a kink of phi
        for cut in (collar, arc.L - collar):
            hit = (a < cut) & (b > cut)
            if np.any(hit):
                a, b, edges = (
                    np.concatenate([a, np.full(np.count_nonzero(hit), cut)]),
                    np.concatenate([np.where(hit, cut, b), b[hit]]),
                    np.concatenate([edges, edges[hit]]),
                )
    c = arc.c[edges]
    seg = b - a
    per_wave = seg * t * np.abs(c) / (2.0 * math.pi)
    # sqrt(1 + a^2 cos^2) has complex singularities asinh(1/a) off the real
    # phase axis; panels narrower than that keep 16-node Gauss near roundoff
    slope = t * np.abs(c) / k
    with np.errstate(divide="ignore"):
        reach = np.arcsinh(1.0 / np.maximum(slope, 1e-300))
    per_panel = np.maximum(1.0, 1.25 * math.pi / reach)
    panels = np.maximum(1, np.ceil(per_wave * per_panel)).astype(int)
    if collar:
        panels = np.maximum(panels, np.ceil(2.0 * seg / collar).astype(int))
    idx = np.repeat(np.arange(len(a)), panels)
    first = np.repeat(np.cumsum(panels) - panels, panels)
    local = np.arange(len(idx)) - first
    h = seg[idx] / panels[idx]
    left = a[idx] + local * h
    s = (left[:, None] + 0.5 * h[:, None] * (_GL_X[None, :] + 1.0))
    e = edges[idx][:, None]
    p = arc.p[e] + arc.c[e] * (s - arc.s[e])
    ce = arc.c[e]
    if collar:
        phi, dphi = _cutoff(s, arc.L, collar)
        slope = dphi * np.sin(t * p) / k + phi * (t / k) * np.cos(t * p) * ce
    else:
        slope = (t / k) * np.cos(t * p) * ce
    vals = np.sqrt(1.0 + slope * slope)
    return float(np.sum(vals @ _GL_W * 0.5 * h))


def solve_frequency(segment, r: float, k: float, collar: float | None = None, rtol: float = FREQ_RTOL) -> float:
    """Smallest frequency whose predicted wriggled length is ``r`` times the arc length.

    ``collar=None`` evaluates the length integral without a cutoff. Passing the
    collar width includes the cutoff profile, so the frequency accounts for
    the shorter oscillations near the arc ends.

    Forward scan with step ``pi / (4 diam)``, then bisection.
    """
    r = check_positive("r", r)
    k = check_positive("k", k)
    if r < 1:
        raise DomainError("wriggling can only lengthen a curve (r >= 1)")
    arc = segment if isinstance(segment, _Arc) else _Arc(segment)
    target = r * arc.L
    if r == 1:
        return 0.0
    dt = math.pi / (4.0 * arc.diam)
    cmax = float(np.max(np.abs(arc.c)))
    if cmax <= 1e-12:
        raise FrequencyError("the arc is orthogonal to its chord everywhere")
    t_cap = 1e4 * k * r / cmax + 10 * dt
    lo, hi = 0.0, dt
    while _length_integral(arc, hi, k, collar) < target:
        lo, hi = hi, hi + dt
        if hi > t_cap:
            raise FrequencyError(f"length factor {r} not reached below t = {t_cap:.3g}")
    fn = lambda tt: _length_integral(arc, tt, k, collar) - target  # noqa: E731
    if fn(hi) == 0:
        return hi
    return float(bisect(fn, lo, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps)))


@dataclass
class WrigglePlan:
    """Per-arc parameters and diagnostics."""

    factor: float
    k: float
    amplitude: float
    frequency: float
    direction: tuple[float, float]
    center: tuple[float, float]
    collar: float
    length: float
    min_tangent_alignment: float
    bound_constant: float
    bound_holds: bool

    def to_dict(self):
        return dict(self.__dict__)


def _frequency_bound(arc: _Arc, r: float, k: float, t: float) -> tuple[float, bool]:
    """Constant ``C`` with ``t <= C k`` from the nondegeneracy of the arc.

    With ``eps`` half the smallest squared alignment, the arc (rescaled so its
    projection fits in ``|x.v| < pi/2 - eps``) has full good length ``L`` and
    ``delta = sin(eps)``.
    """
    align = arc.c * arc.c
    eps = min(0.5, 0.5 * float(np.min(align)))
    if eps <= 0:
        return math.inf, False
    pmax = float(np.max(np.abs(arc.p)))
    scale = min(1.0, (math.pi / 2 - eps) / pmax) if pmax > 0 else 1.0
    lam = arc.L * scale
    delta = math.sin(eps)
    C = math.sqrt(max(4 * r * r * lam * lam - lam * lam, 0.0)) / (lam * delta * eps)
    return C, bool(t / scale <= C * k * (1 + 1e-9))


def _arc_normals(arc: _Arc) -> np.ndarray:
    tn = arc.tangents
    n_edge = np.column_stack([tn[:, 1], -tn[:, 0]])
    nv = np.empty((len(arc.points), 2))
    nv[0] = n_edge[0]
    nv[-1] = n_edge[-1]
    mid = n_edge[:-1] + n_edge[1:]
    norm = np.hypot(*mid.T)
    if np.any(norm < 1e-12):
        raise GeometryError("arc folds back on itself")
    nv[1:-1] = mid / norm[:, None]
    return nv


def _wriggle_arc(
    points: np.ndarray,
    r: float,
    k: float,
    compensate: bool,
    samples_per_wave: int,
) -> tuple[np.ndarray, np.ndarray, WrigglePlan | None]:
    """Return wriggled points (without the final vertex), source edge index per point, plan."""
    arc = _Arc(points)
    if r <= 1.0:
        return arc.points[:-1], np.arange(len(arc.lengths)), None
    collar = min(arc.L / 4.0, 1.0 / k)
    t = solve_frequency(arc, r, k, collar if compensate else None)
    C, ok = _frequency_bound(arc, r, k, t)
    plan = WrigglePlan(
        factor=r,
        k=k,
        amplitude=1.0 / k,
        frequency=t,
        direction=(float(arc.v[0]), float(arc.v[1])),
        center=(float(arc.center[0]), float(arc.center[1])),
        collar=collar,
        length=arc.L,
        min_tangent_alignment=float(np.min(np.abs(arc.c))),
        bound_constant=C,
        bound_holds=ok,
    )
    wave = 2.0 * math.pi / (t * max(float(np.max(np.abs(arc.c))), 1e-12))
    step = min(wave / samples_per_wave, collar / 8.0)
    per_edge = np.maximum(1, np.ceil(arc.lengths / step)).astype(int)
    edge = np.repeat(np.arange(len(arc.lengths)), per_edge)
    first = np.repeat(np.cumsum(per_edge) - per_edge, per_edge)
    frac = (np.arange(len(edge)) - first) / per_edge[edge]
    base = arc.points[edge] + frac[:, None] * (arc.points[edge + 1] - arc.points[edge])
    s = arc.s[edge] + frac * arc.lengths[edge]
    nv = _arc_normals(arc)
    nrm = (1.0 - frac)[:, None] * nv[edge] + frac[:, None] * nv[edge + 1]
    nrm /= np.hypot(*nrm.T)[:, None]
    phi, _ = _cutoff(s, arc.L, collar)
    p = (base - arc.center) @ arc.v
    offset = phi * np.sin(t * p) / k
    return base + offset[:, None] * nrm, edge, plan


@dataclass
class WriggleResult:
    couple: DiscreteCouple
    plans: list[WrigglePlan] = field(default_factory=list)
    k_used: float = 0.0
    arcs: int = 0

    def to_dict(self):
        return {
            "k_used": self.k_used,
            "arcs": self.arcs,
            "vertices": self.couple.n_vertices,
            "plans": [p.to_dict() for p in self.plans],
        }


def _insert_cell_crossings(pts: np.ndarray, data: np.ndarray, cell: float, origin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split edges where they cross grid lines.

    ``data`` holds per-edge rows copied onto the pieces. Returns the new
    points, data and a mask marking inserted points.
    """
    q = np.roll(pts, -1, axis=0)
    ox, oy = origin
    cx = np.floor((pts - (ox, oy)) / cell)
    cq = np.floor((q - (ox, oy)) / cell)
    crossing = np.any(cx != cq, axis=1)
    if not np.any(crossing):
        return pts, data, np.zeros(len(pts), dtype=bool)
    out_p, out_d, out_m = [], [], []
    for i in range(len(pts)):
        a, b = pts[i], q[i]
        out_p.append(a)
        out_d.append(data[i])
        out_m.append(False)
        if not crossing[i]:
            continue
        ts = []
        for axis, o in ((0, ox), (1, oy)):
            ia, ib = int(cx[i, axis]), int(cq[i, axis])
            if ia == ib or b[axis] == a[axis]:
                continue
            for line in range(min(ia, ib) + 1, max(ia, ib) + 1):
                tt = (o + line * cell - a[axis]) / (b[axis] - a[axis])
                if 1e-12 < tt < 1 - 1e-12:
                    ts.append(tt)
        for tt in sorted(ts):
            out_p.append(a + tt * (b - a))
            out_d.append(data[i])
            out_m.append(True)
    return np.array(out_p), np.array(out_d), np.array(out_m)


def _loop_breaks(pts: np.ndarray, key: np.ndarray, marks: np.ndarray, corner_angle: float, max_turn: float) -> list[int]:
    e = np.roll(pts, -1, axis=0) - pts
    ep = np.roll(e, 1, axis=0)
    turn = np.arctan2(ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0], np.sum(ep * e, axis=1))
    hard = marks | (np.abs(turn) > corner_angle) | (key != np.roll(key, 1))
    n = len(pts)
    start = int(np.argmax(hard)) if np.any(hard) else 0
    breaks = [start]
    acc = 0.0
    for j in range(1, n):
        i = (start + j) % n
        acc += abs(turn[i])
        if hard[i] or acc > max_turn:
            breaks.append(start + j)
            acc = 0.0
    if len(breaks) < 2:
        breaks.append(start + n // 2)
    # unwrapped and increasing; callers reduce modulo n
    return breaks


def wriggle_arcs(
    c: DiscreteCouple,
    factor,
    k: float,
    *,
    values=None,
    arc_density=None,
    split_key=None,
    cell: float | None = None,
    corner_angle: float = CORNER_ANGLE,
    max_turn: float = MAX_TURN,
    compensate: bool = True,
    samples_per_wave: int = SAMPLES_PER_WAVE,
    check_simple: bool = True,
) -> WriggleResult:
    """Wriggle every arc by a per-arc factor.

    ``factor(lengths, vals)`` receives the edge lengths of an arc and the
    matching entries of ``values`` (default: facet densities) and returns the
    arc's length factor. When ``arc_density`` is given it is called the same
    way and its result becomes the density of every output edge of the arc;
    when it is absent or returns ``None`` edges keep their source density.

    Arcs break at corners sharper than ``corner_angle``, wherever
    ``split_key`` changes, at crossings of a square grid of side ``cell`` and
    whenever the accumulated turning exceeds ``max_turn``. Self-intersecting
    output triggers a retry with doubled ``k`` (up to 8 times).
    """
    k = check_positive("k", k)
    if not c.closed:
        raise DomainError("wriggling needs closed loops")
    vals_all = c.facet_density if values is None else as_vector("values", values, c.n_vertices)
    key_all = np.zeros(c.n_vertices) if split_key is None else as_vector("split_key", split_key, c.n_vertices)
    if cell is not None:
        check_positive("cell", cell)
        origin = c.bounds()[:2]

    jobs = []
    for sl in c.loop_slices():
        pts = c.vertices[sl]
        data = np.column_stack([c.facet_density[sl], vals_all[sl], key_all[sl]])
        if cell is not None:
            pts, data, marks = _insert_cell_crossings(pts, data, cell, origin)
        else:
            marks = np.zeros(len(pts), dtype=bool)
        breaks = _loop_breaks(pts, data[:, 2], marks, corner_angle, max_turn)
        n = len(pts)
        arcs = [np.arange(a, b + 1) % n for a, b in zip(breaks, breaks[1:] + [breaks[0] + n])]
        jobs.append((pts, data, arcs))

    kk = k
    for _ in range(MAX_RETRIES + 1):
        loops, loop_dens, plans = [], [], []
        n_arcs = 0
        for pts, data, arcs in jobs:

            def work(idx, pts=pts, data=data):
                lengths = np.hypot(*np.diff(pts[idx], axis=0).T)
                vals = data[idx[:-1], 1]
                r = float(factor(lengths, vals))
                out, src, plan = _wriggle_arc(pts[idx], r, kk, compensate, samples_per_wave)
                new = None if arc_density is None else arc_density(lengths, vals)
                if new is not None:
                    d = np.full(len(out), float(new))
                else:
                    d = data[idx[:-1], 0][src]
                return out, d, plan

            results = _map(work, arcs)
            n_arcs += len(arcs)
            loops.append(np.vstack([r[0] for r in results]))
            loop_dens.append(np.concatenate([r[1] for r in results]))
            plans.extend(r[2] for r in results if r[2] is not None)
        out = DiscreteCouple.from_loops(loops, loop_dens)
        if not check_simple or is_simple(out):
            return WriggleResult(out, plans, kk, n_arcs)
        kk *= 2.0
    raise GeometryError(f"wriggled boundary still self-intersects at k = {kk / 2:g}")


def _mean(lengths, vals):
    return float(np.dot(lengths, vals) / np.sum(lengths))


def wriggle_uniform(c: DiscreteCouple, r: float, k: float, **kwargs) -> WriggleResult:
    """Multiply the length of every arc by ``r`` while staying within ``1/k``."""
    r = check_positive("r", r)
    if r < 1:
        raise DomainError("r must be at least 1")
    return wriggle_arcs(c, lambda lengths, vals: r, k, **kwargs)


def wriggle_weighted(c: DiscreteCouple, f, k: float, cell: float | None = None, **kwargs) -> WriggleResult:
    """Wriggle with local factor ``1 + f``, ``f`` given per edge and averaged per arc.

    ``cell`` defaults to ``diam / (2 sqrt(k))``: it shrinks with ``k`` so the
    per-cell averages converge to ``f``, while staying much longer than the
    ``1/k`` amplitude so every arc holds many oscillations.
    """
    f = as_vector("f", f, c.n_vertices)
    if np.any(f < 0):
        raise DomainError("the excess factor f must be nonnegative")
    if cell is None:
        x0, y0, x1, y1 = c.bounds()
        cell = math.hypot(x1 - x0, y1 - y0) / (2.0 * math.sqrt(k))
    return wriggle_arcs(c, lambda lengths, vals: 1.0 + _mean(lengths, vals), k, values=f, cell=cell, **kwargs)
