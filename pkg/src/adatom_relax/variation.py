"""First variation of the surface energy along mass-preserving deformations.

Vertices move along their normals with speed ``v``; the adatom density
changes with speed ``w``. Discrete curvature is the turning angle at a vertex
divided by its dual length (mean of the two adjacent edges).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import DomainError, GeometryError, as_vector, check_nonnegative
from .density import EnergyDensity
from .geometry import DiscreteCouple


def _require_closed(c: DiscreteCouple) -> None:
    if not c.closed:
        raise DomainError("the first variation needs closed polygons")


def vertex_normals(c: DiscreteCouple) -> np.ndarray:
    """Outward unit normals at vertices, bisecting the adjacent edge normals."""
    _require_closed(c)
    e = c.edge_vectors()
    t = e / np.hypot(*e.T)[:, None]
    prev = c.prev_index()
    n_edge = np.column_stack([t[:, 1], -t[:, 0]])
    n = n_edge + n_edge[prev]
    norm = np.hypot(*n.T)
    if np.any(norm < 1e-12):
        raise GeometryError("polygon folds back on itself at a vertex")
    return n / norm[:, None]


def dual_lengths(c: DiscreteCouple) -> np.ndarray:
    lengths = c.edge_lengths()
    return 0.5 * (lengths + lengths[c.prev_index()])


def turning_angles(c: DiscreteCouple) -> np.ndarray:
    """Signed exterior angle at each vertex (positive where the boundary is convex)."""
    _require_closed(c)
    e = c.edge_vectors()
    ep = e[c.prev_index()]
    cross = ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0]
    dot = np.sum(ep * e, axis=1)
    return np.arctan2(cross, dot)


def discrete_curvature(c: DiscreteCouple) -> np.ndarray:
    return turning_angles(c) / dual_lengths(c)


def _vertex_average(c: DiscreteCouple, edge_values: np.ndarray) -> np.ndarray:
    return 0.5 * (edge_values + edge_values[c.prev_index()])


@dataclass
class FirstVariation:
    value: float
    defect: float


def first_variation(
    c: DiscreteCouple,
    v,
    w,
    psi: EnergyDensity,
    rho: float = 1.0,
) -> FirstVariation:
    """Return the first variation and the admissibility defect.

    ``value  = sum_i l_i (psi'(u_i) w_i + psi(u_i) v_i H_i)``
    ``defect = sum_i l_i (w_i + v_i (u_i H_i + rho))``

    ``v`` and ``w`` are per-vertex; ``l_i`` is the dual length and vertex
    quantities of ``u`` are averages over the two adjacent edges.
    """
    _require_closed(c)
    rho = check_nonnegative("rho", rho)
    v = as_vector("v", v, c.n_vertices)
    w = as_vector("w", w, c.n_vertices)
    u_edge = c.edge_densities()
    ell = dual_lengths(c)
    H = discrete_curvature(c)
    psi_v = _vertex_average(c, np.asarray(psi(u_edge)))
    dpsi_v = _vertex_average(c, np.asarray(psi.deriv(u_edge)))
    u_v = _vertex_average(c, u_edge)
    value = float(np.sum(ell * (dpsi_v * w + psi_v * v * H)))
    defect = float(np.sum(ell * (w + v * (u_v * H + rho))))
    return FirstVariation(value, defect)


def admissible_rate(c: DiscreteCouple, v, rho: float = 1.0, zeta=None) -> np.ndarray:
    """A density rate ``w`` with zero admissibility defect for normal speed ``v``.

    ``zeta`` adds an arbitrary redistribution; its weighted mean is removed.
    """
    v = as_vector("v", v, c.n_vertices)
    ell = dual_lengths(c)
    u_v = _vertex_average(c, c.edge_densities())
    H = discrete_curvature(c)
    w = -v * (u_v * H + rho)
    if zeta is not None:
        w = w + as_vector("zeta", zeta, c.n_vertices)
    return w - np.sum(ell * (w + v * (u_v * H + rho))) / np.sum(ell)


def mass_preserving_path(c: DiscreteCouple, v, w, t: float, rho: float = 1.0, xi=None) -> DiscreteCouple:
    """Deformed couple at time ``t`` with the mass restored exactly.

    Vertices move to ``x + t v nu``; edge densities become
    ``u + t w_edge + s xi`` where ``s`` is the unique value restoring
    ``rho |E| + sum |edge| u``. The mass is affine in ``s``, so no root finding
    is needed.
    """
    _require_closed(c)
    v = as_vector("v", v, c.n_vertices)
    w = as_vector("w", w, c.n_vertices)
    xi = np.ones(c.n_vertices) if xi is None else as_vector("xi", xi, c.n_vertices)
    target = rho * c.signed_area() + c.boundary_mass()
    moved = c.vertices + t * v[:, None] * vertex_normals(c)
    nxt = c.next_index()
    w_edge = 0.5 * (w + w[nxt])
    xi_edge = 0.5 * (xi + xi[nxt])
    base = DiscreteCouple(moved, c.facet_density + t * w_edge, c.loop_sizes)
    lengths = base.edge_lengths()
    weight = float(np.dot(lengths, xi_edge))
    if weight == 0:
        raise DomainError("the mass correction direction xi has zero weighted length")
    s = (target - rho * base.signed_area() - base.boundary_mass()) / weight
    dens = base.facet_density + s * xi_edge
    if np.any(dens < 0):
        raise DomainError("the deformation drives a density negative; use a smaller t")
    return DiscreteCouple(moved, dens, c.loop_sizes)
