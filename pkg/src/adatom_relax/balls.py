"""Radially symmetric equilibria: balls carrying a constant adatom density.

For a ball of radius ``R`` the mass constraint fixes the density
``ubar(R) = (m - rho w_n R^n) / (n w_n R^(n-1))`` and the energy reduces to the
one-variable function ``e(R) = n w_n R^(n-1) psi(ubar(R))`` on ``(0, Rbar]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, brentq
from scipy.special import gamma as gamma_fn
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    ConstructionError,
    DomainError,
    check_dimension,
    check_positive,
)
from .density import S0_CAP, EnergyDensity, compute_s0, from_spec, tabulated

GRID_POINTS = 4096
R_XTOL = 1e-10  # relative to the bracket
PLATEAU_RTOL = 1e-8
DE_NOISE = 1e-11


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / float(gamma_fn(n / 2.0 + 1.0))


@dataclass(frozen=True)
class BallProblem:
    """Dimension, bulk density ``rho`` and total mass ``m``."""

    n: int
    rho: float
    m: float

    def __post_init__(self):
        check_dimension(self.n)
        check_positive("rho", self.rho)
        check_positive("m", self.m)

    @property
    def omega(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def rbar(self) -> float:
        """Radius of the ball holding all the mass in the bulk."""
        return (self.m / (self.rho * self.omega)) ** (1.0 / self.n)


def _radii(pb: BallProblem, R) -> np.ndarray:
    arr = np.asarray(R, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr > pb.rbar * (1.0 + 1e-12)):
        raise DomainError(f"R must lie in (0, {pb.rbar!r}]")
    return arr


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def ubar(pb: BallProblem, R):
    """Adatom density on the sphere of radius ``R`` compatible with the mass."""
    r = _radii(pb, R)
    n, w = pb.n, pb.omega
    out = (pb.m - pb.rho * w * r**n) / (n * w * r ** (n - 1))
    return _scalar(np.maximum(out, 0.0))


def ubar_derivative(pb: BallProblem, R):
    r = _radii(pb, R)
    n, w = pb.n, pb.omega
    return _scalar(-pb.rho / n - (n - 1) * pb.m / (n * w * r**n))


def ubar_second_derivative(pb: BallProblem, R):
    r = _radii(pb, R)
    n, w = pb.n, pb.omega
    return _scalar((n - 1) * pb.m / (w * r ** (n + 1)))


def ubar_inverse(pb: BallProblem, s: float) -> float:
    """Radius at which ``ubar`` equals ``s`` (``ubar`` is decreasing)."""
    if s < 0:
        raise DomainError("densities are nonnegative")
    if s == 0:
        return pb.rbar
    n, w = pb.n, pb.omega
    f = lambda r: (pb.m - pb.rho * w * r**n) - s * n * w * r ** (n - 1)  # noqa: E731
    lo = pb.rbar
    while f(lo) <= 0:
        lo *= 0.5
    return brentq(f, lo, pb.rbar, xtol=1e-15 * pb.rbar, rtol=1e-15)


def ball_energy(pb: BallProblem, psi: EnergyDensity, R):
    r = _radii(pb, R)
    n, w = pb.n, pb.omega
    return _scalar(n * w * r ** (n - 1) * np.asarray(psi(ubar(pb, r))))


def ball_energy_derivative(pb: BallProblem, psi: EnergyDensity, R):
    """``e'(R)``, written so that its sign matches the criticality residual."""
    r = _radii(pb, R)
    n, w = pb.n, pb.omega
    u = np.asarray(ubar(pb, r))
    bracket = (n - 1) * np.asarray(psi(u)) - r * np.asarray(psi.deriv(u)) * (
        pb.rho / n + (n - 1) * pb.m / (n * w * r**n)
    )
    return _scalar(n * w * r ** (n - 2) * bracket)


def critical_residual(psi: EnergyDensity, c: float, H: float, rho: float) -> float:
    """``(psi(c) - c psi'(c)) H - rho psi'(c)``, zero at critical balls."""
    return float((psi(c) - c * psi.deriv(c)) * H - rho * psi.deriv(c))


def closed_form_rstar(gamma: float, m: float, rho: float) -> float:
    """Minimising radius for ``psi = 1 + gamma s^2`` in the plane."""
    g = check_positive("gamma", gamma)
    m = check_positive("m", m)
    rho = check_positive("rho", rho)
    pi = math.pi
    x = g * m * rho
    root = math.sqrt(x * x - pi * x + pi * pi)
    # 2 root + x - 2 pi, rationalised: it cancels to nothing when x is small
    inner = 3.0 * x * x / (2.0 * root + 2.0 * pi - x)
    return math.sqrt(inner / (3.0 * pi * g)) / rho


@dataclass
class HypothesisReport:
    a1: bool
    a2a: bool
    a2b: bool | None

    @property
    def a2(self) -> bool | None:
        if self.a2a or self.a2b:
            return True
        if self.a2b is None:
            return None
        return False

    def to_dict(self):
        return {"A1": self.a1, "A2a": self.a2a, "A2b": self.a2b, "A2": self.a2}


def check_hypotheses(pb: BallProblem, psi: EnergyDensity, cap: float = S0_CAP) -> HypothesisReport:
    """Evaluate the existence hypotheses.

    The superlinearity test is a sampled heuristic (``psi'`` keeps growing by
    at least half between ``sqrt(cap)`` and ``cap``). The asymptotically affine
    test needs an explicit decomposition, so tabulated kinds report ``None``.
    """
    n = pb.n
    a1 = psi.deriv(0.0) < (n - 1) * (pb.omega / pb.m) ** (1.0 / n) * pb.rho ** ((1.0 - n) / n) * psi(0.0)

    top = min(cap, psi.domain_max)
    d_hi, d_mid = psi.deriv(top), psi.deriv(math.sqrt(top))
    a2a = bool(d_hi > 0 and d_hi >= 1.5 * d_mid)

    parts = psi.affine_parts
    if parts is None:
        a2b = None if psi.domain_max < math.inf else False
    elif parts.b > 0:
        a2b = False
    else:
        probes = np.array([1e4, 1e6, 1e8, 1e10, 1e12])
        probes = probes[probes <= top]
        t1 = np.abs(probes ** (1.0 / (n - 1)) * parts.g(probes))
        t2 = np.abs(probes ** (n / (n - 1.0)) * parts.dg(probes))

        def vanishing(t):
            return bool(t[-1] < 1e-3 and np.all(np.diff(t) <= 1e-15))

        a2b = vanishing(t1) and vanishing(t2)
    return HypothesisReport(bool(a1), a2a, a2b)


@dataclass
class BallSolution:
    R: float
    c: float
    energy: float
    kind: str
    brackets: list[tuple[float, float]] = field(default_factory=list)
    plateau: tuple[float, float] | None = None
    residual: float = 0.0

    def to_dict(self):
        return {
            "R": self.R,
            "c": self.c,
            "energy": self.energy,
            "kind": self.kind,
            "brackets": [list(b) for b in self.brackets],
            "plateau": None if self.plateau is None else list(self.plateau),
            "residual": self.residual,
        }


def _lower_radius(pb: BallProblem, psi: EnergyDensity) -> float:
    lo = 1e-6 * pb.rbar
    if math.isfinite(psi.domain_max):
        lo = max(lo, ubar_inverse(pb, psi.domain_max) * (1.0 + 1e-9))
    return lo


def minimize_ball_energy(
    pb: BallProblem,
    psi: EnergyDensity,
    grid_points: int = GRID_POINTS,
    xtol: float = R_XTOL,
) -> BallSolution:
    """Global minimiser of ``e`` on ``(0, Rbar]``.

    Sign changes of ``e'`` on a log-spaced grid are refined by bisection.
    The result is the boundary solution ``(Rbar, 0)`` when ``e' < 0`` on the whole
    grid and is flagged when the energy keeps decreasing toward ``R = 0``.
    Near-ties within ``1e-8`` relative spanning several grid points are
    reported as a plateau interval.
    """
    rbar = pb.rbar
    lo = _lower_radius(pb, psi)
    grid = np.geomspace(lo, rbar, grid_points)
    grid[-1] = rbar
    de = np.asarray(ball_energy_derivative(pb, psi, grid))
    e = np.asarray(ball_energy(pb, psi, grid))

    def de_scalar(r):
        return float(ball_energy_derivative(pb, psi, r))

    # |e'| below DE_NOISE * e / R is treated as zero: tabulated densities
    # produce roundoff-level sign flips where e is flat to 1e-12
    sgn = np.where(np.abs(de) * grid <= DE_NOISE * np.abs(e), 0, np.sign(de)).astype(int)
    nz = np.nonzero(sgn)[0]
    if len(nz) == 0:
        i = int(np.argmin(e))
        r = float(grid[i])
        plateau = (float(grid[0]), float(grid[-1]))
        return BallSolution(r, float(ubar(pb, r)), float(e[i]), "interior-minimum", [], plateau,
                            critical_residual(psi, float(ubar(pb, r)), (pb.n - 1) / r, pb.rho))
    if np.all(sgn[nz] < 0):
        return BallSolution(rbar, 0.0, float(e[-1]), "boundary-zero-density")
    if np.all(sgn[nz] > 0):
        return BallSolution(float(lo), float(ubar(pb, lo)), float(e[0]), "no-minimizer-flagged")

    brackets: list[tuple[float, float]] = []
    candidates: list[tuple[float, float]] = []
    for i, j in zip(nz[:-1], nz[1:]):
        if not (sgn[i] < 0 < sgn[j]):
            continue
        a, b = float(grid[i]), float(grid[j])
        brackets.append((a, b))
        r = bisect(de_scalar, a, b, xtol=xtol * a, rtol=4 * np.finfo(float).eps)
        candidates.append((float(ball_energy(pb, psi, r)), r))
    if sgn[nz[-1]] < 0:
        candidates.append((float(e[-1]), rbar))
    if not candidates:
        return BallSolution(float(lo), float(ubar(pb, lo)), float(e[0]), "no-minimizer-flagged", brackets)
    best_e, best_r = min(candidates)
    if sgn[nz[0]] > 0 and e[0] < best_e - 1e-12 * abs(best_e):
        return BallSolution(float(lo), float(ubar(pb, lo)), float(e[0]), "no-minimizer-flagged", brackets)

    plateau = None
    near = np.abs(e - best_e) <= PLATEAU_RTOL * abs(best_e)
    if np.count_nonzero(near) >= 3:
        idx = np.nonzero(near)[0]
        plateau = (float(grid[idx[0]]), float(grid[idx[-1]]))

    c = float(ubar(pb, best_r))
    kind = "boundary-zero-density" if best_r == rbar else "interior-minimum"
    res = critical_residual(psi, c, (pb.n - 1) / best_r, pb.rho)
    return BallSolution(best_r, c, best_e, kind, brackets, plateau, res)


# --- plateau-generated densities -------------------------------------------


@dataclass
class PlateauDensity:
    """Density whose ball energy is constant on ``[R1, R2]``."""

    psi: EnergyDensity
    problem: BallProblem
    R1: float
    R2: float
    eps: float
    radii: np.ndarray
    g: np.ndarray


def _plateau_profile(pb: BallProblem, R1: float, R2: float, eps: float):
    """Return callables ``f`` and ``f'`` describing ``g'/g``."""
    n, rbar = pb.n, pb.rbar

    def f(r):
        r = np.asarray(r, dtype=float)
        out = -(n - 1) / r
        if R1 > 0:
            x = np.clip(r / R1, 0.0, 1.0)
            out = out - np.where(r < R1, eps * x ** (n + 1) * (1 - x) ** 2 / R1, 0.0)
        if R2 < rbar:
            y = np.clip((r - R2) / (rbar - R2), 0.0, 1.0)
            out = out + np.where(r > R2, eps * y * y * (3 - 2 * y) / rbar, 0.0)
        return out

    def df(r):
        r = np.asarray(r, dtype=float)
        out = (n - 1) / r**2
        if R1 > 0:
            x = np.clip(r / R1, 0.0, 1.0)
            dphi = eps * ((n + 1) * x**n * (1 - x) ** 2 - 2 * x ** (n + 1) * (1 - x)) / R1**2
            out = out - np.where(r < R1, dphi, 0.0)
        if R2 < rbar:
            y = np.clip((r - R2) / (rbar - R2), 0.0, 1.0)
            out = out + np.where(r > R2, eps * 6 * y * (1 - y) / (rbar * (rbar - R2)), 0.0)
        return out

    return f, df


def build_plateau_density(
    R1: float,
    R2: float,
    pb: BallProblem,
    g_m: float = 1.0,
    eps: float = 0.25,
    n_steps: int = 100_000,
    rmin_frac: float = 1e-4,
    max_halvings: int = 20,
) -> PlateauDensity:
    """Construct a convex density whose ball energy is flat on ``[R1, R2]``.

    ``g(R) = psi(ubar(R))`` solves ``g' = f g`` with ``g(Rbar) = g_m`` where
    ``f = -(n-1)/R`` on ``[R1, R2]``, slightly smaller to the left and slightly
    larger to the right, so ``e'`` is negative, zero and positive on the three
    pieces. The ODE is integrated from ``Rbar`` down to ``rmin_frac * Rbar``
    with classical RK4 and the samples are tabulated against ``s = ubar(R)``.
    ``eps`` is halved until the tabulated density is strictly convex.
    """
    rbar = pb.rbar
    check_positive("g_m", g_m)
    rmin = rmin_frac * rbar
    if not (0.0 <= R1 <= R2 <= rbar):
        raise DomainError("need 0 <= R1 <= R2 <= Rbar")
    R1_eff = R1 if R1 > rmin else 0.0

    h = (rbar - rmin) / n_steps
    radii = rbar - h * np.arange(n_steps + 1)
    radii[-1] = rmin
    n, w = pb.n, pb.omega
    u = (pb.m - pb.rho * w * radii**n) / (n * w * radii ** (n - 1))
    u[0] = 0.0
    du = -pb.rho / n - (n - 1) * pb.m / (n * w * radii**n)
    ddu = (n - 1) * pb.m / (w * radii ** (n + 1))

    for _ in range(max_halvings + 1):
        f, df = _plateau_profile(pb, R1_eff, R2, eps)
        # RK4 for the linear equation g' = f g with step -h: each step multiplies g.
        eta = np.diff(radii)
        f0 = f(radii[:-1])
        fh = f(radii[:-1] + eta / 2)
        f1 = f(radii[1:])
        k1 = f0
        k2 = fh * (1 + eta / 2 * k1)
        k3 = fh * (1 + eta / 2 * k2)
        k4 = f1 * (1 + eta * k3)
        factor = 1 + eta / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        g = g_m * np.concatenate([[1.0], np.cumprod(factor)])
        fr = f(radii)
        dpsi = fr * g / du
        curvature = (fr**2 + df(radii) - fr * ddu / du) * g / du**2
        if np.all(curvature[1:-1] > 0) and np.all(np.diff(dpsi) > 0):
            break
        eps *= 0.5
    else:
        raise ConstructionError("could not make the plateau density strictly convex")

    # s = ubar(R) already increases as R decreases along the grid
    psi = tabulated(
        u,
        g,
        dpsi,
        kind="plateau-generated",
        curvature=curvature,
        params={"R1": R1, "R2": R2, "n": n, "rho": pb.rho, "m": pb.m, "g_m": g_m, "eps": eps},
    )
    return PlateauDensity(psi, pb, R1, R2, eps, radii, g)


def check_plateau(plateau: PlateauDensity, samples: int = 4000) -> dict[str, float | bool]:
    """Evaluate the flatness and sign requirements of a plateau density."""
    pb, psi = plateau.problem, plateau.psi
    rbar = pb.rbar
    R1, R2 = plateau.R1, plateau.R2
    out: dict[str, float | bool] = {}
    mid = np.linspace(R1, R2, samples) if R2 > R1 else np.array([R1])
    de_mid = np.asarray(ball_energy_derivative(pb, psi, mid))
    e1 = abs(float(ball_energy(pb, psi, max(R1, _lower_radius(pb, psi)))))
    out["max_abs_de_plateau"] = float(np.max(np.abs(de_mid)))
    out["flat_bound"] = 1e-6 * e1 / rbar
    out["flat"] = out["max_abs_de_plateau"] <= out["flat_bound"]
    left_lo = max(0.05 * rbar, _lower_radius(pb, psi))
    if R1 > left_lo:
        left = np.linspace(left_lo, R1, samples + 2)[1:-1]
        out["left_negative"] = bool(np.all(np.asarray(ball_energy_derivative(pb, psi, left)) < 0))
    else:
        out["left_negative"] = True
    if R2 < rbar:
        right = np.linspace(R2, rbar, samples + 2)[1:]
        out["right_positive"] = bool(np.all(np.asarray(ball_energy_derivative(pb, psi, right)) > 0))
    else:
        out["right_positive"] = True
    curv = psi.node_curvature[1][1:-1] if psi.node_curvature is not None else np.array([1.0])
    out["strictly_convex"] = bool(np.all(curv > 0))
    return out


class BallEquilibrium(BaseEstimator):
    """Estimator wrapper around :func:`minimize_ball_energy`.

    ``fit`` solves the problem for the configured mass; ``predict`` maps a
    column of masses to minimising radii.

    Parameters
    ----------
    density : EnergyDensity or str or dict
    n : int
        Ambient dimension.
    rho : float
        Bulk density.
    m : float
        Total mass used by ``fit``.
    grid_points : int
        Size of the log-spaced scan grid.
    """

    def __init__(self, density="halfquad", n: int = 2, rho: float = 1.0, m: float = 1.0, grid_points: int = GRID_POINTS):
        self.density = density
        self.n = n
        self.rho = rho
        self.m = m
        self.grid_points = grid_points

    def _psi(self) -> EnergyDensity:
        return self.density if isinstance(self.density, EnergyDensity) else from_spec(self.density)

    def fit(self, X=None, y=None):
        if int(self.grid_points) < 16:
            raise DomainError("grid_points must be at least 16")
        psi = self._psi()
        pb = BallProblem(self.n, self.rho, self.m)
        sol = minimize_ball_energy(pb, psi, int(self.grid_points))
        self.solution_ = sol
        self.radius_ = sol.R
        self.density_ = sol.c
        self.energy_ = sol.energy
        self.kind_ = sol.kind
        self.hypotheses_ = check_hypotheses(pb, psi)
        self.s0_ = compute_s0(psi)
        return self

    def predict(self, X):
        check_is_fitted(self, "solution_")
        masses = np.asarray(X, dtype=float).reshape(-1)
        psi = self._psi()
        return np.array(
            [minimize_ball_energy(BallProblem(self.n, self.rho, float(mm)), psi, int(self.grid_points)).R for mm in masses]
        )
