"""Lower semicontinuity probe: sawtooth boundaries versus their flat limit.

A tuple ``(alpha, beta, lam, a, b)`` describes a sawtooth whose rising
facets (slope ``alpha``, fraction ``lam`` of each tooth) carry density ``a``
and whose falling facets (slope ``-beta``) carry ``b``. As the number of
teeth grows the sawtooth converges to a straight segment carrying the
averaged density. The gap below is negative exactly when the energy drops in
the limit, i.e. when lower semicontinuity fails for that tuple.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._validation import DomainError, check_nonnegative
from .density import EnergyDensity, Envelope, envelope_excess
from .geometry import DiscreteCouple, facet_energy


@dataclass(frozen=True)
class WriggleTuple:
    alpha: float
    beta: float
    lam: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("alpha", "beta", "a", "b"):
            check_nonnegative(name, getattr(self, name))
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"lam must lie in [0, 1], got {self.lam!r}")

    @property
    def limit_slope(self) -> float:
        return self.lam * self.alpha - (1.0 - self.lam) * self.beta

    def as_dict(self):
        return asdict(self)


def _terms(alpha, beta, lam, a, b):
    A = np.sqrt(1.0 + alpha**2)
    B = np.sqrt(1.0 + beta**2)
    D = np.sqrt(1.0 + (lam * alpha - (1.0 - lam) * beta) ** 2)
    X = lam * a * A + (1.0 - lam) * b * B
    return A, B, D, X


def wriggle_inequality_gap(psi, t: WriggleTuple | tuple) -> float:
    """Right side minus left side of the sawtooth inequality for one tuple.

    For an :class:`Envelope` the common linear part ``theta s`` is removed
    before evaluating; the inequality is invariant under adding linear
    functions, and this avoids cancellation between large equal terms.
    """
    if not isinstance(t, WriggleTuple):
        t = WriggleTuple(*t)
    return float(gap_vectorized(psi, t.alpha, t.beta, t.lam, t.a, t.b))


def gap_vectorized(psi, alpha, beta, lam, a, b) -> np.ndarray:
    alpha, beta, lam, a, b = (np.asarray(x, dtype=float) for x in (alpha, beta, lam, a, b))
    A, B, D, X = _terms(alpha, beta, lam, a, b)
    f = (lambda s: envelope_excess(psi, s)) if isinstance(psi, Envelope) else psi
    rhs = (np.asarray(f(a)) * lam * A + np.asarray(f(b)) * (1.0 - lam) * B) / D
    return rhs - np.asarray(f(X / D))


def subadditivity_gap(psi, a: float, b: float) -> float:
    """``psi(a) + psi(b) - psi(a + b)``."""
    return float(psi(a) + psi(b) - psi(a + b))


@dataclass
class SweepResult:
    min_gap: float
    argmin: WriggleTuple
    n: int
    tuples: np.ndarray
    gaps: np.ndarray

    def to_dict(self):
        return {"min_gap": self.min_gap, "argmin": self.argmin.as_dict(), "n": self.n}


def sample_tuples(
    n: int,
    seed: int = 0,
    density_range: tuple[float, float] = (1e-3, 1e3),
    slope_max: float = 10.0,
) -> np.ndarray:
    """Random tuples: log-uniform densities, uniform slopes and fractions."""
    rng = np.random.default_rng(seed)
    lo, hi = (math.log(x) for x in density_range)
    out = np.empty((n, 5))
    out[:, 0] = rng.uniform(0.0, slope_max, n)
    out[:, 1] = rng.uniform(0.0, slope_max, n)
    out[:, 2] = rng.uniform(0.0, 1.0, n)
    out[:, 3] = np.exp(rng.uniform(lo, hi, n))
    out[:, 4] = np.exp(rng.uniform(lo, hi, n))
    return out


def sweep(psi, n: int = 100_000, seed: int = 0, **kwargs) -> SweepResult:
    tuples = sample_tuples(n, seed, **kwargs)
    gaps = gap_vectorized(psi, *tuples.T)
    i = int(np.argmin(gaps))
    return SweepResult(float(gaps[i]), WriggleTuple(*(float(x) for x in tuples[i])), n, tuples, gaps)


@dataclass
class Sawtooth:
    couple: DiscreteCouple
    limit: DiscreteCouple
    energy: float
    closed_form_energy: float
    limit_energy: float
    base_height: float


def _base_height(t: WriggleTuple) -> float:
    # keep the subgraph away from the x-axis when the limit line descends
    return 1.0 + max(0.0, -t.limit_slope)


def build_sawtooth(t: WriggleTuple, k: int, psi: EnergyDensity) -> Sawtooth:
    """Subgraph polygon of the ``k``-tooth sawtooth over ``[0, 1]`` and its limit."""
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    k = int(k)
    h0 = _base_height(t)
    j = np.arange(k)
    slope = t.limit_slope
    xs_lo = j / k
    xs_hi = (j + t.lam) / k
    y_lo = h0 + slope * xs_lo
    y_hi = y_lo + t.lam * t.alpha / k
    # graph from right to left: (j+1)/k -> (j+lam)/k [falling, density b] -> j/k [rising, density a]
    gx = np.empty(2 * k + 1)
    gy = np.empty(2 * k + 1)
    gx[0], gy[0] = 1.0, h0 + slope
    gx[1::2], gy[1::2] = xs_hi[::-1], y_hi[::-1]
    gx[2::2], gy[2::2] = xs_lo[::-1], y_lo[::-1]
    dens = np.empty(2 * k + 1)
    dens[0::2] = t.b  # edge leaving (j+1)/k goes down the falling facet
    dens[1::2] = t.a
    dens[-1] = 0.0  # edge from (0, h0) down the left side
    pts = np.vstack([[0.0, 0.0], [1.0, 0.0], np.column_stack([gx, gy])])
    dens = np.concatenate([[0.0, 0.0], dens])
    # drop zero-length facets produced by lam = 0 or 1
    keep = np.ones(len(pts), dtype=bool)
    nxt = np.roll(np.arange(len(pts)), -1)
    same = np.all(np.isclose(pts, pts[nxt], rtol=0.0, atol=1e-15), axis=1)
    # drop the start of each zero-length edge so the next vertex keeps its own density
    keep[same] = False
    couple = DiscreteCouple(pts[keep], dens[keep])

    A, B, D, X = _terms(t.alpha, t.beta, t.lam, t.a, t.b)
    limit = DiscreteCouple(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, h0 + slope], [0.0, h0]]),
        np.array([0.0, 0.0, X / D, 0.0]),
    )
    sides = 1.0 + h0 + (h0 + slope)
    closed = psi(0.0) * sides + psi(t.a) * t.lam * A + psi(t.b) * (1.0 - t.lam) * B
    return Sawtooth(
        couple,
        limit,
        facet_energy(couple, psi),
        float(closed),
        facet_energy(limit, psi),
        h0,
    )

