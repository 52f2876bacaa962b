"""Energy densities, the parabolicity threshold and the convex subadditive envelope.

A density ``psi`` is a convex C^1 function on ``[0, inf)`` with ``psi(0) > 0``.
Its envelope agrees with ``psi`` up to the threshold ``s0`` where the margin
``psi(s) - s psi'(s)`` changes sign and continues linearly with slope
``theta = psi'(s0)`` afterwards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    DomainError,
    InvalidDensityError,
    as_vector,
    check_nonnegative,
    check_positive,
)

S0_CAP = 1e12
S0_RTOL = 1e-12

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class AffineParts:
    """Decomposition ``psi(s) = a s + b + g(s)`` used by the asymptotically affine test."""

    a: float
    b: float
    g: ArrayFn
    dg: ArrayFn


@dataclass(frozen=True, eq=False)
class EnergyDensity:
    """A surface energy density together with its derivative.

    Instances are built through the constructors :func:`quadratic`,
    :func:`half_quadratic`, :func:`affine`, :func:`sqrt_shifted`,
    :func:`tabulated` or :func:`from_spec`.
    """

    kind: str
    params: dict[str, Any]
    _value: ArrayFn = field(repr=False)
    _deriv: ArrayFn = field(repr=False)
    domain_max: float = math.inf
    affine_parts: AffineParts | None = field(default=None, repr=False)
    node_curvature: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    exact_margin: ArrayFn | None = field(default=None, repr=False)

    def _check_domain(self, s: np.ndarray) -> None:
        if np.any(s < 0) or np.any(np.isnan(s)):
            raise DomainError("energy densities are defined for s >= 0 only")
        if np.any(s > self.domain_max * (1.0 + 1e-12)):
            raise DomainError(
                f"{self.kind} density is tabulated up to s={self.domain_max!r}, "
                f"got s={float(np.max(s))!r}"
            )

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        self._check_domain(arr)
        out = self._value(arr)
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, s):
        arr = np.asarray(s, dtype=float)
        self._check_domain(arr)
        out = self._deriv(arr)
        return float(out) if np.ndim(out) == 0 else out

    def margin(self, s):
        """Parabolicity margin ``psi(s) - s psi'(s)``."""
        arr = np.asarray(s, dtype=float)
        if self.exact_margin is not None:
            self._check_domain(arr)
            out = self.exact_margin(arr)
        else:
            out = self(arr) - arr * self.deriv(arr)
        return float(out) if np.ndim(out) == 0 else out

    def to_spec(self) -> dict[str, Any]:
        spec = {"kind": self.kind}
        spec.update(self.params)
        return spec


def quadratic(gamma: float = 1.0) -> EnergyDensity:
    """``psi(s) = 1 + gamma s^2``."""
    g = check_positive("gamma", gamma)
    return EnergyDensity(
        "quadratic",
        {"gamma": g},
        lambda s: 1.0 + g * s * s,
        lambda s: 2.0 * g * s,
    )


def half_quadratic() -> EnergyDensity:
    """``psi(s) = 1 + s^2 / 2``."""
    return EnergyDensity(
        "half-quadratic",
        {},
        lambda s: 1.0 + 0.5 * s * s,
        lambda s: s + 0.0,
    )


def affine(a: float, b: float) -> EnergyDensity:
    """``psi(s) = a s + b``.

    ``b = 0`` is accepted even though ``psi(0) = 0``; this degenerate case is
    useful for checking the zero-density ball solution.
    """
    a = check_nonnegative("a", a)
    b = check_nonnegative("b", b)
    zero = lambda s: np.zeros_like(s)  # noqa: E731
    return EnergyDensity(
        "affine",
        {"a": a, "b": b},
        lambda s: a * s + b,
        lambda s: a + 0.0 * s,
        affine_parts=AffineParts(a, b, zero, zero),
        exact_margin=lambda s: b + 0.0 * s,
    )


def sqrt_shifted(shift: float = 1.0) -> EnergyDensity:
    """``psi(s) = sqrt(shift^2 + s^2)``, asymptotic to ``s``."""
    c = check_positive("shift", shift)
    c2 = c * c

    def g(s):
        # sqrt(c^2 + s^2) - s without cancellation
        return c2 / (np.sqrt(c2 + s * s) + s)

    def dg(s):
        r = np.sqrt(c2 + s * s)
        return -g(s) / r

    return EnergyDensity(
        "sqrt-shifted",
        {"shift": c},
        lambda s: np.sqrt(c2 + s * s),
        lambda s: s / np.sqrt(c2 + s * s),
        affine_parts=AffineParts(1.0, 0.0, g, dg),
        # the difference psi - s psi' cancels completely once s ~ 1e8
        exact_margin=lambda s: c2 / np.sqrt(c2 + s * s),
    )


def tabulated(
    s,
    psi,
    dpsi=None,
    *,
    kind: str = "tabulated",
    curvature=None,
    params: dict[str, Any] | None = None,
) -> EnergyDensity:
    """Density interpolated from samples.

    Without derivative samples a monotone cubic (PCHIP) interpolant is used;
    with them a cubic Hermite spline honours the supplied slopes.
    """
    s = as_vector("s", s)
    psi = as_vector("psi", psi, len(s))
    if len(s) < 2:
        raise DomainError("a tabulated density needs at least two samples")
    if s[0] != 0.0:
        raise DomainError("tabulated samples must start at s = 0")
    if np.any(np.diff(s) <= 0):
        raise DomainError("tabulated abscissae must be strictly increasing")
    if dpsi is None:
        interp = PchipInterpolator(s, psi, extrapolate=False)
    else:
        dpsi = as_vector("dpsi", dpsi, len(s))
        interp = CubicHermiteSpline(s, psi, dpsi, extrapolate=False)
    dinterp = interp.derivative()
    smax = float(s[-1])

    def value(x):
        return interp(np.minimum(x, smax))

    def deriv(x):
        return dinterp(np.minimum(x, smax))

    info = {"s": s.tolist(), "psi": psi.tolist()} if params is None else params
    return EnergyDensity(
        kind,
        info,
        value,
        deriv,
        domain_max=smax,
        node_curvature=None if curvature is None else (s, as_vector("curvature", curvature, len(s))),
    )


_SHORTHAND = {
    "quadratic": "quadratic",
    "quad": "quadratic",
    "half-quadratic": "half-quadratic",
    "halfquad": "half-quadratic",
    "affine": "affine",
    "sqrt": "sqrt-shifted",
    "sqrt-shifted": "sqrt-shifted",
}


def from_spec(spec: dict[str, Any] | str) -> EnergyDensity:
    """Build a density from a JSON-like dict or a shorthand string.

    Accepted shorthands: ``"quadratic:0.5"``, ``"halfquad"``, ``"affine:1,0"``,
    ``"sqrt"`` or ``"sqrt:2"``. A string starting with ``{`` is parsed as JSON.
    Dicts carrying ``s`` and ``psi`` arrays are tabulated densities.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            spec = json.loads(text)
        else:
            name, _, rest = text.partition(":")
            name = name.strip().lower()
            if name not in _SHORTHAND:
                raise DomainError(f"unknown density kind {name!r}")
            args = [float(x) for x in rest.split(",") if x.strip()]
            kind = _SHORTHAND[name]
            if kind == "quadratic":
                return quadratic(*(args or [1.0]))
            if kind == "half-quadratic":
                if args:
                    raise DomainError("halfquad takes no parameters")
                return half_quadratic()
            if kind == "affine":
                if len(args) != 2:
                    raise DomainError("affine needs two parameters a,b")
                return affine(*args)
            return sqrt_shifted(*(args or [1.0]))
    if not isinstance(spec, dict):
        raise DomainError("density spec must be a dict or a string")
    if "s" in spec and "psi" in spec:
        return tabulated(spec["s"], spec["psi"], spec.get("dpsi"))
    kind = _SHORTHAND.get(str(spec.get("kind", "")).lower())
    if kind == "quadratic":
        return quadratic(spec.get("gamma", 1.0))
    if kind == "half-quadratic":
        return half_quadratic()
    if kind == "affine":
        return affine(spec["a"], spec["b"])
    if kind == "sqrt-shifted":
        return sqrt_shifted(spec.get("shift", 1.0))
    raise DomainError(f"unknown density kind {spec.get('kind')!r}")


def check_admissible(psi: EnergyDensity, s_max: float = 100.0, samples: int = 2001) -> None:
    """Raise :class:`InvalidDensityError` unless ``psi`` looks convex, positive and increasing.

    Sampling based, so it is a guard against obvious mistakes rather than a proof.
    """
    hi = min(s_max, psi.domain_max)
    s = np.linspace(0.0, hi, samples)
    v = np.asarray(psi(s))
    d = np.asarray(psi.deriv(s))
    if not v[0] > 0:
        raise InvalidDensityError("psi(0) must be positive")
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.any(v < v[0] - 1e-12 * scale):
        raise InvalidDensityError("psi must satisfy psi(s) >= psi(0)")
    dscale = max(1.0, float(np.max(np.abs(d))))
    if np.any(np.diff(d) < -1e-9 * dscale):
        raise InvalidDensityError("psi' must be nondecreasing (psi convex)")


def compute_s0(psi: EnergyDensity, cap: float = S0_CAP, rtol: float = S0_RTOL) -> float:
    """Largest ``s`` with positive parabolicity margin, ``inf`` if none up to ``cap``.

    Brackets geometrically, then bisects to relative width ``rtol``. The cap is
    lowered to the end of the table for tabulated densities.
    """
    b0 = psi.margin(0.0)
    if b0 < 0:
        raise InvalidDensityError(f"parabolicity margin is negative at s=0 ({b0!r})")
    if b0 == 0:
        return 0.0
    top = min(float(cap), psi.domain_max)
    if psi.margin(top) > 0:
        return math.inf
    lo, hi = 0.0, min(1.0, top)
    while psi.margin(hi) > 0:
        lo, hi = hi, min(2.0 * hi, top)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if psi.margin(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class Envelope:
    """Convex subadditive envelope of a density."""

    base: EnergyDensity
    s0: float
    theta: float
    cap: float = S0_CAP

    def __call__(self, s):
        return eval_envelope(self, s)

    def to_dict(self) -> dict[str, Any]:
        return {
            "density": self.base.to_spec() if self.base.kind != "plateau-generated" else {"kind": self.base.kind},
            "s0": self.s0,
            "theta": self.theta,
        }


def recession_slope(env_or_psi, s0: float | None = None, cap: float = S0_CAP) -> float:
    """Slope ``theta`` of the linear part of the envelope.

    Equals ``psi'(s0)`` for finite ``s0``; otherwise the secant slope
    ``(psi(cap) - psi(0)) / cap``.
    """
    if isinstance(env_or_psi, Envelope):
        return env_or_psi.theta
    psi = env_or_psi
    if s0 is None:
        s0 = compute_s0(psi, cap)
    if math.isfinite(s0):
        return float(psi.deriv(s0))
    top = min(cap, psi.domain_max)
    return (psi(top) - psi(0.0)) / top


def build_envelope(psi: EnergyDensity, cap: float = S0_CAP, rtol: float = S0_RTOL) -> Envelope:
    s0 = compute_s0(psi, cap, rtol)
    return Envelope(psi, s0, recession_slope(psi, s0, cap), cap)


def eval_envelope(env: Envelope, s):
    """Evaluate the envelope; vectorised over ``s``."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("the envelope is defined for s >= 0 only")
    below = arr < env.s0
    out = env.theta * arr
    if np.any(below):
        out = np.where(below, env.base(np.where(below, arr, 0.0)), out)
    return float(out) if np.ndim(out) == 0 else out


def envelope_excess(env: Envelope, s):
    """``envelope(s) - theta s``; nonnegative and zero beyond ``s0``.

    Useful when comparing values where the common linear part would cancel.
    """
    arr = np.asarray(s, dtype=float)
    below = arr < env.s0
    out = np.zeros_like(arr)
    if np.any(below):
        sb = np.where(below, arr, 0.0)
        out = np.where(below, np.maximum(env.base(sb) - env.theta * sb, 0.0), 0.0)
    return float(out) if np.ndim(out) == 0 else out


class SubadditiveEnvelope(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`build_envelope`.

    ``fit`` computes ``s0_`` and ``theta_``; ``transform`` maps a column of
    adatom densities to envelope values.

    Parameters
    ----------
    density : EnergyDensity or str or dict
        Anything accepted by :func:`from_spec`.
    cap : float
        Search cap for the threshold.
    rtol : float
        Relative bisection tolerance.
    """

    def __init__(self, density="halfquad", cap: float = S0_CAP, rtol: float = S0_RTOL):
        self.density = density
        self.cap = cap
        self.rtol = rtol

    def fit(self, X=None, y=None):
        psi = self.density if isinstance(self.density, EnergyDensity) else from_spec(self.density)
        check_positive("cap", self.cap)
        check_positive("rtol", self.rtol)
        self.envelope_ = build_envelope(psi, self.cap, self.rtol)
        self.s0_ = self.envelope_.s0
        self.theta_ = self.envelope_.theta
        if X is not None:
            self.n_features_in_ = np.asarray(X).reshape(len(X), -1).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "envelope_")
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or not np.all(np.isfinite(arr)):
            raise DomainError("X must be a finite 2-d array of densities")
        return np.asarray(eval_envelope(self.envelope_, arr), dtype=float).reshape(arr.shape)
