import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ellipeinc

from adatom_relax import (
    DomainError,
    WindowBoundaryWarning,
    hausdorff_distance,
    perimeter,
    polygon_loop,
    regular_polygon,
    solve_frequency,
    wriggle_uniform,
    wriggle_weighted,
)
from adatom_relax.geometry import _segment_distances

UNIT = np.array([[0.0, 0.0], [1.0, 0.0]])
CIRCLE = regular_polygon(10_000, 1.0)
SQUARE = polygon_loop([[0, 0], [1, 0], [1, 1], [0, 1]])


def sine_length(t, k, half=0.5):
    """Length of x -> (x, sin(t x) / k) over |x| <= half, via the incomplete elliptic integral."""
    a = t / k
    m = a * a / (1 + a * a)
    return math.sqrt(1 + a * a) / t * (ellipeinc(t * half, m) - ellipeinc(-t * half, m))


def sampled_sine_length(t, k, n=200_001):
    x = np.linspace(-0.5, 0.5, n)
    return float(np.sum(np.hypot(np.diff(x), np.diff(np.sin(t * x) / k))))


# --- solve_frequency ----------------------------------------------------------


def test_frequency_identity():
    assert solve_frequency(UNIT, 1.0, 5) == 0.0


def test_frequency_straight_segment_elliptic_oracle():
    t = solve_frequency(UNIT, math.sqrt(2), 1)
    assert sine_length(t, 1) == pytest.approx(math.sqrt(2), rel=1e-9)
    assert sampled_sine_length(t, 1) == pytest.approx(math.sqrt(2), rel=1e-8)


@given(st.floats(1.05, 3.0), st.sampled_from([1, 2, 4, 8, 16]))
def test_frequency_reaches_target(r, k):
    t = solve_frequency(UNIT, r, k)
    assert sine_length(t, k) == pytest.approx(r, rel=1e-9)
    # first crossing: a slightly smaller frequency falls short
    assert sine_length(t * (1 - 1e-6), k) < r


def test_frequency_roughly_doubles_with_k():
    ts = [solve_frequency(UNIT, 1.5, k) for k in (2, 4, 8, 16)]
    ratios = np.array(ts[1:]) / np.array(ts[:-1])
    assert np.all((ratios > 1.6) & (ratios < 2.4))
    assert ratios[-1] == pytest.approx(2.0, rel=0.05)


def test_frequency_rejects_shrinking():
    with pytest.raises(DomainError):
        solve_frequency(UNIT, 0.9, 4)


# --- wriggle_uniform ----------------------------------------------------------


@pytest.fixture(scope="module")
def circle_r2_k64():
    return wriggle_uniform(CIRCLE, 2.0, 64)


def test_circle_perimeter_doubles(circle_r2_k64):
    assert perimeter(circle_r2_k64.couple) == pytest.approx(4 * math.pi, rel=5e-3)


def test_circle_stays_in_tube(circle_r2_k64):
    d = _segment_distances(circle_r2_k64.couple.vertices, CIRCLE)
    assert d.max() <= (1 / 64) * (1 + 1e-9)
    assert hausdorff_distance(circle_r2_k64.couple, CIRCLE) <= 1 / 64


def test_frequency_bound_holds(circle_r2_k64):
    for plan in circle_r2_k64.plans:
        assert plan.bound_holds
        assert plan.frequency <= plan.bound_constant * plan.k * (1 + 1e-9)
        assert plan.amplitude == pytest.approx(1 / 64)


def test_arc_endpoints_fixed(circle_r2_k64):
    # every source vertex that starts an arc survives unchanged in the output
    src = {tuple(p) for p in CIRCLE.vertices}
    kept = sum(tuple(p) in src for p in circle_r2_k64.couple.vertices)
    assert kept >= circle_r2_k64.arcs


def test_identity_when_r_is_one():
    out = wriggle_uniform(SQUARE, 1.0, 16).couple
    assert np.array_equal(out.vertices, SQUARE.vertices)


# |P(wriggle) - r P| <= C / sqrt(k); C fitted once on the circle class (max observed 0.012) and frozen.
C_CIRCLE = 0.02


@pytest.mark.parametrize("k", [8, 16, 32, 64, 128, 256])
def test_perimeter_overshoot_bound(k):
    c = regular_polygon(4000, 1.0)
    out = wriggle_uniform(c, 1.5, k).couple
    assert abs(perimeter(out) - 1.5 * perimeter(c)) <= C_CIRCLE / math.sqrt(k)


def test_uniform_window_factor():
    alpha = 0.5
    out = wriggle_uniform(SQUARE, 1 + alpha, 128).couple
    for w in [(0.2, -0.1, 0.7, 0.1), (0.9, 0.3, 1.1, 0.8)]:
        assert perimeter(out, window=w) == pytest.approx((1 + alpha) * perimeter(SQUARE, window=w), rel=1e-2)


@settings(max_examples=10)
@given(st.floats(1.0, 2.5), st.sampled_from([16, 32, 64]))
def test_tube_confinement_property(r, k):
    c = regular_polygon(200, 1.0)
    out = wriggle_uniform(c, r, k)
    d = _segment_distances(out.couple.vertices, c)
    assert d.max() <= (1 / out.k_used) * (1 + 1e-9)


# --- wriggle_weighted ---------------------------------------------------------


def test_weighted_zero_is_identity():
    out = wriggle_weighted(SQUARE, np.zeros(4), 32).couple
    assert perimeter(out) == pytest.approx(4.0, abs=1e-12)
    assert hausdorff_distance(out, SQUARE) < 1e-12


def test_weighted_rejects_negative():
    with pytest.raises(DomainError):
        wriggle_weighted(SQUARE, [-0.1, 0, 0, 0], 8)


def test_weighted_top_half():
    sq = polygon_loop([[0, 0], [1, 0], [1, 0.5], [1, 1], [0, 1], [0, 0.5]])
    f = np.array([0, 0, 0.5, 0.5, 0.5, 0])
    out = wriggle_weighted(sq, f, 128).couple
    top, bottom = (-0.2, 0.6, 1.2, 1.2), (-0.2, -0.2, 1.2, 0.4)
    assert perimeter(out, window=top) == pytest.approx(1.5 * perimeter(sq, window=top), rel=1e-2)
    assert perimeter(out, window=bottom) == pytest.approx(perimeter(sq, window=bottom), rel=1e-2)


def test_weighted_smooth_f_matches_quadrature():
    n = 2000
    c = regular_polygon(n, 1.0)
    mid = 0.5 * (c.vertices + np.roll(c.vertices, -1, axis=0))
    f = 0.5 + 0.4 * np.sin(np.arctan2(mid[:, 1], mid[:, 0]))
    out = wriggle_weighted(c, f, 128).couple
    lengths = c.edge_lengths()
    windows = [(0.31, -0.52, 1.5, 0.47), (-0.47, 0.33, 0.52, 1.5), (-1.5, -0.41, -0.23, 0.37), (-0.43, -1.5, 0.39, -0.29)]
    with warnings.catch_warnings():
        warnings.simplefilter("error", WindowBoundaryWarning)
        for w in windows:
            inside = (mid[:, 0] > w[0]) & (mid[:, 0] < w[2]) & (mid[:, 1] > w[1]) & (mid[:, 1] < w[3])
            oracle = np.sum(lengths[inside] * (1 + f[inside]))
            assert perimeter(out, window=w) == pytest.approx(oracle, rel=2e-2)


def test_thread_count_does_not_change_output(monkeypatch):
    c = regular_polygon(500, 1.0)
    f = np.linspace(0, 1, 500)
    monkeypatch.setenv("RELAX_THREADS", "1")
    a = wriggle_weighted(c, f, 32).couple
    monkeypatch.setenv("RELAX_THREADS", "4")
    b = wriggle_weighted(c, f, 32).couple
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.facet_density, b.facet_density)


def test_bad_thread_env(monkeypatch):
    monkeypatch.setenv("RELAX_THREADS", "many")
    with pytest.raises(DomainError):
        wriggle_uniform(regular_polygon(64, 1.0), 1.5, 8)
