import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adatom_relax import (
    DomainError,
    WriggleTuple,
    affine,
    build_envelope,
    build_sawtooth,
    half_quadratic,
    hausdorff_distance,
    quadratic,
    sqrt_shifted,
    subadditivity_gap,
    sweep,
    weakstar_distance,
    wriggle_inequality_gap,
)
from adatom_relax.lsc import gap_vectorized, sample_tuples

R3 = math.sqrt(3.0)
ENVELOPES = {
    "quadratic:1": build_envelope(quadratic(1.0)),
    "quadratic:0.2": build_envelope(quadratic(0.2)),
    "halfquad": build_envelope(half_quadratic()),
    "affine:1,2": build_envelope(affine(1.0, 2.0)),
    "sqrt": build_envelope(sqrt_shifted(1.0)),
}

tuples = st.builds(
    WriggleTuple,
    st.floats(0, 10),
    st.floats(0, 10),
    st.floats(0, 1),
    st.floats(1e-3, 1e3),
    st.floats(1e-3, 1e3),
)


def oracle_gap(psi, t):
    """Straight transcription of the sawtooth inequality."""
    A = math.sqrt(1 + t.alpha**2)
    B = math.sqrt(1 + t.beta**2)
    D = math.sqrt(1 + (t.lam * t.alpha - (1 - t.lam) * t.beta) ** 2)
    limit_density = (t.lam * t.a * A + (1 - t.lam) * t.b * B) / D
    return (psi(t.a) * t.lam * A + psi(t.b) * (1 - t.lam) * B) / D - psi(limit_density)


# --- gap ----------------------------------------------------------------------


def test_tuple_validation():
    with pytest.raises(DomainError):
        WriggleTuple(1, 1, 1.5, 1, 1)
    with pytest.raises(DomainError):
        WriggleTuple(-1, 1, 0.5, 1, 1)


def test_spec_example_gap_minus_three():
    t = WriggleTuple(R3, R3, 0.5, 2.0, 2.0)
    assert wriggle_inequality_gap(half_quadratic(), t) == pytest.approx(-3.0, rel=1e-12)
    assert subadditivity_gap(half_quadratic(), 2.0, 2.0) == pytest.approx(-3.0, rel=1e-12)


@given(st.floats(0, 1), st.floats(0, 100), st.floats(0, 100))
def test_flat_slopes_reduce_to_convexity(lam, a, b):
    psi = quadratic(0.7)
    gap = wriggle_inequality_gap(psi, WriggleTuple(0, 0, lam, a, b))
    expect = lam * psi(a) + (1 - lam) * psi(b) - psi(lam * a + (1 - lam) * b)
    assert gap == pytest.approx(expect, abs=1e-9 * (1 + psi(a) + psi(b)))
    assert gap >= -1e-9 * (1 + psi(a) + psi(b))


@given(st.floats(0, 10), st.floats(0, 50))
def test_affine_symmetric_tuple_is_zero(alpha, a):
    psi = affine(1.3, 0.0)
    gap = wriggle_inequality_gap(psi, WriggleTuple(alpha, alpha, 0.5, a, a))
    assert abs(gap) <= 1e-12 * (1 + a) * (1 + alpha)


@given(tuples)
def test_gap_matches_transcription(t):
    psi = quadratic(0.4)
    got = wriggle_inequality_gap(psi, t)
    ref = oracle_gap(psi, t)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-9 * (abs(ref) + psi(t.a) + psi(t.b)))


@given(st.sampled_from(sorted(ENVELOPES)), tuples)
def test_envelopes_never_violate(name, t):
    assert wriggle_inequality_gap(ENVELOPES[name], t) >= -1e-12


def test_subadditivity_gap_examples():
    assert subadditivity_gap(quadratic(1.0), 1.0, 1.0) == -1.0
    assert subadditivity_gap(half_quadratic(), 1.0, 1.0) == 0.0
    assert subadditivity_gap(quadratic(1.0), 3.0, 0.0) == 1.0


def test_vectorized_matches_scalar():
    arr = sample_tuples(50, seed=3)
    psi = quadratic(1.0)
    vec = gap_vectorized(psi, *arr.T)
    for row, g in zip(arr, vec):
        assert g == wriggle_inequality_gap(psi, WriggleTuple(*row))


# --- sweeps -------------------------------------------------------------------


def test_sample_ranges_and_determinism():
    a = sample_tuples(10_000, seed=7)
    assert np.array_equal(a, sample_tuples(10_000, seed=7))
    assert a[:, :2].min() >= 0 and a[:, :2].max() <= 10
    assert a[:, 2].min() >= 0 and a[:, 2].max() <= 1
    assert a[:, 3:].min() >= 1e-3 and a[:, 3:].max() <= 1e3


def test_superlinear_sweep_finds_violation():
    res = sweep(quadratic(1.0), n=20_000, seed=0)
    assert res.min_gap < -0.5
    assert wriggle_inequality_gap(quadratic(1.0), res.argmin) == pytest.approx(res.min_gap)


@pytest.mark.parametrize("name", sorted(ENVELOPES))
def test_envelope_sweep_nonnegative(name):
    assert sweep(ENVELOPES[name], n=100_000, seed=11).min_gap >= -1e-12


# --- sawtooth -----------------------------------------------------------------

WITNESS = WriggleTuple(R3, R3, 0.5, 1.0, 1.0)


def test_sawtooth_rejects_zero_teeth():
    with pytest.raises(DomainError):
        build_sawtooth(WITNESS, 0, quadratic(1.0))


@pytest.mark.parametrize("k", [1, 2, 7, 64, 512])
@pytest.mark.parametrize(
    "t",
    [WITNESS, WriggleTuple(0.7, 2.0, 0.3, 2.0, 0.5), WriggleTuple(3.0, 0.0, 1.0, 0.2, 4.0), WriggleTuple(0.0, 1.0, 0.0, 1.0, 3.0)],
)
def test_sawtooth_matches_closed_form(t, k):
    st_ = build_sawtooth(t, k, quadratic(1.0))
    assert abs(st_.energy - st_.closed_form_energy) <= 1e-9 * st_.closed_form_energy
    assert st_.couple.signed_area() > 0


def test_sawtooth_witness_values():
    st_ = build_sawtooth(WITNESS, 16, quadratic(1.0))
    assert st_.energy == pytest.approx(7.0, rel=1e-12)
    assert st_.limit_energy == pytest.approx(8.0, rel=1e-12)


def test_flat_teeth_equal_limit_geometry():
    t = WriggleTuple(0.0, 0.0, 0.4, 1.5, 1.5)
    for k in (1, 5, 20):
        st_ = build_sawtooth(t, k, half_quadratic())
        assert hausdorff_distance(st_.couple, st_.limit) <= 1e-12
        assert st_.energy == pytest.approx(st_.limit_energy, rel=1e-12)


def test_graph_distance_order_one_over_k():
    t = WriggleTuple(0.7, 2.0, 0.3, 2.0, 0.5)
    gaps = []
    for k in (4, 8, 16, 32, 64):
        st_ = build_sawtooth(t, k, quadratic(1.0))
        x, y = st_.couple.vertices.T
        top = y > 0.5 * st_.base_height
        line = st_.base_height + t.limit_slope * x[top]
        gaps.append(np.max(np.abs(y[top] - line)) * k)
    # tooth tips sit lam (alpha - slope) / k = lam (1 - lam)(alpha + beta) / k above the line
    assert np.ptp(gaps) <= 1e-9
    assert gaps[0] == pytest.approx(t.lam * (1 - t.lam) * (t.alpha + t.beta))


@pytest.mark.parametrize("t", [WITNESS, WriggleTuple(0.7, 2.0, 0.3, 2.0, 0.5)])
def test_weakstar_rate_one_over_k(t):
    ks = np.array([8, 16, 32, 64, 128])
    frame = (-0.5, -0.5, 1.5, 2.5)
    d = [weakstar_distance(build_sawtooth(t, int(k), quadratic(1.0)).couple,
                           build_sawtooth(t, int(k), quadratic(1.0)).limit, frame=frame) for k in ks]
    slope = np.polyfit(np.log(ks), np.log(d), 1)[0]
    assert -1.2 <= slope <= -0.8


def test_lsc_failure_margin_exceeds_quadrature_error():
    psi = quadratic(1.0)
    energies, errs = [], []
    for k in (64, 128, 256, 512):
        st_ = build_sawtooth(WITNESS, k, psi)
        energies.append(st_.energy)
        errs.append(abs(st_.energy - st_.closed_form_energy))
    margin = st_.limit_energy - energies[-1]
    assert margin > 10 * max(max(errs), 1e-15 * st_.limit_energy)
