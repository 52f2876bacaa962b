import math

import numpy as np
import pytest

from adatom_relax import (
    AtomMeasure,
    BallProblem,
    DomainError,
    ResolutionError,
    build_envelope,
    dirac_approx,
    energy,
    eval_envelope,
    half_quadratic,
    mass,
    minimize_ball_energy,
    perimeter,
    quadratic,
    recover_ac,
    recover_general,
    regular_polygon,
    relaxed_min_check,
    uniform_raster,
    weakstar_distance,
)

PSI = half_quadratic()
ENV = build_envelope(PSI)
S0 = ENV.s0
REL_TOL = 1e-3


def fbar(obj, rho=1.0):
    return energy(obj, PSI, rho, ENV).energy_Fbar


def liminf_holds(target, energies, tol=REL_TOL):
    """Relaxed energy of the limit never exceeds the tail of the sequence energies."""
    return target <= min(energies) + tol * abs(target)


# --- recover_ac ---------------------------------------------------------------


def test_subcritical_densities_untouched():
    c = regular_polygon(300, 1.0).with_density(np.linspace(0.0, S0, 300))
    out = recover_ac(c, ENV, 32).couple
    assert np.array_equal(out.vertices, c.vertices)
    assert np.array_equal(out.facet_density, c.facet_density)


def test_infinite_s0_returns_input():
    from adatom_relax import sqrt_shifted

    env = build_envelope(sqrt_shifted())
    c = regular_polygon(64, 1.0).with_density(np.full(64, 50.0))
    assert recover_ac(c, env, 16).couple is c


def test_double_critical_density_on_circle():
    n = 2000
    c = regular_polygon(n, 1.0).with_density(np.full(n, 2 * S0))
    target = fbar(c)
    assert target == pytest.approx(2 * math.pi * 4.0 * math.sin(math.pi / n) * n / math.pi, rel=1e-12)
    out = recover_ac(c, ENV, 64).couple
    assert np.allclose(out.facet_density, S0, rtol=1e-15)
    assert perimeter(out) == pytest.approx(2 * perimeter(c), rel=1e-3)
    F = energy(out, PSI).energy_F
    assert F == pytest.approx(2 * perimeter(out) / 2 * float(PSI(S0)), rel=1e-12)
    assert abs(F - target) <= 1e-2 * target
    assert mass(out, 1.0) == pytest.approx(mass(c, 1.0), rel=1e-3)


def test_liminf_along_ac_sequence():
    n = 1000
    c = regular_polygon(n, 1.0).with_density(np.full(n, 2 * S0))
    target = fbar(c)
    energies = [energy(recover_ac(c, ENV, k).couple, PSI).energy_F for k in (16, 32, 64)]
    assert liminf_holds(target, energies)


# Per-edge random densities; the phase of the sine in the two end collars makes
# single halvings noisy, so the rate is judged by a least-squares fit.
MIXED = [(64, 0), (64, 1), (96, 2), (128, 3), (48, 4)]


@pytest.mark.parametrize("n,seed", MIXED)
@pytest.mark.parametrize("compensate", [False, True])
def test_mixed_density_convergence_rate(n, seed, compensate):
    rng = np.random.default_rng(seed)
    c = regular_polygon(n, 1.0).with_density(rng.uniform(0.5, 3.5, n))
    target = fbar(c)
    ks = np.array([16, 32, 64, 128])
    errs = np.array([abs(energy(recover_ac(c, ENV, k, compensate=compensate).couple, PSI).energy_F - target) for k in ks])
    order = -np.polyfit(np.log(ks), np.log(errs), 1)[0]
    assert order >= 1.0
    assert errs[-1] < errs[0]


# --- dirac_approx -------------------------------------------------------------


def test_single_atom_one_ball():
    mu = AtomMeasure(None, np.array([[0.1, 0.2, 1.0]]))
    energies = []
    for k in (1, 2, 3, 6):
        d = dirac_approx(mu, k)
        assert len(d.masses) == 1
        assert d.couple.n_vertices == 64
        assert d.couple.boundary_mass() == pytest.approx(1.0, abs=1e-12)
        energies.append(fbar(AtomMeasure(d.couple), 0.0))
    # coarse balls carry a density below s0 and pay the perimeter; once above s0 only the linear tail remains
    assert energies[0] > ENV.theta + 0.1
    for e in energies[1:]:
        assert e == pytest.approx(ENV.theta, rel=1e-12)


def test_radius_formula_and_clamp():
    mu = AtomMeasure(None, np.array([[0.3, 0.3, 0.25]]))
    for k in (1, 2, 5):
        d = dirac_approx(mu, k)
        assert d.radius == pytest.approx(min(0.25 * 4.0**-k, 0.4 * 2.0**-k), rel=1e-15)


@pytest.fixture(scope="module")
def square_sweep():
    mu = AtomMeasure(None, np.zeros((0, 3)), uniform_raster((0, 0, 1, 1), 1.0))
    frame = (-0.25, -0.25, 1.25, 1.25)
    rows = []
    for k in range(2, 7):
        d = dirac_approx(mu, k)
        out = AtomMeasure(d.couple)
        rows.append((k, d, d.couple.boundary_mass(), fbar(out, 0.0), weakstar_distance(out, mu, frame=frame)))
    return rows


def test_uniform_square_mass_exact(square_sweep):
    for k, d, m, _, _ in square_sweep:
        assert abs(m - 1.0) <= 1e-12
        assert len(d.masses) == 4**k


def test_uniform_square_energy_tends_to_theta(square_sweep):
    # every ball density lies on the linear tail of the envelope, so the gap is rounding only
    gaps = [abs(f - ENV.theta) for _, _, _, f, _ in square_sweep]
    assert max(gaps) <= 1e-12
    assert all(b <= a + 1e-13 for a, b in zip(gaps, gaps[1:]))


def test_uniform_square_weakstar_decreasing(square_sweep):
    dist = [w for *_, w in square_sweep]
    assert all(b < a for a, b in zip(dist, dist[1:]))


def test_resolution_error_reports_usable_level():
    mu = AtomMeasure(None, np.array([[0.1, 0.2, 1.0]]))
    with pytest.raises(ResolutionError, match="largest usable k is"):
        dirac_approx(mu, 40)


def test_non_integer_level_rejected():
    with pytest.raises(DomainError):
        dirac_approx(AtomMeasure(None, np.array([[0, 0, 1.0]])), 2.5)


# --- recover_general ----------------------------------------------------------


@pytest.fixture(scope="module")
def circle_and_atom():
    c = regular_polygon(256, 1.0).with_density(np.ones(256))
    return AtomMeasure(c, np.array([[0.1, 0.2, 1.0]]))


def test_general_energy_gap_at_64(circle_and_atom):
    r = recover_general(circle_and_atom, ENV, 64)
    assert abs(r.energy_gap) < 1e-2 * r.target_Fbar


def test_general_mass_invariance(circle_and_atom):
    for k in (16, 32, 64):
        r = recover_general(circle_and_atom, ENV, k)
        assert r.mass == pytest.approx(r.target_mass, rel=1e-10)
        assert mass(r.couple, 1.0) == pytest.approx(mass(circle_and_atom, 1.0), rel=1e-10)


def test_general_liminf_and_convergence(circle_and_atom):
    runs = [recover_general(circle_and_atom, ENV, k) for k in (16, 32, 64)]
    target = runs[0].target_Fbar
    assert target == pytest.approx(fbar(circle_and_atom), rel=1e-14)
    assert liminf_holds(target, [r.energy_F for r in runs])
    gaps = [abs(r.energy_gap) for r in runs]
    assert gaps[-1] < gaps[0]
    d = [weakstar_distance(AtomMeasure(r.couple), circle_and_atom) for r in runs]
    assert d[-1] < d[0]


def test_general_absolutely_continuous_equals_recover_ac():
    c = regular_polygon(256, 1.0).with_density(np.full(256, 3.0))
    r = recover_general(AtomMeasure(c), ENV, 64)
    a = recover_ac(c, ENV, 64).couple.scaled(r.scale)
    assert r.dirac_level is None
    assert np.array_equal(r.couple.vertices, a.vertices)
    assert np.array_equal(r.couple.facet_density, a.facet_density)


def test_general_empty_measure():
    with pytest.raises(DomainError):
        recover_general(AtomMeasure(None, np.zeros((0, 3))), ENV, 8)


# --- relaxed_min_check --------------------------------------------------------


@pytest.mark.parametrize("gamma,m,rho", [(1.0, 1.0, 1.0), (0.3, 2.0, 0.5), (4.0, 0.5, 2.0)])
def test_relaxed_minimum_never_beaten(gamma, m, rho):
    rep = relaxed_min_check(BallProblem(2, rho, m), quadratic(gamma), samples=100, seed=7)
    assert rep.passed
    assert rep.min_Fbar >= rep.gamma_m - 1e-9


def test_minimizing_ball_is_equality_case():
    psi = quadratic(1.0)
    pb = BallProblem(2, 1.0, 1.0)
    sol = minimize_ball_energy(pb, psi)
    env = build_envelope(psi)
    assert sol.c < env.s0
    ball = regular_polygon(20_000, sol.R).with_density(np.full(20_000, sol.c))
    assert energy(ball, psi, 1.0, env).energy_Fbar == pytest.approx(sol.energy, rel=1e-6)
    rep = relaxed_min_check(pb, psi, samples=5)
    assert rep.ball_Fbar == pytest.approx(rep.gamma_m, rel=1e-12)


@pytest.mark.parametrize("gamma", [0.05, 0.5, 1.0, 5.0, 50.0])
@pytest.mark.parametrize("m", [0.2, 1.0, 5.0])
def test_ball_versus_atoms_criterion(gamma, m):
    rep = relaxed_min_check(BallProblem(2, 1.0, m), quadratic(gamma), samples=1)
    assert rep.ball_beats_atoms == rep.ball_inequality
    assert rep.gamma_m <= rep.dirac_Fbar + 1e-12


def test_min_check_planar_only():
    with pytest.raises(DomainError):
        relaxed_min_check(BallProblem(3, 1.0, 1.0), quadratic(1.0), samples=1)
