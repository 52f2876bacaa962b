"""Relaxed adatom surface energies: envelopes, ball equilibria and recovery constructions."""

__version__ = "0.1.0"

from ._validation import (
    ConstructionError,
    DomainError,
    FrameError,
    FrequencyError,
    GeometryError,
    InvalidDensityError,
    RelaxationError,
    ResolutionError,
)
from .balls import (
    BallEquilibrium,
    BallProblem,
    BallSolution,
    HypothesisReport,
    PlateauDensity,
    ball_energy,
    ball_energy_derivative,
    build_plateau_density,
    check_hypotheses,
    check_plateau,
    closed_form_rstar,
    critical_residual,
    minimize_ball_energy,
    ubar,
    ubar_inverse,
)
from .density import (
    EnergyDensity,
    Envelope,
    SubadditiveEnvelope,
    affine,
    build_envelope,
    check_admissible,
    compute_s0,
    eval_envelope,
    from_spec,
    half_quadratic,
    quadratic,
    recession_slope,
    sqrt_shifted,
    tabulated,
)
from .geometry import (
    AtomMeasure,
    BumpDictionary,
    DiscreteCouple,
    EnergyReport,
    RasterDensity,
    WindowBoundaryWarning,
    boundary_mass,
    energy,
    facet_energy,
    hausdorff_distance,
    is_simple,
    mass,
    perimeter,
    polygon_loop,
    regular_polygon,
    set_distance,
    uniform_raster,
    weakstar_distance,
)
from .lsc import Sawtooth, WriggleTuple, build_sawtooth, subadditivity_gap, sweep, wriggle_inequality_gap
from .recovery import (
    DiracApproximation,
    MinCheckReport,
    RecoveryResult,
    dirac_approx,
    recover_ac,
    recover_general,
    relaxed_min_check,
)
from .variation import (
    FirstVariation,
    admissible_rate,
    discrete_curvature,
    first_variation,
    mass_preserving_path,
    turning_angles,
    vertex_normals,
)
from .wriggle import WrigglePlan, WriggleResult, solve_frequency, wriggle_arcs, wriggle_uniform, wriggle_weighted

__all__ = [name for name in dir() if not name.startswith("_")]
