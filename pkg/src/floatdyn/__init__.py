"""Hydrostatics, stability and rigid-body dynamics of floating hulls.

From a watertight hull mesh and mass properties the package computes the
buoyancy force function and generalized forces, locates and classifies
floating equilibria (metacentric heights, restricted-problem stability),
integrates the full six-coordinate and the reduced three-coordinate
dynamics, and extracts small-oscillation normal modes.

Sign conventions: depth is positive downward, the free surface sits at
zero depth and the body frame has its origin at the mass center.
"""

from .clipping import (
    SubmergedSolid,
    WaterplaneProperties,
    clip_by_waterplane,
    volume_and_first_moments,
    waterplane_properties,
)
from .dynamics import (
    BodyProperties,
    FullState,
    KineticMetric,
    ReducedState,
    Trajectory,
    conserved_momenta,
    cyclic_rates,
    integrate_full,
    integrate_reduced,
    kinetic_metric,
    lagrangian,
    metric_partials,
    reduced_mass_matrix,
    routhian,
)
from .equilibrium import EquilibriumResult, canonicalize, find_equilibrium
from .errors import (
    AsymmetricBody,
    ClipDegenerate,
    ConfigError,
    Diverged,
    FloatDynError,
    GimbalLock,
    IndefiniteMass,
    InvalidMesh,
    NonSymmetricInput,
    NonWatertightMesh,
    NotAnEquilibrium,
    SelfIntersecting,
    SingularCyclicBlock,
    SingularJacobian,
    UnstableMode,
    WontFloat,
    ZeroVolume,
)
from .hydrostatics import (
    FluidEnvironment,
    HydrostaticState,
    StabilityReport,
    buoyant_force_torque,
    force_gradient,
    generalized_forces,
    hessian_at_equilibrium,
    hydrostatic_state,
    metacentric_heights,
    potential,
    pseudo_stability_check,
    surface_term,
)
from .kinematics import (
    CYCLIC,
    NONCYCLIC,
    Pose,
    R3Partials,
    k3_body,
    omega_map,
    partials_r3,
    rotation_matrix,
)
from .mesh import HullMesh, inertia_from_mesh, load_mesh, load_obj, load_stl, save_stl
from .oscillations import (
    LinearizedOscillation,
    ModalResult,
    linearized_prediction,
    normal_modes,
)
from .polygons import PolygonMoments, polygon_moments
from .report import AnalysisConfig, Report, run_analysis
from .verification import VerificationSummary, run_verification

__version__ = "0.1.0"
