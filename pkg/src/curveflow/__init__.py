"""Gradient flows of closed planar curves in intrinsic coordinates."""

from .grid import ParamGrid
from .geometry import (
    ClosureProjectionError,
    ClosureResidual,
    CurveEmbedding,
    IntrinsicState,
    closure_project,
    closure_residual,
    make_named_curve,
    reconstruct_embedding,
    total_length,
)
from .calculus import (
    HelmholtzOperator,
    grad_s,
    helmholtz_min_eig,
    helmholtz_solve,
    hs_norm,
    incompressibility_apply,
    incompressibility_spectrum,
    integrate_dsigma,
    inner_dsigma,
    laplace_s,
)
from .kinematics import (
    ExtrinsicVelocity,
    IntrinsicVelocity,
    apply_M,
    gauge_scaled_arclength,
    material_derivative,
    pip_residual,
    rigid_kernel_adjoint,
)
from .energies import (
    DoubleWell,
    EnergyModel,
    NodalModel,
    PhaseSepParams,
    TransitionSet,
    default_nodal_model,
    el_residual,
    gamma_limit_energy,
    heteroclinic_profile,
    phase_sep_energy,
    phase_sep_variations,
    recovery_sequence,
    surface_tension_constants,
    willmore_family_velocity,
)
from .flows import (
    BaseVelocity,
    FlowIntegrationError,
    FlowRun,
    FlowState,
    StepController,
    excess_density,
    gradient_base,
    manifold_distance,
    residual_velocity,
    rhs_incompressible,
    rhs_penalized,
    rhs_phase_sep,
    run_flow,
    step_adaptive,
    well_prepared_rho_m,
    willmore_paper_base,
)

__version__ = "0.1.0"
