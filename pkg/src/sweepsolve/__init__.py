"""Sweeping-process solver with certified inexact projections.

The library implements the catching-up time discretization of
x'(t) in -N(C(t); x(t)) + F(t, x(t)) where each step projects the drifted
state onto the moving set through any provider that can certify an eps-eta
approximate projection, plus a dual projected-gradient engine for polyhedra
under a quadratic metric and a front end that reformulates linear
complementarity systems (ideal-diode circuits) as perturbed sweeping
processes.
"""

__version__ = "0.1.0"

from .sets import (
    Ball,
    Box,
    CustomSet,
    Halfspace,
    MetricPolyhedronRef,
    NonnegativeOrthant,
    ProjectionCertificate,
    SlackPolicy,
    TranslatingSet,
    distance_bounds,
    distance_exact,
    eps_eta_project,
    project_exact,
)
from .dualqp import (
    DualProblem,
    MetricPolyhedron,
    StoppingRule,
    assemble_dual,
    certify_projection,
    dual_objective,
    max_eigenvalue,
    primal_recover,
    projected_gradient_solve,
)
from .integrator import (
    PartialTrajectory,
    Perturbation,
    Schedule,
    Trajectory,
    catching_up_run,
    constant_perturbation,
    drift_integral,
    grid_delta_theta,
    interpolate,
    interpolant_derivative,
    make_schedule,
    zero_perturbation,
)
from .lcs import (
    LCSystem,
    SweepingReformulation,
    complementarity_residual,
    lcs_to_sweeping,
    matrix_sqrt_pd,
    recover_original,
    solve_metric_P,
)
from .diagnostics import (
    BoundReport,
    SchemeConstants,
    StudyTable,
    SweepingProblem,
    convergence_study,
    feasibility_profile,
    rate_envelope,
    theorem_constants,
    verify_bounds,
)
from .circuits import build_circuit
from .config import (
    BuiltProblem,
    ProblemConfig,
    build_problem,
    load_problem,
    parse_problem,
)
