"""Anti-plane Hencky plasticity: solver and characteristic-flow analyzer.

The package minimizes the relaxed plasticity functional on convex polygons by
Perzyna continuation, recovers the unique stress field, and checks the rigid
structure of the saturated zone (straight characteristics, fans, constant
zones) against closed-form solution families.
"""

from .analysis import (
    Characteristic,
    Fan,
    PlasticZone,
    ZoneDecomposition,
    check_fan_trace_agreement,
    check_lipschitz,
    check_non_intersection,
    check_ordering,
    check_sigma_constancy,
    check_u_constancy,
    classify,
    detect_fans,
    entropy_defect,
    extract_plastic_zone,
    seed_and_trace,
    trace,
)
from .domains import shear_trapezoid, square, unit_square, vortex_sector
from .energy import (
    PlasticIncrement,
    d_psi_star,
    prox_plastic,
    psi_star,
    stress_from_gradient,
    w_eps,
)
from .mesh import (
    BoundarySegment,
    Dirichlet,
    Domain,
    Mesh,
    Neumann,
    boundary_value,
    triangulate,
)
from .oracles import (
    Family453Oracle,
    FanOracle,
    HermiteTable,
    MonotoneTable,
    TrapezoidOracle,
    family453_eval,
    fan_eval,
    oracle_fields_on_mesh,
    ramp_z_profile,
    step_z_profile,
    trapezoid_eval,
)
from .solver import (
    NotConverged,
    SolveResult,
    SolverConfig,
    discrete_energy,
    divergence_residual,
    h1_seminorm_interior,
    interior_triangles,
    minimize,
)

__version__ = "0.1.0"
