"""2D Euler on the disk and Boussinesq in the strip, with hyperbolic-point diagnostics."""

from .grids import FlowController, FlowKind, FlowState2D, PolarGrid, StripGrid, Velocity
from .hyperbolic import (
    FrontBackState,
    FrontUnderResolved,
    OmegaValue,
    SectorProbe,
    diagonal_ratio,
    direct_bs_quadrature,
    front_back_track,
    from_frame,
    gradient_max,
    holder_norm,
    in_half_disk,
    kato_ratio,
    ks_initial_vorticity,
    omega_functional,
    sample,
    slice_extrema,
    to_frame,
    velocity_at,
    velocity_decomposition_residual,
    velocity_gradient_max,
)
from .interp import interpolant_max_abs, interpolant_range, interpolate
from .poisson import (
    PoissonResidualError,
    boundary_normal_velocity,
    kinetic_energy,
    poisson_disk,
    poisson_strip,
    velocity_from_stream,
)
from .runs import KSTracking, boussinesq_initial_data, default_probes, norms, run_boussinesq, run_euler, strip_gradient
from .transport import (
    CFLViolation,
    boussinesq_strip_step,
    cfl_number,
    departure_points,
    euler_disk_step,
    refresh,
    semi_lagrangian_advect,
)
