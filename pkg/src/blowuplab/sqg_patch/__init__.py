"""Contour dynamics for modified-SQG patches in the half-plane, with barrier and kernel-bound checks."""

from .contour import PatchContour, PatchSystem, Spacing, contains, signed_area
from .evolve import (
    BarrierState,
    ContactDetected,
    barrier_containment,
    barrier_position,
    barrier_time,
    check_contact,
    evolve_patch,
    front,
    initial_patch,
    node_velocities,
)
from .lemmas import (
    BoundCheck,
    CoefficientMargin,
    KernelSplit,
    Region,
    bad_coefficient,
    bad_part_bound_check,
    coefficient_margin,
    combined_kernel,
    good_coefficient,
    good_part_bound_check,
    good_region,
    kernel_split,
    largest_passing_x1,
    rectangle,
    u1_over_region,
)
from .runs import PATCH_COLUMNS, PatchController, front_bound, run_patch
from .velocity import contour_velocity, direct_patch_quadrature
