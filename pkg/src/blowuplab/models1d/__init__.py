"""The CLM, De Gregorio, Hou-Luo and CKY one-dimensional models."""

from .lemmas import KernelReport, hl_kernel_K, hl_kernel_property_check, hl_positivity_integral
from .rhs import (
    CKYModel,
    CLMModel,
    DeGregorioModel,
    HLModel,
    SupportHitBoundary,
    cky_initial_data,
    cky_rhs,
    cky_velocity,
    clm_blowup_time,
    clm_exact,
    clm_rhs,
    degregorio_rhs,
    hl_initial_data,
    hl_rhs,
    make_model,
)
from .state import IntervalField, IntervalGrid, Model1DState, ModelKind, StepController, make_periodic_state
from .stepping import BlowupSuspected, RunResult, integrate, step_rk4
from .tracking import (
    CharacteristicExited,
    CharacteristicTracker,
    TrackerCheck,
    make_tracker,
    omega_integrals,
    track_characteristics,
    tracker_inequalities,
    tracker_levels,
)
from .runs import RunReport, run_cky, run_periodic, spectral_tail
