"""Relaxed optimal k-thresholding (ROT/ROTP) and hard-thresholding baselines
for compressed sensing, with theory evaluators and a phase-transition harness."""

from .algorithms import (
    Algorithm,
    IterationTrace,
    RecoveryConfig,
    RecoveryResult,
    TerminationReason,
    check_success,
    recover,
    run_htp,
    run_iht,
    run_rot,
    run_rotp,
)
from .operators import hard_threshold, project_capped_simplex, support_of
from .qp import QpSolution, brute_force_ot, solve_relaxed_ot
from .estimators import (
    HardThresholdingPursuit,
    IterativeHardThresholding,
    RelaxedOptimalKThresholding,
    RelaxedOptimalKThresholdingPursuit,
)

__version__ = "0.1.0"
