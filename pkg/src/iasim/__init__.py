"""Closed-form interference alignment for three-cell MIMO broadcast
networks with mixed user classes: correlated channel synthesis, feasibility
and DoF analysis, beamformer construction, and Monte Carlo rate simulation.
"""

__version__ = "0.1.0"

from .numerics import (Tolerance, DEFAULT_TOL, complex_gaussian, null_space,
                       hermitian_sqrt, rank_of, log_det_hermitian,
                       NotHermitian, NotPsd, NotPd)
from .channel import (CorrelationSpec, CsiSpec, PERFECT_CSI,
                      CORRELATION_PRESETS, LinkChannel, ChannelSet,
                      correlation_matrix, error_variance, draw_link,
                      draw_channel_set, BadCoefficient)
from .network import (NetworkConfig, DerivedQuantities, FeasibilityReport,
                      circ, derive, check_feasibility, validate)
from .dof import (DofProblem, DofSolution, AntennaPlan, closed_form_bound,
                  closed_form_bound_value, closed_form_bound_terms, enumerate_outer,
                  outer_bound_problem, plan_antennas, planned_config,
                  dof_estimate, BoundTooSmall)
from .beamformer import (BeamformerSet, AlignmentReport, design_ici,
                         effective_channels, design_xci, design_combiner,
                         design_beamformers, compose_precoders,
                         verify_alignment, BeamformerError, RankDeficient,
                         InfeasibleAlignment, CombinerRankLoss)
from .simulator import (SimulationSpec, TrialResult, RateSummary, SweepPoint,
                        GridPoint, trial_rate, run, sweep, sweep_grid,
                        cdf_percentile)

__all__ = [
    "Tolerance", "DEFAULT_TOL", "complex_gaussian", "null_space",
    "hermitian_sqrt", "rank_of", "log_det_hermitian", "NotHermitian",
    "NotPsd", "NotPd",
    "CorrelationSpec", "CsiSpec", "PERFECT_CSI", "CORRELATION_PRESETS",
    "LinkChannel", "ChannelSet", "correlation_matrix", "error_variance",
    "draw_link", "draw_channel_set", "BadCoefficient",
    "NetworkConfig", "DerivedQuantities", "FeasibilityReport", "circ",
    "derive", "check_feasibility", "validate",
    "DofProblem", "DofSolution", "AntennaPlan", "closed_form_bound",
    "closed_form_bound_value", "closed_form_bound_terms", "enumerate_outer",
    "outer_bound_problem", "plan_antennas", "planned_config", "dof_estimate",
    "BoundTooSmall",
    "BeamformerSet", "AlignmentReport", "design_ici", "effective_channels",
    "design_xci", "design_combiner", "design_beamformers",
    "compose_precoders", "verify_alignment", "BeamformerError",
    "RankDeficient", "InfeasibleAlignment", "CombinerRankLoss",
    "SimulationSpec", "TrialResult", "RateSummary", "SweepPoint", "GridPoint",
    "trial_rate", "run", "sweep", "sweep_grid", "cdf_percentile",
]
