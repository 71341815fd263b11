from .metrics import epidemic_params, campaign_summary, classify_criticality, Criticality
from .branching import ModelParams, project, predicted_reach, trajectory_mse
from .estimator import SearchConfig, fit, evaluate, sweep, trajectories_frame
from .temporal import (
    period_generation_matrix, cumulative_by_generation, first_occurrence, stabilization, campaign_cumulative,
)
from .simulator import SimParams, simulate, run_campaign, empirical_vs_expected, reconstruct_campaign

__all__ = [
    'epidemic_params',
    'campaign_summary',
    'classify_criticality',
    'Criticality',
    'ModelParams',
    'project',
    'predicted_reach',
    'trajectory_mse',
    'SearchConfig',
    'fit',
    'evaluate',
    'sweep',
    'trajectories_frame',
    'period_generation_matrix',
    'cumulative_by_generation',
    'first_occurrence',
    'stabilization',
    'campaign_cumulative',
    'SimParams',
    'simulate',
    'run_campaign',
    'empirical_vs_expected',
    'reconstruct_campaign',
]
