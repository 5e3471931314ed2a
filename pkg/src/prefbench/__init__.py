"""Reward modeling from pairwise comparisons.

Comparison likelihood models, synthetic ground-truth rewards, ReLU-network
maximum-likelihood estimation, margin-condition diagnostics,
comparison-graph spectral analysis, and a benchmark harness that sweeps
network architectures and label-noise levels.
"""

from .comparison import (
    ComparisonModel,
    KappaConstants,
    ModelKind,
    OutcomeSpace,
    d2log_density_du2,
    dlog_density_du,
    kappa_constants,
    log_density,
    sample_outcome,
    tie_probability,
    win_probability,
)
from .data import (
    ComparisonDataset,
    ComparisonSample,
    corrupt_dataset,
    dataset_win_probabilities,
    generate_dataset,
    load_dataset_csv,
    save_dataset_csv,
)
from .errors import (
    ConfigurationError,
    DiagnosticError,
    DomainError,
    PrefbenchError,
    StateError,
    TrainingError,
)
from .graphs import GraphDesign, LaplacianSummary, build_laplacian, design_counts, lambda2
from .harness import ResultRow, SweepConfig, run_arch_sweep, run_noise_sweep
from .margin import (
    MarginCurve,
    MarginFit,
    MarginKind,
    fit_margin_exponent,
    margin_cdf,
    regret_vs_error_exponent,
    theoretical_rate,
    verify_gap_inequalities,
)
from .network import (
    MLPArchitecture,
    MLPParameters,
    forward,
    init_params,
    nll_and_gradient,
    param_count,
    param_count_bound,
    theorem_architecture,
)
from .rewards import (
    GroundTruthReward,
    PolicyDecision,
    RewardFamily,
    disagreement_rate,
    feature_map,
    greedy_policy,
    regret_mc,
    true_reward,
)
from .training import TrainingConfig, TrainingHistory, empirical_loglik, train_mle

__version__ = "0.1.0"
