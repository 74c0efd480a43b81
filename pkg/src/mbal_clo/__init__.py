"""Margin-based active learning for contextual linear optimization."""

from .datagen import (
    PRICING_BASE_COEFS,
    PRICING_CENTERS,
    PRICING_PRICE_COEFS,
    PRICING_PRICES,
    PricingScenario,
    Scenario,
    ShortestPathScenario,
    TrueModel,
    build_grid_polytope,
    build_pricing_polytope,
    conditional_mean,
    gen_pricing_sample,
    gen_pricing_scenario,
    gen_shortest_path_scenario,
    load_scenario,
    sample_degeneracy_profile_cost,
    sample_shortest_path,
    save_scenario,
    with_eps_bar,
)
from .hypothesis import LinearPredictor, TrainerConfig, fit_erm
from .losses import (
    MAE,
    SPO,
    SPOPLUS,
    SQUARED,
    LabeledSample,
    SurrogateKind,
    huber,
    parse_surrogate,
    regression_loss,
    reweighted_empirical_loss,
    spo_loss,
    spo_plus_loss,
    spo_plus_subgradient,
    surrogate_values,
    surrogate_values_and_grads,
)
from .mbal import (
    LearnerState,
    MbalConfig,
    StepRecord,
    TrialTrace,
    margin_step,
    nearest_rank_quantile,
    run_stream,
    run_supervised,
    threshold_at,
    warmup_init,
)
from .metrics import (
    PsiEstimate,
    RatioRow,
    bootstrap_mean_ci,
    estimate_near_degeneracy,
    excess_spo_risk,
    labeled_fraction,
    psi_from_costs,
    risk_at_budget,
    risk_ratio_table,
)
from .polytope import (
    NormKind,
    Polytope,
    distance_to_degeneracy,
    distance_to_degeneracy_many,
    lin_opt_gap,
    solve_lo,
    solve_lo_many,
)

__version__ = "0.1.0"
