"""Extreme (max-K-armed) bandits with second-order Pareto rewards."""

from ._core import (
    ConfigError,
    ExactPareto,
    TailSpec,
    EstimatorConfig,
    best_arm,
    censor,
    censored_mean,
    conditional_expected_max,
    config_hash,
    delta0_of,
    estimate_C,
    estimate_alpha_at,
    estimate_h,
    estimate_tail,
    expected_max_exact,
    frechet_error_bound,
    frechet_value,
    high_prob_bounds,
    index_B,
    lambda1,
    lambda2,
    loglog_fit,
    min_horizon_q1,
    moment_bound_v,
    oracle_expected_max,
    power_transform,
    preset_names,
    preset_text,
    regress_csv,
    required_pulls_N,
    resolve_config,
    run_batch,
    run_episode,
    run_experiment,
    select_r,
    threshold_lower_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
