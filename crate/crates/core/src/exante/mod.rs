//! Ex-ante assignment-rank distributions under i.i.d. uniform or correlated
//! preferences, and the exact TCDM-versus-DA comparisons built on them.

mod capacity;
mod distribution;
mod exact;
mod montecarlo;
mod props;

pub use capacity::{is_unconstrained, CapacityPrefix};
pub use distribution::{ratio_string, ExactRankDistribution, RankDistribution};
pub use exact::{exact_distribution, exact_distribution_at, profile_count, ExactOptions, DEFAULT_ENUMERATION_BUDGET};
pub use montecarlo::{draw_orders, monte_carlo_correlated, simulation_rng, CorrelatedUtilityConfig, MonteCarloResult};
pub use props::{
    check_prop4, check_prop5, corollary1_threshold, FirstChoiceDirection, Margin, PositionComparison, Prop4Report,
    Prop5Position, Prop5Report, Violation,
};
