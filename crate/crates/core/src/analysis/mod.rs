//! Rate fitting and numerical verifiers for the analytic bounds.

mod bounds;
mod check;
mod lemmas;
mod rate;
mod report;
mod special;

pub use bounds::{
    avg_upper_bound, check_avg_upper_bound, lower_bound_probe, GrowthProbe, SlowSequence, Verdict,
    UNBOUNDED_GROWTH,
};
pub use check::BoundCheck;
pub use lemmas::{
    f_lambda_extended_verify, f_lambda_verify, gamma_series, gamma_series_verify, holder_verify,
    moment_bound_verify, neutral_recursion_verify, FLambdaReport, GammaSeriesReport, MomentChain,
};
pub use rate::{fit_decay_rate, RateEstimate};
pub use report::{check_nonincreasing, sgd_rate_report, SgdRateReport};
pub use special::{gamma_function, ln_gamma};
