//! Secrecy sum rate (SSR) maximization for a single-antenna NOMA downlink
//! with a passive eavesdropper and per-user QoS targets.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: configuration, channel, allocation and rate report types.
//! - [`rates`]: legitimate/eavesdropper rates under SIC, the clamped SSR and
//!   its telescoped reformulation.
//! - [`channel`]: seeded Rayleigh-fading channel sampler.
//! - [`allocator`]: minimum feasible power and the closed-form SSR-optimal
//!   power allocation, plus an active-constraint certificate.
//! - [`oracle`]: brute-force simplex grid search and random feasible points.
//! - [`baseline`]: equal-slot TDMA benchmark.
//! - [`montecarlo`]: paired-sample sweeps over transmit power or QoS target.
//! - [`certify`]: the randomized self-check suite behind `noma-ssr verify`.
//!
//! All arithmetic is in linear units (watts, linear gains); rates are in
//! bits/s/Hz. [`units`] holds the dBm conversions used at the CLI boundary.

pub mod allocator;
pub mod baseline;
pub mod certify;
pub mod channel;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod par;
pub mod rates;
pub mod units;

pub use allocator::{
    min_power, optimal_allocation, verify_active_set, ActiveSetReport, FeasibilityResult,
};
pub use baseline::{oma_meets_qos, oma_ssr};
pub use channel::{locate_eve, sample_channel, ChannelSamplerSpec};
pub use error::{Error, Result};
pub use model::{ChannelRealization, PowerAllocation, RateReport, SystemConfig};
pub use montecarlo::{run_sweep, SweepPoint, SweepResult, SweepSpec, SweepVariable};
pub use oracle::{grid_search_ssr, sample_feasible, GridSearchResult};
pub use par::Execution;
pub use rates::{eve_rate, j_function, secrecy_sum_rate, secrecy_sum_rate_reduced, user_rate};
